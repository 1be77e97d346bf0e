#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "solispec/errors.hpp"
#include "solispec/ground_state.hpp"
#include "solispec/grid.hpp"
#include "solispec/nonlinearity.hpp"

namespace solispec {

/// Entries of the potential V = [[a, b], [-b, -a]] at one point.
struct PotentialValue {
    double a = 0.0;
    double b = 0.0;
};

/// Sampled potential of the linearized operator together with a continuous
/// evaluator (used by the ODE integrators between nodes).
///
/// For a ground state: a = F(Q^2) + F'(Q^2) Q^2, b = F'(Q^2) Q^2. Then
///   a - b = F(Q^2)              enters L-,
///   a + b = F(Q^2) + 2F'(Q^2)Q^2 enters L+.
/// Synthetic potentials (zero, decoupled wells) reuse the same type.
struct PotentialMatrix {
    UniformGrid grid;
    double mu = 1.0;
    std::vector<double> a;
    std::vector<double> b;
    std::function<PotentialValue(double)> at;
    std::string label;
    /// |x| beyond which the samples are extrapolated rather than computed
    /// (the ground state's trust edge); 0 means the whole grid is trusted.
    double trust_edge = 0.0;

    [[nodiscard]] double trusted_half_width() const {
        return trust_edge > 0.0 ? std::min(trust_edge, grid.R()) : grid.R();
    }

    static PotentialMatrix from_function(UniformGrid grid, double mu, std::function<PotentialValue(double)> fn,
                                         std::string label) {
        PotentialMatrix p;
        p.grid = grid;
        p.mu = mu;
        p.a.resize(grid.size());
        p.b.resize(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto v = fn(grid.x(i));
            p.a[i] = v.a;
            p.b[i] = v.b;
        }
        p.at = std::move(fn);
        p.label = std::move(label);
        return p;
    }

    /// The same potential resampled onto another grid through the evaluator.
    [[nodiscard]] PotentialMatrix resampled(UniformGrid other) const {
        auto p = from_function(other, mu, at, label);
        p.trust_edge = trust_edge;
        return p;
    }

    /// max(|a|, |b|) at node i.
    [[nodiscard]] double magnitude(std::size_t i) const { return std::max(std::abs(a[i]), std::abs(b[i])); }
};

/// Pointwise potential of the linearization around a ground state.
inline PotentialMatrix potential_V(const GroundState& gs, const Nonlinearity& nl) {
    auto state = std::make_shared<const std::pair<GroundState, Nonlinearity>>(gs, nl);
    auto fn = [state](double x) {
        const double q = state->first.evaluate(x).first;
        const double s = q * q;
        const auto v = state->second.eval(s);
        const double b = v.dF * s;
        return PotentialValue{v.F + b, b};
    };
    PotentialMatrix p;
    p.grid = gs.grid;
    p.mu = gs.mu;
    p.a.resize(gs.grid.size());
    p.b.resize(gs.grid.size());
    for (std::size_t i = 0; i < gs.grid.size(); ++i) {
        const double s = gs.Q[i] * gs.Q[i];
        const auto v = nl.eval(s);
        p.b[i] = v.dF * s;
        p.a[i] = v.F + p.b[i];
    }
    p.at = std::move(fn);
    p.label = "ground_state";
    p.trust_edge = gs.trust_edge;
    return p;
}

/// V = 0: the free operator H0.
inline PotentialMatrix zero_potential(UniformGrid grid, double mu) {
    return PotentialMatrix::from_function(grid, mu, [](double) { return PotentialValue{}; }, "zero");
}

/// diag(W, -W) with W = depth * sech^2(x): the decoupled operator
/// H0 + diag(W, -W), which has embedded eigenvalues for deep enough wells.
inline PotentialMatrix decoupled_well(UniformGrid grid, double mu, double depth) {
    return PotentialMatrix::from_function(
        grid, mu,
        [depth](double x) {
            const double c = 1.0 / std::cosh(x);
            return PotentialValue{depth * c * c, 0.0};
        },
        "decoupled_well");
}

/// A pair (f, g) of grid functions sharing one grid.
struct GridField2 {
    std::vector<double> f;
    std::vector<double> g;

    [[nodiscard]] std::size_t size() const { return f.size(); }

    [[nodiscard]] double norm() const {
        double s = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * f[i] + g[i] * g[i];
        return std::sqrt(s);
    }

    /// S(f, g) = (g, f).
    [[nodiscard]] GridField2 swapped() const { return {g, f}; }
};

enum class DifferenceOrder { second, fourth };

namespace detail {

inline void check_size(const PotentialMatrix& p, std::size_t n) {
    if (n != p.grid.size()) throw GridMismatch("operator: field size does not match the potential grid");
}

inline std::vector<double> laplacian(std::span<const double> f, double h, DifferenceOrder order) {
    std::vector<double> out(f.size());
    if (order == DifferenceOrder::second) stencil::second_derivative(f, h, out);
    else stencil::second_derivative4(f, h, out);
    return out;
}

}  // namespace detail

/// H w = (f'' - mu f + a f + b g,  -g'' + mu g - b f - a g) with Dirichlet
/// walls at +-R. The second row is evaluated as the negated first row with
/// the roles of f and g exchanged, so S H S = -H holds bit-for-bit.
inline GridField2 apply_H(const PotentialMatrix& p, const GridField2& w,
                          DifferenceOrder order = DifferenceOrder::second) {
    detail::check_size(p, w.f.size());
    detail::check_size(p, w.g.size());
    const std::size_t n = w.size();
    const auto d2f = detail::laplacian(w.f, p.grid.h(), order);
    const auto d2g = detail::laplacian(w.g, p.grid.h(), order);
    GridField2 out{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        out.f[i] = d2f[i] - p.mu * w.f[i] + p.a[i] * w.f[i] + p.b[i] * w.g[i];
        out.g[i] = -(d2g[i] - p.mu * w.g[i] + p.a[i] * w.g[i] + p.b[i] * w.f[i]);
    }
    return out;
}

enum class LSign { plus, minus };

/// L- f = -f'' + mu f - F(Q^2) f,  L+ f = L- f - 2F'(Q^2) Q^2 f.
inline std::vector<double> apply_L(LSign sign, const PotentialMatrix& p, std::span<const double> f,
                                   DifferenceOrder order = DifferenceOrder::second) {
    detail::check_size(p, f.size());
    const auto d2 = detail::laplacian(f, p.grid.h(), order);
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double coeff = sign == LSign::minus ? p.a[i] - p.b[i] : p.a[i] + p.b[i];
        out[i] = -d2[i] + p.mu * f[i] - coeff * f[i];
    }
    return out;
}

enum class Parity { even, odd, mixed };

inline std::string_view to_string(Parity p) {
    switch (p) {
        case Parity::even: return "even";
        case Parity::odd: return "odd";
        case Parity::mixed: return "mixed";
    }
    return "mixed";
}

struct Eigenpair {
    std::complex<double> lambda;
    GridField2 vector;   ///< real part of the eigenvector (imaginary part in `vector_imag`)
    GridField2 vector_imag;
    double residual = 0.0;  ///< ||(H - lambda) w|| / ||w|| for the discrete matrix
    Parity parity = Parity::mixed;
    bool zero_cluster = false;  ///< member of the near-zero cluster of the generalized kernel
};

struct SpectrumOptions {
    std::size_t points = 801;   ///< grid points per component for the discretization
    double half_width = 0.0;     ///< 0 selects 20/sqrt(mu)
    double window_epsilon = 1e-3;  ///< reports eigenvalues with |Re lambda| < mu (1 - epsilon)
    double imag_tolerance = 1e-7;
    double zero_radius = 0.0;    ///< 0 selects 4 h sqrt(mu) of the spectral grid
    double wall_mass_limit = 0.01;
    std::size_t max_dense_points = 4000;
};

struct DiscreteSpectrum {
    UniformGrid grid;
    std::vector<Eigenpair> pairs;
    std::size_t discarded_wall_modes = 0;
};

namespace detail {

/// General real eigenproblem through LAPACK dgeev (right eigenvectors).
inline std::pair<Eigen::VectorXcd, Eigen::MatrixXcd> dense_eigen(const Eigen::MatrixXd& M) {
    const lapack_int n = static_cast<lapack_int>(M.rows());
    Eigen::MatrixXd A = M;
    Eigen::VectorXd wr(n), wi(n);
    Eigen::MatrixXd vr(n, n);
    const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'V', n, A.data(), n, wr.data(), wi.data(), nullptr,
                                          1, vr.data(), n);
    if (info != 0) throw Error("discrete_eigenvalues: dgeev failed with info " + std::to_string(info));
    Eigen::VectorXcd values(n);
    Eigen::MatrixXcd vectors(n, n);
    for (lapack_int k = 0; k < n; ++k) {
        values[k] = {wr[k], wi[k]};
        if (wi[k] == 0.0) {
            vectors.col(k) = vr.col(k).cast<std::complex<double>>();
        } else if (k + 1 < n) {
            for (lapack_int i = 0; i < n; ++i) {
                vectors(i, k) = {vr(i, k), vr(i, k + 1)};
                vectors(i, k + 1) = {vr(i, k), -vr(i, k + 1)};
            }
            values[k + 1] = {wr[k + 1], wi[k + 1]};
            ++k;
        }
    }
    return {values, vectors};
}

}  // namespace detail

/// Dense discretization of H on the given potential grid.
inline Eigen::MatrixXd assemble_H(const PotentialMatrix& p) {
    const std::size_t n = p.grid.size();
    const double inv = 1.0 / (p.grid.h() * p.grid.h());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * n), static_cast<Eigen::Index>(2 * n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const auto s = static_cast<Eigen::Index>(n + i);
        M(r, r) = -2.0 * inv - p.mu + p.a[i];
        M(s, s) = 2.0 * inv + p.mu - p.a[i];
        M(r, s) = p.b[i];
        M(s, r) = -p.b[i];
        if (i > 0) {
            M(r, r - 1) = inv;
            M(s, s - 1) = -inv;
        }
        if (i + 1 < n) {
            M(r, r + 1) = inv;
            M(s, s + 1) = -inv;
        }
    }
    return M;
}

/// Eigenvalues of the discretized H in the spectral gap (-mu, mu).
///
/// The potential is resampled onto a grid of `points` nodes (odd, at most
/// `max_dense_points`) and the 2n x 2n matrix is diagonalized densely.
/// Eigenpairs carrying more than `wall_mass_limit` of their mass within two
/// cells of the walls are Dirichlet box artefacts and are discarded. Near
/// lambda = 0 the generalized kernel splits into a small cluster whose
/// members may be slightly complex; they are reported with `zero_cluster`.
inline DiscreteSpectrum discrete_eigenvalues(const PotentialMatrix& potential, SpectrumOptions opts = {}) {
    const double mu = potential.mu;
    if (opts.points % 2 == 0) ++opts.points;
    if (opts.points > opts.max_dense_points) {
        throw ConfigError("discrete_eigenvalues: " + std::to_string(opts.points) +
                          " points exceeds the dense limit; lower spectrum.points");
    }
    const double half = opts.half_width > 0.0 ? opts.half_width : std::min(20.0 / std::sqrt(mu), potential.grid.R());
    const UniformGrid grid = UniformGrid::with_points(half, opts.points);
    const PotentialMatrix p = potential.resampled(grid);
    const double zero_radius = opts.zero_radius > 0.0 ? opts.zero_radius : 4.0 * grid.h() * std::sqrt(mu);

    const Eigen::MatrixXd M = assemble_H(p);
    const auto [values, vectors] = detail::dense_eigen(M);
    const std::size_t n = grid.size();

    DiscreteSpectrum out;
    out.grid = grid;
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        const std::complex<double> lam = values[k];
        const bool near_zero = std::abs(lam) < zero_radius;
        const bool real = std::abs(lam.imag()) <= opts.imag_tolerance * std::max(1.0, std::abs(lam));
        if (!near_zero && !(real && std::abs(lam.real()) < mu * (1.0 - opts.window_epsilon))) continue;

        const Eigen::VectorXcd v = vectors.col(k);
        double total = 0.0, wall = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double m = std::norm(v[static_cast<Eigen::Index>(i)]) + std::norm(v[static_cast<Eigen::Index>(n + i)]);
            total += m;
            if (i < 2 || i + 2 >= n) wall += m;
        }
        if (wall > opts.wall_mass_limit * total) {
            ++out.discarded_wall_modes;
            continue;
        }
        Eigenpair ep;
        ep.lambda = lam;
        ep.zero_cluster = near_zero;
        ep.residual = (M * v - lam * v).norm() / v.norm();
        ep.vector.f.resize(n);
        ep.vector.g.resize(n);
        ep.vector_imag.f.resize(n);
        ep.vector_imag.g.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            ep.vector.f[i] = v[static_cast<Eigen::Index>(i)].real();
            ep.vector.g[i] = v[static_cast<Eigen::Index>(n + i)].real();
            ep.vector_imag.f[i] = v[static_cast<Eigen::Index>(i)].imag();
            ep.vector_imag.g[i] = v[static_cast<Eigen::Index>(n + i)].imag();
        }
        double sym = 0.0, anti = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = grid.mirror(i);
            const auto fi = v[static_cast<Eigen::Index>(i)], fj = v[static_cast<Eigen::Index>(j)];
            const auto gi = v[static_cast<Eigen::Index>(n + i)], gj = v[static_cast<Eigen::Index>(n + j)];
            sym += std::norm(fi - fj) + std::norm(gi - gj);
            anti += std::norm(fi + fj) + std::norm(gi + gj);
        }
        if (sym < 1e-6 * total) ep.parity = Parity::even;
        else if (anti < 1e-6 * total) ep.parity = Parity::odd;
        out.pairs.push_back(std::move(ep));
    }
    std::sort(out.pairs.begin(), out.pairs.end(), [](const Eigenpair& x, const Eigenpair& y) {
        if (x.lambda.real() != y.lambda.real()) return x.lambda.real() < y.lambda.real();
        return x.lambda.imag() < y.lambda.imag();
    });
    return out;
}

}  // namespace solispec
