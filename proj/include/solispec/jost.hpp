#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "solispec/errors.hpp"
#include "solispec/grid.hpp"
#include "solispec/linearized_operator.hpp"
#include "solispec/ode.hpp"

namespace solispec {

enum class ModeKind { decaying, growing, cos, sin, constant, linear };
enum class Channel { first, second };
enum class End { plus, minus };

inline std::string_view to_string(ModeKind k) {
    switch (k) {
        case ModeKind::decaying: return "decaying";
        case ModeKind::growing: return "growing";
        case ModeKind::cos: return "cos";
        case ModeKind::sin: return "sin";
        case ModeKind::constant: return "const";
        case ModeKind::linear: return "linear";
    }
    return "unknown";
}

inline std::string_view to_string(Channel c) { return c == Channel::first ? "first" : "second"; }

/// (f, g, f', g') at one point.
using State4 = std::array<double, 4>;

/// One solution of the free system (H0 - lambda) w = 0.
/// `rate` is the exponential rate for decaying/growing and the frequency for
/// cos/sin (0 for const/linear). Decaying and growing refer to the end at
/// which the mode is evaluated: at -infinity "decaying" is e^{+rate x}.
struct AsymptoticMode {
    ModeKind kind = ModeKind::decaying;
    Channel channel = Channel::first;
    double rate = 0.0;
    double lambda = 0.0;

    [[nodiscard]] State4 state(double x, End end = End::plus) const {
        double v = 0.0, d = 0.0;
        const double sgn = end == End::plus ? 1.0 : -1.0;
        switch (kind) {
            case ModeKind::decaying:
                v = std::exp(-sgn * rate * x);
                d = -sgn * rate * v;
                break;
            case ModeKind::growing:
                v = std::exp(sgn * rate * x);
                d = sgn * rate * v;
                break;
            case ModeKind::cos:
                v = std::cos(rate * x);
                d = -rate * std::sin(rate * x);
                break;
            case ModeKind::sin:
                v = std::sin(rate * x);
                d = rate * std::cos(rate * x);
                break;
            case ModeKind::constant:
                v = 1.0;
                break;
            case ModeKind::linear:
                v = x;
                d = 1.0;
                break;
        }
        if (channel == Channel::first) return {v, 0.0, d, 0.0};
        return {0.0, v, 0.0, d};
    }
};

/// Rates, frequency and channel layout of the free system at one lambda.
struct ModeParams {
    double kappa = 0.0;  ///< sqrt(mu + |lambda|)
    double omega = 0.0;  ///< sqrt(|lambda| - mu), 0 at threshold
    Channel exponential = Channel::first;
    bool threshold = false;
};

inline ModeParams mode_params(double lambda, double mu) {
    if (!(mu > 0.0)) throw DomainError("mode parameters: mu must be positive");
    const double al = std::abs(lambda);
    const double slack = 1e-12 * mu;
    if (!(al >= mu - slack)) throw DomainError("asymptotic modes: |lambda| < mu lies in the spectral gap");
    ModeParams m;
    m.kappa = std::sqrt(mu + al);
    m.threshold = std::abs(al - mu) <= slack;
    m.omega = m.threshold ? 0.0 : std::sqrt(al - mu);
    m.exponential = lambda > 0.0 ? Channel::first : Channel::second;
    return m;
}

/// The four modes ordered (decaying, growing, cos|const, sin|linear).
inline std::array<AsymptoticMode, 4> asymptotic_modes(double lambda, double mu) {
    const ModeParams m = mode_params(lambda, mu);
    const Channel osc = m.exponential == Channel::first ? Channel::second : Channel::first;
    return {AsymptoticMode{ModeKind::decaying, m.exponential, m.kappa, lambda},
            AsymptoticMode{ModeKind::growing, m.exponential, m.kappa, lambda},
            AsymptoticMode{m.threshold ? ModeKind::constant : ModeKind::cos, osc, m.omega, lambda},
            AsymptoticMode{m.threshold ? ModeKind::linear : ModeKind::sin, osc, m.omega, lambda}};
}

/// W(y1, y2) = f1 f2' + g1 g2' - f1' f2 - g1' g2, constant in x for any two
/// solutions of (H - lambda) w = 0 written as f'' = M f with M symmetric.
inline double wronskian(const State4& a, const State4& b) {
    return a[0] * b[2] + a[1] * b[3] - a[2] * b[0] - a[3] * b[1];
}

/// x -> -x applied to a state: (f, g, -f', -g').
inline State4 mirror_state(const State4& s) { return {s[0], s[1], -s[2], -s[3]}; }

/// Coefficients of the +infinity decaying solution w against the solutions
/// psi_j(x) = phi_j(-x) that carry the asymptotics at -infinity, obtained by
/// Wronskian pairing at x = 0 (the potential is even).
///
/// m_* are the pairings normalized by |w(0)| |psi_j(0)| in the scaled state
/// (f, g, f'/kappa, g'/kappa); they all vanish exactly when w also decays at
/// -infinity. c_grow is measured against the pure growing mode at -infinity.
/// The oscillatory companions were kept orthogonal to w while integrating,
/// so they carry a multiple of w and m_cos, m_sin pick up a multiple of
/// m_grow: they are not the oscillatory coefficients at -infinity themselves
/// (those sit e^{-2 kappa R} below the growing part and cannot be resolved).
struct OriginMatch {
    double c_grow = 0.0;
    double m_grow = 0.0;  ///< signed
    double m_cos = 0.0;
    double m_sin = 0.0;
    double mismatch = 0.0;  ///< |(m_grow, m_cos, m_sin)|
};

struct JostOptions {
    double asym_threshold = 1e-14;  ///< V counts as negligible below this
    double rtol = 1e-12;
    double max_step = 0.05;
    bool continue_left = true;  ///< also integrate from 0 to -R
};

/// The solution of (H - lambda) w = 0 that behaves like e^{-kappa x} times the
/// exponential channel's unit vector as x -> +infinity, with leading
/// coefficient exactly 1.
///
/// Samples on [0, x_start] are integrated, those beyond x_start are the pure
/// mode. Samples on x < 0 are filled only when continued (else NaN).
struct JostSolution {
    double lambda = 0.0;
    double mu = 1.0;
    UniformGrid grid;
    std::vector<double> f, g, fp, gp;
    AsymptoticMode declared;
    double x_asym = 0.0;   ///< V negligible for x >= x_asym
    double x_start = 0.0;  ///< backward integration starts here
    bool has_left = false;
    std::string normalization = "leading coefficient 1 of exp(-kappa x) at +infinity";

    /// Oscillatory companions at x = 0 (orthogonalized against w) and their
    /// Wronskian drift between x_start and 0, an integration-quality gate.
    std::array<State4, 2> companions{};
    double companion_wronskian_drift = 0.0;
    OriginMatch origin;

    [[nodiscard]] State4 state(std::size_t i) const { return {f[i], g[i], fp[i], gp[i]}; }
};

namespace detail {

inline double find_x_asym(const PotentialMatrix& p, double threshold) {
    const std::size_t c = p.grid.center();
    for (std::size_t i = p.grid.size(); i-- > c;) {
        if (p.magnitude(i) > threshold) {
            if (i + 1 >= p.grid.size()) return std::numeric_limits<double>::infinity();
            return p.grid.x(i + 1);
        }
    }
    return 0.0;
}

struct JostRhs {
    const PotentialMatrix* p;
    double lambda;

    template <std::size_t N>
    ode::State<N> operator()(double x, const ode::State<N>& y) const {
        const auto v = p->at(x);
        const double mu = p->mu;
        ode::State<N> d{};
        for (std::size_t k = 0; k < N; k += 4) {
            d[k] = y[k + 2];
            d[k + 1] = y[k + 3];
            d[k + 2] = (mu + lambda - v.a) * y[k] - v.b * y[k + 1];
            d[k + 3] = -v.b * y[k] + (mu - lambda - v.a) * y[k + 1];
        }
        return d;
    }
};

inline double dot4(const double* a, const double* b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

inline OriginMatch match_at_origin(const State4& w, const std::array<State4, 2>& comp, double kappa) {
    auto hat_norm = [kappa](const State4& s) {
        return std::sqrt(s[0] * s[0] + s[1] * s[1] + (s[2] * s[2] + s[3] * s[3]) / (kappa * kappa));
    };
    const State4 psi1 = mirror_state(w);
    const State4 psi3 = mirror_state(comp[0]);
    State4 psi4 = mirror_state(comp[1]);
    for (double& v : psi4) v = -v;
    const double nw = hat_norm(w);
    OriginMatch m;
    m.c_grow = wronskian(w, psi1) / (2.0 * kappa);
    m.m_grow = wronskian(w, psi1) / (kappa * nw * hat_norm(psi1));
    m.m_cos = wronskian(w, psi4) / (kappa * nw * hat_norm(psi4));
    m.m_sin = wronskian(w, psi3) / (kappa * nw * hat_norm(psi3));
    m.mismatch = std::sqrt(m.m_grow * m.m_grow + m.m_cos * m.m_cos + m.m_sin * m.m_sin);
    return m;
}

}  // namespace detail

/// Backward construction of the +infinity decaying solution for |lambda| >= mu.
/// Positive lambda decays in the first channel, negative lambda in the second.
inline JostSolution decaying_solution(const PotentialMatrix& p, double lambda, JostOptions opts = {}) {
    const ModeParams mp = mode_params(lambda, p.mu);
    const auto modes = asymptotic_modes(lambda, p.mu);
    const UniformGrid& grid = p.grid;
    const std::size_t n = grid.size();
    const std::size_t c = grid.center();
    const double h = grid.h();

    JostSolution sol;
    sol.lambda = lambda;
    sol.mu = p.mu;
    sol.grid = grid;
    sol.declared = modes[0];
    sol.x_asym = detail::find_x_asym(p, opts.asym_threshold);
    const auto i_start = c + static_cast<std::size_t>(std::floor(p.trusted_half_width() / h + 1e-9));
    sol.x_start = grid.x(i_start);
    if (!(sol.x_asym < sol.x_start)) {
        throw DomainError("decaying_solution: x_asym lies beyond the trust region (enlarge R or lower the threshold)");
    }
    const double kappa = mp.kappa;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    sol.f.assign(n, nan);
    sol.g.assign(n, nan);
    sol.fp.assign(n, nan);
    sol.gp.assign(n, nan);
    const std::size_t ie = mp.exponential == Channel::first ? 0 : 1;
    const std::size_t io = 1 - ie;
    for (std::size_t i = i_start + 1; i < n; ++i) {
        const auto s = modes[0].state(grid.x(i));
        sol.f[i] = s[0];
        sol.g[i] = s[1];
        sol.fp[i] = s[2];
        sol.gp[i] = s[3];
    }

    // Initial data at x_start: the mode scaled to 1 there, plus the first
    // correction from V ~ e^{-r x}. The scale e^{-kappa x_start} is restored
    // on the stored samples, so the orthogonalization below never sees
    // subnormal numbers.
    const double xs = sol.x_start;
    const auto v0 = p.at(xs);
    double r = 2.0 * std::sqrt(p.mu);
    {
        const auto v1 = p.at(xs - 1.0);
        if (v0.a != 0.0 && v1.a != 0.0 && v0.a * v1.a > 0.0) {
            const double est = std::log(v1.a / v0.a);
            if (est > 0.0) r = est;
        }
    }
    const double rk = r + kappa;
    const double ce = -v0.a / (rk * rk - kappa * kappa);
    const double co = -v0.b / (rk * rk + mp.omega * mp.omega);
    ode::State<12> y{};
    y[ie] = 1.0 + ce;
    y[2 + ie] = -kappa - rk * ce;
    y[io] = co;
    y[2 + io] = -rk * co;
    const auto s3 = modes[2].state(xs);
    const auto s4 = modes[3].state(xs);
    for (std::size_t k = 0; k < 4; ++k) {
        y[4 + k] = s3[k];
        y[8 + k] = s4[k];
    }
    const double w34_start = wronskian(s3, s4);

    const double scale = std::exp(-kappa * xs);
    auto store = [&](std::size_t i, const double* s) {
        sol.f[i] = s[0] * scale;
        sol.g[i] = s[1] * scale;
        sol.fp[i] = s[2] * scale;
        sol.gp[i] = s[3] * scale;
    };
    store(i_start, y.data());

    ode::Options o;
    o.rtol = opts.rtol;
    o.max_step = opts.max_step;
    o.initial_step = std::min(h, 1e-3);
    o.error_block = 4;
    const detail::JostRhs rhs{&p, lambda};

    std::vector<double> nodes;
    nodes.reserve(i_start - c);
    for (std::size_t i = i_start; i-- > c;) nodes.push_back(grid.x(i));
    ode::State<12> at_origin{};
    ode::integrate_through<12>(
        rhs, xs, y, nodes,
        [&](std::size_t k, double, ode::State<12>& st) {
            const std::size_t i = i_start - 1 - k;
            store(i, st.data());
            const double ww = detail::dot4(st.data(), st.data());
            for (std::size_t off : {std::size_t{4}, std::size_t{8}}) {
                const double alpha = detail::dot4(st.data() + off, st.data()) / ww;
                for (std::size_t q = 0; q < 4; ++q) st[off + q] -= alpha * st[q];
            }
            if (i == c) at_origin = st;
            return true;
        },
        o);
    if (i_start == c) at_origin = y;

    const State4 wc{at_origin[0], at_origin[1], at_origin[2], at_origin[3]};
    sol.companions = {State4{at_origin[4], at_origin[5], at_origin[6], at_origin[7]},
                      State4{at_origin[8], at_origin[9], at_origin[10], at_origin[11]}};
    const double w34_origin = wronskian(sol.companions[0], sol.companions[1]);
    sol.companion_wronskian_drift = std::abs(w34_origin - w34_start) / std::abs(w34_start);
    sol.origin = detail::match_at_origin(wc, sol.companions, kappa);
    sol.origin.c_grow *= scale * scale;

    if (opts.continue_left && c > 0) {
        ode::State<4> yl{wc[0], wc[1], wc[2], wc[3]};
        std::vector<double> left;
        left.reserve(c);
        for (std::size_t i = c; i-- > 0;) left.push_back(grid.x(i));
        ode::Options ol = o;
        ol.error_block = 0;
        ode::integrate_through<4>(
            rhs, 0.0, yl, left,
            [&](std::size_t k, double, ode::State<4>& st) {
                store(c - 1 - k, st.data());
                return false;
            },
            ol);
        sol.has_left = true;
    }
    (void)io;
    return sol;
}

/// Reflection through S(f, g) = (g, f): a solution at lambda becomes one at
/// -lambda with the channels exchanged.
inline JostSolution reflect(const JostSolution& s) {
    JostSolution r = s;
    r.lambda = -s.lambda;
    std::swap(r.f, r.g);
    std::swap(r.fp, r.gp);
    r.declared.lambda = -s.declared.lambda;
    r.declared.channel = s.declared.channel == Channel::first ? Channel::second : Channel::first;
    for (auto& cst : r.companions) {
        std::swap(cst[0], cst[1]);
        std::swap(cst[2], cst[3]);
    }
    return r;
}

/// Fit window [lo, hi] on one side of the origin.
struct Window {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] double length() const { return hi - lo; }
};

/// Default window at the given end: 3 oscillation periods or 10/kappa,
/// whichever is larger, but never longer than the V-negligible span allows
/// after a 20% enlargement (which the stability check performs).
inline Window default_window(const JostSolution& s, End end) {
    const ModeParams mp = mode_params(s.lambda, s.mu);
    double len = 10.0 / mp.kappa;
    if (!mp.threshold) len = std::max(len, 3.0 * 2.0 * std::acos(-1.0) / mp.omega);
    const double edge = end == End::plus ? s.x_start : s.grid.R();
    const double span = edge - s.x_asym;
    if (!(span > 0.0)) throw DomainError("default_window: no V-negligible span at this end");
    len = std::min(len, span / 1.2);
    if (end == End::plus) return {edge - len, edge};
    return {-edge, -edge + len};
}

/// 20% longer window anchored at the same far edge.
inline Window enlarged(const Window& w, End end, double factor = 1.2) {
    const double len = w.length() * factor;
    if (end == End::plus) return {w.hi - len, w.hi};
    return {w.lo, w.lo + len};
}

struct ModeExpansion {
    std::array<double, 4> coeffs{};  ///< (c_dec, c_grow, c_cos|c_const, c_sin|c_linear)
    double residual = 0.0;           ///< relative rms misfit of the weighted rows
    double condition = 0.0;          ///< of the column-scaled design matrix
};

/// Least-squares expansion of sampled states against the four pure modes at
/// one end. Each sample row is weighted by the inverse magnitude of the data
/// there, derivative rows by 1/kappa, and the columns are scaled to unit norm
/// before an SVD solve.
inline ModeExpansion expand_in_modes(std::span<const double> xs, std::span<const State4> states, double lambda,
                                     double mu, End end, double max_condition = 1e10) {
    const std::size_t m = xs.size();
    if (m < 2 || states.size() != m) throw DomainError("expand_in_modes: need >= 2 matching samples");
    const ModeParams mp = mode_params(lambda, mu);
    const auto modes = asymptotic_modes(lambda, mu);
    Eigen::MatrixXd A(4 * m, 4);
    Eigen::VectorXd d(4 * m);
    const double ik = 1.0 / mp.kappa;
    for (std::size_t i = 0; i < m; ++i) {
        const State4& s = states[i];
        double wmag = std::max({std::abs(s[0]), std::abs(s[1]), std::abs(s[2]) * ik, std::abs(s[3]) * ik});
        if (!std::isfinite(wmag)) throw DomainError("expand_in_modes: non-finite sample");
        const double w = wmag > 0.0 ? 1.0 / wmag : 1.0;
        const double rw[4] = {w, w, w * ik, w * ik};
        for (std::size_t j = 0; j < 4; ++j) {
            const auto ms = modes[j].state(xs[i], end);
            for (std::size_t q = 0; q < 4; ++q) A(4 * i + q, j) = ms[q] * rw[q];
        }
        for (std::size_t q = 0; q < 4; ++q) d(4 * i + q) = s[q] * rw[q];
    }
    Eigen::Vector4d colscale;
    for (int j = 0; j < 4; ++j) {
        const double nrm = A.col(j).norm();
        if (!(nrm > 0.0) || !std::isfinite(nrm)) throw ConditioningError("expand_in_modes: degenerate mode column");
        colscale(j) = 1.0 / nrm;
        A.col(j) *= colscale(j);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    ModeExpansion out;
    out.condition = sv(3) > 0.0 ? sv(0) / sv(3) : std::numeric_limits<double>::infinity();
    if (!(out.condition <= max_condition)) {
        throw ConditioningError("expand_in_modes: fit ill-conditioned (condition " + std::to_string(out.condition) +
                                "); lengthen the window");
    }
    const Eigen::Vector4d c = svd.solve(d);
    const double dn = d.norm();
    out.residual = dn > 0.0 ? (A * c - d).norm() / dn : 0.0;
    for (int j = 0; j < 4; ++j) out.coeffs[static_cast<std::size_t>(j)] = c(j) * colscale(j);
    return out;
}

/// Expansion of a sampled solution over a window, using at most
/// `max_samples` evenly strided nodes.
inline ModeExpansion expand_in_modes(const JostSolution& s, End end, Window w, std::size_t max_samples = 800) {
    if (end == End::minus && !s.has_left) throw DomainError("expand_in_modes: solution was not continued to x < 0");
    const double h = s.grid.h();
    const auto lo = s.grid.nearest(w.lo), hi = s.grid.nearest(w.hi);
    if (hi <= lo) throw DomainError("expand_in_modes: empty window");
    if (w.lo < -s.grid.R() - 0.5 * h || w.hi > s.grid.R() + 0.5 * h)
        throw DomainError("expand_in_modes: window outside the grid");
    const std::size_t count = hi - lo + 1;
    const std::size_t stride = std::max<std::size_t>(1, (count + max_samples - 1) / max_samples);
    std::vector<double> xs;
    std::vector<State4> st;
    for (std::size_t i = lo; i <= hi; i += stride) {
        xs.push_back(s.grid.x(i));
        st.push_back(s.state(i));
    }
    return expand_in_modes(xs, st, s.lambda, s.mu, end);
}

/// Sup over the sampled nodes of the ODE residual of the 4-system written
/// for (f, g): |(f')_num - f'| and |(f'')_num - rhs| relative to the local
/// size of the state, using seven-point differences of the stored samples.
inline double jost_ode_residual(const PotentialMatrix& p, const JostSolution& s, double x_lo, double x_hi) {
    const double h = s.grid.h();
    const double kappa = mode_params(s.lambda, s.mu).kappa;
    double worst = 0.0;
    const auto lo = std::max<std::size_t>(3, s.grid.nearest(x_lo));
    const auto hi = std::min(s.grid.size() - 4, s.grid.nearest(x_hi));
    for (std::size_t i = lo; i <= hi; ++i) {
        if (std::isnan(s.f[i - 3]) || std::isnan(s.f[i + 3])) continue;
        const double fpp = stencil::first_derivative7(s.fp, h, i);
        const double gpp = stencil::first_derivative7(s.gp, h, i);
        const double a = p.a[i], b = p.b[i];
        const double rf = fpp - ((p.mu + s.lambda - a) * s.f[i] - b * s.g[i]);
        const double rg = gpp - (-b * s.f[i] + (p.mu - s.lambda - a) * s.g[i]);
        const double size = std::max({std::abs(s.f[i]), std::abs(s.g[i]), std::abs(s.fp[i]) / kappa,
                                      std::abs(s.gp[i]) / kappa}) *
                            kappa * kappa;
        if (size > 0.0) worst = std::max(worst, std::max(std::abs(rf), std::abs(rg)) / size);
    }
    return worst;
}

}  // namespace solispec
