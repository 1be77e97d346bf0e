#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "solispec/errors.hpp"
#include "solispec/grid.hpp"
#include "solispec/nonlinearity.hpp"
#include "solispec/ode.hpp"

namespace solispec {

/// Amplitude and rate of a one-signed exponential tail  y ~ amplitude * exp(-rate x).
struct FarFieldFit {
    double c0 = 0.0;
    double rate = 0.0;
    double fit_residual = 0.0;  ///< rms residual of log|y| against the line
    bool warning = false;       ///< residual above threshold: window too close to the origin
};

/// Least-squares fit of log|y| on the samples. All samples must share one
/// strict sign; the returned amplitude carries that sign.
inline FarFieldFit far_field_fit(std::span<const double> xs, std::span<const double> ys,
                                 double warn_threshold = 1e-6) {
    if (xs.size() != ys.size() || xs.size() < 2) throw DomainError("far_field_fit: need >= 2 samples");
    const double sign = ys.front() < 0.0 ? -1.0 : 1.0;
    std::vector<double> logs(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (!(sign * ys[i] > 0.0)) throw DomainError("far_field_fit: samples vanish or change sign in window");
        logs[i] = std::log(sign * ys[i]);
    }
    const LineFit line = fit_line(xs, logs);
    FarFieldFit fit;
    fit.c0 = sign * std::exp(line.intercept);
    fit.rate = -line.slope;
    fit.fit_residual = line.rms_residual;
    fit.warning = line.rms_residual > warn_threshold;
    return fit;
}

struct GroundStateOptions {
    double R = 0.0;              ///< half-width; 0 selects 30/sqrt(mu)
    double h = 0.0;              ///< spacing; 0 selects 1e-3/sqrt(mu)
    double tol = 1e-10;          ///< bound on the ODE residual of the result
    double trust_epsilon = 1e-12;
    double integrator_rtol = 1e-13;
};

/// Even, positive, decreasing solution of Q'' - mu Q + F(Q^2) Q = 0 sampled
/// on a symmetric uniform grid, with its far-field exponential law.
struct GroundState {
    UniformGrid grid;
    double mu = 1.0;
    std::vector<double> Q;
    std::vector<double> Qp;
    std::vector<double> Qpp;  ///< from the ODE: mu Q - F(Q^2) Q
    double shoot_value = 0.0;  ///< Q(0)
    double c0 = 0.0;
    double rate = 0.0;
    double tail_fit_residual = 0.0;
    double trust_edge = 0.0;  ///< beyond this |x| the samples are the fitted exponential
    double ode_residual = 0.0;

    /// Assembles a ground state from samples on a grid: fills Q'' from the
    /// equation, fits the far field and replaces the untrusted tail.
    static GroundState from_samples(UniformGrid grid, double mu, std::vector<double> q, std::vector<double> qp,
                                    const Nonlinearity& nl, double trust_epsilon = 1e-12);

    /// Q and Q' at arbitrary x, by quintic Hermite interpolation through
    /// (Q, Q', Q'') at the nodes and the fitted exponential beyond the grid.
    [[nodiscard]] std::pair<double, double> evaluate(double x) const {
        const double ax = std::abs(x);
        const double sgn = x < 0.0 ? -1.0 : 1.0;
        if (ax >= grid.R()) {
            const double q = c0 * std::exp(-rate * ax);
            return {q, -sgn * rate * q};
        }
        const double hh = grid.h();
        const double pos = (ax + grid.R()) / hh;
        std::size_t i = static_cast<std::size_t>(pos);
        i = std::min(i, grid.size() - 2);
        const double t = pos - static_cast<double>(i);
        const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
        const double H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5, H1 = t - 6 * t3 + 8 * t4 - 3 * t5,
                     H2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5), H3 = 10 * t3 - 15 * t4 + 6 * t5,
                     H4 = -4 * t3 + 7 * t4 - 3 * t5, H5 = 0.5 * (t3 - 2 * t4 + t5);
        const double D0 = -30 * t2 + 60 * t3 - 30 * t4, D1 = 1 - 18 * t2 + 32 * t3 - 15 * t4,
                     D2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4), D3 = 30 * t2 - 60 * t3 + 30 * t4,
                     D4 = -12 * t2 + 28 * t3 - 15 * t4, D5 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4);
        const double y0 = Q[i], y1 = Q[i + 1], d0 = Qp[i], d1 = Qp[i + 1], s0 = Qpp[i], s1 = Qpp[i + 1];
        const double q = y0 * H0 + hh * d0 * H1 + hh * hh * s0 * H2 + y1 * H3 + hh * d1 * H4 + hh * hh * s1 * H5;
        const double dq = (y0 * D0 + y1 * D3) / hh + d0 * D1 + d1 * D4 + hh * (s0 * D2 + s1 * D5);
        return {q, sgn * dq};
    }

    /// Indices of the nodes with x >= 0.
    [[nodiscard]] std::size_t center() const { return grid.center(); }
};

/// Far-field fit of Q (or of Q' when `derivative` is set) on [x_lo, x_hi].
inline FarFieldFit far_field_fit(const GroundState& gs, double x_lo, double x_hi, bool derivative = false) {
    if (!(x_hi > x_lo)) throw DomainError("far_field_fit: empty window");
    const std::size_t i0 = gs.grid.nearest(x_lo), i1 = gs.grid.nearest(x_hi);
    std::vector<double> xs, ys;
    for (std::size_t i = i0; i <= i1; ++i) {
        xs.push_back(gs.grid.x(i));
        ys.push_back(derivative ? gs.Qp[i] : gs.Q[i]);
    }
    return far_field_fit(xs, ys);
}

/// max over the grid of |Q'^2 - mu Q^2 + G(Q^2)|; zero for the exact profile
/// because the conserved quantity vanishes at infinity.
inline double first_integral_residual(const GroundState& gs, const Nonlinearity& nl) {
    double worst = 0.0;
    for (std::size_t i = 0; i < gs.Q.size(); ++i) {
        const double s = gs.Q[i] * gs.Q[i];
        worst = std::max(worst, std::abs(gs.Qp[i] * gs.Qp[i] - gs.mu * s + nl.eval(s).G));
    }
    return worst;
}

enum class ResidualStencil {
    derivative_of_Qp,  ///< sixth-order first derivative of the sampled Q'
    second_difference  ///< second-order three-point second difference of Q
};

/// Sup-norm of Q'' - mu Q + F(Q^2) Q over interior nodes, with Q'' measured
/// by the chosen finite-difference stencil.
inline double ode_residual(const GroundState& gs, const Nonlinearity& nl,
                           ResidualStencil stencil = ResidualStencil::derivative_of_Qp) {
    const std::size_t n = gs.Q.size();
    const double hh = gs.grid.h();
    double worst = 0.0;
    for (std::size_t i = 3; i + 3 < n; ++i) {
        const double q = gs.Q[i];
        const double qpp = stencil == ResidualStencil::derivative_of_Qp
                               ? stencil::first_derivative7(gs.Qp, hh, i)
                               : (gs.Q[i - 1] - 2.0 * q + gs.Q[i + 1]) / (hh * hh);
        worst = std::max(worst, std::abs(qpp - gs.mu * q + nl.F(q * q) * q));
    }
    return worst;
}

inline GroundState GroundState::from_samples(UniformGrid grid, double mu, std::vector<double> q,
                                             std::vector<double> qp, const Nonlinearity& nl,
                                             double trust_epsilon) {
    if (q.size() != grid.size() || qp.size() != grid.size()) throw GridMismatch("GroundState: sample count");
    GroundState gs;
    gs.grid = grid;
    gs.mu = mu;
    gs.Q = std::move(q);
    gs.Qp = std::move(qp);
    gs.shoot_value = gs.Q[grid.center()];

    const std::size_t n = grid.size(), mid = grid.center();
    std::size_t edge = n - 1;
    for (std::size_t i = mid; i < n; ++i) {
        if (gs.Q[i] < trust_epsilon) {
            edge = i;
            break;
        }
    }
    const double x_edge = grid.x(edge);
    const double width = std::min(5.0 / std::sqrt(mu), 0.5 * x_edge);
    std::vector<double> xs, ys;
    for (std::size_t i = grid.nearest(x_edge - width); i <= edge; ++i) {
        xs.push_back(grid.x(i));
        ys.push_back(gs.Q[i]);
    }
    const FarFieldFit fit = far_field_fit(xs, ys);
    gs.c0 = fit.c0;
    gs.rate = fit.rate;
    gs.tail_fit_residual = fit.fit_residual;
    gs.trust_edge = x_edge;
    for (std::size_t i = edge + 1; i < n; ++i) {
        const double v = gs.c0 * std::exp(-gs.rate * grid.x(i));
        gs.Q[i] = v;
        gs.Qp[i] = -gs.rate * v;
        gs.Q[grid.mirror(i)] = v;
        gs.Qp[grid.mirror(i)] = gs.rate * v;
    }
    gs.Qpp.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = gs.Q[i] * gs.Q[i];
        gs.Qpp[i] = mu * gs.Q[i] - nl.F(s) * gs.Q[i];
    }
    gs.ode_residual = solispec::ode_residual(gs, nl);
    return gs;
}

namespace detail {

enum class ShotOutcome { overshoot, undershoot, undecided };

inline ShotOutcome shoot(const Nonlinearity& nl, double mu, double q0, double x_max, double rtol) {
    auto rhs = [&](double, const ode::State<2>& y) {
        return ode::State<2>{y[1], mu * y[0] - nl.F(y[0] * y[0]) * y[0]};
    };
    ShotOutcome outcome = ShotOutcome::undecided;
    ode::Options opts;
    opts.rtol = rtol;
    opts.max_step = 0.05 / std::sqrt(mu);
    opts.initial_step = 1e-4 / std::sqrt(mu);
    ode::integrate_until<2>(
        rhs, 0.0, ode::State<2>{q0, 0.0}, x_max,
        [&](double, const ode::State<2>& y) {
            if (y[0] < 0.0) {
                outcome = ShotOutcome::overshoot;
                return true;
            }
            if (y[1] > 0.0) {
                outcome = ShotOutcome::undershoot;
                return true;
            }
            return false;
        },
        opts);
    return outcome;
}

}  // namespace detail

/// Shooting solver for the ground state.
///
/// Q(0) is bisected between shots that cross zero (too large) and shots
/// that turn back up while still positive (too small). The profile is then
/// integrated from x = 0 with the second-order equation until Q has fallen
/// to half its central value, and continued with the first-order reduction
///     (log Q)' = -sqrt(mu - G(Q^2) / Q^2)
/// that follows from the vanishing first integral. The reduced equation is
/// integrated in log Q, which keeps relative accuracy all the way into the
/// tail instead of diverging like the shooting trajectory does.
inline GroundState solve_ground_state(const Nonlinearity& nl, double mu, GroundStateOptions opts = {}) {
    if (!(mu > 0.0)) throw DomainError("solve_ground_state: mu must be positive");
    const double sq = std::sqrt(mu);
    const double R = opts.R > 0.0 ? opts.R : 30.0 / sq;
    const double h = opts.h > 0.0 ? opts.h : 1e-3 / sq;
    const UniformGrid grid(R, h);
    const double x_shoot = std::max(R, 40.0 / sq);
    // Margin below the table end so that trial stages of a shot stay in range.
    const double q_cap = 0.9 * std::sqrt(std::min(nl.max_argument(), 1e12));

    auto classify = [&](double q) {
        try {
            return detail::shoot(nl, mu, q, x_shoot, opts.integrator_rtol);
        } catch (const DomainError&) {
            return detail::ShotOutcome::overshoot;  // left the tabulated range: too large
        }
    };

    double lo = 1e-3 * std::sqrt(mu);
    if (classify(lo) != detail::ShotOutcome::undershoot) {
        throw HypothesisViolation("ground state: small shooting values do not undershoot");
    }
    double hi = lo;
    bool bracketed = false;
    while (hi < q_cap) {
        const double next = std::min(hi * 1.25, q_cap);
        const auto out = classify(next);
        if (out == detail::ShotOutcome::overshoot) {
            hi = next;
            bracketed = true;
            break;
        }
        lo = next;
        hi = next;
        if (next == q_cap) break;
    }
    if (!bracketed) {
        throw HypothesisViolation("ground state: no overshooting value of Q(0) found up to " +
                                  std::to_string(q_cap) + "; no ground state detected for this F and mu");
    }
    for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto out = classify(mid);
        if (out == detail::ShotOutcome::overshoot) hi = mid;
        else if (out == detail::ShotOutcome::undershoot) lo = mid;
        else {
            lo = hi = mid;
            break;
        }
    }
    const double q0 = 0.5 * (lo + hi);

    const std::size_t n = grid.size(), mid = grid.center();
    std::vector<double> Q(n, 0.0), Qp(n, 0.0);
    ode::Options io;
    io.rtol = opts.integrator_rtol;
    io.max_step = h;
    io.initial_step = h;

    // Second-order phase until Q <= q0 / 2.
    auto rhs2 = [&](double, const ode::State<2>& y) {
        return ode::State<2>{y[1], mu * y[0] - nl.F(y[0] * y[0]) * y[0]};
    };
    const auto [x_half, unused] = ode::integrate_until<2>(
        rhs2, 0.0, ode::State<2>{q0, 0.0}, R, [&](double, const ode::State<2>& y) { return y[0] <= 0.5 * q0; },
        io);
    (void)unused;
    const std::size_t j_switch = std::min(grid.nearest(x_half) + 1, n - 1);
    std::vector<double> nodes_a;
    for (std::size_t i = mid; i <= j_switch; ++i) nodes_a.push_back(grid.x(i));
    ode::integrate_through<2>(
        rhs2, 0.0, ode::State<2>{q0, 0.0}, nodes_a,
        [&](std::size_t k, double, ode::State<2>& y) {
            Q[mid + k] = y[0];
            Qp[mid + k] = y[1];
            return false;
        },
        io);

    // First-order phase in log Q.
    auto rhs1 = [&](double, const ode::State<1>& y) {
        const double s = std::exp(2.0 * y[0]);
        return ode::State<1>{-std::sqrt(std::max(0.0, mu - nl.G_over_s(s)))};
    };
    std::vector<double> nodes_b;
    for (std::size_t i = j_switch + 1; i < n; ++i) nodes_b.push_back(grid.x(i));
    ode::integrate_through<1>(
        rhs1, grid.x(j_switch), ode::State<1>{std::log(Q[j_switch])}, nodes_b,
        [&](std::size_t k, double xk, ode::State<1>& y) {
            const double q = std::exp(y[0]);
            Q[j_switch + 1 + k] = q;
            Qp[j_switch + 1 + k] = q * rhs1(xk, y)[0];
            return false;
        },
        io);

    for (std::size_t i = mid + 1; i < n; ++i) {
        if (!(Q[i] > 0.0) || !(Qp[i] < 0.0)) {
            throw HypothesisViolation("ground state: profile not positive and strictly decreasing at x = " +
                                      std::to_string(grid.x(i)));
        }
        Q[grid.mirror(i)] = Q[i];
        Qp[grid.mirror(i)] = -Qp[i];
    }
    Qp[mid] = 0.0;

    GroundState gs = GroundState::from_samples(grid, mu, std::move(Q), std::move(Qp), nl, opts.trust_epsilon);
    gs.shoot_value = q0;
    if (gs.ode_residual > opts.tol) {
        std::ostringstream msg;
        msg << "ground state: ODE residual " << gs.ode_residual << " exceeds tolerance " << opts.tol;
        throw Error(msg.str());
    }
    return gs;
}

}  // namespace solispec
