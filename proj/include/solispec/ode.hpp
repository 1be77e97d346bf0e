#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>

#include "solispec/errors.hpp"

namespace solispec::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
    double rtol = 1e-12;
    double atol = 1e-300;
    double initial_step = 1e-3;
    double max_step = 0.05;
    std::size_t max_steps = 50'000'000;
    /// Error is normed per consecutive block of this many components and the
    /// worst block decides; 0 treats the whole state as one block.
    std::size_t error_block = 0;
};

namespace detail {

template <std::size_t N>
State<N> axpy(const State<N>& y, double h, std::initializer_list<std::pair<double, const State<N>*>> terms) {
    State<N> out = y;
    for (const auto& [c, k] : terms) {
        if (c == 0.0) continue;
        for (std::size_t i = 0; i < N; ++i) out[i] += h * c * (*k)[i];
    }
    return out;
}

template <std::size_t N>
double max_abs(const State<N>& y) {
    double m = 0.0;
    for (double v : y) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace detail

/// One explicit Dormand-Prince 5(4) step with first-same-as-last reuse.
/// The error estimate is measured against the max-norm of the state (or of
/// each block) rather than component-wise, so channels that are identically
/// zero or many orders below the dominant one do not throttle the step.
template <std::size_t N, class Rhs>
class DormandPrince {
public:
    explicit DormandPrince(Rhs rhs, Options opts = {}) : rhs_(std::move(rhs)), opts_(opts) {}

    struct Trial {
        State<N> y;
        State<N> k_last;
        double err;
    };

    Trial attempt(double x, const State<N>& y, const State<N>& k1, double h) const {
        using detail::axpy;
        const State<N> k2 = rhs_(x + h / 5.0, axpy<N>(y, h, {{1.0 / 5.0, &k1}}));
        const State<N> k3 = rhs_(x + 3.0 * h / 10.0, axpy<N>(y, h, {{3.0 / 40.0, &k1}, {9.0 / 40.0, &k2}}));
        const State<N> k4 = rhs_(x + 4.0 * h / 5.0,
                                 axpy<N>(y, h, {{44.0 / 45.0, &k1}, {-56.0 / 15.0, &k2}, {32.0 / 9.0, &k3}}));
        const State<N> k5 = rhs_(x + 8.0 * h / 9.0, axpy<N>(y, h,
                                                            {{19372.0 / 6561.0, &k1},
                                                             {-25360.0 / 2187.0, &k2},
                                                             {64448.0 / 6561.0, &k3},
                                                             {-212.0 / 729.0, &k4}}));
        const State<N> k6 = rhs_(x + h, axpy<N>(y, h,
                                                {{9017.0 / 3168.0, &k1},
                                                 {-355.0 / 33.0, &k2},
                                                 {46732.0 / 5247.0, &k3},
                                                 {49.0 / 176.0, &k4},
                                                 {-5103.0 / 18656.0, &k5}}));
        Trial t;
        t.y = axpy<N>(y, h,
                      {{35.0 / 384.0, &k1},
                       {500.0 / 1113.0, &k3},
                       {125.0 / 192.0, &k4},
                       {-2187.0 / 6784.0, &k5},
                       {11.0 / 84.0, &k6}});
        t.k_last = rhs_(x + h, t.y);
        State<N> e{};
        for (std::size_t i = 0; i < N; ++i) {
            e[i] = h * (71.0 / 57600.0 * k1[i] - 71.0 / 16695.0 * k3[i] + 71.0 / 1920.0 * k4[i] -
                        17253.0 / 339200.0 * k5[i] + 22.0 / 525.0 * k6[i] - 1.0 / 40.0 * t.k_last[i]);
        }
        const std::size_t block = opts_.error_block == 0 ? N : opts_.error_block;
        t.err = 0.0;
        for (std::size_t start = 0; start < N; start += block) {
            double ey = 0.0, yy = 0.0;
            for (std::size_t i = start; i < std::min(N, start + block); ++i) {
                ey = std::max(ey, std::abs(e[i]));
                yy = std::max({yy, std::abs(y[i]), std::abs(t.y[i])});
            }
            t.err = std::max(t.err, ey / (opts_.atol + opts_.rtol * yy));
        }
        return t;
    }

    State<N> derivative(double x, const State<N>& y) const { return rhs_(x, y); }
    const Options& options() const { return opts_; }

private:
    Rhs rhs_;
    Options opts_;
};

namespace detail {

inline double next_step(double h, double err) {
    const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    return h * fac;
}

}  // namespace detail

/// Integrates from (x0, y0) through the monotone sequence of nodes, never
/// stepping past the next node. `visit(i, x, y)` is called on arrival at
/// node i and may modify y in place (returning true when it did).
template <std::size_t N, class Rhs, class Visit>
void integrate_through(const Rhs& rhs, double x0, State<N> y, std::span<const double> nodes, Visit&& visit,
                       Options opts = {}) {
    if (nodes.empty()) return;
    DormandPrince<N, const Rhs&> dp(rhs, opts);
    const double dir = nodes.back() >= x0 ? 1.0 : -1.0;
    double x = x0;
    State<N> k1 = dp.derivative(x, y);
    double h = opts.initial_step;
    std::size_t steps = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double target = nodes[i];
        while (dir * (target - x) > 0.0) {
            if (++steps > opts.max_steps) throw Error("ode: step budget exhausted");
            const double remaining = std::abs(target - x);
            double step = std::min({h, opts.max_step, remaining});
            const bool lands = step >= remaining * (1.0 - 1e-12);
            if (lands) step = remaining;
            auto trial = dp.attempt(x, y, k1, dir * step);
            if (trial.err <= 1.0) {
                x = lands ? target : x + dir * step;
                y = trial.y;
                k1 = trial.k_last;
                if (!lands) h = detail::next_step(step, trial.err);
                else h = std::max(h, detail::next_step(step, trial.err) * 0.5);
            } else {
                h = detail::next_step(step, trial.err);
                if (h < 1e-14 * std::max(1.0, std::abs(x))) throw Error("ode: step size underflow");
            }
        }
        if (visit(i, x, y)) k1 = dp.derivative(x, y);
    }
}

/// Adaptive integration from x0 toward x_end until `stop(x, y)` returns true.
/// Returns the final abscissa and state.
template <std::size_t N, class Rhs, class Stop>
std::pair<double, State<N>> integrate_until(const Rhs& rhs, double x0, State<N> y, double x_end, Stop&& stop,
                                            Options opts = {}) {
    DormandPrince<N, const Rhs&> dp(rhs, opts);
    const double dir = x_end >= x0 ? 1.0 : -1.0;
    double x = x0;
    State<N> k1 = dp.derivative(x, y);
    double h = opts.initial_step;
    std::size_t steps = 0;
    while (dir * (x_end - x) > 0.0) {
        if (++steps > opts.max_steps) throw Error("ode: step budget exhausted");
        const double step = std::min({h, opts.max_step, std::abs(x_end - x)});
        auto trial = dp.attempt(x, y, k1, dir * step);
        if (trial.err <= 1.0) {
            x += dir * step;
            y = trial.y;
            k1 = trial.k_last;
            h = detail::next_step(step, trial.err);
            if (stop(x, y)) break;
        } else {
            h = detail::next_step(step, trial.err);
            if (h < 1e-14 * std::max(1.0, std::abs(x))) throw Error("ode: step size underflow");
        }
    }
    return {x, y};
}

}  // namespace solispec::ode
