#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "solispec/errors.hpp"
#include "solispec/ground_state.hpp"
#include "solispec/grid.hpp"
#include "solispec/linearized_operator.hpp"

namespace solispec {

/// A grid function known on the nodes first..n-1 (x >= x0).
struct HalfLineFunction {
    UniformGrid grid;
    std::size_t first = 0;
    std::vector<double> values;  ///< values[k] belongs to node first + k

    [[nodiscard]] double x0() const { return grid.x(first); }
    [[nodiscard]] double at_node(std::size_t i) const { return values.at(i - first); }
};

struct InversionOptions {
    /// Width of the window below the trust edge used to fit the decay rate of v.
    double fit_width = 0.0;  ///< 0 selects 5/sqrt(mu)
};

namespace detail {

/// Decay rate of v near the trust edge, from the envelope log|v|.
/// Returns 0 when v vanishes identically on the window.
inline double tail_rate(std::span<const double> v, const UniformGrid& grid, std::size_t lo, std::size_t hi) {
    std::vector<double> xs, ys;
    for (std::size_t i = lo; i <= hi; ++i) {
        if (v[i] != 0.0) {
            xs.push_back(grid.x(i));
            ys.push_back(std::log(std::abs(v[i])));
        }
    }
    if (xs.size() < 2) return 0.0;
    return -fit_line(xs, ys).slope;
}

}  // namespace detail

/// Decaying solution u of L u = v on [x0, infinity) for L = L- (kernel Q)
/// or L = L+ (kernel Q'):
///   u(x) = -P(x) int_x^inf P(t)^-2 int_t^inf P(s) v(s) ds dt,  P = Q or Q'.
/// Both integrals are accumulated from the trust edge inward; beyond it P and
/// v are exponentials and their contributions are added in closed form.
inline HalfLineFunction invert_L(LSign sign, const GroundState& gs, std::span<const double> v, double x0,
                                 InversionOptions opts = {}) {
    const UniformGrid& grid = gs.grid;
    if (v.size() != grid.size()) throw GridMismatch("invert_L: v does not live on the ground-state grid");
    if (sign == LSign::plus && !(x0 > 0.0)) {
        throw DomainError("invert_L(+): Q' vanishes at the origin, need x0 > 0");
    }
    if (x0 < 0.0) throw DomainError("invert_L: half-line inversion needs x0 >= 0");
    const std::vector<double>& P = sign == LSign::minus ? gs.Q : gs.Qp;
    const std::size_t n = grid.size();
    const std::size_t first = grid.nearest(x0);
    const std::size_t edge = std::min(n - 1, grid.nearest(gs.trust_edge > 0.0 ? gs.trust_edge : grid.R()));
    if (first >= edge) throw DomainError("invert_L: x0 lies beyond the trust edge");
    const double sq = gs.rate;

    const double width = opts.fit_width > 0.0 ? opts.fit_width : 5.0 / std::sqrt(gs.mu);
    const std::size_t lo = std::max(first, grid.nearest(grid.x(edge) - width));
    const double r = detail::tail_rate(v, grid, lo, edge);
    const bool zero_tail = r == 0.0 && v[edge] == 0.0;
    if (!zero_tail && !(r > sq)) {
        throw HypothesisViolation("invert_L: v decays at fitted rate " + std::to_string(r) +
                                  ", not faster than sqrt(mu) = " + std::to_string(sq));
    }

    const std::size_t m = edge - first + 1;
    std::vector<double> pv(m);
    for (std::size_t k = 0; k < m; ++k) pv[k] = P[first + k] * v[first + k];
    std::vector<double> inner = quadrature::reverse_cumulative(pv, grid.h());
    const double inner_tail = zero_tail ? 0.0 : P[edge] * v[edge] / (sq + r);
    for (double& val : inner) val += inner_tail;

    std::vector<double> ratio(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double p = P[first + k];
        ratio[k] = inner[k] / (p * p);
    }
    std::vector<double> outer = quadrature::reverse_cumulative(ratio, grid.h());
    const double outer_tail = zero_tail ? 0.0 : ratio[m - 1] / (r - sq);

    HalfLineFunction u;
    u.grid = grid;
    u.first = first;
    u.values.resize(n - first);
    for (std::size_t k = 0; k < m; ++k) u.values[k] = -P[first + k] * (outer[k] + outer_tail);
    // Beyond the edge: I(x) = I(e) e^{-(sq + r)(x - e)} and the outer integral
    // is I(x) / (P(x)^2 (r - sq)).
    for (std::size_t i = edge + 1; i < n; ++i) {
        const double dx = grid.x(i) - grid.x(edge);
        const double I = zero_tail ? 0.0 : inner[m - 1] * std::exp(-(sq + r) * dx);
        u.values[i - first] = zero_tail ? 0.0 : -I / (P[i] * (r - sq));
    }
    return u;
}

/// Sup-norm defects of the coupled identities satisfied by (u, v) = (f+g, f-g)
/// for a solution of (H - lambda) w = 0 decaying at +infinity:
///   u = lambda Q'  int int Q' v   (from L+ u = -lambda v)
///   v = lambda Q   int int Q  u   (from L- v = -lambda u)
/// measured on [x0, R - margin].
struct FixedPointResidual {
    double r_u = 0.0;
    double r_v = 0.0;
};

inline FixedPointResidual fixed_point_residual(const GroundState& gs, std::span<const double> u,
                                               std::span<const double> v, double lambda, double x0,
                                               double margin = 0.0) {
    if (u.size() != gs.grid.size() || v.size() != gs.grid.size())
        throw GridMismatch("fixed_point_residual: u, v must live on the ground-state grid");
    if (margin <= 0.0) margin = 5.0 / std::sqrt(gs.mu);
    FixedPointResidual res;
    const HalfLineFunction iu = invert_L(LSign::plus, gs, v, x0);
    const HalfLineFunction iv = invert_L(LSign::minus, gs, u, x0);
    for (std::size_t i = iu.first; i < gs.grid.size(); ++i) {
        if (gs.grid.x(i) > gs.grid.R() - margin) break;
        res.r_u = std::max(res.r_u, std::abs(u[i] + lambda * iu.at_node(i)));
        res.r_v = std::max(res.r_v, std::abs(v[i] + lambda * iv.at_node(i)));
    }
    return res;
}

}  // namespace solispec
