#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "solispec/errors.hpp"

namespace solispec {

/// Uniform grid x_i = -R + i*h, i = 0..n-1, symmetric about the origin.
/// n is always odd so that x = 0 is a node (index center()).
class UniformGrid {
public:
    UniformGrid() = default;

    UniformGrid(double half_width, double spacing) {
        if (!(half_width > 0.0) || !(spacing > 0.0) || spacing > half_width) {
            throw DomainError("UniformGrid: need 0 < h <= R");
        }
        half_cells_ = static_cast<std::size_t>(std::llround(half_width / spacing));
        h_ = spacing;
    }

    static UniformGrid with_points(double half_width, std::size_t points) {
        if (points < 3 || points % 2 == 0) throw DomainError("UniformGrid: point count must be odd and >= 3");
        return UniformGrid(half_width, 2.0 * half_width / static_cast<double>(points - 1));
    }

    [[nodiscard]] std::size_t size() const { return 2 * half_cells_ + 1; }
    [[nodiscard]] std::size_t center() const { return half_cells_; }
    [[nodiscard]] double h() const { return h_; }
    [[nodiscard]] double R() const { return static_cast<double>(half_cells_) * h_; }

    [[nodiscard]] double x(std::size_t i) const {
        return (static_cast<double>(i) - static_cast<double>(half_cells_)) * h_;
    }

    /// Index of the node nearest to xv, clamped into the grid.
    [[nodiscard]] std::size_t nearest(double xv) const {
        const double r = std::round(xv / h_) + static_cast<double>(half_cells_);
        if (r <= 0.0) return 0;
        return std::min(static_cast<std::size_t>(r), size() - 1);
    }

    /// Index of the mirror node of i (x -> -x).
    [[nodiscard]] std::size_t mirror(std::size_t i) const { return size() - 1 - i; }

    [[nodiscard]] std::vector<double> nodes() const {
        std::vector<double> out(size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = x(i);
        return out;
    }

    friend bool operator==(const UniformGrid& a, const UniformGrid& b) {
        return a.half_cells_ == b.half_cells_ && a.h_ == b.h_;
    }

private:
    std::size_t half_cells_ = 0;
    double h_ = 0.0;
};

namespace stencil {

/// Second derivative, centered three-point stencil with homogeneous
/// Dirichlet closure (values beyond the ends are zero).
inline void second_derivative(std::span<const double> f, double h, std::span<double> out) {
    const std::size_t n = f.size();
    const double inv = 1.0 / (h * h);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? f[i - 1] : 0.0;
        const double right = i + 1 < n ? f[i + 1] : 0.0;
        out[i] = (left - 2.0 * f[i] + right) * inv;
    }
}

/// Fourth-order five-point second derivative, Dirichlet closure.
inline void second_derivative4(std::span<const double> f, double h, std::span<double> out) {
    const std::size_t n = f.size();
    const double inv = 1.0 / (12.0 * h * h);
    auto at = [&](std::ptrdiff_t j) {
        return (j < 0 || j >= static_cast<std::ptrdiff_t>(n)) ? 0.0 : f[static_cast<std::size_t>(j)];
    };
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::ptrdiff_t>(i);
        out[i] = (-at(k - 2) + 16.0 * at(k - 1) - 30.0 * at(k) + 16.0 * at(k + 1) - at(k + 2)) * inv;
    }
}

/// Five-point first derivative at interior node i (needs 2 <= i < n-2).
inline double first_derivative5(std::span<const double> f, double h, std::size_t i) {
    return (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
}

/// Seven-point (sixth-order) first derivative at interior node i.
inline double first_derivative7(std::span<const double> f, double h, std::size_t i) {
    return (-f[i - 3] + 9.0 * f[i - 2] - 45.0 * f[i - 1] + 45.0 * f[i + 1] - 9.0 * f[i + 2] + f[i + 3]) /
           (60.0 * h);
}

}  // namespace stencil

namespace quadrature {

/// Reverse cumulative integral on a uniform grid:
///   out[i] = integral of f from node i to the last node.
/// Interior cells use the four-point rule
///   int_{x_i}^{x_i+1} f ~ h/24 (-f_{i-1} + 13 f_i + 13 f_{i+1} - f_{i+2}),
/// end cells the three-point one-sided rule. Fourth order overall.
inline std::vector<double> reverse_cumulative(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    auto cell = [&](std::size_t i) {
        if (n == 2) return 0.5 * h * (f[0] + f[1]);
        if (i == 0) return h * (5.0 * f[0] + 8.0 * f[1] - f[2]) / 12.0;
        if (i + 2 >= n) return h * (-f[i - 1] + 8.0 * f[i] + 5.0 * f[i + 1]) / 12.0;
        return h * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]) / 24.0;
    };
    for (std::size_t i = n - 1; i-- > 0;) out[i] = out[i + 1] + cell(i);
    return out;
}

/// Composite trapezoid on [0, x_k] for uniformly sampled f; used as an oracle.
inline double trapezoid(std::span<const double> f, double h) {
    if (f.size() < 2) return 0.0;
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * h;
}

}  // namespace quadrature

/// Least-squares line fit y = intercept + slope * x.
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double rms_residual = 0.0;
};

inline LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    if (n < 2 || ys.size() != n) throw DomainError("fit_line: need at least two matching samples");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - fit.intercept - fit.slope * xs[i];
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / static_cast<double>(n));
    return fit;
}

}  // namespace solispec
