#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "solispec/errors.hpp"

namespace solispec {

enum class Family { power, cubic_quintic, saturable, tabulated };

inline std::string_view to_string(Family f) {
    switch (f) {
        case Family::power: return "power";
        case Family::cubic_quintic: return "cubic_quintic";
        case Family::saturable: return "saturable";
        case Family::tabulated: return "tabulated";
    }
    return "unknown";
}

inline Family family_from_string(std::string_view s) {
    if (s == "power") return Family::power;
    if (s == "cubic_quintic") return Family::cubic_quintic;
    if (s == "saturable") return Family::saturable;
    if (s == "tabulated") return Family::tabulated;
    throw ConfigError("unknown nonlinearity family '" + std::string(s) + "'");
}

/// F(s), F'(s) and G(s) = int_0^s F at one point s >= 0.
struct NonlinearityValue {
    double F = 0.0;
    double dF = 0.0;
    double G = 0.0;
};

/// The nonlinearity F of the focusing NLS  i u_t + u_xx + F(|u|^2) u = 0.
///
/// Built-in families:
///   power          F(s) = s^p                 params {p},  p >= 1
///   cubic_quintic  F(s) = s - gamma s^2       params {gamma}
///   saturable      F(s) = s / (1 + beta s)    params {beta}, beta > 0
///   tabulated      monotone (PCHIP) cubic through (s_k, F_k) with s_0 = 0, F_0 = 0
///
/// Immutable after construction.
class Nonlinearity {
public:
    static Nonlinearity power(double p) { return Nonlinearity(Family::power, {p}); }
    static Nonlinearity cubic() { return power(1.0); }
    static Nonlinearity cubic_quintic(double gamma) { return Nonlinearity(Family::cubic_quintic, {gamma}); }
    static Nonlinearity saturable(double beta) { return Nonlinearity(Family::saturable, {beta}); }

    /// Table abscissae must be strictly increasing and start at 0; the first
    /// value is forced to 0 so that F(0) = 0 holds by construction. A table
    /// whose first abscissa is positive gets the node (0, 0) prepended.
    static Nonlinearity tabulated(std::vector<double> s, std::vector<double> values) {
        if (s.size() != values.size() || s.size() < 2) throw ConfigError("tabulated: need >= 2 matching nodes");
        if (s.front() < 0.0) throw ConfigError("tabulated: abscissae must be >= 0");
        if (s.front() > 0.0) {
            s.insert(s.begin(), 0.0);
            values.insert(values.begin(), 0.0);
        }
        values.front() = 0.0;
        for (std::size_t k = 1; k < s.size(); ++k) {
            if (!(s[k] > s[k - 1])) throw ConfigError("tabulated: abscissae must be strictly increasing");
        }
        Nonlinearity nl(Family::tabulated, {});
        nl.table_s_ = std::move(s);
        nl.table_F_ = std::move(values);
        nl.build_table();
        return nl;
    }

    /// Generic constructor for the closed-form families; validates parameters.
    Nonlinearity(Family family, std::vector<double> params) : family_(family), params_(std::move(params)) {
        switch (family_) {
            case Family::power:
                if (params_.size() != 1 || !(params_[0] >= 1.0)) throw ConfigError("power: need one exponent p >= 1");
                break;
            case Family::cubic_quintic:
                if (params_.size() != 1 || !std::isfinite(params_[0]))
                    throw ConfigError("cubic_quintic: need one finite gamma");
                break;
            case Family::saturable:
                if (params_.size() != 1 || !(params_[0] > 0.0)) throw ConfigError("saturable: need one beta > 0");
                break;
            case Family::tabulated: break;
        }
    }

    [[nodiscard]] Family family() const { return family_; }
    [[nodiscard]] const std::vector<double>& params() const { return params_; }
    [[nodiscard]] const std::vector<double>& table_s() const { return table_s_; }
    [[nodiscard]] const std::vector<double>& table_F() const { return table_F_; }

    /// Largest s where the evaluator is defined (infinity for closed forms).
    [[nodiscard]] double max_argument() const {
        return family_ == Family::tabulated ? table_s_.back() : std::numeric_limits<double>::infinity();
    }

    [[nodiscard]] NonlinearityValue eval(double s) const {
        if (!(s >= 0.0)) throw DomainError("nonlinearity evaluated at negative or NaN s");
        switch (family_) {
            case Family::power: {
                const double p = params_[0];
                if (p == 1.0) return {s, 1.0, 0.5 * s * s};
                const double sp = std::pow(s, p);
                return {sp, p * std::pow(s, p - 1.0), sp * s / (p + 1.0)};
            }
            case Family::cubic_quintic: {
                const double g = params_[0];
                return {s - g * s * s, 1.0 - 2.0 * g * s, 0.5 * s * s - g * s * s * s / 3.0};
            }
            case Family::saturable: {
                const double b = params_[0];
                const double d = 1.0 + b * s;
                return {s / d, 1.0 / (d * d), saturable_primitive(b, s)};
            }
            case Family::tabulated: return eval_table(s);
        }
        return {};
    }

    [[nodiscard]] double F(double s) const { return eval(s).F; }

    /// G(s)/s, continuous at s = 0 where it vanishes.
    [[nodiscard]] double G_over_s(double s) const {
        if (s <= 1e-300) return 0.0;
        return eval(s).G / s;
    }

private:
    // (beta s - log(1 + beta s)) / beta^2, with a series where the
    // subtraction would cancel.
    static double saturable_primitive(double b, double s) {
        const double x = b * s;
        if (x < 1e-3) {
            double term = x * x, sum = 0.0;
            for (int k = 2; k <= 9; ++k) {
                sum += ((k % 2 == 0) ? 1.0 : -1.0) * term / k;
                term *= x;
            }
            return sum / (b * b);
        }
        return (x - std::log1p(x)) / (b * b);
    }

    void build_table() {
        const std::size_t n = table_s_.size();
        std::vector<double> width(n - 1), slope(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            width[k] = table_s_[k + 1] - table_s_[k];
            slope[k] = (table_F_[k + 1] - table_F_[k]) / width[k];
        }
        table_d_.assign(n, 0.0);
        if (n == 2) {
            table_d_[0] = table_d_[1] = slope[0];
        } else {
            for (std::size_t k = 1; k + 1 < n; ++k) {
                if (slope[k - 1] * slope[k] <= 0.0) continue;
                const double w1 = 2.0 * width[k] + width[k - 1];
                const double w2 = width[k] + 2.0 * width[k - 1];
                table_d_[k] = (w1 + w2) / (w1 / slope[k - 1] + w2 / slope[k]);
            }
            table_d_[0] = end_slope(width[0], width[1], slope[0], slope[1]);
            table_d_[n - 1] = end_slope(width[n - 2], width[n - 3], slope[n - 2], slope[n - 3]);
        }
        table_G_.assign(n, 0.0);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            table_G_[k + 1] = table_G_[k] + segment_integral(k, 1.0);
        }
    }

    // Three-point end derivative with the shape-preserving limiter used by PCHIP.
    static double end_slope(double h0, double h1, double m0, double m1) {
        double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if (d * m0 <= 0.0) return 0.0;
        if (m0 * m1 <= 0.0 && std::abs(d) > 3.0 * std::abs(m0)) d = 3.0 * m0;
        return d;
    }

    double segment_integral(std::size_t k, double t) const {
        const double H = table_s_[k + 1] - table_s_[k];
        const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
        return H * (table_F_[k] * (t - t3 + 0.5 * t4) + H * table_d_[k] * (0.5 * t2 - 2.0 * t3 / 3.0 + 0.25 * t4) +
                    table_F_[k + 1] * (t3 - 0.5 * t4) + H * table_d_[k + 1] * (0.25 * t4 - t3 / 3.0));
    }

    NonlinearityValue eval_table(double s) const {
        if (s > table_s_.back()) throw DomainError("tabulated nonlinearity: s beyond table range (no extrapolation)");
        auto it = std::upper_bound(table_s_.begin(), table_s_.end(), s);
        std::size_t k = static_cast<std::size_t>(std::distance(table_s_.begin(), it));
        k = k == 0 ? 0 : std::min(k - 1, table_s_.size() - 2);
        const double H = table_s_[k + 1] - table_s_[k];
        const double t = (s - table_s_[k]) / H;
        const double t2 = t * t, t3 = t2 * t;
        const double y0 = table_F_[k], y1 = table_F_[k + 1];
        const double d0 = table_d_[k], d1 = table_d_[k + 1];
        NonlinearityValue v;
        v.F = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * H * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * H * d1;
        v.dF = ((6 * t2 - 6 * t) * y0 + (-6 * t2 + 6 * t) * y1) / H + (3 * t2 - 4 * t + 1) * d0 + (3 * t2 - 2 * t) * d1;
        v.G = table_G_[k] + segment_integral(k, t);
        return v;
    }

    Family family_;
    std::vector<double> params_;
    std::vector<double> table_s_, table_F_, table_d_, table_G_;
};

}  // namespace solispec
