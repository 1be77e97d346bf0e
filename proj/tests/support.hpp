#pragma once

// Shared fixtures and closed-form oracles for the test suite. The oracles
// here are written independently of the library code they check.

#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "solispec/ground_state.hpp"
#include "solispec/linearized_operator.hpp"
#include "solispec/nonlinearity.hpp"

namespace testing_support {

using namespace solispec;

struct Problem {
    Nonlinearity nl;
    GroundState gs;
    PotentialMatrix potential;
};

/// Ground state and potential at mu with default resolution, computed once
/// per (label, mu) and reused across tests.
inline const Problem& problem(const std::string& label, double mu = 1.0) {
    static std::map<std::pair<std::string, double>, std::unique_ptr<Problem>> cache;
    auto key = std::make_pair(label, mu);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
    Nonlinearity nl = label == "cubic"           ? Nonlinearity::cubic()
                      : label == "saturable"     ? Nonlinearity::saturable(0.5)
                      : label == "cubic_quintic" ? Nonlinearity::cubic_quintic(0.1)
                      : label == "power2"        ? Nonlinearity::power(2.0)
                                                 : throw std::invalid_argument(label);
    GroundState gs = solve_ground_state(nl, mu);
    PotentialMatrix p = potential_V(gs, nl);
    auto ptr = std::make_unique<Problem>(Problem{nl, std::move(gs), std::move(p)});
    return *cache.emplace(key, std::move(ptr)).first->second;
}

/// Cubic ground state sqrt(2 mu) sech(sqrt(mu) x).
inline double cubic_Q(double x, double mu = 1.0) { return std::sqrt(2.0 * mu) / std::cosh(std::sqrt(mu) * x); }

/// Power nonlinearity F(s) = s^p: Q = ((p+1) mu)^(1/2p) sech^(1/p)(p sqrt(mu) x).
inline double power_Q(double x, double p, double mu = 1.0) {
    return std::pow((p + 1.0) * mu, 0.5 / p) * std::pow(1.0 / std::cosh(p * std::sqrt(mu) * x), 1.0 / p);
}

/// Cubic-quintic F(s) = s - gamma s^2:
/// Q^2 = 4 mu / (1 + sqrt(1 - 16 gamma mu / 3) cosh(2 sqrt(mu) x)).
inline double cubic_quintic_Q(double x, double gamma, double mu = 1.0) {
    const double B = std::sqrt(1.0 - 16.0 * gamma * mu / 3.0);
    return std::sqrt(4.0 * mu / (1.0 + B * std::cosh(2.0 * std::sqrt(mu) * x)));
}

/// Closed-form decaying solution for the cubic soliton at mu = 1, lambda >= 1,
/// kappa = sqrt(1 + lambda), leading coefficient 1 at +infinity:
///   f = e^{-kappa x} (tanh x + kappa)^2 / (kappa + 1)^2
///   g = -e^{-kappa x} sech^2 x / (kappa + 1)^2
/// Obtained by a polynomial-in-tanh ansatz; returns (f, g, f', g').
inline std::array<double, 4> cubic_jost(double x, double lambda) {
    const double k = std::sqrt(1.0 + lambda);
    const double t = std::tanh(x), s2 = 1.0 - t * t, e = std::exp(-k * x), n = (k + 1.0) * (k + 1.0);
    const double P = (t + k) * (t + k), dP = 2.0 * (t + k) * s2;
    const double G = -s2, dG = 2.0 * t * s2;
    return {e * P / n, e * G / n, e * (dP - k * P) / n, e * (dG - k * G) / n};
}

/// Certificate values of the closed form at the origin.
inline double cubic_v0(double lambda) {
    const double k = std::sqrt(1.0 + lambda);
    return (k * k + 1.0) / ((k + 1.0) * (k + 1.0));
}
inline double cubic_v0p(double lambda) {
    const double k = std::sqrt(1.0 + lambda);
    return -k * (k - 1.0) / (k + 1.0);
}
inline double cubic_u0(double lambda) {
    const double k = std::sqrt(1.0 + lambda);
    return (k - 1.0) / (k + 1.0);
}
/// Growing coefficient at -infinity of the closed form: ((kappa-1)/(kappa+1))^2.
inline double cubic_c_grow(double lambda) { return cubic_u0(lambda) * cubic_u0(lambda); }

/// Pseudo-random generator with a fixed seed per test.
inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline std::vector<double> random_field(std::mt19937_64& g, std::size_t n, double scale = 1.0) {
    std::uniform_real_distribution<double> d(-scale, scale);
    std::vector<double> v(n);
    for (double& x : v) x = d(g);
    return v;
}

}  // namespace testing_support
