#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "solispec/errors.hpp"
#include "solispec/grid.hpp"
#include "solispec/jost.hpp"
#include "solispec/linearized_operator.hpp"

namespace solispec {

enum class Verdict { no_embedded_eigenvalue, inconclusive, embedded_candidate };

inline std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::no_embedded_eigenvalue: return "no-embedded-eigenvalue";
        case Verdict::inconclusive: return "inconclusive";
        case Verdict::embedded_candidate: return "embedded-candidate";
    }
    return "unknown";
}

struct CertificateOptions {
    double theta_cert = 1e-3;
    double theta_mismatch = 1e-3;
    /// Both thresholds are multiplied by this factor at lambda = +-mu.
    double threshold_relax = 0.1;
    /// Negative lambda: reflect the positive-lambda certificate (default) or
    /// integrate the negative-lambda problem directly.
    bool reflect_negative = true;
    JostOptions jost{};
};

/// Per-lambda certificate.
///
/// v0, v0p are v(0) and v'(0) for v = f - g of the +infinity decaying solution
/// with leading coefficient 1. `scale` is |(u, v, u'/kappa, v'/kappa)(0)|;
/// the normalized quantities are |v0|/scale and |v0p|/(kappa scale).
struct CertificateRecord {
    double lambda = 0.0;
    double v0 = 0.0;
    double v0p = 0.0;
    double u0 = 0.0;
    double u0p = 0.0;
    double scale = 0.0;
    double normalized_v0 = 0.0;
    double normalized_v0p = 0.0;
    bool u_positive = false;
    bool v_signed = false;
    double mismatch = 0.0;
    double m_grow = 0.0;
    double m_cos = 0.0;
    double m_sin = 0.0;
    double c_grow = 0.0;      ///< growing coefficient at -infinity (Wronskian)
    double c_grow_fit = 0.0;  ///< same, least-squares fit at -infinity (NaN when not fitted)
    double wronskian_drift = 0.0;
    bool threshold = false;
    Verdict verdict = Verdict::inconclusive;
    std::string note;

    [[nodiscard]] double normalized_min() const { return std::min(normalized_v0, normalized_v0p); }
};

namespace detail {

// Hermite cubic through (y0, d0), (y1, d1) on a cell of width h, probed at
// interior points when the data allow an interior minimum.
inline bool cell_positive(double y0, double y1, double d0, double d1, double h) {
    if (!(y1 > 0.0)) return false;
    if (!(d0 < 0.0 && d1 > 0.0)) return true;
    for (int k = 1; k < 8; ++k) {
        const double t = k / 8.0, t2 = t * t, t3 = t2 * t;
        const double p = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
                         (t3 - t2) * h * d1;
        if (!(p > 0.0)) return false;
    }
    return true;
}

/// sign * y > 0 on (0, R], with refinement inside each cell.
inline bool signed_on_right(const UniformGrid& grid, std::span<const double> y, std::span<const double> dy,
                            double sign) {
    const std::size_t c = grid.center();
    for (std::size_t i = c; i + 1 < grid.size(); ++i) {
        if (!cell_positive(sign * y[i], sign * y[i + 1], sign * dy[i], sign * dy[i + 1], grid.h())) return false;
    }
    return true;
}

inline Verdict decide(const CertificateRecord& r, const CertificateOptions& o) {
    const double f = r.threshold ? o.threshold_relax : 1.0;
    if (r.mismatch < o.theta_mismatch * f) return Verdict::embedded_candidate;
    if (r.normalized_min() >= o.theta_cert * f) return Verdict::no_embedded_eigenvalue;
    return Verdict::inconclusive;
}

inline CertificateRecord certify_solution(const JostSolution& s, const CertificateOptions& o) {
    const UniformGrid& grid = s.grid;
    const std::size_t n = grid.size(), c = grid.center();
    const ModeParams mp = mode_params(s.lambda, s.mu);
    CertificateRecord r;
    r.lambda = s.lambda;
    r.threshold = mp.threshold;
    std::vector<double> u(n), v(n), up(n), vp(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = s.f[i] + s.g[i];
        v[i] = s.f[i] - s.g[i];
        up[i] = s.fp[i] + s.gp[i];
        vp[i] = s.fp[i] - s.gp[i];
    }
    if (c < 2 || std::isnan(v[c - 2])) throw DomainError("certificate: solution not available left of the origin");
    r.v0 = v[c];
    r.v0p = stencil::first_derivative5(v, grid.h(), c);
    r.u0 = u[c];
    r.u0p = up[c];
    const double k = mp.kappa;
    r.scale = std::sqrt(r.u0 * r.u0 + r.v0 * r.v0 + (r.u0p * r.u0p + r.v0p * r.v0p) / (k * k));
    r.normalized_v0 = std::abs(r.v0) / r.scale;
    r.normalized_v0p = std::abs(r.v0p) / (k * r.scale);
    r.u_positive = signed_on_right(grid, u, up, 1.0);
    r.v_signed = signed_on_right(grid, v, vp, s.lambda > 0.0 ? 1.0 : -1.0);
    r.mismatch = s.origin.mismatch;
    r.m_grow = s.origin.m_grow;
    r.m_cos = s.origin.m_cos;
    r.m_sin = s.origin.m_sin;
    r.c_grow = s.origin.c_grow;
    r.wronskian_drift = s.companion_wronskian_drift;
    r.c_grow_fit = std::numeric_limits<double>::quiet_NaN();
    if (!mp.threshold && s.has_left) {
        try {
            r.c_grow_fit = expand_in_modes(s, End::minus, default_window(s, End::minus)).coeffs[1];
        } catch (const ConditioningError&) {
        }
    }
    r.verdict = decide(r, o);
    return r;
}

}  // namespace detail

/// Certificate at lambda reflected through S(f, g) = (g, f): lambda -> -lambda,
/// u unchanged, v -> -v. Mode pairings are S-invariant.
inline CertificateRecord reflect_spectrum(const CertificateRecord& r) {
    CertificateRecord out = r;
    out.lambda = -r.lambda;
    out.v0 = -r.v0;
    out.v0p = -r.v0p;
    return out;
}

/// Certificate for one lambda with |lambda| >= mu on an arbitrary potential
/// of the linearized-operator form.
inline CertificateRecord certify_lambda(const PotentialMatrix& p, double lambda, CertificateOptions o = {}) {
    mode_params(lambda, p.mu);
    o.jost.continue_left = true;
    if (lambda < 0.0 && o.reflect_negative) {
        return reflect_spectrum(detail::certify_solution(decaying_solution(p, -lambda, o.jost), o));
    }
    return detail::certify_solution(decaying_solution(p, lambda, o.jost), o);
}

struct ScanSummary {
    std::size_t count = 0;
    std::size_t no_embedded = 0;
    std::size_t inconclusive = 0;
    std::size_t embedded_candidates = 0;
    double min_normalized = std::numeric_limits<double>::infinity();  ///< min over records of min(|v0|, |v0p|) normalized
    double min_mismatch = std::numeric_limits<double>::infinity();
    /// Neighbour slopes |delta mismatch| / delta omega with omega = sqrt(|lambda| - mu),
    /// the variable in which the mode structure is smooth up to threshold.
    double mismatch_lipschitz = 0.0;
    double median_slope = 0.0;
    std::size_t continuity_flags = 0;  ///< slopes above 20x the median
};

struct ScanReport {
    std::vector<double> lambdas;
    std::vector<CertificateRecord> records;
    ScanSummary summary;
    CertificateOptions options;
};

inline ScanSummary summarize(const std::vector<CertificateRecord>& recs, double mu) {
    ScanSummary s;
    s.count = recs.size();
    for (const auto& r : recs) {
        switch (r.verdict) {
            case Verdict::no_embedded_eigenvalue: ++s.no_embedded; break;
            case Verdict::inconclusive: ++s.inconclusive; break;
            case Verdict::embedded_candidate: ++s.embedded_candidates; break;
        }
        if (r.note.empty()) {
            s.min_normalized = std::min(s.min_normalized, r.normalized_min());
            s.min_mismatch = std::min(s.min_mismatch, r.mismatch);
        }
    }
    std::vector<double> slopes;
    for (std::size_t i = 1; i < recs.size(); ++i) {
        if (!recs[i].note.empty() || !recs[i - 1].note.empty()) continue;
        if ((recs[i].lambda > 0.0) != (recs[i - 1].lambda > 0.0)) continue;
        auto omega = [mu](double l) { return std::sqrt(std::max(0.0, std::abs(l) - mu)); };
        const double dw = std::abs(omega(recs[i].lambda) - omega(recs[i - 1].lambda));
        slopes.push_back(std::abs(recs[i].mismatch - recs[i - 1].mismatch) / dw);
    }
    if (!slopes.empty()) {
        s.mismatch_lipschitz = *std::max_element(slopes.begin(), slopes.end());
        std::vector<double> sorted = slopes;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2),
                         sorted.end());
        s.median_slope = sorted[sorted.size() / 2];
        for (double sl : slopes) {
            if (sl > 20.0 * s.median_slope && sl > 1e-8) ++s.continuity_flags;
        }
    }
    return s;
}

/// Certificates over a strictly increasing lambda grid outside the gap.
/// Per-lambda failures become inconclusive records carrying the message.
/// Work is spread over `threads` workers; records land at their grid index,
/// so the result does not depend on scheduling.
inline ScanReport scan_embedded(const PotentialMatrix& p, const std::vector<double>& lambdas,
                                CertificateOptions o = {}, unsigned threads = 1) {
    if (lambdas.empty()) throw ConfigError("scan: empty lambda grid");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!std::isfinite(lambdas[i])) throw ConfigError("scan: non-finite lambda");
        if (i > 0 && !(lambdas[i] > lambdas[i - 1])) throw ConfigError("scan: lambda grid must be strictly increasing");
        if (std::abs(lambdas[i]) < p.mu * (1.0 - 1e-12)) throw ConfigError("scan: lambda inside the gap (-mu, mu)");
    }
    ScanReport rep;
    rep.lambdas = lambdas;
    rep.options = o;
    rep.records.resize(lambdas.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < lambdas.size(); i = next++) {
            try {
                rep.records[i] = certify_lambda(p, lambdas[i], o);
            } catch (const std::exception& e) {
                CertificateRecord r;
                r.lambda = lambdas[i];
                r.mismatch = std::numeric_limits<double>::quiet_NaN();
                r.verdict = Verdict::inconclusive;
                r.note = e.what();
                rep.records[i] = r;
            }
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(lambdas.size())));
    if (threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    rep.summary = summarize(rep.records, p.mu);
    return rep;
}

/// n evenly spaced points on [lo, hi] (n = 1 gives lo).
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    if (n > 1) out.back() = hi;
    return out;
}

struct ControlResult {
    double mu = 1.0;
    double depth = 0.0;
    ScanReport scan;                  ///< coarse scan over [mu, depth - mu]
    std::vector<double> crossings;    ///< refined zeros of the signed growth pairing
    std::vector<std::pair<double, double>> brackets;  ///< coarse sign-change brackets
    CertificateRecord at_crossing;    ///< certificate at the first crossing
};

struct ControlOptions {
    double R = 0.0;  ///< 0 selects 30/sqrt(mu)
    double h = 0.0;  ///< 0 selects 1e-3/sqrt(mu)
    std::size_t points = 200;
    double root_tol = 1e-11;
    unsigned threads = 1;
    CertificateOptions cert{};
};

/// The decoupled operator H0 + diag(W, -W) with W = depth sech^2 has an
/// eigenvalue embedded in [mu, infinity) whenever the scalar well W has a
/// bound state below -mu. The scan locates it from the sign change of the
/// growth pairing and certifies there, which must report a candidate.
inline ControlResult negative_control(double mu, double depth, ControlOptions o = {}) {
    if (!(mu > 0.0)) throw ConfigError("control: mu must be positive");
    const double hi = depth - mu;
    if (!(hi > mu)) {
        throw ConfigError("control: a well of depth " + std::to_string(depth) +
                          " cannot hold an eigenvalue with lambda >= mu; use depth > 2 mu");
    }
    const double sq = std::sqrt(mu);
    const UniformGrid grid(o.R > 0.0 ? o.R : 30.0 / sq, o.h > 0.0 ? o.h : 1e-3 / sq);
    const PotentialMatrix p = decoupled_well(grid, mu, depth);
    ControlResult res;
    res.mu = mu;
    res.depth = depth;
    res.scan = scan_embedded(p, linspace(mu, hi, o.points), o.cert, o.threads);
    const auto& recs = res.scan.records;
    for (std::size_t i = 1; i < recs.size(); ++i) {
        if (!recs[i].note.empty() || !recs[i - 1].note.empty()) continue;
        if ((recs[i - 1].m_grow > 0.0) != (recs[i].m_grow > 0.0)) {
            res.brackets.emplace_back(recs[i - 1].lambda, recs[i].lambda);
        }
    }
    if (res.brackets.empty()) {
        throw ConfigError("control: no embedded eigenvalue found in [mu, depth - mu]; deepen the well or refine the scan");
    }
    JostOptions jo = o.cert.jost;
    jo.continue_left = false;
    auto pairing = [&](double lam) { return decaying_solution(p, lam, jo).origin.m_grow; };
    for (auto [a, b] : res.brackets) {
        double fa = pairing(a);
        for (int it = 0; it < 200 && b - a > o.root_tol; ++it) {
            const double m = 0.5 * (a + b);
            const double fm = pairing(m);
            if ((fm > 0.0) == (fa > 0.0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        res.crossings.push_back(0.5 * (a + b));
    }
    res.at_crossing = certify_lambda(p, res.crossings.front(), o.cert);
    return res;
}

}  // namespace solispec
