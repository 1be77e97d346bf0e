#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "solispec/certificate.hpp"
#include "solispec/errors.hpp"
#include "solispec/ground_state.hpp"
#include "solispec/linearized_operator.hpp"
#include "solispec/nonlinearity.hpp"

namespace solispec {

inline constexpr int schema_version = 1;

#ifdef SOLISPEC_VERSION
inline constexpr const char* tool_version = SOLISPEC_VERSION;
#else
inline constexpr const char* tool_version = "0.1.0";
#endif

struct NonlinearityConfig {
    Family family = Family::power;
    double p = 1.0;
    double gamma = 0.0;
    double beta = 1.0;
    std::vector<double> table_s;
    std::vector<double> table_F;

    [[nodiscard]] Nonlinearity build() const {
        switch (family) {
            case Family::power: return Nonlinearity::power(p);
            case Family::cubic_quintic: return Nonlinearity::cubic_quintic(gamma);
            case Family::saturable: return Nonlinearity::saturable(beta);
            case Family::tabulated: return Nonlinearity::tabulated(table_s, table_F);
        }
        throw ConfigError("unknown family");
    }
};

struct ScanConfig {
    double lmin = 1.0;
    double lmax = 10.0;
    std::size_t n = 200;
};

/// Everything a run needs. Zero for R or h selects 30/sqrt(mu) and 1e-3/sqrt(mu).
struct RunConfig {
    NonlinearityConfig nonlinearity;
    double mu = 1.0;
    double R = 0.0;
    double h = 0.0;
    double tol_ode = 1e-10;
    double theta_cert = 1e-3;
    double theta_mismatch = 1e-3;
    double jost_rtol = 1e-12;
    double asym_threshold = 1e-14;
    std::size_t spectrum_points = 801;
    double spectrum_half_width = 0.0;
    ScanConfig scan;
    double x0 = 1.0;
    double control_depth = 6.0;
    std::size_t control_points = 200;
    std::string out_dir = ".";
    unsigned threads = 1;
    std::vector<std::string> warnings;  ///< not serialized

    [[nodiscard]] double resolved_R() const { return R > 0.0 ? R : 30.0 / std::sqrt(mu); }
    [[nodiscard]] double resolved_h() const { return h > 0.0 ? h : 1e-3 / std::sqrt(mu); }

    [[nodiscard]] GroundStateOptions ground_options() const {
        GroundStateOptions o;
        o.R = resolved_R();
        o.h = resolved_h();
        o.tol = tol_ode;
        return o;
    }

    [[nodiscard]] CertificateOptions certificate_options() const {
        CertificateOptions o;
        o.theta_cert = theta_cert;
        o.theta_mismatch = theta_mismatch;
        o.jost.rtol = jost_rtol;
        o.jost.asym_threshold = asym_threshold;
        return o;
    }

    [[nodiscard]] SpectrumOptions spectrum_options() const {
        SpectrumOptions o;
        o.points = spectrum_points;
        o.half_width = spectrum_half_width;
        return o;
    }
};

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json nl;
    nl["family"] = std::string(to_string(c.nonlinearity.family));
    switch (c.nonlinearity.family) {
        case Family::power: nl["p"] = c.nonlinearity.p; break;
        case Family::cubic_quintic: nl["gamma"] = c.nonlinearity.gamma; break;
        case Family::saturable: nl["beta"] = c.nonlinearity.beta; break;
        case Family::tabulated:
            nl["s"] = c.nonlinearity.table_s;
            nl["F"] = c.nonlinearity.table_F;
            break;
    }
    return {{"schema_version", schema_version},
            {"nonlinearity", nl},
            {"mu", c.mu},
            {"grid", {{"R", c.resolved_R()}, {"h", c.resolved_h()}}},
            {"tolerances",
             {{"tol_ode", c.tol_ode},
              {"theta_cert", c.theta_cert},
              {"theta_mismatch", c.theta_mismatch},
              {"jost_rtol", c.jost_rtol},
              {"asym_threshold", c.asym_threshold}}},
            {"spectrum", {{"points", c.spectrum_points}, {"half_width", c.spectrum_half_width}}},
            {"scan", {{"lmin", c.scan.lmin}, {"lmax", c.scan.lmax}, {"n", c.scan.n}}},
            {"inversion", {{"x0", c.x0}}},
            {"control", {{"depth", c.control_depth}, {"points", c.control_points}}},
            {"output", {{"dir", c.out_dir}}},
            {"threads", c.threads}};
}

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::string& where, std::set<std::string> allowed) {
    if (!j.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    for (const auto& [k, v] : j.items()) {
        if (!allowed.count(k)) throw ConfigError("config: unknown key '" + k + "' in " + where);
    }
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key) || j.at(key).is_null()) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config: bad value for '" + std::string(key) + "' in " + where);
    }
}

}  // namespace detail

/// Validates a config in place; fatal problems raise ConfigError, soft ones
/// are appended to `warnings`.
inline void validate(RunConfig& c) {
    if (!(c.mu > 0.0) || !std::isfinite(c.mu)) throw ConfigError("config: mu must be positive");
    if (c.R < 0.0 || c.h < 0.0) throw ConfigError("config: grid R and h must be positive (or 0 for defaults)");
    if (c.resolved_h() >= c.resolved_R()) throw ConfigError("config: grid spacing must be below R");
    if (c.resolved_R() * std::sqrt(c.mu) < 20.0) {
        c.warnings.push_back("R*sqrt(mu) < 20: the far field may not be resolved");
    }
    if (!(c.theta_cert > 0.0) || !(c.theta_mismatch > 0.0)) throw ConfigError("config: thresholds must be positive");
    if (!(c.tol_ode > 0.0) || !(c.jost_rtol > 0.0)) throw ConfigError("config: tolerances must be positive");
    if (c.scan.n < 1) throw ConfigError("config: scan.n must be >= 1 (empty lambda grid)");
    if (!(c.scan.lmin <= c.scan.lmax)) throw ConfigError("config: scan.lmin must not exceed scan.lmax");
    const double slack = 1e-12 * c.mu;
    if (!(c.scan.lmin >= c.mu - slack || c.scan.lmax <= -c.mu + slack)) {
        throw ConfigError("config: scan range must lie in [mu, inf) or (-inf, -mu]");
    }
    if (c.scan.n > 1 && c.scan.lmin == c.scan.lmax) throw ConfigError("config: scan.n > 1 needs lmin < lmax");
    if (!(c.x0 > 0.0)) throw ConfigError("config: inversion.x0 must be positive");
    if (c.threads < 1) c.threads = 1;
    (void)c.nonlinearity.build();
}

inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig c;
    detail::check_keys(j, "config", {"schema_version", "nonlinearity", "mu", "grid", "tolerances", "spectrum", "scan",
                                     "inversion", "control", "output", "threads"});
    if (j.contains("schema_version") && j.at("schema_version") != schema_version) {
        throw ConfigError("config: unsupported schema_version");
    }
    if (j.contains("nonlinearity")) {
        const auto& n = j.at("nonlinearity");
        detail::check_keys(n, "nonlinearity", {"family", "params", "p", "gamma", "beta", "s", "F"});
        std::string fam = "power";
        detail::read(n, "family", fam, "nonlinearity");
        c.nonlinearity.family = family_from_string(fam);
        detail::read(n, "p", c.nonlinearity.p, "nonlinearity");
        detail::read(n, "gamma", c.nonlinearity.gamma, "nonlinearity");
        detail::read(n, "beta", c.nonlinearity.beta, "nonlinearity");
        detail::read(n, "s", c.nonlinearity.table_s, "nonlinearity");
        detail::read(n, "F", c.nonlinearity.table_F, "nonlinearity");
        // Positional form: {"family": "power", "params": [1.0]}.
        if (n.contains("params")) {
            std::vector<double> params;
            detail::read(n, "params", params, "nonlinearity");
            if (c.nonlinearity.family == Family::tabulated || params.size() != 1) {
                throw ConfigError("config: 'params' takes one value for power, cubic_quintic or saturable");
            }
            double& slot = c.nonlinearity.family == Family::power           ? c.nonlinearity.p
                           : c.nonlinearity.family == Family::cubic_quintic ? c.nonlinearity.gamma
                                                                            : c.nonlinearity.beta;
            slot = params[0];
        }
    }
    detail::read(j, "mu", c.mu, "config");
    detail::read(j, "threads", c.threads, "config");
    if (j.contains("grid")) {
        detail::check_keys(j.at("grid"), "grid", {"R", "h"});
        detail::read(j.at("grid"), "R", c.R, "grid");
        detail::read(j.at("grid"), "h", c.h, "grid");
    }
    if (j.contains("tolerances")) {
        const auto& t = j.at("tolerances");
        detail::check_keys(t, "tolerances", {"tol_ode", "theta_cert", "theta_mismatch", "jost_rtol", "asym_threshold"});
        detail::read(t, "tol_ode", c.tol_ode, "tolerances");
        detail::read(t, "theta_cert", c.theta_cert, "tolerances");
        detail::read(t, "theta_mismatch", c.theta_mismatch, "tolerances");
        detail::read(t, "jost_rtol", c.jost_rtol, "tolerances");
        detail::read(t, "asym_threshold", c.asym_threshold, "tolerances");
    }
    if (j.contains("spectrum")) {
        detail::check_keys(j.at("spectrum"), "spectrum", {"points", "half_width"});
        detail::read(j.at("spectrum"), "points", c.spectrum_points, "spectrum");
        detail::read(j.at("spectrum"), "half_width", c.spectrum_half_width, "spectrum");
    }
    if (j.contains("scan")) {
        detail::check_keys(j.at("scan"), "scan", {"lmin", "lmax", "n"});
        detail::read(j.at("scan"), "lmin", c.scan.lmin, "scan");
        detail::read(j.at("scan"), "lmax", c.scan.lmax, "scan");
        detail::read(j.at("scan"), "n", c.scan.n, "scan");
    }
    if (j.contains("inversion")) {
        detail::check_keys(j.at("inversion"), "inversion", {"x0"});
        detail::read(j.at("inversion"), "x0", c.x0, "inversion");
    }
    if (j.contains("control")) {
        detail::check_keys(j.at("control"), "control", {"depth", "points"});
        detail::read(j.at("control"), "depth", c.control_depth, "control");
        detail::read(j.at("control"), "points", c.control_points, "control");
    }
    if (j.contains("output")) {
        detail::check_keys(j.at("output"), "output", {"dir"});
        detail::read(j.at("output"), "dir", c.out_dir, "output");
    }
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    return config_from_json(j);
}

/// FNV-1a (64 bit) of the canonical serialization of the resolved config.
inline std::string config_hash(const RunConfig& c) {
    const std::string text = to_json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace solispec
