#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <json.hpp>

#include "solispec/certificate.hpp"
#include "solispec/config.hpp"
#include "solispec/ground_state.hpp"
#include "solispec/jost.hpp"
#include "solispec/linearized_operator.hpp"

namespace solispec::report {

using nlohmann::json;

/// Header shared by every JSON artifact.
inline json header(const std::string& command, const RunConfig& cfg) {
    return {{"schema_version", schema_version},
            {"tool", "solispec"},
            {"version", tool_version},
            {"command", command},
            {"config_hash", config_hash(cfg)},
            {"config", to_json(cfg)}};
}

inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json ground(const GroundState& gs, const Nonlinearity& nl) {
    return {{"mu", gs.mu},
            {"R", gs.grid.R()},
            {"h", gs.grid.h()},
            {"points", gs.grid.size()},
            {"Q0", gs.shoot_value},
            {"c0", gs.c0},
            {"rate", gs.rate},
            {"tail_fit_residual", gs.tail_fit_residual},
            {"trust_edge", gs.trust_edge},
            {"ode_residual", gs.ode_residual},
            {"first_integral_residual", first_integral_residual(gs, nl)}};
}

inline json spectrum(const DiscreteSpectrum& s) {
    json pairs = json::array();
    for (const auto& p : s.pairs) {
        pairs.push_back({{"re", p.lambda.real()},
                         {"im", p.lambda.imag()},
                         {"residual", p.residual},
                         {"parity", std::string(to_string(p.parity))},
                         {"zero_cluster", p.zero_cluster}});
    }
    return {{"points", s.grid.size()},
            {"half_width", s.grid.R()},
            {"h", s.grid.h()},
            {"discarded_wall_modes", s.discarded_wall_modes},
            {"eigenvalues", pairs}};
}

inline json mode(const AsymptoticMode& m) {
    return {{"kind", std::string(to_string(m.kind))},
            {"channel", std::string(to_string(m.channel))},
            {"rate", m.rate},
            {"lambda", m.lambda}};
}

inline json expansion(const ModeExpansion& e, const Window& w) {
    return {{"window", {w.lo, w.hi}},
            {"coefficients", {number(e.coeffs[0]), number(e.coeffs[1]), number(e.coeffs[2]), number(e.coeffs[3])}},
            {"residual", e.residual},
            {"condition", e.condition}};
}

inline json record(const CertificateRecord& r) {
    return {{"lambda", r.lambda},
            {"v0", r.v0},
            {"v0p", r.v0p},
            {"u0", r.u0},
            {"u0p", r.u0p},
            {"scale", r.scale},
            {"normalized_v0", r.normalized_v0},
            {"normalized_v0p", r.normalized_v0p},
            {"u_positive", r.u_positive},
            {"v_signed", r.v_signed},
            {"mismatch", number(r.mismatch)},
            {"m_grow", r.m_grow},
            {"m_cos", r.m_cos},
            {"m_sin", r.m_sin},
            {"c_grow", number(r.c_grow)},
            {"c_grow_fit", number(r.c_grow_fit)},
            {"wronskian_drift", r.wronskian_drift},
            {"threshold", r.threshold},
            {"verdict", std::string(to_string(r.verdict))},
            {"note", r.note}};
}

inline json scan(const ScanReport& rep) {
    json recs = json::array();
    for (const auto& r : rep.records) recs.push_back(record(r));
    const auto& s = rep.summary;
    return {{"lambda_grid",
             {{"lmin", rep.lambdas.front()}, {"lmax", rep.lambdas.back()}, {"n", rep.lambdas.size()}}},
            {"tolerances",
             {{"theta_cert", rep.options.theta_cert},
              {"theta_mismatch", rep.options.theta_mismatch},
              {"threshold_relax", rep.options.threshold_relax},
              {"jost_rtol", rep.options.jost.rtol},
              {"asym_threshold", rep.options.jost.asym_threshold}}},
            {"summary",
             {{"count", s.count},
              {"no_embedded_eigenvalue", s.no_embedded},
              {"inconclusive", s.inconclusive},
              {"embedded_candidate", s.embedded_candidates},
              {"min_normalized_v", number(s.min_normalized)},
              {"min_mismatch", number(s.min_mismatch)},
              {"mismatch_lipschitz", s.mismatch_lipschitz},
              {"continuity_flags", s.continuity_flags}}},
            {"records", recs}};
}

inline std::string csv_number(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::string scan_csv(const ScanReport& rep) {
    std::ostringstream os;
    os << "# schema_version=" << schema_version << "\n";
    os << "lambda,v0,v0p,mismatch,verdict\n";
    for (const auto& r : rep.records) {
        os << csv_number(r.lambda) << ',' << csv_number(r.v0) << ',' << csv_number(r.v0p) << ','
           << csv_number(r.mismatch) << ',' << to_string(r.verdict) << '\n';
    }
    return os.str();
}

inline std::string ground_csv(const GroundState& gs) {
    std::ostringstream os;
    os << "# schema_version=" << schema_version << "\n";
    os << "x,Q,Qp\n";
    for (std::size_t i = 0; i < gs.grid.size(); ++i) {
        os << csv_number(gs.grid.x(i)) << ',' << csv_number(gs.Q[i]) << ',' << csv_number(gs.Qp[i]) << '\n';
    }
    return os.str();
}

inline std::string jost_csv(const JostSolution& s) {
    std::ostringstream os;
    os << "# schema_version=" << schema_version << "\n";
    os << "x,f,g,fp,gp\n";
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
        if (std::isnan(s.f[i])) continue;
        os << csv_number(s.grid.x(i)) << ',' << csv_number(s.f[i]) << ',' << csv_number(s.g[i]) << ','
           << csv_number(s.fp[i]) << ',' << csv_number(s.gp[i]) << '\n';
    }
    return os.str();
}

/// Writes text to a file, replacing it; failures are configuration errors
/// (the output path is part of the configuration).
inline void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path() && !std::filesystem::is_directory(path.parent_path())) {
        throw ConfigError("output: directory '" + path.parent_path().string() + "' does not exist");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("output: cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw ConfigError("output: write to '" + path.string() + "' failed");
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

/// Sibling path with another extension: report.json -> report.csv.
inline std::filesystem::path sibling(const std::filesystem::path& p, const std::string& ext) {
    std::filesystem::path q = p;
    q.replace_extension(ext);
    return q;
}

}  // namespace solispec::report
