// solispec command-line front end.
//
// Exit codes: 0 success, 1 hypothesis violation (e.g. no monotone ground
// state), 2 configuration or usage error, 3 numerical failure.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "solispec/certificate.hpp"
#include "solispec/config.hpp"
#include "solispec/ground_state.hpp"
#include "solispec/inversion.hpp"
#include "solispec/jost.hpp"
#include "solispec/linearized_operator.hpp"
#include "solispec/report.hpp"

namespace fs = std::filesystem;
using namespace solispec;
using report::json;

namespace {

struct Common {
    std::string config_path;
    std::string out;
};

RunConfig load(const Common& c) {
    return c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
}

fs::path output_path(const Common& c, const RunConfig& cfg, const char* fallback) {
    const fs::path p = c.out.empty() ? fs::path(cfg.out_dir) / fallback : fs::path(c.out);
    if (p.has_parent_path() && !fs::is_directory(p.parent_path())) {
        throw ConfigError("output: directory '" + p.parent_path().string() + "' does not exist");
    }
    return p;
}

void finish_config(RunConfig& cfg) {
    validate(cfg);
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
}

void check_lambda(const RunConfig& cfg, double lambda) {
    if (!(std::abs(lambda) >= cfg.mu * (1.0 - 1e-12))) {
        throw ConfigError("--lambda must satisfy |lambda| >= mu (the gap (-mu, mu) has no Jost solutions)");
    }
}

struct Pipeline {
    Nonlinearity nl;
    GroundState gs;
    PotentialMatrix potential;
};

Pipeline ground_pipeline(const RunConfig& cfg) {
    Nonlinearity nl = cfg.nonlinearity.build();
    GroundState gs = solve_ground_state(nl, cfg.mu, cfg.ground_options());
    PotentialMatrix p = potential_V(gs, nl);
    return {std::move(nl), std::move(gs), std::move(p)};
}

int run_ground(const Common& c) {
    RunConfig cfg = load(c);
    finish_config(cfg);
    const fs::path out = output_path(c, cfg, "ground.csv");
    const Pipeline pl = ground_pipeline(cfg);
    json j = report::header("ground", cfg);
    j["ground_state"] = report::ground(pl.gs, pl.nl);
    report::write_file(out, report::ground_csv(pl.gs));
    report::write_json(report::sibling(out, ".json"), j);
    std::cout << "Q(0) = " << pl.gs.shoot_value << "  c0 = " << pl.gs.c0 << "  rate = " << pl.gs.rate << "\n";
    return 0;
}

int run_spectrum(const Common& c) {
    RunConfig cfg = load(c);
    finish_config(cfg);
    const fs::path out = output_path(c, cfg, "spectrum.json");
    const Pipeline pl = ground_pipeline(cfg);
    const DiscreteSpectrum s = discrete_eigenvalues(pl.potential, cfg.spectrum_options());
    json j = report::header("spectrum", cfg);
    j["spectrum"] = report::spectrum(s);
    report::write_json(out, j);
    for (const auto& p : s.pairs) {
        std::cout << p.lambda.real() << (p.lambda.imag() < 0 ? " - " : " + ") << std::abs(p.lambda.imag()) << "i  "
                  << to_string(p.parity) << (p.zero_cluster ? "  (zero cluster)" : "") << "\n";
    }
    return 0;
}

int run_jost(const Common& c, double lambda) {
    RunConfig cfg = load(c);
    finish_config(cfg);
    check_lambda(cfg, lambda);
    const fs::path out = output_path(c, cfg, "jost.csv");
    const Pipeline pl = ground_pipeline(cfg);
    const JostSolution s = decaying_solution(pl.potential, lambda, cfg.certificate_options().jost);
    json j = report::header("jost", cfg);
    json modes = json::array();
    for (const auto& m : asymptotic_modes(lambda, cfg.mu)) modes.push_back(report::mode(m));
    j["jost"] = {{"lambda", lambda},
                 {"declared", report::mode(s.declared)},
                 {"modes", modes},
                 {"normalization", s.normalization},
                 {"x_asym", s.x_asym},
                 {"x_start", s.x_start},
                 {"companion_wronskian_drift", s.companion_wronskian_drift},
                 {"origin",
                  {{"c_grow", s.origin.c_grow},
                   {"m_grow", s.origin.m_grow},
                   {"m_cos", s.origin.m_cos},
                   {"m_sin", s.origin.m_sin},
                   {"mismatch", s.origin.mismatch}}}};
    for (End end : {End::plus, End::minus}) {
        const char* key = end == End::plus ? "expansion_plus" : "expansion_minus";
        try {
            const Window w = default_window(s, end);
            j["jost"][key] = report::expansion(expand_in_modes(s, end, w), w);
        } catch (const ConditioningError& e) {
            j["jost"][key] = {{"error", e.what()}};
        }
    }
    report::write_file(out, report::jost_csv(s));
    report::write_json(report::sibling(out, ".json"), j);
    std::cout << "mismatch = " << s.origin.mismatch << "  x_asym = " << s.x_asym << "\n";
    return 0;
}

int run_invert_check(const Common& c, double lambda, std::optional<double> x0) {
    RunConfig cfg = load(c);
    if (x0) cfg.x0 = *x0;
    finish_config(cfg);
    check_lambda(cfg, lambda);
    std::optional<fs::path> out;
    if (!c.out.empty()) out = output_path(c, cfg, "invert.json");
    const Pipeline pl = ground_pipeline(cfg);
    JostOptions jo = cfg.certificate_options().jost;
    jo.continue_left = false;
    const JostSolution s = decaying_solution(pl.potential, lambda, jo);
    const std::size_t n = s.grid.size();
    std::vector<double> u(n, 0.0), v(n, 0.0);
    for (std::size_t i = s.grid.center(); i < n; ++i) {
        u[i] = s.f[i] + s.g[i];
        v[i] = s.f[i] - s.g[i];
    }
    const FixedPointResidual r = fixed_point_residual(pl.gs, u, v, lambda, cfg.x0);
    std::cout << "r_u = " << r.r_u << "\nr_v = " << r.r_v << "\n";
    if (out) {
        json j = report::header("invert-check", cfg);
        j["invert_check"] = {{"lambda", lambda}, {"x0", cfg.x0}, {"r_u", r.r_u}, {"r_v", r.r_v}};
        report::write_json(*out, j);
    }
    return 0;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

struct ScanArgs {
    std::optional<double> lmin, lmax;
    std::optional<std::size_t> n;
    std::optional<unsigned> threads;
    bool timestamp = false;
};

int run_scan(const Common& c, const ScanArgs& a) {
    RunConfig cfg = load(c);
    if (a.lmin) cfg.scan.lmin = *a.lmin;
    if (a.lmax) cfg.scan.lmax = *a.lmax;
    if (a.n) cfg.scan.n = *a.n;
    if (a.threads) cfg.threads = *a.threads;
    finish_config(cfg);
    const fs::path out = output_path(c, cfg, "report.json");
    const std::string started = a.timestamp ? utc_now() : "";
    const Pipeline pl = ground_pipeline(cfg);
    const ScanReport rep = scan_embedded(pl.potential, linspace(cfg.scan.lmin, cfg.scan.lmax, cfg.scan.n),
                                         cfg.certificate_options(), cfg.threads);
    json j = report::header("scan", cfg);
    j["ground_state"] = report::ground(pl.gs, pl.nl);
    j["scan"] = report::scan(rep);
    if (a.timestamp) j["timestamps"] = {{"started", started}, {"finished", utc_now()}};
    report::write_json(out, j);
    report::write_file(report::sibling(out, ".csv"), report::scan_csv(rep));
    const auto& s = rep.summary;
    std::cout << s.count << " records: " << s.no_embedded << " no-embedded-eigenvalue, " << s.inconclusive
              << " inconclusive, " << s.embedded_candidates << " embedded-candidate\n"
              << "min normalized v = " << s.min_normalized << "  min mismatch = " << s.min_mismatch << "\n";
    return 0;
}

struct ControlArgs {
    std::optional<double> mu;
    double depth = 6.0;
    bool depth_set = false;
    std::optional<std::size_t> n;
};

int run_control(const Common& c, const ControlArgs& a) {
    RunConfig cfg = load(c);
    if (a.mu) cfg.mu = *a.mu;
    if (a.depth_set) cfg.control_depth = a.depth;
    if (a.n) cfg.control_points = *a.n;
    if (cfg.scan.lmin < cfg.mu) cfg.scan.lmin = cfg.mu;
    if (cfg.scan.lmax < cfg.scan.lmin) cfg.scan.lmax = cfg.scan.lmin;
    finish_config(cfg);
    const fs::path out = output_path(c, cfg, "control.json");
    ControlOptions o;
    o.R = cfg.resolved_R();
    o.h = cfg.resolved_h();
    o.points = cfg.control_points;
    o.threads = cfg.threads;
    o.cert = cfg.certificate_options();
    const ControlResult res = negative_control(cfg.mu, cfg.control_depth, o);
    json j = report::header("control", cfg);
    json crossings = json::array();
    for (double x : res.crossings) crossings.push_back(x);
    j["control"] = {{"mu", res.mu},
                    {"depth", res.depth},
                    {"crossings", crossings},
                    {"certificate", report::record(res.at_crossing)},
                    {"scan", report::scan(res.scan)}};
    report::write_json(out, j);
    report::write_file(report::sibling(out, ".csv"), report::scan_csv(res.scan));
    std::cout << "crossing at lambda = " << res.crossings.front() << ": " << to_string(res.at_crossing.verdict)
              << " (mismatch " << res.at_crossing.mismatch << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"solispec: embedded-eigenvalue certificates for NLS ground states"};
    app.set_version_flag("--version", std::string(tool_version));
    bool print_defaults = false;
    app.add_flag("--print-defaults", print_defaults, "Print the default configuration as JSON and exit");

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "JSON configuration file")->check(CLI::ExistingFile);
        sub->add_option("--out", common.out, "Output file (default inside output.dir)");
    };

    auto* ground = app.add_subcommand("ground", "Solve for the ground state; writes ground.csv and a JSON sidecar");
    add_common(ground);

    auto* spectrum = app.add_subcommand("spectrum", "Discrete eigenvalues of the linearized operator in the gap");
    add_common(spectrum);

    double lambda = 0.0;
    auto* jost = app.add_subcommand("jost", "Decaying Jost solution at one lambda (CSV x,f,g,fp,gp)");
    add_common(jost);
    jost->add_option("--lambda", lambda, "Spectral parameter, |lambda| >= mu")->required();

    std::optional<double> x0;
    auto* invert = app.add_subcommand("invert-check", "Fixed-point residuals r_u, r_v of the decaying solution");
    add_common(invert);
    invert->add_option("--lambda", lambda, "Spectral parameter, |lambda| >= mu")->required();
    invert->add_option("--x0", x0, "Left end of the half line");

    ScanArgs sa;
    auto* scan = app.add_subcommand("scan", "Certificate scan over a lambda grid; writes JSON and CSV reports");
    add_common(scan);
    scan->add_option("--lmin", sa.lmin, "Smallest lambda");
    scan->add_option("--lmax", sa.lmax, "Largest lambda");
    scan->add_option("--n", sa.n, "Number of lambda points");
    scan->add_option("--threads", sa.threads, "Worker threads");
    scan->add_flag("--timestamp", sa.timestamp, "Record wall-clock timestamps (breaks bit-identical reruns)");

    ControlArgs ca;
    auto* control = app.add_subcommand("control", "Negative control: decoupled well with an embedded eigenvalue");
    add_common(control);
    control->add_option("--mu", ca.mu, "Frequency mu");
    control->add_option("--depth", ca.depth, "Well depth of depth*sech^2")->each([&](const std::string&) {
        ca.depth_set = true;
    });
    control->add_option("--n", ca.n, "Coarse scan points");

    app.require_subcommand(0, 1);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (print_defaults) {
            std::cout << to_json(RunConfig{}).dump(2) << "\n";
            return 0;
        }
        if (*ground) return run_ground(common);
        if (*spectrum) return run_spectrum(common);
        if (*jost) return run_jost(common, lambda);
        if (*invert) return run_invert_check(common, lambda, x0);
        if (*scan) return run_scan(common, sa);
        if (*control) return run_control(common, ca);
        std::cerr << app.help();
        return 2;
    } catch (const HypothesisViolation& e) {
        std::cerr << "hypothesis violation: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
