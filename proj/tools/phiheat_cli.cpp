/// @file phiheat_cli.cpp
/// @brief Command-line runner: validate, spectrum, kernel, audit, liyau, fuzz, report.
///
/// Exit codes: 0 all audits pass, 1 an audit failed, 2 config error.

#include "phiheat/fuzz.hpp"
#include "phiheat/report_io.hpp"
#include "phiheat/scenario.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace phiheat;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> grid;
    std::string out;
    std::string format;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ScenarioConfig load(const Common& o) {
    if (o.config.empty()) throw ConfigError("--config is required");
    auto c = parse_scenario_text(read_file(o.config));
    if (o.grid) {
        if (*o.grid < 16) throw ConfigError("--grid: expected M >= 16");
        c.M = *o.grid;
    }
    if (o.seed) c.seed = *o.seed;
    if (!o.out.empty()) c.out_dir = o.out;
    if (!o.format.empty()) c.format = o.format;
    return c;
}

void write_text(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw ConfigError("cannot write '" + p.string() + "'");
    out << text;
}

/// Writes report.csv / report.json into the output directory and prints the CSV summary.
int emit(const ReportBundle& b, const std::string& dir, const std::string& format) {
    const std::string csv = to_csv(b);
    std::cout << csv;
    if (!dir.empty()) {
        if (format == "csv" || format == "both") write_text(fs::path(dir) / "report.csv", csv);
        if (format == "json" || format == "both") write_text(fs::path(dir) / "report.json", to_json(b).dump(2) + "\n");
    }
    return b.pass() ? 0 : 1;
}

int cmd_validate(const Common& o) {
    const auto c = load(o);
    const auto p = scenario_params(c);
    const auto chk = validate_eps_range(c.N, c.manifold.curvature_dim(), c.eps);
    const auto scan = curvature_hypothesis_scan(c.manifold, p);
    Json j = {{"scenario", c.id},
              {"eps_range", chk.diagnostic},
              {"N", c.N.str()},
              {"eps", c.eps},
              {"K", p.K},
              {"K_source", c.K ? "config" : "derived"},
              {"c", p.c},
              {"nu", p.nu},
              {"band", {{"a", p.a}, {"b", p.b}, {"truncated_domain", p.band_warning}}},
              {"curvature_scan", {{"holds", scan.holds}, {"worst_violation", scan.worst_violation}, {"worst_r", scan.worst_r}, {"points", scan.points}}}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_spectrum(const Common& o) {
    const auto c = load(o);
    const auto g = detail::model_grid(c.manifold, c.M);
    const auto sp = full_spectrum(c.manifold, g, c.manifold.one_dimensional() ? 0 : c.l_max, std::min(c.k_per_mode, g->M));
    const std::string csv = spectrum_csv(sp);
    std::cout << csv;
    if (!c.out_dir.empty()) write_text(fs::path(c.out_dir) / "spectrum.csv", csv);
    return 0;
}

int cmd_kernel(const Common& o, const std::vector<double>& times, std::optional<int> source) {
    const auto c = load(o);
    if (times.empty()) throw ConfigError("--t: at least one time is required");
    for (double t : times)
        if (!(t > 0.0)) throw ConfigError("--t: times must be positive");
    const auto g = detail::model_grid(c.manifold, c.M);
    const int src = source ? *source : detail::center_node(c.manifold, *g);
    if (src < 0 || src >= g->M) throw ConfigError("--source: node index out of range");
    const auto k = HeatKernel::spectral(c.manifold, g, *std::min_element(times.begin(), times.end()), true);
    std::ostringstream os;
    os.precision(17);
    os << "node,time,value\n";
    for (double t : times) {
        const auto col = k.column(src, t, true);
        for (int i = 0; i < g->M; ++i) os << i << "," << t << "," << col[i] << "\n";
    }
    std::cout << os.str();
    if (!c.out_dir.empty()) write_text(fs::path(c.out_dir) / "kernel.csv", os.str());
    return 0;
}

int cmd_audit(const Common& o, bool li_yau_only) {
    auto c = load(o);
    if (li_yau_only) {
        if (!is_compact_model(c.manifold)) throw ConfigError("/manifold: the Li-Yau audits need a compact model");
        std::vector<AuditRequest> keep;
        for (const auto& a : c.audits)
            if (a.id == "j-function" || a.id == "li-yau") keep.push_back(a);
        if (keep.empty()) keep = {{"j-function", Json::object()}, {"li-yau", Json::object()}};
        c.audits = keep;
    }
    ReportBundle b;
    b.command = li_yau_only ? "liyau" : "audit";
    b.grid = c.M;
    b.seed = c.seed;
    b.scenarios.push_back(run_scenario(c));
    return emit(b, c.out_dir, c.format);
}

int cmd_fuzz(const Common& o, int count, double amplitude) {
    ScenarioConfig base = o.config.empty() ? fuzz_base_sphere() : load(o);
    if (o.seed) base.seed = *o.seed;
    FuzzSpec spec;
    spec.count = count;
    spec.amplitude = amplitude;
    if (o.grid) spec.M = *o.grid;
    ReportBundle b;
    b.command = "fuzz";
    b.grid = spec.M;
    b.seed = base.seed;
    b.scenarios = fuzz(base, spec, base.seed);
    return emit(b, o.out.empty() ? base.out_dir : o.out, o.format.empty() ? base.format : o.format);
}

int cmd_report(const Common& o) {
    if (o.config.empty()) throw ConfigError("--config: path of a report.json bundle is required");
    Json j;
    try {
        j = Json::parse(read_file(o.config));
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("bundle is not valid JSON: ") + e.what());
    }
    const std::string csv = csv_from_bundle_json(j);
    if (o.format == "json") std::cout << j.dump(2) << "\n";
    else std::cout << csv;
    if (!o.out.empty()) write_text(fs::path(o.out) / "report.csv", csv);
    const bool pass = j.at("summary").at("pass").get<bool>();
    return pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Audits heat-kernel, Harnack and Li-Yau inequalities on weighted model manifolds"};
    app.require_subcommand(1);
    Common o;
    std::uint64_t seed = 0;
    int grid = 0;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "scenario JSON (or report bundle for 'report')");
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--grid", grid, "radial grid size M");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--format", o.format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
    };
    auto* v = app.add_subcommand("validate", "check parameters: eps-range, density band, curvature scan");
    auto* s = app.add_subcommand("spectrum", "print the spectrum as CSV");
    auto* k = app.add_subcommand("kernel", "print zonal heat-kernel columns as CSV");
    auto* a = app.add_subcommand("audit", "run the scenario's audits");
    auto* l = app.add_subcommand("liyau", "run the J-function and Li-Yau audits");
    auto* f = app.add_subcommand("fuzz", "run a seeded random-scenario campaign");
    auto* r = app.add_subcommand("report", "summarize a report.json bundle as CSV");
    for (auto* sub : {v, s, k, a, l, f, r}) add_common(sub);
    std::vector<double> times{0.1, 1.0};
    int source = -1;
    k->add_option("--t", times, "times");
    k->add_option("--source", source, "source node (default: the standard center)");
    int count = 50;
    double amplitude = 0.3;
    f->add_option("--count", count, "number of samples");
    f->add_option("--amplitude", amplitude, "cap on the l1 norm of the density coefficients");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    for (auto* sub : {v, s, k, a, l, f, r}) {
        if (sub->count("--seed")) o.seed = seed;
        if (sub->count("--grid")) o.grid = grid;
    }
    try {
        if (v->parsed()) return cmd_validate(o);
        if (s->parsed()) return cmd_spectrum(o);
        if (k->parsed()) return cmd_kernel(o, times, source >= 0 ? std::optional<int>(source) : std::nullopt);
        if (a->parsed()) return cmd_audit(o, false);
        if (l->parsed()) return cmd_audit(o, true);
        if (f->parsed()) return cmd_fuzz(o, count, amplitude);
        if (r->parsed()) return cmd_report(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
