/// @file report_io.hpp
/// @brief CSV and JSON serialization of audit reports and report bundles.
#pragma once

#include "phiheat/scenario.hpp"

#include <json.hpp>

#include <sstream>
#include <string>
#include <vector>

namespace phiheat {

inline constexpr const char* kSchemaVersion = "1.0";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kCsvHeader = "bound_id,scenario,n_samples,empirical_constant,margin,pass,notes";

struct ReportBundle {
    std::vector<ScenarioResult> scenarios;
    int grid = 0;
    std::uint64_t seed = 0;
    std::string command;

    bool pass() const {
        for (const auto& s : scenarios)
            if (!s.pass()) return false;
        return true;
    }
};

namespace detail {

/// Non-finite doubles become strings so that the JSON stays lossless ("inf", "-inf", "nan").
inline Json number(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

inline std::string csv_number(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

inline std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += "\"\"";
        else out += ch;
    }
    return out + "\"";
}

} // namespace detail

inline Json to_json(const BoundReport& r) {
    Json samples = Json::array();
    for (const auto& s : r.samples) {
        Json in = Json::object();
        for (const auto& [k, v] : s.inputs) in[k] = detail::number(v);
        samples.push_back({{"inputs", in}, {"lhs", detail::number(s.lhs)}, {"rhs", s.rhs ? detail::number(*s.rhs) : Json()}});
    }
    Json shapes = Json::array();
    for (const auto& e : r.shape_exponents)
        shapes.push_back({{"name", e.name}, {"value", detail::number(e.value)}, {"lo", detail::number(e.lo)}, {"hi", detail::number(e.hi)}});
    return {{"bound_id", r.bound_id},
            {"scenario", r.scenario},
            {"pass", r.pass},
            {"vacuous", r.vacuous},
            {"margin", detail::number(r.margin)},
            {"empirical_constant", r.empirical_constant ? detail::number(*r.empirical_constant) : Json()},
            {"n_samples", r.samples.size()},
            {"shape_exponents", shapes},
            {"notes", r.notes},
            {"samples", samples}};
}

inline Json to_json(const ReportBundle& b) {
    Json scen = Json::array();
    Json timing = Json::object();
    std::size_t n_reports = 0, n_failed = 0, n_vacuous = 0;
    for (const auto& s : b.scenarios) {
        Json reps = Json::array();
        for (const auto& r : s.reports) {
            reps.push_back(to_json(r));
            ++n_reports;
            n_failed += r.pass ? 0 : 1;
            n_vacuous += r.vacuous ? 1 : 0;
        }
        scen.push_back({{"scenario", s.scenario}, {"pass", s.pass()}, {"reports", reps}});
        Json t = Json::object();
        for (const auto& [k, v] : s.timing_ms) t[k] = v;
        timing[s.scenario] = t;
    }
    return {{"schema_version", kSchemaVersion},
            {"tool", {{"name", "phiheat"}, {"version", kToolVersion}}},
            {"environment", {{"command", b.command}, {"grid", b.grid}, {"seed", b.seed}}},
            {"summary", {{"reports", n_reports}, {"failed", n_failed}, {"vacuous", n_vacuous}, {"pass", b.pass()}}},
            {"scenarios", scen},
            {"timing_ms", timing}};
}

inline std::string csv_row(const BoundReport& r) {
    std::string row = r.bound_id + "," + r.scenario + "," + std::to_string(r.samples.size()) + ",";
    row += r.empirical_constant ? detail::csv_number(*r.empirical_constant) : "";
    row += "," + detail::csv_number(r.margin) + "," + (r.pass ? "true" : "false") + ",";
    std::string notes = r.notes_joined();
    if (r.vacuous && notes.find("vacuous") == std::string::npos) notes = "vacuous; " + notes;
    return row + detail::csv_quote(notes);
}

inline std::string to_csv(const ReportBundle& b) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& s : b.scenarios)
        for (const auto& r : s.reports) out += csv_row(r) + "\n";
    return out;
}

/// CSV summary of a previously written JSON bundle.
inline std::string csv_from_bundle_json(const Json& j) {
    if (!j.contains("schema_version") || !j.contains("scenarios")) throw ConfigError("not a report bundle");
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& s : j.at("scenarios"))
        for (const auto& r : s.at("reports")) {
            BoundReport br;
            br.bound_id = r.at("bound_id").get<std::string>();
            br.scenario = r.at("scenario").get<std::string>();
            br.pass = r.at("pass").get<bool>();
            br.vacuous = r.at("vacuous").get<bool>();
            const auto num = [](const Json& v) {
                if (v.is_number()) return v.get<double>();
                const auto s = v.get<std::string>();
                return s == "inf" ? kInf : s == "-inf" ? -kInf : std::numeric_limits<double>::quiet_NaN();
            };
            br.margin = num(r.at("margin"));
            if (!r.at("empirical_constant").is_null()) br.empirical_constant = num(r.at("empirical_constant"));
            br.samples.resize(r.at("n_samples").get<std::size_t>());
            for (const auto& n : r.at("notes")) br.notes.push_back(n.get<std::string>());
            out += csv_row(br) + "\n";
        }
    return out;
}

/// Spectrum dump: rank, lambda, mode_l, radial_j, multiplicity.
inline std::string spectrum_csv(const Spectrum& sp) {
    std::string out = "rank,lambda,mode_l,radial_j,multiplicity\n";
    for (std::size_t k = 0; k < sp.entries.size(); ++k) {
        const auto& e = sp.entries[k];
        out += std::to_string(k) + "," + detail::csv_number(e.lambda) + "," + std::to_string(e.l) + "," +
               std::to_string(e.j) + "," + std::to_string(e.multiplicity) + "\n";
    }
    return out;
}

} // namespace phiheat
