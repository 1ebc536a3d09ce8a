/// @file scenario.hpp
/// @brief Scenario configuration (JSON), the manifold catalog, and audit orchestration.
///
/// Config errors carry the JSON pointer of the offending field, e.g.
/// "/curvature/eps: outside the eps-range ...".
#pragma once

#include "phiheat/bound_audit.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace phiheat {

using Json = nlohmann::json;

struct AuditRequest {
    std::string id;
    Json options = Json::object();
};

struct ScenarioConfig {
    std::string id;
    std::string catalog; ///< empty for custom manifolds
    ModelManifold manifold;
    EffectiveDim N = EffectiveDim::infinity();
    double eps = 0.0;
    std::optional<double> K; ///< nullopt: derived from the pointwise curvature scan
    int M = 512;
    int l_max = 16;
    int k_per_mode = 24;
    std::vector<AuditRequest> audits; ///< empty: every applicable audit
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string format = "both";
};

/// Canonical audit order; reports are emitted in this order.
inline const std::vector<std::string>& audit_ids() {
    static const std::vector<std::string> ids{
        "laplacian-comparison", "volume-comparison",  "volume-doubling",      "cross-center-ratio",
        "neumann-poincare",     "local-sobolev",      "mean-value",           "parabolic-harnack",
        "li-yau-harnack",       "gaussian-upper",     "gaussian-lower",       "single-center-upper",
        "davies-integral",      "stochastic-completeness", "eigenvalue-lower", "j-function",
        "li-yau"};
    return ids;
}

/// Audits whose inequality carries explicit constants (asserted literally).
inline bool is_explicit_audit(const std::string& id) {
    static const std::set<std::string> ex{"laplacian-comparison", "volume-comparison", "volume-doubling",
                                          "cross-center-ratio",   "neumann-poincare",  "davies-integral",
                                          "j-function",           "li-yau"};
    return ex.count(id) > 0;
}

/// Compact models: closed pole caps, circles, and non-truncated intervals.
inline bool is_compact_model(const ModelManifold& m) {
    if (m.domain.kind == Domain::Kind::Interval) return !m.domain.truncation;
    return m.compact_closed();
}

inline bool audit_applicable(const std::string& id, const ModelManifold& m) {
    if (id == "laplacian-comparison") return m.domain.kind == Domain::Kind::PoleCap;
    if (id == "eigenvalue-lower" || id == "j-function" || id == "li-yau") return is_compact_model(m);
    return true;
}

namespace detail {

/// Typed access into a JSON object with pointer-precise errors.
class JsonReader {
public:
    JsonReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("expected an object");
    }

    [[noreturn]] void fail(const std::string& what) const { throw ConfigError((path_.empty() ? "/" : path_) + ": " + what); }
    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError(path_ + "/" + key + ": " + what);
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
    const Json& raw(const std::string& key) const { return j_.at(key); }
    std::string child(const std::string& key) const { return path_ + "/" + key; }

    double number(const std::string& key, std::optional<double> def = std::nullopt) const {
        if (!has(key)) {
            if (def) return *def;
            fail(key, "required number missing");
        }
        const Json& v = j_.at(key);
        if (!v.is_number()) fail(key, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(key, "expected a finite number");
        return x;
    }

    int integer(const std::string& key, std::optional<int> def = std::nullopt) const {
        if (!has(key)) {
            if (def) return *def;
            fail(key, "required integer missing");
        }
        const Json& v = j_.at(key);
        if (!v.is_number_integer()) fail(key, "expected an integer");
        return v.get<int>();
    }

    std::string string(const std::string& key, std::optional<std::string> def = std::nullopt) const {
        if (!has(key)) {
            if (def) return *def;
            fail(key, "required string missing");
        }
        const Json& v = j_.at(key);
        if (!v.is_string()) fail(key, "expected a string");
        return v.get<std::string>();
    }

    bool boolean(const std::string& key, bool def) const {
        if (!has(key)) return def;
        const Json& v = j_.at(key);
        if (!v.is_boolean()) fail(key, "expected a boolean");
        return v.get<bool>();
    }

    std::vector<double> numbers(const std::string& key) const {
        const Json& v = j_.at(key);
        if (!v.is_array()) fail(key, "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) fail(key + "/" + std::to_string(i), "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    /// Rejects keys outside `allowed` so that typos do not pass silently.
    void only(std::initializer_list<const char*> allowed) const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || it.key() == a;
            if (!ok) fail(it.key(), "unknown field");
        }
    }

private:
    const Json& j_;
    std::string path_;
};

inline ProfileTerm parse_term(const Json& j, const std::string& path) {
    JsonReader r(j, path);
    r.only({"kind", "amp", "freq", "phase", "power"});
    const std::string kind = r.string("kind");
    ProfileTerm t;
    if (kind == "constant") t.kind = ProfileTerm::Kind::Constant;
    else if (kind == "power") t.kind = ProfileTerm::Kind::Power;
    else if (kind == "sin") t.kind = ProfileTerm::Kind::Sin;
    else if (kind == "cos") t.kind = ProfileTerm::Kind::Cos;
    else if (kind == "sin2") t.kind = ProfileTerm::Kind::SinSquared;
    else r.fail("kind", "unknown term kind '" + kind + "' (constant, power, sin, cos, sin2)");
    t.amp = r.number("amp");
    t.freq = r.number("freq", 1.0);
    t.phase = r.number("phase", 0.0);
    t.power = r.integer("power", 0);
    if (t.kind == ProfileTerm::Kind::Power && t.power < 0) r.fail("power", "expected a nonnegative exponent");
    return t;
}

/// {"type": "expression", "terms": [...]} or {"type": "spline", "r": [...], "values": [...]}.
/// Spline ends marked as poles get slope 0 (smoothness there); other ends are natural.
inline ScalarProfile parse_profile(const Json& j, const std::string& path, bool pole_left = false, bool pole_right = false) {
    JsonReader r(j, path);
    const std::string type = r.string("type", std::string("expression"));
    ScalarProfile p;
    if (type == "expression") {
        r.only({"type", "terms"});
        if (!r.has("terms")) return p;
        const Json& terms = r.raw("terms");
        if (!terms.is_array()) r.fail("terms", "expected an array");
        for (std::size_t i = 0; i < terms.size(); ++i) p.terms.push_back(parse_term(terms[i], r.child("terms") + "/" + std::to_string(i)));
    } else if (type == "spline") {
        r.only({"type", "r", "values"});
        auto x = r.numbers("r"), y = r.numbers("values");
        try {
            p.spline = std::make_shared<const CubicSpline>(std::move(x), std::move(y), pole_left ? std::optional<double>(0.0) : std::nullopt,
                                                         pole_right ? std::optional<double>(0.0) : std::nullopt);
        } catch (const ConfigError& e) {
            r.fail("r", e.what());
        }
    } else {
        r.fail("type", "unknown profile type '" + type + "' (expression, spline)");
    }
    return p;
}

inline EffectiveDim parse_N(const Json& j, const std::string& path) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "infinity") return EffectiveDim::infinity();
        throw ConfigError(path + ": expected a number or \"inf\"");
    }
    if (!j.is_number()) throw ConfigError(path + ": expected a number or \"inf\"");
    return EffectiveDim::finite(j.get<double>());
}

} // namespace detail

/// The catalog of model manifolds with their default curvature parameters.
inline std::vector<std::string> catalog_tags() {
    return {"euclidean2", "euclidean3", "sphere2", "sphere3", "hyperbolic2", "circle", "interval",
            "gaussian-density-interval", "sphere2-constdensity"};
}

inline ScenarioConfig catalog_scenario(const std::string& tag) {
    using std::numbers::pi;
    ScenarioConfig c;
    c.id = tag;
    c.catalog = tag;
    const auto pole = [&](int n, Domain d, WarpProfile w, double K) {
        c.manifold = {n, d, w, {}};
        c.N = EffectiveDim::finite(n);
        c.eps = 0.0;
        c.K = K;
    };
    if (tag == "euclidean2") pole(2, Domain::pole_cap(10.0, true), WarpProfile::euclidean(), 0.0);
    else if (tag == "euclidean3") pole(3, Domain::pole_cap(10.0, true), WarpProfile::euclidean(), 0.0);
    else if (tag == "sphere2") pole(2, Domain::pole_cap(pi), WarpProfile::sphere(), 1.0);
    else if (tag == "sphere3") pole(3, Domain::pole_cap(pi), WarpProfile::sphere(), 2.0);
    else if (tag == "hyperbolic2") pole(2, Domain::pole_cap(4.0, true), WarpProfile::hyperbolic(), -1.0);
    else if (tag == "sphere2-constdensity") {
        pole(2, Domain::pole_cap(pi), WarpProfile::sphere(), 1.0);
        c.manifold.density = ScalarProfile::constant(0.5);
    } else if (tag == "circle" || tag == "interval") {
        c.manifold = {1, tag == "circle" ? Domain::circle(2.0 * pi) : Domain::interval(0.0, pi), WarpProfile::flat(), {}};
        c.N = EffectiveDim::finite(2);
        c.eps = 0.0;
        c.K = 0.0;
    } else if (tag == "gaussian-density-interval") {
        c.manifold = {1, Domain::interval(-6.0, 6.0, true), WarpProfile::flat(), ScalarProfile::quadratic(1.0)};
        c.N = EffectiveDim::infinity();
        c.eps = 0.0;
        c.K = 2.0;
    } else {
        std::string all;
        for (const auto& t : catalog_tags()) all += (all.empty() ? "" : ", ") + t;
        throw ConfigError("/manifold/catalog: unknown catalog tag '" + tag + "' (" + all + ")");
    }
    return c;
}

/// Parses and validates a scenario config. Catalog defaults apply to fields left out.
inline ScenarioConfig parse_scenario(const Json& j) {
    detail::JsonReader top(j, "");
    top.only({"scenario", "manifold", "curvature", "grid", "audits", "seed", "output"});
    if (!top.has("manifold")) top.fail("manifold", "required object missing");
    detail::JsonReader man(top.raw("manifold"), "/manifold");
    ScenarioConfig c;
    if (man.has("catalog")) {
        man.only({"catalog"});
        c = catalog_scenario(man.string("catalog"));
    } else {
        man.only({"n", "domain", "warp", "density"});
        c.manifold.n = man.integer("n");
        if (!man.has("domain")) man.fail("domain", "required object missing");
        detail::JsonReader dom(man.raw("domain"), "/manifold/domain");
        dom.only({"kind", "r_max", "a", "b", "length", "truncation"});
        const std::string kind = dom.string("kind");
        const bool trunc = dom.boolean("truncation", false);
        if (kind == "pole_cap") c.manifold.domain = Domain::pole_cap(dom.number("r_max"), trunc);
        else if (kind == "interval") c.manifold.domain = Domain::interval(dom.number("a"), dom.number("b"), trunc);
        else if (kind == "circle") c.manifold.domain = Domain::circle(dom.number("length"));
        else dom.fail("kind", "unknown domain kind '" + kind + "' (pole_cap, interval, circle)");
        if (!(c.manifold.domain.r_max > c.manifold.domain.r_min)) dom.fail("domain must have positive length");
        if (!man.has("warp")) man.fail("warp", "required object missing");
        detail::JsonReader w(man.raw("warp"), "/manifold/warp");
        w.only({"base", "scale", "perturbation"});
        const std::string base = w.string("base");
        const double scale = w.number("scale", 1.0);
        if (!(scale > 0.0)) w.fail("scale", "expected a positive scale");
        if (base == "euclidean") c.manifold.warp = WarpProfile::euclidean();
        else if (base == "sphere") c.manifold.warp = WarpProfile::sphere(scale);
        else if (base == "hyperbolic") c.manifold.warp = WarpProfile::hyperbolic(scale);
        else if (base == "flat") c.manifold.warp = WarpProfile::flat();
        else w.fail("base", "unknown warp base '" + base + "' (euclidean, sphere, hyperbolic, flat)");
        if (w.has("perturbation")) c.manifold.warp.perturbation = detail::parse_profile(w.raw("perturbation"), "/manifold/warp/perturbation");
        if (man.has("density")) {
            const bool cap = c.manifold.domain.kind == Domain::Kind::PoleCap;
            const bool closes = cap && std::abs(c.manifold.warp.eval(c.manifold.domain.r_max).v) < 1e-9;
            c.manifold.density = detail::parse_profile(man.raw("density"), "/manifold/density", cap, closes);
        }
        c.id = "custom";
    }
    try {
        c.manifold.validate();
    } catch (const Error& e) {
        throw ConfigError(std::string("/manifold: ") + e.what());
    }
    c.id = top.string("scenario", c.id);

    if (top.has("curvature")) {
        detail::JsonReader cur(top.raw("curvature"), "/curvature");
        cur.only({"N", "eps", "K"});
        if (cur.has("N")) c.N = detail::parse_N(cur.raw("N"), "/curvature/N");
        c.eps = cur.number("eps", c.eps);
        if (cur.has("K")) {
            const Json& k = cur.raw("K");
            if (k.is_string() && k.get<std::string>() == "derive") c.K.reset();
            else c.K = cur.number("K");
        }
    } else if (c.catalog.empty()) {
        top.fail("curvature", "required for custom manifolds");
    }
    try {
        const auto chk = validate_eps_range(c.N, c.manifold.curvature_dim(), c.eps);
        if (!chk.admissible) throw ConfigError("/curvature/eps: " + chk.diagnostic);
        (void)make_curvature_params(c.manifold, c.N, c.eps, 0.0);
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("/curvature: ") + e.what());
    }

    if (top.has("grid")) {
        detail::JsonReader g(top.raw("grid"), "/grid");
        g.only({"M", "l_max", "k_per_mode"});
        c.M = g.integer("M", c.M);
        c.l_max = g.integer("l_max", c.l_max);
        c.k_per_mode = g.integer("k_per_mode", c.k_per_mode);
        if (c.M < 16) g.fail("M", "expected M >= 16");
        if (c.l_max < 0 || c.k_per_mode < 1) g.fail("l_max and k_per_mode must be >= 0 and >= 1");
    }
    if (top.has("audits")) {
        const Json& a = top.raw("audits");
        if (a.is_string() && a.get<std::string>() == "all") {
        } else if (a.is_array()) {
            for (std::size_t i = 0; i < a.size(); ++i) {
                const std::string path = "/audits/" + std::to_string(i);
                AuditRequest req;
                if (a[i].is_string()) req.id = a[i].get<std::string>();
                else if (a[i].is_object()) {
                    detail::JsonReader ar(a[i], path);
                    req.id = ar.string("id");
                    req.options = a[i];
                    req.options.erase("id");
                } else {
                    throw ConfigError(path + ": expected an audit id or an object with \"id\"");
                }
                if (std::find(audit_ids().begin(), audit_ids().end(), req.id) == audit_ids().end())
                    throw ConfigError(path + ": unknown audit '" + req.id + "'");
                if (!audit_applicable(req.id, c.manifold))
                    throw ConfigError(path + ": audit '" + req.id + "' does not apply to this manifold");
                c.audits.push_back(std::move(req));
            }
        } else {
            top.fail("audits", "expected \"all\" or an array");
        }
    }
    if (top.has("seed")) {
        const Json& s = top.raw("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            top.fail("seed", "expected a nonnegative integer");
        c.seed = s.get<std::uint64_t>();
    }
    if (top.has("output")) {
        detail::JsonReader o(top.raw("output"), "/output");
        o.only({"dir", "format"});
        c.out_dir = o.string("dir", std::string());
        c.format = o.string("format", c.format);
        if (c.format != "csv" && c.format != "json" && c.format != "both")
            o.fail("format", "expected csv, json or both");
    }
    return c;
}

inline ScenarioConfig parse_scenario_text(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_scenario(j);
}

/// Curvature parameters of a scenario, deriving K from the pointwise scan when unset.
inline CurvatureParams scenario_params(const ScenarioConfig& c) {
    const double K = c.K ? *c.K : derive_admissible_K(c.manifold, c.N, c.eps);
    return make_curvature_params(c.manifold, c.N, c.eps, K);
}

struct ScenarioResult {
    std::string scenario;
    std::vector<BoundReport> reports;
    std::vector<std::pair<std::string, double>> timing_ms;

    bool pass() const {
        for (const auto& r : reports)
            if (!r.pass) return false;
        return true;
    }
};

namespace detail {

/// Li-Yau parameter set for one alpha; C_hat from options or the Gaussian upper envelope.
struct LiYauSetup {
    std::vector<double> alphas{1.1, 2.0};
    double p = 3.0;
    std::optional<double> C_hat;
    std::vector<double> t_list{0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
    double T = 1.0;
};

inline LiYauSetup li_yau_setup(const ModelManifold& m, const Json& o, const std::string& path) {
    LiYauSetup s;
    s.p = m.n + 1.0;
    JsonReader r(o, path);
    r.only({"alpha", "p", "C_hat", "t_list", "T"});
    if (r.has("alpha")) {
        const Json& a = r.raw("alpha");
        s.alphas = a.is_array() ? r.numbers("alpha") : std::vector<double>{r.number("alpha")};
    }
    s.p = r.number("p", s.p);
    if (r.has("C_hat")) s.C_hat = r.number("C_hat");
    if (r.has("t_list")) s.t_list = r.numbers("t_list");
    s.T = r.number("T", s.T);
    for (double a : s.alphas)
        if (!(a > 1.0)) r.fail("alpha", "expected alpha > 1");
    if (!(s.p > m.n)) r.fail("p", "expected p > n");
    for (double t : s.t_list)
        if (!(t > 0.0)) r.fail("t_list", "expected positive times");
    if (s.C_hat && !(*s.C_hat > 0.0)) r.fail("C_hat", "expected a positive constant");
    return s;
}

inline AuditCylinderSpec cylinder_from(const ModelManifold& m, const Json& o, const std::string& path) {
    JsonReader r(o, path);
    r.only({"R", "t0", "delta", "eps", "rho", "varsigma"});
    auto cyl = AuditCylinderSpec::standard(r.number("R", 0.3 * max_ball_radius(m)));
    const double d = r.number("delta", cyl.delta);
    if (d != cyl.delta) {
        const double R = cyl.R;
        cyl = AuditCylinderSpec::standard(R);
        cyl.delta = d;
        cyl.eps = (1.0 + d) / 4.0;
        cyl.rho = (3.0 - d) / 4.0;
        cyl.varsigma = (3.0 + d) / 4.0;
    }
    cyl.t0 = r.number("t0", 2.0 * cyl.R * cyl.R);
    cyl.eps = r.number("eps", cyl.eps);
    cyl.rho = r.number("rho", cyl.rho);
    cyl.varsigma = r.number("varsigma", cyl.varsigma);
    try {
        cyl.validate();
    } catch (const ConfigError& e) {
        r.fail(e.what());
    }
    return cyl;
}

/// Combines per-alpha Li-Yau reports into one (all samples, pass iff every alpha passes).
inline BoundReport merge_reports(std::vector<BoundReport> parts) {
    BoundReport out = std::move(parts.front());
    for (std::size_t k = 1; k < parts.size(); ++k) {
        auto& p = parts[k];
        out.samples.insert(out.samples.end(), p.samples.begin(), p.samples.end());
        out.shape_exponents.insert(out.shape_exponents.end(), p.shape_exponents.begin(), p.shape_exponents.end());
        out.notes.insert(out.notes.end(), p.notes.begin(), p.notes.end());
        out.pass = out.pass && p.pass;
        out.vacuous = out.vacuous && p.vacuous;
        out.margin = std::min(out.margin, p.margin);
    }
    return out;
}

} // namespace detail

/// Runs the scenario's audits in canonical order. Numerical failures inside an audit become
/// failing reports; config and parameter errors propagate.
inline ScenarioResult run_scenario(const ScenarioConfig& c) {
    using Clock = std::chrono::steady_clock;
    ScenarioResult res;
    res.scenario = c.id;
    const ModelManifold& m = c.manifold;
    CurvatureParams p;
    try {
        p = scenario_params(c);
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("/curvature: ") + e.what());
    }
    AuditSettings st;
    st.M = c.M;

    std::vector<AuditRequest> todo;
    for (const auto& id : audit_ids()) {
        if (c.audits.empty()) {
            if (audit_applicable(id, m)) todo.push_back({id, Json::object()});
        } else {
            for (const auto& a : c.audits)
                if (a.id == id) todo.push_back(a);
        }
    }

    std::optional<double> envelope; // C_up at eps_har = 1, shared by the Li-Yau audits
    const auto gaussian_envelope = [&]() {
        if (!envelope) {
            const auto r = audit_gaussian_upper(m, p, 1.0, KernelSamplePlan::standard(m), st);
            envelope = r.empirical_constant.value_or(kInf);
        }
        return *envelope;
    };
    const double D = detail::max_ball_radius(m);

    for (std::size_t k = 0; k < todo.size(); ++k) {
        const auto& req = todo[k];
        const std::string path = "/audits/" + req.id;
        const Json& o = req.options;
        const auto t0 = Clock::now();
        BoundReport r;
        try {
            detail::JsonReader opt(o, path);
            if (req.id == "laplacian-comparison") {
                opt.only({"samples"});
                r = audit_laplacian_comparison(m, p, opt.integer("samples", 100), st);
            } else if (req.id == "volume-comparison") {
                opt.only({"samples"});
                r = audit_volume_comparison(m, p, opt.integer("samples", 8), st);
            } else if (req.id == "volume-doubling") {
                opt.only({"samples"});
                r = audit_doubling(m, p, opt.integer("samples", 12), st);
            } else if (req.id == "cross-center-ratio") {
                opt.only({"samples"});
                r = audit_cross_center(m, p, opt.integer("samples", 8), st);
            } else if (req.id == "neumann-poincare") {
                opt.only({"R"});
                r = audit_poincare(m, p, opt.number("R", 0.25 * D), st);
            } else if (req.id == "local-sobolev") {
                opt.only({"R"});
                r = audit_sobolev(m, p, opt.number("R", 0.5 * D), st);
            } else if (req.id == "mean-value") {
                r = audit_mean_value(m, p, detail::cylinder_from(m, o, path), st);
            } else if (req.id == "parabolic-harnack") {
                r = audit_harnack(m, p, detail::cylinder_from(m, o, path), st);
            } else if (req.id == "li-yau-harnack") {
                opt.only({"R"});
                r = audit_li_yau_harnack(m, p, opt.number("R", 0.5 * D), st);
            } else if (req.id == "gaussian-upper" || req.id == "single-center-upper") {
                opt.only({"eps_har"});
                const double e = opt.number("eps_har", 1.0);
                if (!(e > 0.0)) opt.fail("eps_har", "expected eps_har > 0");
                const auto plan = KernelSamplePlan::standard(m);
                r = req.id == "gaussian-upper" ? audit_gaussian_upper(m, p, e, plan, st)
                                               : audit_single_center_upper(m, p, e, plan, st);
                if (req.id == "gaussian-upper" && e == 1.0) envelope = r.empirical_constant.value_or(kInf);
            } else if (req.id == "gaussian-lower") {
                opt.only({});
                r = audit_gaussian_lower(m, p, KernelSamplePlan::standard(m), st);
            } else if (req.id == "davies-integral") {
                opt.only({});
                r = audit_davies(m, st);
            } else if (req.id == "stochastic-completeness") {
                opt.only({"t"});
                r = audit_stochastic_completeness(m, opt.number("t", 1.0), st);
            } else if (req.id == "eigenvalue-lower") {
                opt.only({"k_max"});
                r = audit_eigenvalue_lower(m, p, opt.integer("k_max", 200), st);
            } else if (req.id == "j-function" || req.id == "li-yau") {
                const auto s = detail::li_yau_setup(m, o, path);
                const double C_hat = s.C_hat ? *s.C_hat : gaussian_envelope();
                const std::string src = s.C_hat ? "user-supplied" : "empirical-envelope";
                const auto grid = detail::model_grid(m, st.M);
                if (req.id == "j-function") {
                    r = audit_j_function(m, make_li_yau_params(m, p, grid, s.alphas.front(), s.p, C_hat, src), s.T, st);
                } else {
                    std::vector<BoundReport> parts;
                    for (double a : s.alphas) {
                        auto part = audit_li_yau(m, p, make_li_yau_params(m, p, grid, a, s.p, C_hat, src), s.t_list, st);
                        for (auto& smp : part.samples) smp.inputs.insert(smp.inputs.begin(), {"alpha", a});
                        parts.push_back(std::move(part));
                    }
                    r = detail::merge_reports(std::move(parts));
                }
            }
        } catch (const NumericalError& e) {
            r = BoundReport{};
            r.bound_id = req.id;
            r.pass = false;
            r.note(std::string("numerical error: ") + e.what());
        } catch (const OutOfRangeError& e) {
            r = BoundReport{};
            r.bound_id = req.id;
            r.pass = false;
            r.note(std::string("out of range: ") + e.what());
        } catch (const ParameterError& e) {
            throw ConfigError(path + ": " + e.what());
        }
        r.scenario = c.id;
        if (p.band_warning) r.note("density band estimated on a truncated domain");
        res.timing_ms.emplace_back(req.id, std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
        res.reports.push_back(std::move(r));
    }
    return res;
}

} // namespace phiheat
