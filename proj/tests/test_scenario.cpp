/// @file test_scenario.cpp
/// @brief Scenario parsing and validation, catalog models, audit dispatch, fuzz determinism and
/// report serialization.

#include "phiheat/fuzz.hpp"
#include "phiheat/report_io.hpp"
#include "phiheat/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace phiheat;
using std::numbers::pi;

namespace {

/// Message of the ConfigError raised while parsing `text`, or "" when parsing succeeds.
std::string config_error(const std::string& text) {
    try {
        (void)parse_scenario_text(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Parse, CatalogScenarioWithOverrides) {
    const auto c = parse_scenario_text(R"({"scenario": "s", "manifold": {"catalog": "sphere2"},
        "grid": {"M": 64}, "audits": ["volume-comparison", {"id": "neumann-poincare", "R": 0.5}],
        "seed": 9, "output": {"dir": "out/x", "format": "csv"}})");
    EXPECT_EQ(c.id, "s");
    EXPECT_EQ(c.M, 64);
    EXPECT_EQ(c.seed, 9u);
    ASSERT_EQ(c.audits.size(), 2u);
    EXPECT_EQ(c.audits[1].options.at("R").get<double>(), 0.5);
    EXPECT_FALSE(c.audits[1].options.contains("id"));
    EXPECT_EQ(c.format, "csv");
    EXPECT_EQ(*c.K, 1.0);
}

TEST(Parse, CustomManifoldWithTermsAndDerivedK) {
    const auto c = parse_scenario_text(R"({"manifold": {"n": 3,
        "domain": {"kind": "pole_cap", "r_max": 3.141592653589793},
        "warp": {"base": "sphere"},
        "density": {"terms": [{"kind": "cos", "amp": 0.2, "freq": 1.0}]}},
        "curvature": {"N": "inf", "eps": 0.5, "K": "derive"}})");
    EXPECT_EQ(c.manifold.n, 3);
    EXPECT_TRUE(c.N.infinite());
    EXPECT_FALSE(c.K.has_value());
    const auto p = scenario_params(c);
    EXPECT_TRUE(curvature_hypothesis_scan(c.manifold, p).holds);
    EXPECT_GT(p.K, 0.0);
}

TEST(Parse, ErrorsCarryJsonPointers) {
    EXPECT_NE(config_error("{").find("not valid JSON"), std::string::npos);
    EXPECT_NE(config_error(R"({"manifold": {"catalog": "torus"}})").find("/manifold/catalog"), std::string::npos);
    EXPECT_NE(config_error(R"({"manifold": {"catalog": "sphere2"}, "gird": {}})").find("/gird: unknown field"),
              std::string::npos);
    EXPECT_NE(config_error(R"({"manifold": {"catalog": "sphere2"}, "grid": {"M": 4}})").find("/grid/M"),
              std::string::npos);
    EXPECT_NE(config_error(R"({"manifold": {"catalog": "sphere2"}, "audits": ["nope"]})").find("/audits/0"),
              std::string::npos);
    EXPECT_NE(config_error(R"({"manifold": {"catalog": "euclidean2"}, "audits": ["li-yau"]})").find("does not apply"),
              std::string::npos);
    EXPECT_NE(config_error(R"({"manifold": {"n": 2, "domain": {"kind": "pole_cap", "r_max": 1}, "warp": {"base": "flat"}},
                             "curvature": {"N": 2, "eps": 0, "K": 0}})")
                  .find("/manifold"),
              std::string::npos);
    EXPECT_NE(config_error(R"({"manifold": {"catalog": "sphere2"}, "seed": -1})").find("/seed"), std::string::npos);
}

TEST(Parse, EpsOutsideRangeIsAConfigError) {
    const auto msg = config_error(R"({"manifold": {"catalog": "sphere2"}, "curvature": {"N": 4, "eps": 2}})");
    EXPECT_NE(msg.find("/curvature/eps"), std::string::npos);
    EXPECT_NE(msg.find("outside the eps-range"), std::string::npos);
    EXPECT_NE(config_error(R"({"manifold": {"catalog": "sphere3"}, "curvature": {"N": 2.5}})").find("/curvature"),
              std::string::npos);
}

TEST(Parse, SplineDensityIsFlatAtPoles) {
    const auto c = parse_scenario_text(R"({"manifold": {"n": 2,
        "domain": {"kind": "pole_cap", "r_max": 3.141592653589793}, "warp": {"base": "sphere"},
        "density": {"type": "spline", "r": [0, 1, 2, 3.141592653589793], "values": [0.1, 0.05, -0.04, -0.1]}},
        "curvature": {"N": "inf", "eps": 0.5, "K": "derive"}})");
    EXPECT_NEAR(c.manifold.phi(0.0).d1, 0.0, 1e-14);
    EXPECT_NEAR(c.manifold.phi(pi).d1, 0.0, 1e-14);
    EXPECT_NEAR(c.manifold.phi(1.0).v, 0.05, 1e-14);
    EXPECT_TRUE(std::isfinite(scenario_params(c).K));
    EXPECT_NE(config_error(R"({"manifold": {"n": 2, "domain": {"kind": "pole_cap", "r_max": 3.141592653589793},
        "warp": {"base": "sphere"}, "density": {"type": "spline", "r": [0, 2, 1], "values": [0, 0, 0]}},
        "curvature": {"N": "inf", "eps": 0}})").find("/manifold/density"),
              std::string::npos);
}

TEST(Spline, InterpolatesAndReproducesCubics) {
    // A clamped spline reproduces any cubic whose end slopes it is given.
    const auto f = [](double x) { return 1.0 - 2.0 * x + 0.5 * x * x * x; };
    std::vector<double> x{0, 0.4, 1.1, 1.5, 2.0}, y;
    for (double v : x) y.push_back(f(v));
    const CubicSpline s(x, y, -2.0, -2.0 + 1.5 * 4.0);
    for (double r : {0.1, 0.77, 1.3, 1.9}) {
        const Jet j = s.eval(r);
        EXPECT_NEAR(j.v, f(r), 1e-12);
        EXPECT_NEAR(j.d1, -2.0 + 1.5 * r * r, 1e-11);
        EXPECT_NEAR(j.d2, 3.0 * r, 1e-10);
        EXPECT_NEAR(j.d3, 3.0, 1e-9);
    }
    const CubicSpline nat({0, 1, 2}, {0, 1, 0});
    EXPECT_NEAR(nat.eval(0.0).d2, 0.0, 1e-14);
    EXPECT_NEAR(nat.eval(2.0).d2, 0.0, 1e-14);
    EXPECT_THROW(CubicSpline({0, 1}, {0, 1}), ConfigError);
}

TEST(Catalog, EveryTagValidatesAndRespectsItsCurvature) {
    for (const auto& tag : catalog_tags()) {
        const auto c = catalog_scenario(tag);
        EXPECT_NO_THROW(c.manifold.validate()) << tag;
        const auto p = scenario_params(c);
        EXPECT_TRUE(curvature_hypothesis_scan(c.manifold, p).holds) << tag;
    }
    EXPECT_TRUE(is_compact_model(catalog_scenario("circle").manifold));
    EXPECT_FALSE(is_compact_model(catalog_scenario("euclidean2").manifold));
    EXPECT_FALSE(audit_applicable("laplacian-comparison", catalog_scenario("interval").manifold));
}

TEST(Run, ReportsInCanonicalOrderWithTiming) {
    auto c = catalog_scenario("sphere2");
    c.M = 64;
    c.audits = {{"volume-doubling", Json::object()}, {"laplacian-comparison", Json::object()}};
    const auto res = run_scenario(c);
    ASSERT_EQ(res.reports.size(), 2u);
    EXPECT_EQ(res.reports[0].bound_id, "laplacian-comparison");
    EXPECT_EQ(res.reports[1].bound_id, "volume-doubling");
    EXPECT_EQ(res.timing_ms.size(), 2u);
    EXPECT_TRUE(res.pass());
    for (const auto& r : res.reports) EXPECT_EQ(r.scenario, "sphere2");
}

TEST(Run, BadAuditOptionsAreConfigErrors) {
    auto c = catalog_scenario("sphere2");
    c.M = 64;
    c.audits = {{"gaussian-upper", Json{{"eps_har", -1.0}}}};
    EXPECT_THROW(run_scenario(c), ConfigError);
    c.audits = {{"mean-value", Json{{"rho", 0.99}}}};
    EXPECT_THROW(run_scenario(c), ConfigError);
    c.audits = {{"li-yau", Json{{"alpha", 0.5}}}};
    EXPECT_THROW(run_scenario(c), ConfigError);
}

TEST(Run, TruncatedBandIsNoted) {
    auto c = catalog_scenario("gaussian-density-interval");
    c.M = 64;
    c.audits = {{"volume-comparison", Json::object()}};
    const auto res = run_scenario(c);
    EXPECT_NE(res.reports[0].notes_joined().find("truncated"), std::string::npos);
}

TEST(Fuzz, DeterministicAndBandRespecting) {
    const auto base = fuzz_base_sphere();
    FuzzSpec spec;
    const auto a = fuzz_sample(base, spec, 42, 3);
    const auto b = fuzz_sample(base, spec, 42, 3);
    const auto d = fuzz_sample(base, spec, 43, 3);
    EXPECT_EQ(a.a, b.a);
    EXPECT_EQ(a.b, b.b);
    EXPECT_NE(a.a, d.a);
    for (int k = 0; k < 20; ++k) {
        const auto s = fuzz_sample(base, spec, 7, k);
        double l1 = 0.0;
        for (double x : s.a) l1 += std::abs(x);
        EXPECT_LE(l1, spec.amplitude + 1e-12);
        const auto band = density_band(s.config.manifold, s.config.eps);
        EXPECT_LE(band.b / band.a, spec.max_band_ratio);
        EXPECT_NEAR(s.config.manifold.phi(0.0).d1, 0.0, 1e-12);
        EXPECT_NO_THROW(s.config.manifold.validate());
        EXPECT_TRUE(curvature_hypothesis_scan(s.config.manifold, scenario_params(s.config)).holds);
    }
    spec.count = 0;
    EXPECT_THROW(fuzz(base, spec, 1), ConfigError);
}

TEST(ReportIo, CsvHeaderAndQuoting) {
    BoundReport r;
    r.bound_id = "li-yau";
    r.scenario = "circle";
    r.samples.resize(3);
    r.pass = true;
    r.margin = 0.5;
    r.note("alpha=1.1, \"quoted\"");
    ReportBundle b;
    b.scenarios.push_back({"circle", {r}, {}});
    const auto csv = to_csv(b);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "bound_id,scenario,n_samples,empirical_constant,margin,pass,notes");
    EXPECT_NE(csv.find("li-yau,circle,3,,0.5,true,\"alpha=1.1, \"\"quoted\"\"\""), std::string::npos);
}

TEST(ReportIo, JsonRoundTripKeepsNonFiniteValues) {
    BoundReport r;
    r.bound_id = "volume-comparison";
    r.scenario = "s";
    r.pass = true;
    r.margin = kInf;
    r.empirical_constant = 2.5;
    r.samples.push_back({{{"r", 1.0}}, 1.0, 2.0});
    BoundReport v;
    v.bound_id = "li-yau";
    v.scenario = "s";
    mark_vacuous(v, 0.1, 0.2);
    ReportBundle b;
    b.scenarios.push_back({"s", {r, v}, {{"volume-comparison", 1.5}}});
    b.seed = 3;
    const Json j = to_json(b);
    EXPECT_EQ(j.at("schema_version"), kSchemaVersion);
    EXPECT_EQ(j.at("summary").at("vacuous"), 1);
    EXPECT_EQ(j.at("scenarios")[0].at("reports")[0].at("margin"), "inf");
    EXPECT_EQ(j.at("timing_ms").at("s").at("volume-comparison"), 1.5);
    const Json back = Json::parse(j.dump());
    EXPECT_EQ(csv_from_bundle_json(back), to_csv(b));
    EXPECT_THROW(csv_from_bundle_json(Json::object()), ConfigError);
}
