/// @file fuzz.hpp
/// @brief Seeded random band-respecting scenarios around a base model.
///
/// phi(r) = sum_{j<=6} a_j cos(j w r), w = pi/L (2 pi/L on circles), so phi' vanishes at the pole
/// and at a closing pole. Pole-cap warps get f = f0 (1 + sum_{j<=3} b_j sin^2(j w r)), which keeps
/// f(0) = 0, f'(0) = 1 and the closing condition. The admissible K is re-derived per sample.
#pragma once

#include "phiheat/scenario.hpp"

#include <random>

namespace phiheat {

struct FuzzSpec {
    int count = 50;
    double amplitude = 0.3;      ///< cap on ||a||_1
    double c2_cap = 2.0;         ///< cap on sum |a_j| (j w)^2
    double warp_amplitude = 0.05;///< cap on ||b||_1
    double max_band_ratio = 10.0;
    int M = 256;
};

struct FuzzSample {
    ScenarioConfig config;
    std::vector<double> a; ///< density coefficients
    std::vector<double> b; ///< warp coefficients
    int rejections = 0;
};

/// Draws sample k of the campaign. Deterministic in (seed, k).
inline FuzzSample fuzz_sample(const ScenarioConfig& base, const FuzzSpec& spec, std::uint64_t seed, int k) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(k));
    std::uniform_real_distribution<double> uni(-1.0, 1.0), unit(0.0, 1.0);
    const ModelManifold& m0 = base.manifold;
    const double L = m0.domain.length();
    const double w = (m0.domain.periodic() ? 2.0 : 1.0) * std::numbers::pi / L;
    const bool warp = m0.domain.kind == Domain::Kind::PoleCap && spec.warp_amplitude > 0.0;
    FuzzSample out;
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<double> a(6), b(warp ? 3 : 0);
        double l1 = 0.0, c2 = 0.0;
        for (int j = 0; j < 6; ++j) {
            a[j] = uni(rng);
            l1 += std::abs(a[j]);
            c2 += std::abs(a[j]) * std::pow((j + 1) * w, 2);
        }
        double scale = spec.amplitude * unit(rng) / l1;
        scale = std::min(scale, spec.c2_cap / c2);
        for (double& x : a) x *= scale;
        double bl1 = 0.0;
        for (double& x : b) {
            x = uni(rng);
            bl1 += std::abs(x);
        }
        const double bscale = bl1 > 0.0 ? spec.warp_amplitude * unit(rng) / bl1 : 0.0;
        for (double& x : b) x *= bscale;

        ScenarioConfig c = base;
        c.catalog.clear();
        c.id = base.id + "-fuzz-" + std::to_string(k);
        c.M = spec.M;
        c.K.reset();
        if (spec.amplitude > 0.0)
            for (int j = 0; j < 6; ++j) c.manifold.density.terms.push_back({ProfileTerm::Kind::Cos, a[j], (j + 1) * w, 0.0});
        for (std::size_t j = 0; j < b.size(); ++j)
            c.manifold.warp.perturbation.terms.push_back({ProfileTerm::Kind::SinSquared, b[j], (j + 1.0) * w, 0.0});
        try {
            c.manifold.validate();
            const auto band = density_band(c.manifold, c.eps);
            if (band.b / band.a > spec.max_band_ratio) {
                ++out.rejections;
                continue;
            }
        } catch (const Error&) {
            ++out.rejections;
            continue;
        }
        if (spec.amplitude == 0.0 && !warp) c = base;
        out.config = std::move(c);
        out.a = std::move(a);
        out.b = std::move(b);
        return out;
    }
    throw ConfigError("fuzz: seed " + std::to_string(seed) + " sample " + std::to_string(k) +
                      " rejected 100 times (density band ratio above " + detail::fmt(spec.max_band_ratio) + ")");
}

/// The perturbed-sphere base of the default campaign: n = 2, N = inf, eps = 0.
inline ScenarioConfig fuzz_base_sphere() {
    ScenarioConfig c = catalog_scenario("sphere2");
    c.id = "sphere2";
    c.N = EffectiveDim::infinity();
    c.eps = 0.0;
    c.K.reset();
    return c;
}

/// Default campaign audit list: every explicit-constant audit plus mean-value and Harnack.
inline std::vector<AuditRequest> fuzz_audits(const ModelManifold& m) {
    std::vector<AuditRequest> out;
    for (const auto& id : audit_ids())
        if ((is_explicit_audit(id) || id == "mean-value" || id == "parabolic-harnack") && audit_applicable(id, m))
            out.push_back({id, Json::object()});
    return out;
}

inline std::vector<ScenarioResult> fuzz(const ScenarioConfig& base, const FuzzSpec& spec, std::uint64_t seed) {
    if (spec.count < 1) throw ConfigError("fuzz: count must be >= 1");
    std::vector<ScenarioResult> out;
    for (int k = 0; k < spec.count; ++k) {
        auto s = fuzz_sample(base, spec, seed, k);
        if (s.config.audits.empty()) s.config.audits = fuzz_audits(s.config.manifold);
        out.push_back(run_scenario(s.config));
    }
    return out;
}

} // namespace phiheat
