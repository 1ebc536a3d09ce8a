/// @file test_comparison.cpp
/// @brief Comparison functions and volume/Laplacian comparison bounds against closed forms and a trapezoid oracle.

#include "phiheat/comparison.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace phiheat;
using std::numbers::pi;

namespace {

/// Composite trapezoid with a million panels; the integrand vanishes like t^{1/c} at 0.
double trapezoid_bg(double c, double K, double upper) {
    const double cK = c * K;
    const double hi = cK > 0 ? std::min(upper, pi / std::sqrt(cK)) : upper;
    const int n = 1'000'000;
    const auto f = [&](double t) {
        double s = t;
        if (cK > 0) s = std::sin(std::sqrt(cK) * t) / std::sqrt(cK);
        if (cK < 0) s = std::sinh(std::sqrt(-cK) * t) / std::sqrt(-cK);
        return std::pow(std::max(s, 0.0), 1.0 / c);
    };
    double acc = 0.5 * (f(0) + f(hi));
    for (int k = 1; k < n; ++k) acc += f(hi * k / n);
    return acc * hi / n;
}

CurvatureParams params(double c, double K, double a = 1.0, double b = 1.0) {
    CurvatureParams p;
    p.c = c;
    p.K = K;
    p.a = a;
    p.b = b;
    return p;
}

ModelManifold pole_model(WarpProfile w, double R) { return {2, Domain::pole_cap(R), w, {}}; }

} // namespace

TEST(ComparisonFunction, ClosedForms) {
    EXPECT_DOUBLE_EQ(comparison_s(0.0, 1.7), 1.7);
    EXPECT_NEAR(comparison_s(4.0, 0.3), std::sin(0.6) / 2.0, 1e-15);
    EXPECT_NEAR(comparison_s(-4.0, 0.3), std::sinh(0.6) / 2.0, 1e-15);
    EXPECT_NEAR(comparison_s_prime(4.0, 0.3), std::cos(0.6), 1e-15);
    EXPECT_NEAR(comparison_zero(4.0), pi / 2.0, 1e-15);
    EXPECT_TRUE(std::isinf(comparison_zero(-1.0)));
}

TEST(ComparisonFunction, SolvesTheOde) {
    for (double K : {-2.0, 0.0, 0.7}) {
        const double h = 1e-4;
        for (double t : {0.2, 1.0, 1.9}) {
            const double s2 = (comparison_s(K, t + h) - 2 * comparison_s(K, t) + comparison_s(K, t - h)) / (h * h);
            EXPECT_NEAR(s2 + K * comparison_s(K, t), 0.0, 1e-6);
        }
        EXPECT_EQ(comparison_s(K, 0.0), 0.0);
        EXPECT_EQ(comparison_s_prime(K, 0.0), 1.0);
    }
}

TEST(BgIntegral, MatchesTrapezoidOracle) {
    for (double c : {1.0, 0.75, 0.4})
        for (double K : {-1.0, 0.0, 0.5, 2.0})
            for (double up : {0.5, 1.5, 4.0}) {
                const double ref = trapezoid_bg(c, K, up);
                EXPECT_NEAR(bg_integral(ComparisonProfile(c, K), up), ref, 1e-8 * std::max(1.0, ref))
                    << "c=" << c << " K=" << K << " upper=" << up;
            }
}

TEST(BgIntegral, TinyUpperLimitFollowsThePowerLaw) {
    const double up = 1e-20, c = 1.0;
    EXPECT_NEAR(bg_integral(ComparisonProfile(c, 2.0), up) / (up * up / 2.0), 1.0, 1e-10);
    EXPECT_THROW(bg_integral(ComparisonProfile(c, 2.0), -1.0), OutOfRangeError);
    EXPECT_THROW(ComparisonProfile(0.0, 1.0), ParameterError);
}

TEST(VolumeRatioBound, EqualsSphereRatioOnTheModel) {
    const auto p = params(1.0, 1.0);
    for (double r : {0.2, 0.9, 2.0})
        for (double R : {r, 2.5, pi}) {
            const double model = (1 - std::cos(R)) / (1 - std::cos(r));
            EXPECT_NEAR(volume_ratio_bound(p, r, R), model, 1e-9 * model);
        }
    EXPECT_THROW(volume_ratio_bound(p, 0.5, 3.5), OutOfRangeError);
    EXPECT_THROW(volume_ratio_bound(p, 1.0, 0.5), OutOfRangeError);
}

TEST(VolumeRatioBound, FlatAndHyperbolicModels) {
    EXPECT_NEAR(volume_ratio_bound(params(1.0, 0.0), 1.0, 3.0), 9.0, 1e-10);
    const double hyp = (std::cosh(2.0) - 1) / (std::cosh(0.5) - 1);
    EXPECT_NEAR(volume_ratio_bound(params(1.0, -1.0), 0.5, 2.0), hyp, 1e-9 * hyp);
    // The band enters as b I(R/a) / (a I(r/b)) and only loosens the bound.
    EXPECT_GT(volume_ratio_bound(params(1.0, 0.0, 0.9, 1.1), 1.0, 3.0), 9.0);
}

TEST(RatioBounds, DoublingAndCrossCenter) {
    const double c = 0.5;
    EXPECT_NEAR(doubling_bound(params(c, 0.0), 1.3), std::pow(2.0, (1 + c) / c), 1e-12);
    const auto neg = params(1.0, -4.0, 1.0, 1.0);
    EXPECT_NEAR(same_center_ratio_bound(neg, 1.0, 2.0), 4.0 * std::exp(2.0 * 2.0), 1e-9);
    EXPECT_NEAR(cross_center_ratio_bound(neg, 1.0, 0.5), same_center_ratio_bound(neg, 1.0, 1.5), 1e-12);
    EXPECT_THROW(same_center_ratio_bound(neg, 2.0, 1.0), OutOfRangeError);
    EXPECT_THROW(cross_center_ratio_bound(neg, 1.0, -0.1), OutOfRangeError);
}

TEST(LaplacianComparison, EqualityOnSpaceForms) {
    const auto sph = pole_model(WarpProfile::sphere(), pi);
    const auto hyp = pole_model(WarpProfile::hyperbolic(), 4.0);
    const auto euc = pole_model(WarpProfile::euclidean(), 10.0);
    for (double r : {0.1, 0.8, 2.0, 3.0}) {
        const auto s = laplacian_comparison_pair(sph, params(1.0, 1.0), r);
        EXPECT_NEAR(s.lhs, 1.0 / std::tan(r), 1e-12);
        EXPECT_NEAR(s.lhs, s.rhs, 1e-9 * (1 + std::abs(s.rhs)));
        const auto h = laplacian_comparison_pair(hyp, params(1.0, -1.0), r);
        EXPECT_NEAR(h.lhs, 1.0 / std::tanh(r), 1e-12);
        EXPECT_NEAR(h.lhs, h.rhs, 1e-9 * h.rhs);
        const auto e = laplacian_comparison_pair(euc, params(1.0, 0.0), r);
        EXPECT_NEAR(e.lhs, 1.0 / r, 1e-12);
        EXPECT_NEAR(e.lhs, e.rhs, 1e-12);
    }
    EXPECT_THROW(laplacian_comparison_pair(sph, params(1.0, 1.0), pi), OutOfRangeError);
    const ModelManifold circle{1, Domain::circle(2 * pi), WarpProfile::flat(), {}};
    EXPECT_THROW(laplacian_comparison_pair(circle, params(1.0, 0.0), 1.0), ConfigError);
}

TEST(LaplacianComparison, SmallerKOnlyLoosens) {
    const auto sph = pole_model(WarpProfile::sphere(), pi);
    for (double r : {0.3, 1.0, 2.0}) {
        const auto tight = laplacian_comparison_pair(sph, params(1.0, 1.0), r);
        const auto loose = laplacian_comparison_pair(sph, params(1.0, 0.5), r);
        EXPECT_LT(tight.rhs, loose.rhs);
        EXPECT_LE(loose.lhs, loose.rhs);
    }
}
