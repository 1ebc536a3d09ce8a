/// @file bound_report.hpp
/// @brief Result record of one audited inequality.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace phiheat {

struct AuditSample {
    std::vector<std::pair<std::string, double>> inputs;
    double lhs = 0.0;
    std::optional<double> rhs; ///< absent in empirical-constant mode
};

struct ShapeExponent {
    std::string name;
    double value = 0.0;
    double lo = 0.0; ///< confidence interval (or the comparison threshold when lo == hi)
    double hi = 0.0;
};

/// One audited inequality. Explicit-constant reports pass when every sample satisfies
/// lhs <= rhs within the tolerance; empirical-constant reports pass when the constant is finite
/// and stable under grid refinement. Reports whose curvature hypothesis fails are vacuous:
/// nothing is asserted and they do not count as failures.
struct BoundReport {
    std::string bound_id;
    std::string scenario;
    std::vector<AuditSample> samples;
    std::optional<double> empirical_constant;
    std::vector<ShapeExponent> shape_exponents;
    bool pass = false;
    bool vacuous = false;
    double margin = 0.0;
    std::vector<std::string> notes;

    void note(std::string s) { notes.push_back(std::move(s)); }

    std::string notes_joined() const {
        std::string out;
        for (std::size_t i = 0; i < notes.size(); ++i) {
            if (i) out += "; ";
            out += notes[i];
        }
        return out;
    }
};

/// lhs <= rhs with relative tolerance `tol` plus an absolute floor for rhs near zero.
inline bool within_bound(double lhs, double rhs, double tol) {
    return lhs <= rhs + tol * std::abs(rhs) + 1e-12;
}

/// Relative slack of one sample: (rhs - lhs) / max(|lhs|, |rhs|).
inline double relative_slack(double lhs, double rhs) {
    const double den = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    return (rhs - lhs) / den;
}

/// Sets pass and margin of an explicit-constant report from its samples.
inline void finalize_explicit(BoundReport& r, double tol) {
    r.pass = true;
    r.margin = std::numeric_limits<double>::infinity();
    for (const auto& s : r.samples) {
        if (!s.rhs) continue;
        if (!within_bound(s.lhs, *s.rhs, tol) || !std::isfinite(s.lhs)) r.pass = false;
        r.margin = std::min(r.margin, relative_slack(s.lhs, *s.rhs));
    }
    if (r.samples.empty()) {
        r.margin = 0.0;
        r.note("no samples");
    }
}

/// Sets pass and margin of an empirical-constant report from its values at h and h/2.
/// margin = log(factor) - |log(C_h / C_{h/2})|.
inline void finalize_empirical(BoundReport& r, double c_h, double c_h2, double factor) {
    r.empirical_constant = c_h2;
    const bool finite = std::isfinite(c_h) && std::isfinite(c_h2) && c_h > 0.0 && c_h2 > 0.0;
    const double drift = finite ? std::abs(std::log(c_h / c_h2)) : std::numeric_limits<double>::infinity();
    r.margin = std::log(factor) - drift;
    r.shape_exponents.push_back({"refinement_ratio", finite ? c_h / c_h2 : std::numeric_limits<double>::quiet_NaN(),
                                 1.0 / factor, factor});
    if (!finite) {
        r.pass = false;
        r.note("empirical constant not finite and positive");
    } else if (drift > std::log(factor)) {
        r.pass = false;
        r.note("resolution-unstable");
    } else {
        r.pass = true;
    }
}

/// Marks a report vacuous: the curvature hypothesis fails, so the bound is not asserted.
inline void mark_vacuous(BoundReport& r, double worst_violation, double worst_r) {
    r.vacuous = true;
    r.pass = true;
    r.margin = 0.0;
    r.note("vacuous-hypothesis: curvature bound violated by " + std::to_string(worst_violation) + " at r = " +
           std::to_string(worst_r) + "; bound not asserted");
}

} // namespace phiheat
