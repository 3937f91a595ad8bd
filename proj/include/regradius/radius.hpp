#pragma once

// Verification of the radius results on concrete mappings: the bounds
// rg ≤ rad ≤ rg⁺, destabilization by the constructed bump perturbation,
// interpolation rg(F + αf) = rg − r, the Lyusternik–Graves lower bound and a
// sampled check for a single-valued localization of F⁻¹.
//
// Residuals are signed so that a positive value is a violation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "regradius/error.hpp"
#include "regradius/mappings.hpp"
#include "regradius/moduli.hpp"
#include "regradius/perturbation.hpp"
#include "regradius/spaces.hpp"

namespace regradius {

struct RadiusReport {
    std::string task;
    std::optional<ModulusEstimate> rg;
    std::optional<ModulusEstimate> rg_plus;
    std::optional<ModulusEstimate> lip;
    std::optional<ModulusEstimate> rg_perturbed;
    double lip_f = std::numeric_limits<double>::quiet_NaN();
    double r_target = std::numeric_limits<double>::quiet_NaN();
    double alpha = std::numeric_limits<double>::quiet_NaN();
    std::optional<BumpPerturbation> perturbation;
    std::map<std::string, double> residuals;
    std::map<std::string, bool> verdicts;

    void verdict(const std::string& name, double residual) {
        residuals[name] = residual;
        verdicts[name] = residual <= 0.0;
    }
    bool passed() const {
        return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& kv) { return kv.second; });
    }
};

struct RadiusOptions {
    BuildOptions build;
    RatioOptions ratio;
    LipOptions lip;
};

/// lower = rg estimate, upper = rg⁺ estimate. Verdicts: lower ≤ upper up to
/// 0.05·max(1, upper), and (when both are stabilized) agreement within 10%.
inline RadiusReport radius_bounds(const MappingModel& f, const GraphPoint& base, const ScaleSchedule& schedule,
                                  const RadiusOptions& opt = {}) {
    RadiusReport rep;
    rep.task = "bounds";
    rep.rg = rg_estimate(f, base, schedule, opt.ratio);
    rep.rg_plus = rg_plus_estimate(f, base, schedule, opt.build.coderivative);
    const double lo = rep.rg->value, up = rep.rg_plus->value;
    if (std::isinf(up)) {
        rep.verdict("lower_le_upper", 0.0);
    } else {
        rep.verdict("lower_le_upper", lo - up - 0.05 * std::max(1.0, up));
    }
    if (rep.rg->stabilized && rep.rg_plus->stabilized)
        rep.verdict("near_equality", std::abs(up - lo) - 0.1 * std::max(lo, up));
    return rep;
}

inline double bounds_lower(const RadiusReport& r) { return r.rg ? r.rg->value : kInf; }
inline double bounds_upper(const RadiusReport& r) { return r.rg_plus ? r.rg_plus->value : kInf; }

/// Builds f from the rg⁺ witnesses, then certifies lip f ≤ 1.1·rg⁺ and
/// rg(F + f) < 0.1·rg⁺; also lip f ≥ 0.85·rg (no destabilizer cheaper than rg).
inline RadiusReport verify_destabilization(const MappingModel& f, const GraphPoint& base, const ScaleSchedule& schedule,
                                           const RadiusOptions& opt = {}) {
    RadiusReport rep;
    rep.task = "destabilize";
    rep.rg = rg_estimate(f, base, schedule, opt.ratio);
    const PerturbationBuild b = build_perturbation(f, base, schedule, opt.build);
    rep.rg_plus = b.rg_plus;
    rep.perturbation = b.perturbation;
    rep.alpha = 1.0;
    if (b.trivial) {
        rep.lip_f = 0.0;
        rep.rg_perturbed = rep.rg;
        rep.verdict("destabilized", rep.rg->value - 0.1 * std::max(rep.rg_plus->value, 1e-12));
        return rep;
    }
    const double target = b.rg_plus.value;
    const BumpPerturbation& p = b.perturbation;
    rep.lip = lip_estimate(p, base.x, f.domain(), f.range(), schedule, Perturbation(p).anchors(), opt.lip);
    rep.lip_f = rep.lip->value;
    rep.rg_perturbed = rg_estimate(add_perturbation(f, Perturbation(p), 1.0, base.x), base, schedule, opt.ratio);
    rep.verdict("lip_upper", rep.lip_f - 1.1 * target);
    rep.verdict("lip_not_below_rg", 0.85 * rep.rg->value - rep.lip_f);
    rep.verdict("destabilized", rep.rg_perturbed->value - 0.1 * target);
    return rep;
}

/// α = r / rg, f scaled by α; checks lip(αf) and rg(F + αf) against r and
/// rg − r within 0.15·rg. r = 0 uses f ≡ 0.
inline RadiusReport verify_interpolation(const MappingModel& f, const GraphPoint& base, double r,
                                         const ScaleSchedule& schedule, const RadiusOptions& opt = {}) {
    require(r >= 0.0 && std::isfinite(r), ErrorKind::invalid_argument, "interpolation target r must be >= 0");
    RadiusReport rep;
    rep.task = "interpolate";
    rep.r_target = r;
    rep.rg = rg_estimate(f, base, schedule, opt.ratio);
    const double rg = rep.rg->value;
    require(std::isfinite(rg), ErrorKind::construction, "interpolation needs a finite rg estimate");
    require(r <= rg * (1.0 + 1e-6), ErrorKind::invalid_argument, "interpolation target r exceeds the rg estimate");
    const double tol = 0.15 * rg;
    if (r == 0.0) {
        rep.alpha = 0.0;
        rep.lip_f = 0.0;
        rep.rg_perturbed = rep.rg;
        rep.verdict("lip_matches_r", -tol);
        rep.verdict("rg_matches", -tol);
        return rep;
    }
    rep.alpha = std::min(1.0, r / rg);
    const PerturbationBuild b = build_perturbation(f, base, schedule, opt.build);
    rep.rg_plus = b.rg_plus;
    const BumpPerturbation p = scale_perturbation(b.perturbation, rep.alpha);
    rep.perturbation = p;
    rep.lip = lip_estimate(p, base.x, f.domain(), f.range(), schedule, Perturbation(p).anchors(), opt.lip);
    rep.lip_f = rep.lip->value;
    rep.rg_perturbed = rg_estimate(add_perturbation(f, Perturbation(p), 1.0, base.x), base, schedule, opt.ratio);
    rep.verdict("lip_matches_r", std::abs(rep.lip_f - r) - tol);
    rep.verdict("rg_matches", std::abs(rep.rg_perturbed->value - (rg - r)) - tol);
    return rep;
}

/// residual = (rg F − lip f) − rg(F + f); passes iff ≤ 0.05·max(1, rg F).
inline RadiusReport verify_lyusternik_graves(const MappingModel& f, const GraphPoint& base, const Perturbation& g,
                                             const ScaleSchedule& schedule, const RadiusOptions& opt = {}) {
    RadiusReport rep;
    rep.task = "lyusternik_graves";
    rep.rg = rg_estimate(f, base, schedule, opt.ratio);
    rep.lip = lip_estimate(g, base.x, f.domain(), f.range(), schedule, g.anchors(), opt.lip);
    rep.lip_f = rep.lip->value;
    rep.alpha = 1.0;
    rep.rg_perturbed = rg_estimate(add_perturbation(f, g, 1.0, base.x), base, schedule, opt.ratio);
    const double residual = (rep.rg->value - rep.lip_f) - rep.rg_perturbed->value;
    rep.residuals["lower_bound_gap"] = residual;
    rep.verdict("lower_bound", residual - 0.05 * std::max(1.0, rep.rg->value));
    return rep;
}

/// For grid points y ∈ B_radius(ȳ), F⁻¹(y) ∩ B_radius(x̄) must be one
/// cluster of diameter ≤ radius/20. An affine (non-unique) inverse fails.
inline bool strong_regularity_localization_check(const MappingModel& f, const GraphPoint& base, double radius,
                                                 std::size_t grid, std::uint64_t seed = 1) {
    require(radius > 0.0, ErrorKind::invalid_argument, "localization radius must be positive");
    require(f.distance_to_image(base.x, base.y) <= 1e-10, ErrorKind::not_on_graph, "base point is not on the graph");
    const NormSpec& dom = f.domain();
    const NormSpec& ran = f.range();
    const double tol = radius / 20.0;
    std::vector<Vec> ys{base.y};
    const auto dirs = detail::primal_directions(ran, std::max<std::size_t>(grid, 2 * ran.dimension()), seed);
    for (double frac : {0.25, 0.5, 0.75})
        for (const Vec& w : dirs) ys.push_back(base.y + (frac * radius) * w);
    for (const Vec& y : ys) {
        const InverseImage inv = f.inverse_image(y);
        if (inv.affine()) return false;
        std::vector<Vec> local;
        for (const Vec& x : inv.points)
            if (distance(x, base.x, dom) <= radius) local.push_back(x);
        for (std::size_t i = 0; i < local.size(); ++i)
            for (std::size_t k = i + 1; k < local.size(); ++k)
                if (distance(local[i], local[k], dom) > tol) return false;
    }
    return true;
}

}  // namespace regradius
