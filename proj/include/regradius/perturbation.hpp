#pragma once

// Construction of a Lipschitz rank-one perturbation f with lip f(x̄) close to
// rg⁺F(x̄,ȳ) that destroys metric regularity of F + f:
//
//   witnesses (x_k, y_k, ε_k, y*_k, x*_k) with x*_k ∈ D*_{ε_k}F(x_k,y_k)(y*_k)
//     → witnesses sitting at x̄ are moved off it by a discrete Ekeland descent
//     → subsequence with t_{k+1} < t_k/2, radii ρ_k = (t_k − t_{k+1})/2
//     → directions v_k with ⟨y*_k, v_k⟩ > 1 − 1/k
//     → bumps f_k = s_k·⟨x*_k, · − x_k⟩·v_k, f = −Σ f_k.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "regradius/bump.hpp"
#include "regradius/error.hpp"
#include "regradius/linalg.hpp"
#include "regradius/mappings.hpp"
#include "regradius/moduli.hpp"
#include "regradius/spaces.hpp"

namespace regradius {

/// First label k given to a bump. Exponents 1 + 1/k then stay below 1.05,
/// so every bump's Lipschitz constant (1 + 1/k)‖x*_k‖ is below γ.
inline constexpr int kFirstBumpLabel = 21;

struct WitnessEntry {
    Vec x;
    Vec y;
    double eps = 0.0;
    Vec y_star;
    Vec x_star;
    std::size_t scale = 0;   // index into the schedule the entry came from
    bool relocated = false;  // moved off x̄ by the Ekeland step
    SampledGraph sample;     // sample the membership is certified on
    double test_radius = kInf;
};

struct WitnessSequence {
    std::vector<WitnessEntry> entries;
    double gamma = 0.0;   // 1.05 · max ‖x*_k‖
    double target = 0.0;  // the rg⁺ estimate
};

/// Harvests the per-scale witnesses of the last K scales of an rg⁺ estimate.
inline WitnessSequence extract_witness(const ModulusEstimate& rg_plus, const ProductNormSpec& prod, std::size_t k) {
    require(k >= 3, ErrorKind::invalid_argument, "witness extraction needs K >= 3");
    require(rg_plus.witnesses.size() == rg_plus.per_scale.size(), ErrorKind::invalid_argument,
            "estimate carries no coderivative witnesses");
    if (rg_plus.value == 0.0) fail(ErrorKind::construction, "degenerate: rg⁺ = 0");
    require(std::isfinite(rg_plus.value), ErrorKind::construction, "rg⁺ estimate is infinite");
    require(rg_plus.stabilized, ErrorKind::construction, "rg⁺ estimate is not stabilized");
    require(k <= rg_plus.per_scale.size(), ErrorKind::invalid_argument, "K exceeds the number of scales");

    WitnessSequence w;
    w.target = rg_plus.value;
    double sup = 0.0, inf = kInf;
    for (std::size_t j = rg_plus.per_scale.size() - k; j < rg_plus.per_scale.size(); ++j) {
        const auto& sw = rg_plus.witnesses[j];
        if (!sw) continue;
        WitnessEntry e;
        e.x = sw->element.at.x;
        e.y = sw->element.at.y;
        e.eps = sw->element.eps;
        e.y_star = sw->element.y_star;
        e.x_star = sw->element.x_star;
        e.scale = j;
        e.sample = sw->sample;
        e.test_radius = sw->test_radius;
        const double nx = dual_norm(e.x_star, prod.left);
        // coarse scales with large ε can admit x* = 0; such a term would be f_k ≡ 0
        if (!(nx > 0.0)) continue;
        sup = std::max(sup, nx);
        inf = std::min(inf, nx);
        w.entries.push_back(std::move(e));
    }
    require(w.entries.size() >= 2, ErrorKind::construction, "fewer than 2 scales produced a coderivative witness");
    if (!(inf > 0.0)) fail(ErrorKind::construction, "degenerate: rg⁺ = 0");
    w.gamma = 1.05 * sup;
    return w;
}

inline WitnessSequence extract_witness(const MappingModel& f, const GraphPoint& base, const ScaleSchedule& schedule,
                                       std::size_t k, const CoderivativeOptions& opt = {}) {
    return extract_witness(rg_plus_estimate(f, base, schedule, opt), f.product(), k);
}

struct Relocation {
    WitnessEntry entry;  // relocated: (x̃, ỹ), ε̃ = ε_k + ε'_k
    GraphPoint start;    // (x̂, ŷ)
    double varsigma = 0.0;      // φ_k on the smallest shell
    double phi_second = 0.0;    // φ_k on the second shell (≥ varsigma)
    double eps_prime = 0.0;     // ε'_k = ε_k + 1/k − ς_k
    std::size_t steps = 0;
};

/// Moves a witness with x_k = x̄ to a sample point with x̃ ≠ x̄ by a discrete
/// Ekeland descent on ψ(z) = ε_k‖z − (x̄, y_k)‖ − ⟨x*, x − x̄⟩ + ⟨y*, y − y_k⟩.
/// The entry's membership must hold on every point of `sample`.
inline Relocation relocate_witness_ekeland(const SampledGraph& sample, const ProductNormSpec& prod, const Vec& base_x,
                                           const WitnessEntry& entry, int k) {
    require(k >= 1, ErrorKind::invalid_argument, "relocation label k must be >= 1");
    const NormSpec& dom = prod.left;
    const double x_tol = 1e-12 * (1.0 + norm(base_x, dom));
    require(distance(entry.x, base_x, dom) <= x_tol, ErrorKind::invalid_argument,
            "relocation applies only to witnesses sitting at the base point");
    const Vec& xs = entry.x_star;
    const Vec& ys = entry.y_star;
    const double eps = entry.eps;

    auto dist0 = [&](const GraphPoint& z) { return pair_distance(z.x, z.y, base_x, entry.y, prod); };
    auto quotient = [&](const GraphPoint& z) {
        return (dot(xs, z.x - base_x) - dot(ys, z.y - entry.y) - eps * distance(z.y, entry.y, prod.right)) /
               distance(z.x, base_x, dom);
    };
    auto psi = [&](const GraphPoint& z) {
        return eps * dist0(z) - dot(xs, z.x - base_x) + dot(ys, z.y - entry.y);
    };

    double dmin = kInf;
    for (const auto& z : sample.points)
        if (distance(z.x, base_x, dom) > x_tol) dmin = std::min(dmin, dist0(z));
    if (!std::isfinite(dmin)) fail(ErrorKind::construction, "isolated domain direction — enlarge sample");

    Relocation out;
    out.varsigma = -kInf;
    out.phi_second = -kInf;
    const GraphPoint* start = nullptr;
    for (const auto& z : sample.points) {
        if (distance(z.x, base_x, dom) <= x_tol) continue;
        const double d = dist0(z);
        const double q = quotient(z);
        if (d <= 4.0 * dmin) out.phi_second = std::max(out.phi_second, q);
        if (d <= 2.0 * dmin && q > out.varsigma) {
            out.varsigma = q;
            start = &z;
        }
    }
    out.start = *start;
    out.eps_prime = eps + 1.0 / static_cast<double>(k) - out.varsigma;
    require(out.eps_prime > 0.0, ErrorKind::construction, "relocation: ε' is not positive (membership fails on sample)");

    const double penalty = out.eps_prime - 2.0 * kNormalSlack;
    GraphPoint cur = out.start;
    double psi_cur = psi(cur);
    for (;;) {
        const GraphPoint* next = nullptr;
        double next_val = psi_cur;
        for (const auto& z : sample.points) {
            const double v = psi(z) + penalty * pair_distance(z.x, z.y, cur.x, cur.y, prod);
            if (v < next_val) {
                next_val = v;
                next = &z;
            }
        }
        if (!next) break;
        cur = *next;
        psi_cur = psi(cur);
        ++out.steps;
        require(out.steps <= sample.points.size(), ErrorKind::construction, "Ekeland descent failed to terminate");
    }
    require(distance(cur.x, base_x, dom) > x_tol, ErrorKind::construction,
            "relocation ended at the base point; membership does not hold on the sample");

    out.entry = entry;
    out.entry.x = cur.x;
    out.entry.y = cur.y;
    out.entry.eps = eps + out.eps_prime;
    out.entry.relocated = true;
    out.entry.sample = sample;
    out.entry.test_radius = kInf;
    return out;
}

struct RadiiSelection {
    std::vector<std::size_t> kept;  // indices into the witness entries
    std::vector<double> t;          // t_k = ‖x_k − x̄‖ of kept entries
    std::vector<double> rho;        // ρ_k = (t_k − t_{k+1})/2, virtual t_{K+1} = t_K/4
};

/// Greedy subsequence with t_{k+1} < t_k/2. An entry conflicting with the last
/// kept one replaces it only if its ‖x*‖ is strictly larger and the
/// replacement still respects the previous kept entry.
inline RadiiSelection select_radii(const std::vector<double>& t, const std::vector<double>& slope_norms) {
    require(t.size() == slope_norms.size(), ErrorKind::invalid_argument, "select_radii: size mismatch");
    RadiiSelection s;
    for (std::size_t i = 0; i < t.size(); ++i) {
        require(t[i] > 0.0, ErrorKind::invalid_argument, "select_radii: entry at the base point must be relocated first");
        if (s.kept.empty() || t[i] < t[s.kept.back()] / 2.0) {
            s.kept.push_back(i);
            continue;
        }
        const bool stronger = slope_norms[i] > slope_norms[s.kept.back()] * (1.0 + 1e-12);
        const bool fits = s.kept.size() == 1 || t[i] < t[s.kept[s.kept.size() - 2]] / 2.0;
        if (stronger && fits) s.kept.back() = i;
    }
    if (s.kept.size() < 2) fail(ErrorKind::construction, "fewer than 2 witnesses survive radii selection");
    for (std::size_t i : s.kept) s.t.push_back(t[i]);
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        const double next = i + 1 < s.t.size() ? s.t[i + 1] : s.t[i] / 4.0;
        s.rho.push_back((s.t[i] - next) / 2.0);
    }
    return s;
}

inline RadiiSelection select_radii(const WitnessSequence& w, const Vec& base_x, const ProductNormSpec& prod) {
    std::vector<double> t, slopes;
    for (const auto& e : w.entries) {
        t.push_back(distance(e.x, base_x, prod.left));
        slopes.push_back(dual_norm(e.x_star, prod.left));
    }
    return select_radii(t, slopes);
}

/// Unit v with ⟨y*, v⟩ > 1 − 1/k: the norming vector of the dual functional.
/// For p ∈ {1, ∞} with several norming vertices, the lexicographically
/// smallest one (−1 on zero entries for p = ∞).
inline Vec choose_direction(const Vec& y_star, int k, const NormSpec& range) {
    require(std::abs(dual_norm(y_star, range) - 1.0) <= 1e-9, ErrorKind::invalid_argument,
            "choose_direction: y* must be a unit dual vector");
    require(k >= 1, ErrorKind::invalid_argument, "choose_direction: k must be >= 1");
    const std::size_t m = y_star.size();
    Vec v(m, 0.0);
    const double p = range.p();
    if (p == 2.0) {
        v = (1.0 / euclidean_norm(y_star)) * y_star;
    } else if (p == 1.0) {
        double top = 0.0;
        for (double c : y_star) top = std::max(top, std::abs(c));
        // among tied ±e_i: the first −e_i if any, else the last +e_i
        std::optional<std::size_t> neg, pos;
        for (std::size_t i = 0; i < m; ++i) {
            if (std::abs(y_star[i]) != top) continue;
            if (y_star[i] < 0.0 && !neg) neg = i;
            if (y_star[i] > 0.0) pos = i;
        }
        if (neg)
            v[*neg] = -1.0;
        else
            v[*pos] = 1.0;
    } else if (std::isinf(p)) {
        for (std::size_t i = 0; i < m; ++i) v[i] = y_star[i] > 0.0 ? 1.0 : -1.0;
    } else {
        const double q = range.q();
        for (std::size_t i = 0; i < m; ++i) v[i] = std::copysign(std::pow(std::abs(y_star[i]), q - 1.0), y_star[i]);
        v = (1.0 / norm(v, range)) * v;
    }
    require(dot(y_star, v) > 1.0 - 1.0 / static_cast<double>(k), ErrorKind::construction,
            "choose_direction: pairing bound failed");
    return v;
}

struct PerturbationBuild {
    BumpPerturbation perturbation;
    ModulusEstimate rg_plus;
    WitnessSequence witness;
    std::vector<Relocation> relocations;
    RadiiSelection selection;
    std::vector<WitnessEntry> bump_entries;  // witness behind each bump, in bump order
    bool trivial = false;                    // rg⁺ = 0, f ≡ 0
};

struct BuildOptions {
    std::size_t k = 8;
    CoderivativeOptions coderivative;
    std::size_t relocation_shells = 3;  // probe shells kept for the Ekeland step
};

namespace detail {

// Probe points within test_radius whose pair distance to the center is at
// least test_radius·2^{-(shells+1)}: the coarse part of a witness probe.
inline SampledGraph coarse_probe(const WitnessEntry& e, const ProductNormSpec& prod, std::size_t shells) {
    SampledGraph out{{e.x, e.y}, {{e.x, e.y}}, e.test_radius};
    const double floor = e.test_radius * std::ldexp(1.0, -static_cast<int>(shells + 1));
    for (const auto& z : e.sample.points) {
        const double d = pair_distance(z.x, z.y, e.x, e.y, prod);
        if (d > 0.0 && d <= e.test_radius && d >= floor) out.points.push_back(z);
    }
    return out;
}

}  // namespace detail

/// Full construction pipeline on F at the base point.
inline PerturbationBuild build_perturbation(const MappingModel& f, const GraphPoint& base,
                                            const ScaleSchedule& schedule, const BuildOptions& opt = {}) {
    const ProductNormSpec prod = f.product();
    PerturbationBuild b;
    b.perturbation = BumpPerturbation{base.x, {}, f.domain(), f.range().dimension()};
    b.rg_plus = rg_plus_estimate(f, base, schedule, opt.coderivative);
    if (b.rg_plus.value == 0.0) {
        b.trivial = true;
        return b;
    }
    b.witness = extract_witness(b.rg_plus, prod, opt.k);
    const double x_tol = 1e-12 * (1.0 + norm(base.x, f.domain()));
    for (std::size_t i = 0; i < b.witness.entries.size(); ++i) {
        WitnessEntry& e = b.witness.entries[i];
        if (distance(e.x, base.x, f.domain()) > x_tol) continue;
        const SampledGraph sample = detail::coarse_probe(e, prod, opt.relocation_shells);
        b.relocations.push_back(
            relocate_witness_ekeland(sample, prod, base.x, e, kFirstBumpLabel + static_cast<int>(i)));
        e = b.relocations.back().entry;
    }
    b.selection = select_radii(b.witness, base.x, prod);
    for (std::size_t i = 0; i < b.selection.kept.size(); ++i) {
        const WitnessEntry& e = b.witness.entries[b.selection.kept[i]];
        const int label = kFirstBumpLabel + static_cast<int>(i);
        b.perturbation.bumps.push_back(
            BumpSpec{e.x, b.selection.rho[i], e.x_star, choose_direction(e.y_star, label, f.range()), label});
        b.bump_entries.push_back(e);
    }
    return b;
}

/// αf: every slope scaled by α ∈ [0, 1]; α = 0 gives f ≡ 0.
inline BumpPerturbation scale_perturbation(const BumpPerturbation& p, double alpha) {
    require(alpha >= 0.0 && alpha <= 1.0, ErrorKind::invalid_argument, "scale must lie in [0, 1]");
    BumpPerturbation out = p;
    if (alpha == 0.0) {
        out.bumps.clear();
        return out;
    }
    for (auto& b : out.bumps) b.slope = alpha * b.slope;
    return out;
}

/// Closed balls B̄_{ρ_k}(x_k) pairwise disjoint: ‖x_i − x_k‖ > ρ_i + ρ_k.
inline bool supports_disjoint(const BumpPerturbation& p) {
    for (std::size_t i = 0; i < p.bumps.size(); ++i)
        for (std::size_t k = i + 1; k < p.bumps.size(); ++k)
            if (!(distance(p.bumps[i].center, p.bumps[k].center, p.domain) > p.bumps[i].radius + p.bumps[k].radius))
                return false;
    return true;
}

/// ‖x_i − x̄‖ > t_k + ρ_k + ρ_i for i < k.
inline bool shells_separated(const BumpPerturbation& p) {
    const auto t = p.center_distances();
    for (std::size_t k = 0; k < p.bumps.size(); ++k)
        for (std::size_t i = 0; i < k; ++i)
            if (!(t[i] > t[k] + p.bumps[k].radius + p.bumps[i].radius)) return false;
    return true;
}

/// Collinearity residual of f(u) with the active bump direction (zero
/// outside every ball), max over seeded trials inside each ball and outside.
inline double rank_one_residual(const BumpPerturbation& p, std::size_t trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    auto residual = [&](const Vec& u) {
        const Vec fu = p(u);
        const auto k = p.active_bump(u);
        if (!k) return euclidean_norm(fu);
        const Vec& v = p.bumps[*k].direction;
        return euclidean_norm(fu - (dot(fu, v) / dot(v, v)) * v);
    };
    const auto t = p.center_distances();
    const double outer = t.empty() ? 1.0 : 2.0 * t.front();
    for (std::size_t i = 0; i < trials; ++i) {
        Vec u;
        if (!p.bumps.empty() && i % 2 == 0) {
            const auto& b = p.bumps[(i / 2) % p.bumps.size()];
            u = random_in_ball(b.center, b.radius, p.domain, rng);
        } else {
            u = random_in_ball(p.base_point, outer, p.domain, rng);
        }
        worst = std::max(worst, residual(u));
    }
    return worst;
}

inline bool rank_one_structure_check(const BumpPerturbation& p, std::size_t trials, std::uint64_t seed) {
    return rank_one_residual(p, trials, seed) <= 1e-10;
}

struct TransferCheck {
    bool hypothesis = false;  // x*_k ∈ D*_{ε_k}F(x_k, y_k)(y*_k) on the check sample
    bool transfer = false;    // (1 − α⟨y*_k, v_k⟩)x*_k ∈ D*_{ε'_k}(F + αf)(x_k, y_k)(y*_k)
    std::size_t neighbors = 0;
    double eps_prime = 0.0;
};

/// Per-bump coderivative transfer on gph(F + αf), on a neighborhood of x_k of
/// radius ρ_k·1e-7 where the bump is within rounding of its linearization.
inline std::vector<TransferCheck> coderivative_transfer_check(const MappingModel& f, const PerturbationBuild& b,
                                                              double alpha, std::uint64_t seed) {
    const ProductNormSpec prod = f.product();
    const BumpPerturbation scaled = scale_perturbation(b.perturbation, std::clamp(alpha, 0.0, 1.0));
    std::vector<TransferCheck> out;
    for (std::size_t i = 0; i < b.perturbation.bumps.size(); ++i) {
        const BumpSpec& bump = b.perturbation.bumps[i];
        const WitnessEntry& e = b.bump_entries[i];
        const double radius = bump.radius * 1e-7;
        const GraphPoint at{e.x, e.y};
        SampledGraph local{at, {at}, radius};
        if (!e.relocated) {
            for (const auto& z : e.sample.points) {
                const double d = pair_distance(z.x, z.y, at.x, at.y, prod);
                if (d > 0.0 && d <= std::min(radius, e.test_radius)) local.points.push_back(z);
            }
        }
        if (local.points.size() < 2) {
            const std::size_t n = f.domain().dimension();
            local = sample_graph(f, at, radius, SampleLayout{8, 4 * n + 4}, mix_seed(seed, i));
        }
        TransferCheck c;
        c.neighbors = local.points.size() - 1;
        c.hypothesis = coderivative_membership(local, at, e.y_star, e.x_star, e.eps, prod);
        SampledGraph shifted{{at.x, at.y + scaled(at.x)}, {}, radius};
        for (const auto& z : local.points) shifted.points.push_back({z.x, z.y + scaled(z.x)});
        const double a = alpha;
        const Vec x_new = (1.0 - a * dot(e.y_star, bump.direction)) * e.x_star;
        c.eps_prime = (a * dual_norm(e.x_star, prod.left) + 1.0) * e.eps;
        c.transfer = coderivative_membership(shifted, shifted.base, e.y_star, x_new, c.eps_prime, prod);
        out.push_back(c);
    }
    return out;
}

}  // namespace regradius
