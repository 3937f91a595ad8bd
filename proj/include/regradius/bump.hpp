#pragma once

// The rank-one bump perturbation
//
//   s_k(x) = max{1 − (‖x − x_k‖/ρ_k)^{1+1/k}, 0}
//   f_k(x) = s_k(x) ⟨x*_k, x − x_k⟩ v_k
//   f(x)   = −Σ_k f_k(x)
//
// Supports are pairwise disjoint closed balls, so at most one term is nonzero
// at any point.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "regradius/linalg.hpp"
#include "regradius/spaces.hpp"

namespace regradius {

struct BumpSpec {
    Vec center;     // x_k
    double radius;  // ρ_k
    Vec slope;      // x*_k, a functional on the domain
    Vec direction;  // v_k, unit vector in the range
    int index;      // k; the exponent is 1 + 1/k

    double exponent() const { return 1.0 + 1.0 / static_cast<double>(index); }
};

/// s_k(x).
inline double bump_value(const BumpSpec& b, const Vec& x, const NormSpec& domain) {
    const double r = distance(x, b.center, domain) / b.radius;
    if (r >= 1.0) return 0.0;
    return 1.0 - std::pow(r, b.exponent());
}

/// f_k(x) = s_k(x)⟨x*_k, x − x_k⟩ v_k (without the overall minus sign).
inline Vec bump_term(const BumpSpec& b, const Vec& x, const NormSpec& domain) {
    const double s = bump_value(b, x, domain);
    if (s == 0.0) return zeros(b.direction.size());
    return (s * dot(b.slope, x - b.center)) * b.direction;
}

struct BumpPerturbation {
    Vec base_point;  // x̄
    std::vector<BumpSpec> bumps;
    NormSpec domain;
    std::size_t range_dimension = 1;

    /// t_k = ‖x_k − x̄‖.
    std::vector<double> center_distances() const {
        std::vector<double> t;
        for (const auto& b : bumps) t.push_back(distance(b.center, base_point, domain));
        return t;
    }

    /// Index of the bump whose closed ball contains x, if any.
    std::optional<std::size_t> active_bump(const Vec& x) const {
        for (std::size_t i = 0; i < bumps.size(); ++i)
            if (distance(x, bumps[i].center, domain) <= bumps[i].radius) return i;
        return std::nullopt;
    }

    /// f(x) = −Σ f_k(x).
    Vec operator()(const Vec& x) const {
        Vec out = zeros(range_dimension);
        for (const auto& b : bumps) {
            const double s = bump_value(b, x, domain);
            if (s == 0.0) continue;
            const double c = s * dot(b.slope, x - b.center);
            for (std::size_t i = 0; i < range_dimension; ++i) out[i] -= c * b.direction[i];
        }
        return out;
    }

    /// ∇f(x_k) = −⟨x*_k, ·⟩ v_k as an m×n matrix.
    Matrix gradient_at_center(std::size_t k) const {
        require(k < bumps.size(), ErrorKind::invalid_argument, "bump index out of range");
        return outer(bumps[k].direction, bumps[k].slope).scaled(-1.0);
    }
};

inline Vec perturbation_eval(const BumpPerturbation& p, const Vec& x) { return p(x); }

inline Matrix perturbation_gradient_at_centers(const BumpPerturbation& p, std::size_t k) {
    return p.gradient_at_center(k);
}

}  // namespace regradius
