#pragma once

// Norms on the primal spaces, their duals, the sum/max product norms, and
// point-to-set distances.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "regradius/error.hpp"
#include "regradius/linalg.hpp"

namespace regradius {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// p-norm on R^dimension. p is any value in [1, ∞]; the library's
/// algorithms are exercised with p ∈ {1, 2, ∞}.
class NormSpec {
public:
    NormSpec() = default;
    NormSpec(std::size_t dimension, double p = 2.0) : dimension_(dimension), p_(p) {
        require(dimension >= 1, ErrorKind::invalid_argument, "norm dimension must be >= 1");
        require(p >= 1.0, ErrorKind::invalid_argument, "norm exponent must satisfy p >= 1");
    }

    std::size_t dimension() const noexcept { return dimension_; }
    double p() const noexcept { return p_; }

    /// Conjugate exponent q with 1/p + 1/q = 1.
    double q() const noexcept {
        if (p_ == 1.0) return kInf;
        if (std::isinf(p_)) return 1.0;
        return p_ / (p_ - 1.0);
    }

    bool is_euclidean() const noexcept { return p_ == 2.0; }

    bool operator==(const NormSpec&) const = default;

private:
    std::size_t dimension_ = 1;
    double p_ = 2.0;
};

/// Product X × Y with ‖(x,y)‖ = ‖x‖ + ‖y‖ and dual ‖(x*,y*)‖ = max{‖x*‖, ‖y*‖}.
struct ProductNormSpec {
    NormSpec left;
    NormSpec right;
};

namespace detail {

inline double lp_norm(std::span<const double> v, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    if (p == 1.0) {
        double s = 0.0;
        for (double x : v) s += std::abs(x);
        return s;
    }
    if (p == 2.0) {
        // hypot-style scaling keeps tiny and huge entries accurate
        double scale = 0.0;
        for (double x : v) scale = std::max(scale, std::abs(x));
        if (scale == 0.0) return 0.0;
        double s = 0.0;
        for (double x : v) s += (x / scale) * (x / scale);
        return scale * std::sqrt(s);
    }
    double scale = 0.0;
    for (double x : v) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return 0.0;
    double s = 0.0;
    for (double x : v) s += std::pow(std::abs(x) / scale, p);
    return scale * std::pow(s, 1.0 / p);
}

inline void check_dim(std::span<const double> v, const NormSpec& spec) {
    require(v.size() == spec.dimension(), ErrorKind::dimension_mismatch,
            "vector of length " + std::to_string(v.size()) + " in space of dimension " +
                std::to_string(spec.dimension()));
}

}  // namespace detail

inline double norm(std::span<const double> v, const NormSpec& spec) {
    detail::check_dim(v, spec);
    return detail::lp_norm(v, spec.p());
}

/// Norm of a functional on (R^n, ‖·‖_p), i.e. the q-norm.
inline double dual_norm(std::span<const double> v, const NormSpec& spec) {
    detail::check_dim(v, spec);
    return detail::lp_norm(v, spec.q());
}

inline double distance(std::span<const double> a, std::span<const double> b, const NormSpec& spec) {
    detail::check_dim(a, spec);
    detail::check_dim(b, spec);
    Vec d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return detail::lp_norm(d, spec.p());
}

inline double pair_norm_primal(std::span<const double> x, std::span<const double> y, const ProductNormSpec& spec) {
    return norm(x, spec.left) + norm(y, spec.right);
}

inline double pair_norm_dual(std::span<const double> xs, std::span<const double> ys, const ProductNormSpec& spec) {
    return std::max(dual_norm(xs, spec.left), dual_norm(ys, spec.right));
}

/// Pair distance ‖(x1,y1) − (x2,y2)‖ in the sum norm.
inline double pair_distance(const Vec& x1, const Vec& y1, const Vec& x2, const Vec& y2, const ProductNormSpec& spec) {
    return distance(x1, x2, spec.left) + distance(y1, y2, spec.right);
}

/// d(y, S) = min_{s∈S} ‖y − s‖, with inf ∅ = +∞.
inline double distance_to_set(std::span<const double> y, const std::vector<Vec>& set, const NormSpec& spec) {
    detail::check_dim(y, spec);
    double best = kInf;
    for (const Vec& s : set) best = std::min(best, distance(y, s, spec));
    return best;
}

/// Random vector with unit primal norm (Gaussian direction, renormalized).
template <class Rng>
Vec random_unit(const NormSpec& spec, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (;;) {
        Vec v(spec.dimension());
        for (double& c : v) c = gauss(rng);
        const double n = norm(v, spec);
        if (n > 1e-8) return (1.0 / n) * v;
    }
}

/// Random point of the closed ball of the given radius, radially uniform in
/// the norm (not volume-uniform; small radii are over-represented, which is
/// what local estimators want).
template <class Rng>
Vec random_in_ball(const Vec& center, double radius, const NormSpec& spec, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return center + (radius * unif(rng)) * random_unit(spec, rng);
}

/// Deterministic discretization of the dual unit sphere {v* : ‖v*‖_q = 1}.
/// The first 2·dim entries are ±e_i; in dimension 2 the rest are evenly
/// spaced angles, otherwise seeded Gaussian directions.
inline std::vector<Vec> sphere_grid(const NormSpec& spec, std::size_t count, std::uint64_t seed) {
    const std::size_t n = spec.dimension();
    require(count >= 2 * n, ErrorKind::invalid_argument,
            "sphere_grid needs count >= 2*dimension (got " + std::to_string(count) + ")");
    std::vector<Vec> out;
    out.reserve(count);
    auto push_normalized = [&](Vec v) {
        const double nv = dual_norm(v, spec);
        out.push_back((1.0 / nv) * v);
    };
    if (n == 2) {
        // equally spaced angles starting at the axis; remaining axes are
        // inserted when count is not a multiple of 4
        std::vector<Vec> angles;
        for (std::size_t i = 0; i < count; ++i) {
            const double th = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(count);
            Vec v{std::cos(th), std::sin(th)};
            for (double& c : v)
                if (std::abs(c) < 1e-15) c = 0.0;
            angles.push_back(std::move(v));
        }
        if (count % 4 == 0) {
            for (auto& v : angles) push_normalized(v);
            return out;
        }
        for (std::size_t i = 0; i < n; ++i) {
            push_normalized(unit_vector(n, i, 1.0));
            push_normalized(unit_vector(n, i, -1.0));
        }
        for (std::size_t i = 0; out.size() < count; ++i) push_normalized(angles[i + 1]);
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) {
        push_normalized(unit_vector(n, i, 1.0));
        push_normalized(unit_vector(n, i, -1.0));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    while (out.size() < count) {
        Vec v(n);
        for (double& c : v) c = gauss(rng);
        if (euclidean_norm(v) < 1e-8) continue;
        push_normalized(std::move(v));
    }
    return out;
}

/// Derives an independent stream seed from a base seed and a label
/// (splitmix64 finalizer).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t label) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (label + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace regradius
