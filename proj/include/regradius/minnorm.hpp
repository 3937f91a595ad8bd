#pragma once

// Minimum-norm point of a polyhedron {z : a_i·z ≤ b_i} in low dimension.
//
// The Euclidean case uses the randomized incremental (Seidel-type) algorithm:
// keep the optimum of the first i constraints; when constraint i+1 is
// violated the new optimum lies on its hyperplane, so recurse one dimension
// down with the earlier constraints restricted to that hyperplane. Expected
// cost O(d!·m) for d variables and m constraints, exact up to rounding, and
// infeasibility falls out of the recursion. The 1- and ∞-norm objectives are
// handled by bisection on the norm level with polyhedral level sets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "regradius/linalg.hpp"
#include "regradius/spaces.hpp"

namespace regradius {

struct HalfSpace {
    Vec normal;  // a
    double bound;  // b, constraint a·z ≤ b
};

namespace detail {

inline constexpr double kFeasTol = 1e-13;

// Constraints are rows of `a` (count × d, row-major) with bounds `b`; the
// optimum is written to z. Flat buffers keep the recursion allocation-light.
inline bool seidel_flat(const double* a, const double* b, std::size_t count, std::size_t d, double* z) {
    std::fill(z, z + d, 0.0);
    if (d == 0) {
        for (std::size_t i = 0; i < count; ++i)
            if (b[i] < -kFeasTol) return false;
        return true;
    }
    std::vector<double> ra, rb, w;
    Vec z0(d);
    for (std::size_t i = 0; i < count; ++i) {
        const double* h = a + i * d;
        double hz = 0.0, na2 = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            hz += h[c] * z[c];
            na2 += h[c] * h[c];
        }
        if (hz <= b[i] + kFeasTol) continue;
        if (na2 < 1e-28) return false;  // 0·z ≤ b with b < 0
        // Optimum of the first i+1 constraints lies on a·z = b.
        for (std::size_t c = 0; c < d; ++c) z0[c] = (b[i] / na2) * h[c];
        const std::vector<Vec> basis = orthogonal_complement({Vec(h, h + d)}, d);
        const std::size_t e = basis.size();
        ra.resize(i * e);
        rb.resize(i);
        for (std::size_t j = 0; j < i; ++j) {
            const double* aj = a + j * d;
            for (std::size_t k = 0; k < e; ++k) {
                double s = 0.0;
                for (std::size_t c = 0; c < d; ++c) s += aj[c] * basis[k][c];
                ra[j * e + k] = s;
            }
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) s += aj[c] * z0[c];
            rb[j] = b[j] - s;
        }
        w.resize(e);
        if (!seidel_flat(ra.data(), rb.data(), i, e, w.data())) return false;
        for (std::size_t c = 0; c < d; ++c) z[c] = z0[c];
        for (std::size_t k = 0; k < e; ++k)
            for (std::size_t c = 0; c < d; ++c) z[c] += w[k] * basis[k][c];
    }
    return true;
}

inline std::optional<Vec> seidel_min_norm(const std::vector<HalfSpace>& hs, std::size_t count, std::size_t d) {
    std::vector<double> a(count * d), b(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::copy(hs[i].normal.begin(), hs[i].normal.end(), a.begin() + static_cast<std::ptrdiff_t>(i * d));
        b[i] = hs[i].bound;
    }
    Vec z(d);
    if (!seidel_flat(a.data(), b.data(), count, d, z.data())) return std::nullopt;
    return z;
}

}  // namespace detail

/// Euclidean minimum-norm point of ∩{a_i·z ≤ b_i}; nullopt when empty.
inline std::optional<Vec> min_euclidean_norm_point(std::vector<HalfSpace> hs, std::size_t dim, std::uint64_t seed = 7) {
    for (const auto& h : hs)
        require(h.normal.size() == dim, ErrorKind::dimension_mismatch, "halfspace dimension mismatch");
    std::mt19937_64 rng(seed);
    std::shuffle(hs.begin(), hs.end(), rng);
    return detail::seidel_min_norm(hs, hs.size(), dim);
}

/// Minimizes the dual norm ‖z‖_q of `space` over the polyhedron. For q = 2
/// this is the exact Seidel solve; for q ∈ {1, ∞} a bisection on the level s
/// with polyhedral level sets {‖z‖_q ≤ s}. Returns nullopt when empty.
inline std::optional<Vec> min_dual_norm_point(const std::vector<HalfSpace>& hs, const NormSpec& space,
                                              std::uint64_t seed = 7) {
    const std::size_t n = space.dimension();
    auto euclid = min_euclidean_norm_point(hs, n, seed);
    if (!euclid || space.q() == 2.0) return euclid;
    const double q = space.q();
    require(q == 1.0 || std::isinf(q), ErrorKind::unsupported,
            "min-norm coderivative search supports primal p in {1, 2, inf}");
    auto level_set = [&](double s) {
        std::vector<HalfSpace> box;
        if (std::isinf(q)) {
            for (std::size_t i = 0; i < n; ++i) {
                box.push_back({unit_vector(n, i, 1.0), s});
                box.push_back({unit_vector(n, i, -1.0), s});
            }
        } else {
            const std::size_t patterns = std::size_t{1} << n;
            for (std::size_t mask = 0; mask < patterns; ++mask) {
                Vec a(n);
                for (std::size_t i = 0; i < n; ++i) a[i] = (mask >> i) & 1U ? -1.0 : 1.0;
                box.push_back({std::move(a), s});
            }
        }
        return box;
    };
    Vec best = *euclid;
    double hi = dual_norm(best, space);
    double lo = 0.0;
    for (int iter = 0; iter < 60 && hi - lo > 1e-13 * std::max(1.0, hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        std::vector<HalfSpace> trial = level_set(mid);
        trial.insert(trial.end(), hs.begin(), hs.end());
        if (auto z = min_euclidean_norm_point(trial, n, seed)) {
            best = *z;
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return best;
}

}  // namespace regradius
