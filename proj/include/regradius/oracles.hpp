#pragma once

// Independent ground truth: one-sided Jacobi SVD, smallest eigenvalue of AᵀA
// by inertia bisection, exhaustive regularity ratios, literal ε-normal
// checks, and central finite differences. Nothing here calls the estimators
// it is used to validate.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "regradius/error.hpp"
#include "regradius/linalg.hpp"
#include "regradius/mappings.hpp"
#include "regradius/spaces.hpp"

namespace regradius::oracles {

struct SvdResult {
    std::vector<double> singular_values;  // nonincreasing, length min(m, n)
    Matrix u;                             // m × r left singular vectors (columns)
    Matrix v;                             // n × r right singular vectors (columns)
    int sweeps = 0;

    double sigma_min() const { return singular_values.back(); }
    Vec u_min() const { return u.col(u.cols() - 1); }
    Vec v_min() const { return v.col(v.cols() - 1); }
};

namespace detail {

// One-sided Jacobi on the columns of a (m ≥ n). On return the columns of a
// are U·Σ and v accumulates the rotations.
inline int jacobi_orthogonalize(Matrix& a, Matrix& v) {
    const std::size_t m = a.rows(), n = a.cols();
    // columns below this squared norm are numerically zero and left alone
    const double tiny = std::pow(1e-15 * a.frobenius_norm(), 2);
    for (int sweep = 1; sweep <= 200; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    alpha += a(i, p) * a(i, p);
                    beta += a(i, q) * a(i, q);
                    gamma += a(i, p) * a(i, q);
                }
                if (gamma == 0.0 || std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
                if (std::min(alpha, beta) <= tiny) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double ap = a(i, p), aq = a(i, q);
                    a(i, p) = c * ap - s * aq;
                    a(i, q) = s * ap + c * aq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) return sweep;
    }
    fail(ErrorKind::construction, "Jacobi SVD did not converge within 200 sweeps");
}

}  // namespace detail

/// Full thin SVD of a small matrix by one-sided Jacobi rotations.
inline SvdResult svd(const Matrix& a_in) {
    const bool wide = a_in.rows() < a_in.cols();
    Matrix a = wide ? a_in.transpose() : a_in;
    const std::size_t m = a.rows(), n = a.cols();
    require(n >= 1 && m >= 1, ErrorKind::invalid_argument, "svd of an empty matrix");
    Matrix v = Matrix::identity(n);
    const int sweeps = detail::jacobi_orthogonalize(a, v);

    std::vector<double> sv(n);
    for (std::size_t j = 0; j < n; ++j) sv[j] = euclidean_norm(a.col(j));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return sv[i] > sv[j]; });

    SvdResult r;
    r.sweeps = sweeps;
    Matrix u(m, n), vv(n, n);
    std::vector<Vec> left;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = order[k];
        r.singular_values.push_back(sv[j]);
        for (std::size_t i = 0; i < n; ++i) vv(i, k) = v(i, j);
        Vec col = a.col(j);
        if (sv[j] > 1e-300) col = (1.0 / sv[j]) * col;
        left.push_back(std::move(col));
    }
    // complete left vectors of (numerically) zero singular values
    std::vector<Vec> good;
    for (std::size_t k = 0; k < n; ++k)
        if (r.singular_values[k] > 1e-14 * std::max(1.0, r.singular_values.front())) good.push_back(left[k]);
    if (good.size() < n) {
        std::vector<Vec> extra = orthogonal_complement(good, m);
        std::size_t e = 0;
        for (std::size_t k = 0; k < n; ++k)
            if (!(r.singular_values[k] > 1e-14 * std::max(1.0, r.singular_values.front())) && e < extra.size())
                left[k] = extra[e++];
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < m; ++i) u(i, k) = left[k][i];
    if (wide) {
        r.u = vv;
        r.v = u;
    } else {
        r.u = u;
        r.v = vv;
    }
    return r;
}

/// Smallest singular value with its singular vectors; residual certified.
inline SvdResult sigma_min(const Matrix& a) {
    require(a.rows() <= 8 && a.cols() <= 8, ErrorKind::invalid_argument, "sigma_min oracle is for matrices up to 8x8");
    SvdResult r = svd(a);
    const bool wide = a.rows() < a.cols();
    const Vec av = wide ? a.apply_transpose(r.u_min()) : a.apply(r.v_min());
    const Vec target = r.sigma_min() * (wide ? r.v_min() : r.u_min());
    const double resid = euclidean_norm(av - target);
    require(resid <= 1e-10 * std::max(1.0, a.frobenius_norm()), ErrorKind::construction,
            "SVD residual certificate failed");
    return r;
}

/// Number of negative eigenvalues of the symmetric matrix s (Sylvester
/// inertia from an LDLᵀ factorization without pivoting).
inline std::size_t negative_inertia(Matrix s) {
    const std::size_t n = s.rows();
    std::size_t negatives = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double d = s(k, k);
        if (d == 0.0) d = -1e-300;
        if (d < 0.0) ++negatives;
        for (std::size_t i = k + 1; i < n; ++i) {
            const double l = s(i, k) / d;
            for (std::size_t j = k + 1; j <= i; ++j) s(i, j) -= l * s(j, k);
        }
    }
    return negatives;
}

/// λ_min(AᵀA) (or λ_min(AAᵀ) for wide A) by bisection on the inertia count.
inline double lambda_min_gram(const Matrix& a) {
    const Matrix g = a.rows() < a.cols() ? a * a.transpose() : a.transpose() * a;
    const std::size_t n = g.rows();
    double hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += std::abs(g(i, j));
        hi = std::max(hi, row);
    }
    hi = hi * (1.0 + 1e-12) + 1e-300;
    double lo = 0.0;
    for (int it = 0; it < 2000 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        Matrix shifted = g;
        for (std::size_t i = 0; i < n; ++i) shifted(i, i) -= mid;
        // below λ_min the shifted Gram matrix is positive definite
        if (negative_inertia(shifted) == 0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Exhaustive min over pool pairs in B_δ(x̄) × B_δ(ȳ) of
/// d(y, F(x)) / d(x, F⁻¹(y)). For linear maps with Euclidean norms the
/// inverse distance goes through the SVD pseudo-inverse rather than the
/// mapping's own least-squares path.
inline double brute_force_rg(const PairPool& pool, const MappingModel& f, const GraphPoint& base, double delta) {
    const NormSpec& dom = f.domain();
    const NormSpec& ran = f.range();
    const Matrix* a = f.linear_matrix();
    const bool use_svd = a != nullptr && dom.is_euclidean() && ran.is_euclidean();
    SvdResult dec;
    if (use_svd) dec = svd(*a);
    auto inverse_distance = [&](const Vec& x, const Vec& y) -> double {
        if (!use_svd) return f.inverse_distance(x, y);
        // x − A⁺(Ax − y) is the projection of x onto {u : Au = y} when consistent
        const Vec r = a->apply(x) - y;
        const double smax = dec.singular_values.front();
        Vec correction = zeros(x.size());
        for (std::size_t k = 0; k < dec.singular_values.size(); ++k) {
            const double s = dec.singular_values[k];
            if (s <= 1e-12 * smax) continue;
            const double c = dot(dec.u.col(k), r) / s;
            correction = correction + c * dec.v.col(k);
        }
        const Vec proj = x - correction;
        if (euclidean_norm(a->apply(proj) - y) > 1e-10 * (1.0 + euclidean_norm(y) + a->frobenius_norm() * euclidean_norm(proj)))
            return kInf;
        return euclidean_norm(correction);
    };
    auto image_distance = [&](const Vec& x, const Vec& y) -> double {
        if (use_svd) return euclidean_norm(y - a->apply(x));
        double best = kInf;
        for (const Vec& v : f.images(x)) best = std::min(best, distance(y, v, ran));
        return best;
    };
    double best = kInf;
    for (const Vec& x : pool.xs) {
        const double dx = distance(x, base.x, dom);
        if (dx > delta) continue;
        for (const Vec& y : pool.ys) {
            const double dy = distance(y, base.y, ran);
            if (dy > delta) continue;
            const double inv = inverse_distance(x, y);
            if (!(inv > kDegenerateInverseRel * (dx + dy)) || !(inv > 0.0)) continue;
            const double num = image_distance(x, y);
            if (std::isinf(inv)) {
                if (!std::isinf(num)) best = std::min(best, 0.0);
                continue;
            }
            best = std::min(best, num / inv);
        }
    }
    return best;
}

/// Literal check that every sample point z ≠ at has
/// ⟨w*, z − at⟩ / ‖z − at‖ ≤ ε − η (η = 1e−9).
inline bool brute_force_membership(const SampledGraph& sample, const GraphPoint& at, const Vec& wx, const Vec& wy,
                                   double eps, const ProductNormSpec& spec) {
    for (const auto& z : sample.points) {
        const double r = pair_distance(z.x, z.y, at.x, at.y, spec);
        if (r == 0.0) continue;
        const double quotient = (dot(wx, z.x - at.x) + dot(wy, z.y - at.y)) / r;
        if (quotient > eps - 1e-9) return false;
    }
    return true;
}

/// Central-difference Jacobian, m × n.
inline Matrix finite_difference_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h) {
    require(h > 0.0, ErrorKind::invalid_argument, "finite-difference step must be positive");
    const Vec fx = f(x);
    Matrix j(fx.size(), x.size());
    for (std::size_t c = 0; c < x.size(); ++c) {
        Vec xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        const Vec d = f(xp) - f(xm);
        for (std::size_t r = 0; r < fx.size(); ++r) j(r, c) = d[r] / (2.0 * h);
    }
    return j;
}

}  // namespace regradius::oracles
