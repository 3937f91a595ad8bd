#pragma once

// Small dense vectors and matrices. Dimensions in this library are tiny
// (rarely above 4), so everything is plain row-major std::vector storage.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regradius/error.hpp"

namespace regradius {

using Vec = std::vector<double>;

inline void check_same_size(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), ErrorKind::dimension_mismatch,
            "vector size mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    check_same_size(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Vec operator+(const Vec& a, const Vec& b) {
    check_same_size(a, b);
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec operator-(const Vec& a, const Vec& b) {
    check_same_size(a, b);
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec operator-(const Vec& a) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
    return r;
}

inline Vec operator*(double s, const Vec& a) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
    return r;
}

inline Vec zeros(std::size_t n) { return Vec(n, 0.0); }

inline Vec unit_vector(std::size_t n, std::size_t i, double sign = 1.0) {
    Vec e(n, 0.0);
    e[i] = sign;
    return e;
}

inline double euclidean_norm(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

inline Vec concat(const Vec& a, const Vec& b) {
    Vec r(a);
    r.insert(r.end(), b.begin(), b.end());
    return r;
}

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            require(row.size() == cols_, ErrorKind::dimension_mismatch, "ragged matrix initializer");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix from_rows(const std::vector<Vec>& rows) {
        require(!rows.empty(), ErrorKind::invalid_argument, "matrix needs at least one row");
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            require(rows[i].size() == m.cols_, ErrorKind::dimension_mismatch, "ragged matrix rows");
            std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * m.cols_));
        }
        return m;
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix diagonal(const Vec& d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Vec row(std::size_t i) const {
        return Vec(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                   data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
    }

    Vec col(std::size_t j) const {
        Vec c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    std::vector<Vec> to_rows() const {
        std::vector<Vec> r;
        for (std::size_t i = 0; i < rows_; ++i) r.push_back(row(i));
        return r;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Vec apply(std::span<const double> x) const {
        require(x.size() == cols_, ErrorKind::dimension_mismatch, "matrix-vector size mismatch");
        Vec y(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    /// y ↦ Aᵀy
    Vec apply_transpose(std::span<const double> y) const {
        require(y.size() == rows_, ErrorKind::dimension_mismatch, "transpose-vector size mismatch");
        Vec x(cols_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) x[j] += (*this)(i, j) * y[i];
        return x;
    }

    Matrix operator*(const Matrix& b) const {
        require(cols_ == b.rows_, ErrorKind::dimension_mismatch, "matrix product size mismatch");
        Matrix c(rows_, b.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k)
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += (*this)(i, k) * b(k, j);
        return c;
    }

    Matrix operator+(const Matrix& b) const {
        require(rows_ == b.rows_ && cols_ == b.cols_, ErrorKind::dimension_mismatch, "matrix sum size mismatch");
        Matrix c(*this);
        for (std::size_t i = 0; i < data_.size(); ++i) c.data_[i] += b.data_[i];
        return c;
    }

    Matrix scaled(double s) const {
        Matrix c(*this);
        for (double& v : c.data_) v *= s;
        return c;
    }

    double frobenius_norm() const { return euclidean_norm(data_); }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix outer(const Vec& u, const Vec& v) {
    Matrix m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
    return m;
}

/// Solves a square system by Gaussian elimination with partial pivoting.
/// Returns nullopt when a pivot falls below `pivot_tol` relative to the
/// largest entry.
inline std::optional<Vec> solve_square(Matrix a, Vec b, double pivot_tol = 1e-13) {
    const std::size_t n = a.rows();
    require(a.cols() == n && b.size() == n, ErrorKind::dimension_mismatch, "solve_square needs a square system");
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
    if (scale == 0.0) return std::nullopt;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (std::abs(a(piv, k)) <= pivot_tol * scale) return std::nullopt;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = a(i, k) / a(k, k);
            if (m == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= m * a(k, j);
            b[i] -= m * b[k];
        }
    }
    Vec x(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * x[j];
        x[ii] = s / a(ii, ii);
    }
    return x;
}

/// Orthonormal basis (modified Gram-Schmidt, two passes) of span(vectors).
/// Vectors whose residual falls below `tol` times their norm are dropped.
inline std::vector<Vec> orthonormal_basis(const std::vector<Vec>& vectors, double tol = 1e-12) {
    std::vector<Vec> basis;
    for (const Vec& v : vectors) {
        Vec w = v;
        const double original = euclidean_norm(v);
        if (original == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& q : basis) {
                const double c = dot(q, w);
                for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * q[i];
            }
        const double nw = euclidean_norm(w);
        if (nw <= tol * original) continue;
        basis.push_back((1.0 / nw) * w);
    }
    return basis;
}

/// Orthonormal basis of the orthogonal complement of span(vectors) in R^n.
inline std::vector<Vec> orthogonal_complement(const std::vector<Vec>& vectors, std::size_t n) {
    std::vector<Vec> span = orthonormal_basis(vectors);
    const std::size_t rank = span.size();
    for (std::size_t i = 0; i < n && span.size() < n; ++i) {
        std::vector<Vec> trial = span;
        trial.push_back(unit_vector(n, i));
        trial = orthonormal_basis(trial, 1e-8);
        if (trial.size() > span.size()) span = std::move(trial);
    }
    return std::vector<Vec>(span.begin() + static_cast<std::ptrdiff_t>(rank), span.end());
}

}  // namespace regradius
