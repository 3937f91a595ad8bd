#pragma once

// Set-valued mappings F: R^n ⇉ R^m with oracles for F(x), d(y, F(x)) and
// d(x, F⁻¹(y)).
//
// Variants:
//   Linear       F(x) = {Ax}
//   Smooth       finitely many continuous branches, optionally with explicit
//                inverse branches (needed for inverse distances)
//   FiniteGraph  a stored sample of gph F with membership tolerances
//   Perturbed    F + αf for a single-valued f with f(x̄) = 0

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "regradius/error.hpp"
#include "regradius/linalg.hpp"
#include "regradius/perturbation_function.hpp"
#include "regradius/spaces.hpp"

namespace regradius {

struct GraphPoint {
    Vec x;
    Vec y;
    bool operator==(const GraphPoint&) const = default;
};

struct SampledGraph {
    GraphPoint base;
    std::vector<GraphPoint> points;
    double radius = 0.0;
};

/// F⁻¹(y) as either a finite set or an affine set p + span(basis).
struct InverseImage {
    std::vector<Vec> points;
    std::vector<Vec> null_basis;  // orthonormal (Euclidean); nonempty ⇒ affine, points = {p}

    bool empty() const { return points.empty(); }
    bool affine() const { return !null_basis.empty(); }

    double distance_from(const Vec& x, const NormSpec& domain) const {
        if (points.empty()) return kInf;
        if (!affine()) return distance_to_set(x, points, domain);
        const Vec& p = points.front();
        const Vec d = x - p;
        // Euclidean projection onto the affine set; exact for p = 2
        Vec z(null_basis.size());
        for (std::size_t k = 0; k < null_basis.size(); ++k) z[k] = dot(null_basis[k], d);
        auto residual = [&](const Vec& zz) {
            Vec r = d;
            for (std::size_t k = 0; k < null_basis.size(); ++k)
                for (std::size_t i = 0; i < r.size(); ++i) r[i] -= zz[k] * null_basis[k][i];
            return norm(r, domain);
        };
        double best = residual(z);
        if (domain.is_euclidean()) return best;
        // Compass search: the objective is convex in z.
        double step = std::max(euclidean_norm(d), 1e-300);
        const double floor = 1e-13 * std::max(step, 1e-300);
        while (step > floor) {
            bool improved = false;
            for (std::size_t k = 0; k < z.size(); ++k)
                for (double sgn : {1.0, -1.0}) {
                    Vec trial = z;
                    trial[k] += sgn * step;
                    const double v = residual(trial);
                    if (v < best) {
                        best = v;
                        z = std::move(trial);
                        improved = true;
                    }
                }
            if (!improved) step *= 0.5;
        }
        return best;
    }
};

/// One continuous branch of F⁻¹: y ↦ u, undefined outside its domain.
/// `linear` is set when the branch is y ↦ L y.
struct InverseBranch {
    std::function<std::optional<Vec>(const Vec&)> map;
    std::optional<Matrix> linear;
};

struct SmoothMap {
    std::string name;
    std::size_t domain_dim = 1;
    std::size_t range_dim = 1;
    std::function<std::vector<Vec>(const Vec&)> images;
    std::vector<InverseBranch> inverse_branches;  // empty ⇒ inverse oracle unsupported
};

namespace builtins {

inline SmoothMap identity(std::size_t n) {
    return SmoothMap{"identity", n, n, [](const Vec& x) { return std::vector<Vec>{x}; },
                     {InverseBranch{[](const Vec& y) { return std::optional<Vec>(y); }, Matrix::identity(n)}}};
}

/// F(x) = {x, −x}
inline SmoothMap abs_branches(std::size_t n) {
    return SmoothMap{"abs-branches", n, n, [](const Vec& x) { return std::vector<Vec>{x, -x}; },
                     {InverseBranch{[](const Vec& y) { return std::optional<Vec>(y); }, Matrix::identity(n)},
                      InverseBranch{[](const Vec& y) { return std::optional<Vec>(-y); },
                                    Matrix::identity(n).scaled(-1.0)}}};
}

/// F(x) = {x∘x} (componentwise square); inverse branches are the 2^n orthants.
inline SmoothMap parabola(std::size_t n) {
    std::vector<InverseBranch> branches;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        branches.push_back(InverseBranch{[mask, n](const Vec& y) -> std::optional<Vec> {
                                             Vec u(n);
                                             for (std::size_t i = 0; i < n; ++i) {
                                                 if (y[i] < 0.0) return std::nullopt;
                                                 u[i] = ((mask >> i) & 1U ? -1.0 : 1.0) * std::sqrt(y[i]);
                                             }
                                             return u;
                                         },
                                         std::nullopt});
    }
    return SmoothMap{"parabola", n, n,
                     [](const Vec& x) {
                         Vec y(x.size());
                         for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * x[i];
                         return std::vector<Vec>{y};
                     },
                     std::move(branches)};
}

inline SmoothMap by_name(const std::string& name, std::size_t n) {
    if (name == "identity") return identity(n);
    if (name == "abs-branches") return abs_branches(n);
    if (name == "parabola") return parabola(n);
    fail(ErrorKind::invalid_argument, "unknown builtin mapping '" + name + "'");
}

}  // namespace builtins

class MappingModel;

namespace detail {

struct LinearData {
    Matrix a;
    std::vector<Vec> row_basis;  // orthonormal basis of the row space
    Matrix reduced_normal;       // (AQ)ᵀ(AQ)
    Matrix aq;                   // A Q
    std::vector<Vec> null_basis;
};

struct GraphData {
    SampledGraph sample;
    double tol_x = 0.0;
    double tol_y = 0.0;
};

struct PerturbedData {
    std::shared_ptr<const MappingModel> base;
    Perturbation f;
    double scale = 1.0;
};

}  // namespace detail

class MappingModel {
public:
    using Variant = std::variant<detail::LinearData, SmoothMap, detail::GraphData, detail::PerturbedData>;

    static MappingModel linear(Matrix a, double domain_p = 2.0, double range_p = 2.0) {
        detail::LinearData d;
        const NormSpec dom(a.cols(), domain_p);
        const NormSpec ran(a.rows(), range_p);
        d.row_basis = orthonormal_basis(a.to_rows(), 1e-12);
        const std::size_t r = d.row_basis.size();
        d.aq = Matrix(a.rows(), r);
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t k = 0; k < r; ++k) d.aq(i, k) = dot(a.row(i), d.row_basis[k]);
        d.reduced_normal = d.aq.transpose() * d.aq;
        d.null_basis = orthogonal_complement(d.row_basis, a.cols());
        d.a = std::move(a);
        return MappingModel(std::move(d), dom, ran);
    }

    static MappingModel smooth(SmoothMap map, double domain_p = 2.0, double range_p = 2.0) {
        const NormSpec dom(map.domain_dim, domain_p);
        const NormSpec ran(map.range_dim, range_p);
        return MappingModel(std::move(map), dom, ran);
    }

    static MappingModel finite_graph(SampledGraph sample, double domain_p = 2.0, double range_p = 2.0) {
        require(!sample.points.empty(), ErrorKind::invalid_argument, "finite graph needs at least one point");
        const NormSpec dom(sample.base.x.size(), domain_p);
        const NormSpec ran(sample.base.y.size(), range_p);
        for (const auto& p : sample.points) {
            require(p.x.size() == dom.dimension() && p.y.size() == ran.dimension(), ErrorKind::dimension_mismatch,
                    "graph point dimensions differ from the base point");
        }
        detail::GraphData g;
        g.tol_x = 1e-9 * (1.0 + sample.radius);
        g.tol_y = g.tol_x;
        g.sample = std::move(sample);
        return MappingModel(std::move(g), dom, ran);
    }

    static MappingModel perturbed(const MappingModel& base, Perturbation f, double scale) {
        require(f.range_dimension() == base.range().dimension(), ErrorKind::dimension_mismatch,
                "perturbation range dimension differs from the mapping range");
        require(!std::holds_alternative<detail::PerturbedData>(base.v_), ErrorKind::unsupported,
                "nested perturbations are not supported; combine them into one perturbation");
        detail::PerturbedData d{std::make_shared<const MappingModel>(base), std::move(f), scale};
        return MappingModel(std::move(d), base.domain_, base.range_);
    }

    const NormSpec& domain() const { return domain_; }
    const NormSpec& range() const { return range_; }
    ProductNormSpec product() const { return {domain_, range_}; }

    std::string kind() const {
        switch (v_.index()) {
            case 0: return "linear";
            case 1: return "smooth";
            case 2: return "graph";
            default: return "perturbed";
        }
    }

    const Matrix* linear_matrix() const {
        if (const auto* d = std::get_if<detail::LinearData>(&v_)) return &d->a;
        return nullptr;
    }
    const SampledGraph* stored_graph() const {
        if (const auto* d = std::get_if<detail::GraphData>(&v_)) return &d->sample;
        return nullptr;
    }
    const detail::PerturbedData* perturbation_data() const { return std::get_if<detail::PerturbedData>(&v_); }
    const SmoothMap* smooth_map() const { return std::get_if<SmoothMap>(&v_); }

    /// Finite (possibly empty) subset of F(x).
    std::vector<Vec> images(const Vec& x) const {
        detail::check_dim(x, domain_);
        return std::visit(
            [&](const auto& d) -> std::vector<Vec> {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, detail::LinearData>) {
                    return {d.a.apply(x)};
                } else if constexpr (std::is_same_v<T, SmoothMap>) {
                    return d.images(x);
                } else if constexpr (std::is_same_v<T, detail::GraphData>) {
                    std::vector<Vec> out;
                    for (const auto& p : d.sample.points)
                        if (distance(p.x, x, domain_) <= d.tol_x) out.push_back(p.y);
                    return out;
                } else {
                    std::vector<Vec> out = d.base->images(x);
                    if (d.scale == 0.0) return out;
                    const Vec shift = d.scale * d.f(x);
                    for (Vec& y : out) y = y + shift;
                    return out;
                }
            },
            v_);
    }

    double distance_to_image(const Vec& x, const Vec& y) const {
        detail::check_dim(y, range_);
        return distance_to_set(y, images(x), range_);
    }

    /// F⁻¹(y): exact for Linear (affine set) and for Smooth maps with inverse
    /// branches; a tolerance slice for FiniteGraph; root-finding for Perturbed.
    InverseImage inverse_image(const Vec& y) const;

    double inverse_distance(const Vec& x, const Vec& y) const {
        detail::check_dim(x, domain_);
        return inverse_image(y).distance_from(x, domain_);
    }

    /// Points where the mapping has local structure that samplers should visit.
    std::vector<Vec> anchors() const {
        if (const auto* d = perturbation_data()) {
            if (d->scale == 0.0) return {};
            return d->f.anchors();
        }
        return {};
    }

    /// Inverse branches of the unperturbed mapping (square invertible Linear
    /// or Smooth with declared branches).
    std::vector<InverseBranch> inverse_branches() const {
        if (const auto* d = std::get_if<detail::LinearData>(&v_)) {
            const std::size_t n = d->a.cols();
            require(d->a.rows() == n && d->null_basis.empty(), ErrorKind::unsupported,
                    "inverse branches need a square invertible linear map");
            Matrix inv(n, n);
            for (std::size_t j = 0; j < n; ++j) {
                auto col = solve_square(d->a, unit_vector(n, j));
                require(col.has_value(), ErrorKind::unsupported, "linear map is numerically singular");
                for (std::size_t i = 0; i < n; ++i) inv(i, j) = (*col)[i];
            }
            return {InverseBranch{[inv](const Vec& yy) { return std::optional<Vec>(inv.apply(yy)); }, inv}};
        }
        if (const auto* s = std::get_if<SmoothMap>(&v_)) {
            require(!s->inverse_branches.empty(), ErrorKind::unsupported,
                    "smooth map '" + s->name + "' declares no inverse branches");
            return s->inverse_branches;
        }
        fail(ErrorKind::unsupported, "inverse branches are only available for linear and smooth mappings");
    }

private:
    MappingModel(Variant v, NormSpec dom, NormSpec ran) : v_(std::move(v)), domain_(dom), range_(ran) {}

    InverseImage linear_inverse(const detail::LinearData& d, const Vec& y) const {
        InverseImage out;
        const std::size_t r = d.row_basis.size();
        Vec particular = zeros(d.a.cols());
        if (r > 0) {
            auto c = solve_square(d.reduced_normal, d.aq.apply_transpose(y), 1e-14);
            require(c.has_value(), ErrorKind::construction, "row-space normal equations are singular");
            for (std::size_t k = 0; k < r; ++k)
                for (std::size_t i = 0; i < particular.size(); ++i) particular[i] += (*c)[k] * d.row_basis[k][i];
        }
        const Vec resid = d.a.apply(particular) - y;
        const double scale = 1.0 + euclidean_norm(y) + d.a.frobenius_norm() * euclidean_norm(particular);
        if (euclidean_norm(resid) > 1e-10 * scale) return out;  // y ∉ range(A)
        out.points.push_back(std::move(particular));
        out.null_basis = d.null_basis;
        return out;
    }

    InverseImage perturbed_inverse(const detail::PerturbedData& d, const Vec& y) const;

    Variant v_;
    NormSpec domain_;
    NormSpec range_;
};

namespace detail {

/// Roots of h on [lo, hi]: sign changes refined by bisection, exact zeros at
/// grid nodes, and near-tangent local minima of |h| refined by golden search.
inline std::vector<double> scalar_roots(const std::function<double(double)>& h, double lo, double hi,
                                        std::size_t grid, double zero_tol) {
    std::vector<double> roots;
    if (!(hi > lo)) {
        if (std::abs(h(lo)) <= zero_tol) roots.push_back(lo);
        return roots;
    }
    std::vector<double> cs(grid + 1), hs(grid + 1);
    for (std::size_t i = 0; i <= grid; ++i) {
        cs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid);
        hs[i] = h(cs[i]);
    }
    for (std::size_t i = 0; i <= grid; ++i) {
        if (hs[i] == 0.0) roots.push_back(cs[i]);
        if (i == grid) break;
        if ((hs[i] < 0.0 && hs[i + 1] > 0.0) || (hs[i] > 0.0 && hs[i + 1] < 0.0)) {
            double a = cs[i], b = cs[i + 1], ha = hs[i];
            for (int it = 0; it < 100 && b - a > 0.0; ++it) {
                const double m = 0.5 * (a + b);
                if (m == a || m == b) break;
                const double hm = h(m);
                if (hm == 0.0) {
                    a = b = m;
                    break;
                }
                if ((hm < 0.0) == (ha < 0.0)) {
                    a = m;
                    ha = hm;
                } else {
                    b = m;
                }
            }
            roots.push_back(0.5 * (a + b));
        } else if (i > 0 && std::abs(hs[i]) < std::abs(hs[i - 1]) && std::abs(hs[i]) <= std::abs(hs[i + 1]) &&
                   hs[i] != 0.0 && (hs[i - 1] > 0.0) == (hs[i] > 0.0) && (hs[i + 1] > 0.0) == (hs[i] > 0.0)) {
            // possible tangential root
            double a = cs[i - 1], b = cs[i + 1];
            const double g = 0.5 * (std::sqrt(5.0) - 1.0);
            for (int it = 0; it < 120; ++it) {
                const double c1 = b - g * (b - a), c2 = a + g * (b - a);
                if (std::abs(h(c1)) < std::abs(h(c2)))
                    b = c2;
                else
                    a = c1;
            }
            const double c = 0.5 * (a + b);
            if (std::abs(h(c)) <= zero_tol) roots.push_back(c);
        }
    }
    return roots;
}

inline void append_unique(std::vector<Vec>& pts, Vec u, double tol) {
    for (const Vec& p : pts) {
        double d = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) d = std::max(d, std::abs(p[i] - u[i]));
        if (d <= tol) return;
    }
    pts.push_back(std::move(u));
}

}  // namespace detail

inline InverseImage MappingModel::inverse_image(const Vec& y) const {
    detail::check_dim(y, range_);
    return std::visit(
        [&](const auto& d) -> InverseImage {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, detail::LinearData>) {
                return linear_inverse(d, y);
            } else if constexpr (std::is_same_v<T, SmoothMap>) {
                require(!d.inverse_branches.empty(), ErrorKind::unsupported,
                        "smooth map '" + d.name + "' declares no inverse branches");
                InverseImage out;
                for (const auto& b : d.inverse_branches)
                    if (auto u = b.map(y)) detail::append_unique(out.points, std::move(*u), 0.0);
                return out;
            } else if constexpr (std::is_same_v<T, detail::GraphData>) {
                InverseImage out;
                for (const auto& p : d.sample.points)
                    if (distance(p.y, y, range_) <= d.tol_y) out.points.push_back(p.x);
                return out;
            } else {
                return perturbed_inverse(d, y);
            }
        },
        v_);
}

inline InverseImage MappingModel::perturbed_inverse(const detail::PerturbedData& d, const Vec& y) const {
    const MappingModel& base = *d.base;
    const double alpha = d.scale;
    if (alpha == 0.0) return base.inverse_image(y);

    auto residual_ok = [&](const Vec& u) {
        return distance_to_image(u, y) <= 1e-9 * (1.0 + euclidean_norm(y) + euclidean_norm(u));
    };

    if (const auto* g = base.stored_graph()) {
        const double tol = 1e-9 * (1.0 + g->radius);
        InverseImage out;
        for (const auto& p : g->points)
            if (distance(p.y + alpha * d.f(p.x), y, range_) <= tol) out.points.push_back(p.x);
        return out;
    }

    const std::vector<InverseBranch> branches = base.inverse_branches();
    InverseImage out;
    const double dedupe = 1e-15 * (1.0 + euclidean_norm(y));

    if (const auto* bp = d.f.bumps()) {
        // Inside bump k, (F + αf)(u) ∋ y  ⇔  u = g_b(y + c v_k) with
        // c = α s_k(u)⟨x*_k, u − x_k⟩, a scalar equation in c on
        // |c| ≤ α‖x*_k‖ρ_k. Outside all balls f = 0 and u = g_b(y).
        // g_b(y) is kept only where f vanishes exactly: a residual test
        // would accept it next to a bump center, where the true root lies
        // closer than any absolute tolerance.
        for (const auto& br : branches) {
            if (auto u0 = br.map(y); u0 && norm(d.f(*u0), range_) == 0.0)
                detail::append_unique(out.points, *u0, dedupe);
            for (const auto& bump : bp->bumps) {
                const double cmax = std::abs(alpha) * dual_norm(bump.slope, domain_) * bump.radius;
                if (cmax == 0.0) continue;
                if (br.linear) {
                    // the curve c ↦ L(y + c v) is a segment; skip bumps it cannot reach
                    const Vec u0 = br.linear->apply(y);
                    const Vec w = br.linear->apply(bump.direction);
                    if (distance(u0, bump.center, domain_) - cmax * norm(w, domain_) > bump.radius) continue;
                }
                auto h = [&](double c) {
                    auto u = br.map(y + c * bump.direction);
                    if (!u) return std::nan("");
                    return c - alpha * bump_value(bump, *u, domain_) * dot(bump.slope, *u - bump.center);
                };
                auto h_finite = [&](double c) {
                    const double v = h(c);
                    return std::isnan(v) ? 1e300 : v;
                };
                for (double c : detail::scalar_roots(h_finite, -cmax, cmax, 1000, 1e-14 * cmax)) {
                    auto u = br.map(y + c * bump.direction);
                    if (u && residual_ok(*u)) detail::append_unique(out.points, std::move(*u), dedupe);
                }
            }
        }
        return out;
    }

    // Generic smooth f: per branch, solve u = g_b(y − αf(u)) by fixed-point
    // iteration, falling back to Newton with a finite-difference Jacobian.
    for (const auto& br : branches) {
        auto start = br.map(y);
        if (!start) continue;
        Vec u = *start;
        bool ok = false;
        for (int it = 0; it < 200; ++it) {
            auto next = br.map(y - alpha * d.f(u));
            if (!next) break;
            const double step = euclidean_norm(*next - u);
            u = std::move(*next);
            if (step <= 1e-15 * (1.0 + euclidean_norm(u))) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            u = *start;
            const std::size_t n = u.size();
            for (int it = 0; it < 60; ++it) {
                auto phi = [&](const Vec& v) -> std::optional<Vec> {
                    auto g = br.map(y - alpha * d.f(v));
                    if (!g) return std::nullopt;
                    return v - *g;
                };
                auto r = phi(u);
                if (!r) break;
                if (euclidean_norm(*r) <= 1e-15 * (1.0 + euclidean_norm(u))) {
                    ok = true;
                    break;
                }
                Matrix jac(n, n);
                for (std::size_t j = 0; j < n; ++j) {
                    const double hstep = 1e-7 * (1.0 + std::abs(u[j]));
                    Vec up = u, um = u;
                    up[j] += hstep;
                    um[j] -= hstep;
                    auto rp = phi(up), rm = phi(um);
                    if (!rp || !rm) break;
                    for (std::size_t i = 0; i < n; ++i) jac(i, j) = ((*rp)[i] - (*rm)[i]) / (2.0 * hstep);
                }
                auto delta = solve_square(jac, *r);
                if (!delta) break;
                u = u - *delta;
            }
        }
        if (residual_ok(u)) detail::append_unique(out.points, std::move(u), dedupe);
    }
    return out;
}

/// gph(F + αf) = {(x, y + αf(x)) : (x, y) ∈ gph F}. Requires f(x̄) = 0.
inline MappingModel add_perturbation(const MappingModel& f_map, Perturbation f, double alpha, const Vec& base_x) {
    const Vec at_base = f(base_x);
    require(euclidean_norm(at_base) <= 1e-10, ErrorKind::invalid_argument,
            "perturbation must vanish at the base point (|f(x̄)| = " + std::to_string(euclidean_norm(at_base)) + ")");
    return MappingModel::perturbed(f_map, std::move(f), alpha);
}

/// Layout of a nested-shell sample: x on spheres of radius radius·2^{-(j+1)}.
struct SampleLayout {
    std::size_t shells = 8;
    std::size_t per_shell = 16;
};

/// Seeded sample of gph F near `center`: x on nested shells around center.x,
/// paired with every image inside the pair ball of the given radius.
inline SampledGraph sample_graph(const MappingModel& f, const GraphPoint& center, double radius,
                                 const SampleLayout& layout, std::uint64_t seed) {
    require(radius > 0.0, ErrorKind::invalid_argument, "sampling radius must be positive");
    require(f.distance_to_image(center.x, center.y) <= 1e-10, ErrorKind::not_on_graph,
            "sampling center is not on the graph");
    const ProductNormSpec prod = f.product();
    SampledGraph g{center, {center}, radius};
    auto add = [&](const Vec& x, const Vec& y) {
        if (pair_distance(x, y, center.x, center.y, prod) > radius) return;
        for (const auto& p : g.points)
            if (p.x == x && p.y == y) return;
        g.points.push_back({x, y});
    };
    if (const auto* stored = f.stored_graph()) {
        for (const auto& p : stored->points) add(p.x, p.y);
        return g;
    }
    for (const Vec& y : f.images(center.x)) add(center.x, y);
    std::mt19937_64 rng(seed);
    for (std::size_t j = 0; j < layout.shells; ++j) {
        const double r = radius * std::ldexp(1.0, -static_cast<int>(j + 1));
        std::uniform_real_distribution<double> jitter(0.5, 1.0);
        for (std::size_t i = 0; i < layout.per_shell; ++i) {
            // in dimension 1 a sphere has two points; later draws fill (r/2, r]
            const double ri = (f.domain().dimension() == 1 && i >= 2) ? r * jitter(rng) : r;
            const Vec x = center.x + ri * random_unit(f.domain(), rng);
            for (const Vec& y : f.images(x)) add(x, y);
        }
    }
    return g;
}

/// Candidate (x, y) pairs for regularity-ratio searches: every x is paired
/// with every y.
struct PairPool {
    std::vector<Vec> xs;
    std::vector<Vec> ys;
};

/// Pairs whose inverse distance is below this fraction of their own offset
/// from the base point are treated as x ∈ F⁻¹(y): the ratio there is 0/0
/// up to rounding.
inline constexpr double kDegenerateInverseRel = 1e-9;

/// d(y, F(x)) / d(x, F⁻¹(y)) for one pair, or nullopt when the pair does not
/// count (denominator zero up to rounding, or ∞/∞). An empty inverse image
/// with a finite image distance gives ratio 0.
inline std::optional<double> regularity_ratio(double image_distance, double inverse_distance, double offset) {
    if (!(inverse_distance > kDegenerateInverseRel * offset) || !(inverse_distance > 0.0)) return std::nullopt;
    if (std::isinf(inverse_distance)) {
        if (std::isinf(image_distance)) return std::nullopt;
        return 0.0;
    }
    return image_distance / inverse_distance;
}

inline SampledGraph sample_graph(const MappingModel& f, const GraphPoint& center, double radius, std::size_t budget,
                                 std::uint64_t seed) {
    require(budget >= 1, ErrorKind::invalid_argument, "sampling budget must be >= 1");
    SampleLayout layout;
    layout.per_shell = (budget + layout.shells - 1) / layout.shells;
    return sample_graph(f, center, radius, layout, seed);
}

}  // namespace regradius
