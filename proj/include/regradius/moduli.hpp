#pragma once

// Estimators for the regularity modulus rg, the coderivative constant rg⁺ and
// the Lipschitz modulus lip, together with the discretized Fréchet ε-normal
// and ε-coderivative tests they rest on.
//
// Every estimator works on a decreasing list of scales δ_1 > ... > δ_J and
// reports the per-scale infimum (or supremum for lip); the reported value is
// the last scale.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "regradius/error.hpp"
#include "regradius/linalg.hpp"
#include "regradius/mappings.hpp"
#include "regradius/minnorm.hpp"
#include "regradius/oracles.hpp"
#include "regradius/spaces.hpp"

namespace regradius {

/// Slack η used to discretize the strict inequality in the ε-normal test.
inline constexpr double kNormalSlack = 1e-9;

/// Relative margin the min-norm solve keeps below ε, so its output passes the
/// membership test with room for rounding.
inline constexpr double kSolveMargin = 1e-3;

struct ScaleSchedule {
    std::vector<double> radii;     // δ_1 > δ_2 > ... > δ_J
    std::vector<double> epsilons;  // ε_j, nonincreasing
    std::size_t samples_per_scale = 24;
    std::uint64_t seed = 1;

    std::size_t size() const { return radii.size(); }

    /// δ_j = first · ratio^{-j}, ε_j = δ_j.
    static ScaleSchedule geometric(std::size_t count = 8, double first = 1.0, double ratio = std::sqrt(10.0),
                                   std::uint64_t seed = 1) {
        ScaleSchedule s;
        for (std::size_t j = 0; j < count; ++j) s.radii.push_back(first * std::pow(ratio, -static_cast<double>(j)));
        s.epsilons = s.radii;
        s.seed = seed;
        return s;
    }

    /// Field-level problems, empty when valid.
    std::vector<std::string> problems() const {
        std::vector<std::string> out;
        if (radii.size() < 3) out.push_back("schedule needs at least 3 radii");
        if (epsilons.size() != radii.size()) out.push_back("epsilons must have the same length as radii");
        for (std::size_t j = 0; j < radii.size(); ++j) {
            if (!(radii[j] > 0.0) || !std::isfinite(radii[j])) {
                out.push_back("radii must be positive and finite");
                break;
            }
        }
        for (std::size_t j = 1; j < radii.size(); ++j) {
            if (!(radii[j] < radii[j - 1])) {
                out.push_back("radii not decreasing");
                break;
            }
        }
        for (double e : epsilons) {
            if (!(e >= 0.0) || !std::isfinite(e)) {
                out.push_back("epsilons must be nonnegative and finite");
                break;
            }
        }
        for (std::size_t j = 1; j < epsilons.size(); ++j) {
            if (epsilons[j] > epsilons[j - 1]) {
                out.push_back("epsilons must be nonincreasing");
                break;
            }
        }
        if (samples_per_scale == 0) out.push_back("samples_per_scale must be >= 1");
        return out;
    }

    void validate() const {
        const auto p = problems();
        if (!p.empty()) fail(ErrorKind::invalid_argument, "invalid schedule: " + p.front());
    }
};

struct ScaleValue {
    double delta;
    double value;
};

/// x* ∈ D*_ε F(at)(y*) as certified on some sample.
struct CoderivativeElement {
    GraphPoint at;
    Vec y_star;
    Vec x_star;
    double eps = 0.0;
};

/// Per-scale argmin of the rg⁺ search together with the sample it was
/// certified on.
struct ScaleWitness {
    CoderivativeElement element;
    SampledGraph sample;
    double test_radius = 0.0;
};

struct ModulusEstimate {
    double value = kInf;
    std::vector<ScaleValue> per_scale;
    bool stabilized = false;
    bool low_confidence = false;
    std::vector<std::optional<ScaleWitness>> witnesses;  // rg⁺ only, aligned with per_scale

    const std::optional<ScaleWitness>& last_witness() const {
        static const std::optional<ScaleWitness> none;
        return witnesses.empty() ? none : witnesses.back();
    }
};

/// Last two per-scale values finite, positive and within 5% relative.
inline bool is_stabilized(const std::vector<ScaleValue>& per_scale) {
    if (per_scale.size() < 2) return false;
    const double a = per_scale[per_scale.size() - 2].value;
    const double b = per_scale.back().value;
    if (!std::isfinite(a) || !std::isfinite(b) || !(a > 0.0) || !(b > 0.0)) return false;
    return std::abs(a - b) <= 0.05 * std::max(a, b);
}

namespace detail {

inline void finish_estimate(ModulusEstimate& e) {
    e.value = e.per_scale.empty() ? kInf : e.per_scale.back().value;
    e.stabilized = is_stabilized(e.per_scale);
}

inline bool sample_contains(const SampledGraph& sample, const GraphPoint& at, const ProductNormSpec& prod) {
    const double tol = 1e-12 * (1.0 + pair_norm_primal(at.x, at.y, prod));
    for (const auto& z : sample.points)
        if (pair_distance(z.x, z.y, at.x, at.y, prod) <= tol) return true;
    return false;
}

}  // namespace detail

/// True iff ⟨w*, z − at⟩ ≤ (ε − η)·‖z − at‖ for every sample point z ≠ at
/// within test_radius, with w* = (wx, wy).
inline bool eps_normal_test(const SampledGraph& sample, const GraphPoint& at, const Vec& wx, const Vec& wy, double eps,
                            double test_radius, const ProductNormSpec& prod) {
    require(test_radius > 0.0, ErrorKind::invalid_argument, "test radius must be positive");
    require(detail::sample_contains(sample, at, prod), ErrorKind::invalid_argument,
            "eps_normal_test: point is not in the sample");
    for (const auto& z : sample.points) {
        const double r = pair_distance(z.x, z.y, at.x, at.y, prod);
        if (r == 0.0 || r > test_radius) continue;
        if (dot(wx, z.x - at.x) + dot(wy, z.y - at.y) > (eps - kNormalSlack) * r) return false;
    }
    return true;
}

/// x* ∈ D*_ε F(at)(y*) on the sample, i.e. (x*, −y*) is an ε-normal.
inline bool coderivative_membership(const SampledGraph& sample, const GraphPoint& at, const Vec& y_star,
                                    const Vec& x_star, double eps, const ProductNormSpec& prod,
                                    double test_radius = kInf) {
    require(std::abs(dual_norm(y_star, prod.right) - 1.0) <= 1e-9, ErrorKind::invalid_argument,
            "coderivative_membership: y* must be a unit dual vector");
    return eps_normal_test(sample, at, x_star, -y_star, eps, test_radius, prod);
}

struct CoderivativeSearch {
    double value = kInf;
    std::optional<CoderivativeElement> element;
    std::size_t neighbors = 0;
    bool low_confidence = false;
};

namespace detail {

// Constraints ⟨x*, (u − x)/r⟩ ≤ ε_solve + ⟨y*, (v − y)/r⟩ for the neighbors
// of `at`. Normals are fixed; only the bounds depend on y*.
class CoderivativeProblem {
public:
    CoderivativeProblem(const SampledGraph& sample, const GraphPoint& at, double eps, double test_radius,
                        const ProductNormSpec& prod, std::uint64_t seed)
        : prod_(prod), seed_(seed), eps_solve_(eps * (1.0 - kSolveMargin) - 2.0 * kNormalSlack) {
        for (const auto& z : sample.points) {
            const double r = pair_distance(z.x, z.y, at.x, at.y, prod);
            if (r == 0.0 || r > test_radius) continue;
            hs_.push_back({(1.0 / r) * (z.x - at.x), 0.0});
            dy_.push_back((1.0 / r) * (z.y - at.y));
        }
        // fixed random order for the incremental solver
        std::vector<std::size_t> perm(hs_.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        std::mt19937_64 rng(seed);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<HalfSpace> hs;
        std::vector<Vec> dy;
        for (std::size_t i : perm) {
            hs.push_back(std::move(hs_[i]));
            dy.push_back(std::move(dy_[i]));
        }
        hs_ = std::move(hs);
        dy_ = std::move(dy);
    }

    std::size_t neighbors() const { return hs_.size(); }

    /// Minimal-dual-norm x* for this y*, or nullopt when infeasible.
    std::optional<Vec> solve(const Vec& y_star) {
        for (std::size_t i = 0; i < hs_.size(); ++i) hs_[i].bound = eps_solve_ + dot(y_star, dy_[i]);
        const NormSpec& dom = prod_.left;
        if (dom.q() != 2.0) return min_dual_norm_point(hs_, dom, seed_);
        const std::size_t n = dom.dimension();
        if (flat_.empty() && !hs_.empty()) {
            flat_.resize(hs_.size() * n);
            for (std::size_t i = 0; i < hs_.size(); ++i)
                std::copy(hs_[i].normal.begin(), hs_[i].normal.end(), flat_.begin() + static_cast<std::ptrdiff_t>(i * n));
        }
        bounds_.resize(hs_.size());
        for (std::size_t i = 0; i < hs_.size(); ++i) bounds_[i] = hs_[i].bound;
        Vec z(n);
        if (!seidel_flat(flat_.data(), bounds_.data(), hs_.size(), n, z.data())) return std::nullopt;
        return z;
    }

private:
    ProductNormSpec prod_;
    std::uint64_t seed_;
    double eps_solve_;
    std::vector<HalfSpace> hs_;
    std::vector<Vec> dy_;
    std::vector<double> flat_, bounds_;
};

}  // namespace detail

/// inf over y* (grid plus local pattern search on the dual unit sphere) of
/// the minimal ‖x*‖ with x* ∈ D*_ε F(at)(y*) on the sample.
inline CoderivativeSearch min_coderivative_norm(const SampledGraph& sample, const GraphPoint& at, double eps,
                                                const std::vector<Vec>& directions, double test_radius,
                                                const ProductNormSpec& prod, bool refine = true,
                                                std::uint64_t seed = 7) {
    require(!directions.empty(), ErrorKind::invalid_argument, "min_coderivative_norm needs directions");
    require(detail::sample_contains(sample, at, prod), ErrorKind::invalid_argument,
            "min_coderivative_norm: point is not in the sample");
    detail::CoderivativeProblem problem(sample, at, eps, test_radius, prod, seed);
    CoderivativeSearch out;
    out.neighbors = problem.neighbors();
    out.low_confidence = out.neighbors < 1;

    struct Candidate {
        double value = kInf;
        Vec y;
        Vec x;
    };
    auto evaluate = [&](const Vec& y) -> Candidate {
        auto x = problem.solve(y);
        if (!x) return {kInf, y, {}};
        return {dual_norm(*x, prod.left), y, std::move(*x)};
    };

    std::vector<Candidate> grid;
    for (const Vec& y : directions) {
        require(std::abs(dual_norm(y, prod.right) - 1.0) <= 1e-9, ErrorKind::invalid_argument,
                "directions must be unit dual vectors");
        grid.push_back(evaluate(y));
    }
    std::vector<std::size_t> order(grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return grid[a].value < grid[b].value; });
    Candidate best = grid[order.front()];

    const std::size_t m = prod.right.dimension();
    if (refine && m >= 2) {
        const std::size_t starts = std::min<std::size_t>(2, order.size());
        for (std::size_t s = 0; s < starts; ++s) {
            Candidate cur = grid[order[s]];
            if (!std::isfinite(cur.value)) break;
            double step = 0.25;
            for (int iter = 0; iter < 300 && step > 1e-4; ++iter) {
                Candidate move;
                for (std::size_t i = 0; i < m; ++i) {
                    for (double sgn : {1.0, -1.0}) {
                        Vec y = cur.y;
                        y[i] += sgn * step;
                        const double ny = dual_norm(y, prod.right);
                        if (ny < 1e-12) continue;
                        Candidate c = evaluate((1.0 / ny) * y);
                        if (c.value < move.value) move = std::move(c);
                    }
                }
                if (move.value < cur.value) {
                    cur = std::move(move);
                } else {
                    step *= 0.5;
                }
            }
            if (cur.value < best.value) best = std::move(cur);
        }
    }
    if (std::isfinite(best.value)) {
        out.value = best.value;
        out.element = CoderivativeElement{at, best.y, best.x, eps};
    }
    return out;
}

struct CoderivativeOptions {
    std::size_t scout_shells = 2;
    std::size_t scout_per_shell = 0;  // 0: n + 1
    std::size_t probe_shells = 28;
    std::size_t probe_per_shell = 0;  // 0: 4n + 4
    double test_radius_fraction = 0.125;
    std::size_t directions = 0;  // 0: 2 for m = 1, 16 for m = 2, 6m + 8 otherwise
    bool refine = true;
};

inline std::vector<Vec> default_directions(const NormSpec& range, std::size_t count, std::uint64_t seed) {
    const std::size_t m = range.dimension();
    if (count == 0) count = m == 1 ? 2 : (m == 2 ? 16 : 6 * m + 8);
    return sphere_grid(range, std::max(count, 2 * m), seed);
}

/// rg⁺ per scale: inf of min_coderivative_norm over graph points within δ_j
/// of the base, each tested on its own dense probe sample with ε = ε_j.
inline ModulusEstimate rg_plus_estimate(const MappingModel& f, const GraphPoint& base, const ScaleSchedule& schedule,
                                        const CoderivativeOptions& opt = {}) {
    schedule.validate();
    const ProductNormSpec prod = f.product();
    const std::size_t n = f.domain().dimension();
    const auto directions = default_directions(f.range(), opt.directions, mix_seed(schedule.seed, 101));
    const SampleLayout probe_layout{opt.probe_shells, opt.probe_per_shell ? opt.probe_per_shell : 4 * n + 4};
    ModulusEstimate est;
    for (std::size_t j = 0; j < schedule.size(); ++j) {
        const double delta = schedule.radii[j];
        const double eps = schedule.epsilons[j];
        const std::uint64_t seed_j = mix_seed(schedule.seed, 1000 + j);
        const SampledGraph scout = sample_graph(
            f, base, delta, SampleLayout{opt.scout_shells, opt.scout_per_shell ? opt.scout_per_shell : n + 1}, seed_j);
        const double test_radius = opt.test_radius_fraction * delta;
        double best = kInf;
        std::optional<ScaleWitness> witness;
        for (std::size_t i = 0; i < scout.points.size(); ++i) {
            const GraphPoint& z = scout.points[i];
            SampledGraph probe = sample_graph(f, z, test_radius, probe_layout, mix_seed(seed_j, i + 1));
            const CoderivativeSearch res =
                min_coderivative_norm(probe, z, eps, directions, test_radius, prod, opt.refine, mix_seed(seed_j, 5000 + i));
            est.low_confidence = est.low_confidence || res.low_confidence;
            if (res.element && res.value < best) {
                best = res.value;
                witness = ScaleWitness{*res.element, std::move(probe), test_radius};
            }
        }
        est.per_scale.push_back({delta, best});
        est.witnesses.push_back(std::move(witness));
    }
    detail::finish_estimate(est);
    return est;
}

struct RatioOptions {
    std::size_t eta_levels = 20;      // y = v + η w with η = δ·2^{-ℓ}, ℓ = 1..eta_levels
    std::size_t family_seeds = 3;     // random x per scale that get a y-family
    std::size_t refine_rounds = 10;
};

struct RatioSearch {
    ModulusEstimate estimate;
    PairPool pool;
};

namespace detail {

// Incrementally evaluated product pool xs × ys with cached images and
// inverse images; tracks the best pair inside every scale's ball.
class RatioPool {
public:
    RatioPool(const MappingModel& f, const GraphPoint& base, std::vector<double> radii)
        : f_(f), base_(base), radii_(std::move(radii)), best_(radii_.size(), kInf), best_pair_(radii_.size()) {}

    void add_x(const Vec& x) {
        const double dx = distance(x, base_.x, f_.domain());
        if (dx > radii_.front()) return;
        xs_.push_back(x);
        dx_.push_back(dx);
        images_.push_back(f_.images(x));
        for (std::size_t yi = 0; yi < ys_.size(); ++yi) evaluate(xs_.size() - 1, yi);
    }

    void add_y(const Vec& y) {
        const double dy = distance(y, base_.y, f_.range());
        if (dy > radii_.front()) return;
        ys_.push_back(y);
        dy_.push_back(dy);
        inverses_.push_back(f_.inverse_image(y));
        for (std::size_t xi = 0; xi < xs_.size(); ++xi) evaluate(xi, ys_.size() - 1);
    }

    const std::vector<Vec>& images(std::size_t xi) const { return images_[xi]; }
    double best(std::size_t j) const { return best_[j]; }
    std::optional<std::pair<std::size_t, std::size_t>> best_pair(std::size_t j) const { return best_pair_[j]; }
    const Vec& x(std::size_t i) const { return xs_[i]; }
    const Vec& y(std::size_t i) const { return ys_[i]; }
    double inverse_distance(std::size_t xi, std::size_t yi) const {
        return inverses_[yi].distance_from(xs_[xi], f_.domain());
    }

    PairPool pool() const { return {xs_, ys_}; }

private:
    void evaluate(std::size_t xi, std::size_t yi) {
        const double offset = dx_[xi] + dy_[yi];
        const double num = distance_to_set(ys_[yi], images_[xi], f_.range());
        const double inv = inverses_[yi].distance_from(xs_[xi], f_.domain());
        const auto ratio = regularity_ratio(num, inv, offset);
        if (!ratio) return;
        for (std::size_t j = 0; j < radii_.size(); ++j) {
            if (dx_[xi] > radii_[j] || dy_[yi] > radii_[j]) break;
            if (*ratio < best_[j]) {
                best_[j] = *ratio;
                best_pair_[j] = std::make_pair(xi, yi);
            }
        }
    }

    const MappingModel& f_;
    GraphPoint base_;
    std::vector<double> radii_;
    std::vector<Vec> xs_, ys_;
    std::vector<double> dx_, dy_;
    std::vector<std::vector<Vec>> images_;
    std::vector<InverseImage> inverses_;
    std::vector<double> best_;
    std::vector<std::optional<std::pair<std::size_t, std::size_t>>> best_pair_;
};

inline std::vector<Vec> primal_directions(const NormSpec& spec, std::size_t count, std::uint64_t seed) {
    std::vector<Vec> out = sphere_grid(spec, std::max(count, 2 * spec.dimension()), seed);
    for (Vec& v : out) v = (1.0 / norm(v, spec)) * v;
    return out;
}

}  // namespace detail

/// rg per scale: inf of d(y, F(x)) / d(x, F⁻¹(y)) over a shared pool of
/// pairs restricted to B_δ(x̄) × B_δ(ȳ). The pool holds random points, the
/// mapping's anchors, y-families v + η·w around images v, and local
/// refinements around each scale's current best pair. Returns the pool so
/// that other code can recompute the same infima.
inline RatioSearch rg_search(const MappingModel& f, const GraphPoint& base, const ScaleSchedule& schedule,
                             const RatioOptions& opt = {}) {
    schedule.validate();
    require(f.distance_to_image(base.x, base.y) <= 1e-10, ErrorKind::not_on_graph, "base point is not on the graph");
    const NormSpec& dom = f.domain();
    const NormSpec& ran = f.range();
    detail::RatioPool pool(f, base, schedule.radii);
    const auto dirs = detail::primal_directions(ran, ran.dimension() == 1 ? 2 : 2 * ran.dimension() + 4,
                                                mix_seed(schedule.seed, 201));
    const std::vector<Vec> anchors = f.anchors();

    auto add_family = [&](const Vec& x, double delta) {
        for (const Vec& v : f.images(x)) {
            for (std::size_t l = 1; l <= opt.eta_levels; ++l) {
                const double eta = delta * std::ldexp(1.0, -static_cast<int>(l));
                for (const Vec& w : dirs) {
                    const Vec y = v + eta * w;
                    if (distance(y, base.y, ran) <= delta) pool.add_y(y);
                }
            }
        }
    };

    pool.add_x(base.x);
    for (const Vec& a : anchors) pool.add_x(a);
    for (std::size_t j = 0; j < schedule.size(); ++j) {
        const double delta = schedule.radii[j];
        std::mt19937_64 rng(mix_seed(schedule.seed, 300 + j));
        std::vector<Vec> family_xs{base.x};
        for (std::size_t i = 0; i < schedule.samples_per_scale; ++i) {
            const Vec x = random_in_ball(base.x, delta, dom, rng);
            pool.add_x(x);
            if (i < opt.family_seeds) family_xs.push_back(x);
        }
        for (const Vec& a : anchors)
            if (distance(a, base.x, dom) <= delta) family_xs.push_back(a);
        for (std::size_t i = 0; i < schedule.samples_per_scale; ++i) pool.add_y(random_in_ball(base.y, delta, ran, rng));
        for (const Vec& x : family_xs) add_family(x, delta);
    }

    // local refinement around each scale's best pair
    std::mt19937_64 rng(mix_seed(schedule.seed, 400));
    const std::size_t candidates = 2 * std::max(dom.dimension(), ran.dimension()) + 2;
    for (std::size_t round = 0; round < opt.refine_rounds; ++round) {
        const double sigma = 0.5 * std::pow(0.6, static_cast<double>(round));
        for (std::size_t j = 0; j < schedule.size(); ++j) {
            const auto bp = pool.best_pair(j);
            if (!bp) continue;
            const Vec xb = pool.x(bp->first);
            const Vec yb = pool.y(bp->second);
            const double dy_img = distance_to_set(yb, pool.images(bp->first), ran);
            const double dx_inv = pool.inverse_distance(bp->first, bp->second);
            const double delta = schedule.radii[j];
            for (std::size_t c = 0; c < candidates; ++c) {
                if (std::isfinite(dy_img) && dy_img > 0.0) {
                    const Vec y = yb + (sigma * dy_img) * random_unit(ran, rng);
                    if (distance(y, base.y, ran) <= delta) pool.add_y(y);
                }
                if (std::isfinite(dx_inv) && dx_inv > 0.0) {
                    const Vec x = xb + (sigma * dx_inv) * random_unit(dom, rng);
                    if (distance(x, base.x, dom) <= delta) pool.add_x(x);
                }
            }
        }
    }

    RatioSearch out;
    for (std::size_t j = 0; j < schedule.size(); ++j) out.estimate.per_scale.push_back({schedule.radii[j], pool.best(j)});
    detail::finish_estimate(out.estimate);
    out.pool = pool.pool();
    return out;
}

inline ModulusEstimate rg_estimate(const MappingModel& f, const GraphPoint& base, const ScaleSchedule& schedule,
                                   const RatioOptions& opt = {}) {
    return rg_search(f, base, schedule, opt).estimate;
}

struct LipOptions {
    std::size_t ray_steps_per_octave = 16;
    std::size_t ray_octaves = 12;
    std::size_t refine_iterations = 60;
};

/// lip per scale: sup of ‖f(x) − f(x')‖ / ‖x − x'‖ over sampled pairs in
/// B_δ(x̄). Anchors get dense radial rays so that steep spots near them
/// are visited.
inline ModulusEstimate lip_estimate(const std::function<Vec(const Vec&)>& fn, const Vec& base_x,
                                    const NormSpec& domain, const NormSpec& range, const ScaleSchedule& schedule,
                                    const std::vector<Vec>& anchors = {}, const LipOptions& opt = {}) {
    schedule.validate();
    struct Pair {
        Vec a, b;
        double q;
    };
    auto quotient = [&](const Vec& a, const Vec& b) {
        const double d = distance(a, b, domain);
        // separations near the coordinates' rounding level give garbage quotients
        if (!(d > 1e-7 * std::max(norm(a, domain), norm(b, domain)))) return 0.0;
        return distance(fn(a), fn(b), range) / d;
    };
    std::vector<Pair> pairs;
    auto add = [&](const Vec& a, const Vec& b) {
        if (distance(a, b, domain) == 0.0) return;
        if (distance(a, base_x, domain) > schedule.radii.front() || distance(b, base_x, domain) > schedule.radii.front())
            return;
        pairs.push_back({a, b, quotient(a, b)});
    };
    auto reach = [&](const Pair& p) {
        return std::max(distance(p.a, base_x, domain), distance(p.b, base_x, domain));
    };

    for (std::size_t j = 0; j < schedule.size(); ++j) {
        const double delta = schedule.radii[j];
        std::mt19937_64 rng(mix_seed(schedule.seed, 500 + j));
        std::vector<Vec> pts;
        for (std::size_t i = 0; i < schedule.samples_per_scale; ++i) pts.push_back(random_in_ball(base_x, delta, domain, rng));
        for (std::size_t i = 0; i < pts.size(); ++i) {
            add(base_x, pts[i]);
            if (i + 1 < pts.size()) add(pts[i], pts[i + 1]);
            for (int l : {3, 6, 9, 12}) add(pts[i], pts[i] + (delta * std::ldexp(1.0, -l)) * random_unit(domain, rng));
        }
    }
    const auto ray_dirs = detail::primal_directions(domain, 2 * domain.dimension() + 4, mix_seed(schedule.seed, 601));
    for (const Vec& a : anchors) {
        const double t = distance(a, base_x, domain);
        if (t == 0.0 || t > schedule.radii.front()) continue;
        add(base_x, a);
        const std::size_t steps = opt.ray_steps_per_octave * opt.ray_octaves;
        for (const Vec& w : ray_dirs) {
            Vec prev = a;
            for (std::size_t i = 0; i <= steps; ++i) {
                const double r = t * std::exp2(-static_cast<double>(i) / static_cast<double>(opt.ray_steps_per_octave));
                const Vec p = a + r * w;
                add(prev, p);
                prev = p;
            }
        }
    }

    // pattern search on the best pair of every scale
    for (std::size_t j = 0; j < schedule.size(); ++j) {
        const double delta = schedule.radii[j];
        const Pair* best = nullptr;
        for (const auto& p : pairs)
            if (reach(p) <= delta && (!best || p.q > best->q)) best = &p;
        if (!best) continue;
        Pair cur = *best;
        double step = distance(cur.a, cur.b, domain);
        const std::size_t n = domain.dimension();
        for (std::size_t it = 0; it < opt.refine_iterations && step > 0.0; ++it) {
            std::optional<Pair> move;
            auto consider = [&](Vec a, Vec b) {
                if (distance(a, b, domain) == 0.0) return;
                if (distance(a, base_x, domain) > delta || distance(b, base_x, domain) > delta) return;
                const double q = quotient(a, b);
                if (q > cur.q && (!move || q > move->q)) move = Pair{std::move(a), std::move(b), q};
            };
            for (std::size_t i = 0; i < n; ++i) {
                for (double sgn : {1.0, -1.0}) {
                    const Vec e = unit_vector(n, i, sgn * step);
                    consider(cur.a + e, cur.b + e);
                    consider(cur.a + e, cur.b);
                    consider(cur.a, cur.b + e);
                }
            }
            const Vec mid = 0.5 * (cur.a + cur.b);
            consider(mid + 0.25 * (cur.a - cur.b), mid - 0.25 * (cur.a - cur.b));
            if (move) {
                cur = std::move(*move);
                pairs.push_back(cur);
            } else {
                step *= 0.5;
            }
        }
    }

    ModulusEstimate est;
    for (std::size_t j = 0; j < schedule.size(); ++j) {
        double sup = 0.0;
        for (const auto& p : pairs)
            if (reach(p) <= schedule.radii[j]) sup = std::max(sup, p.q);
        est.per_scale.push_back({schedule.radii[j], sup});
    }
    detail::finish_estimate(est);
    return est;
}

/// Operator norm of a Jacobian between the given spaces; exact for a single
/// row or when both sides use the same p ∈ {1, 2, ∞}, an upper bound otherwise.
inline double operator_norm(const Matrix& j, const NormSpec& domain, const NormSpec& range) {
    const double p = domain.p();
    if (j.rows() == 1) return dual_norm(j.row(0), domain);
    if (p == range.p()) {
        if (p == 2.0) return oracles::svd(j).singular_values.front();
        if (p == 1.0) {
            double best = 0.0;
            for (std::size_t c = 0; c < j.cols(); ++c) {
                double s = 0.0;
                for (std::size_t r = 0; r < j.rows(); ++r) s += std::abs(j(r, c));
                best = std::max(best, s);
            }
            return best;
        }
        if (std::isinf(p)) {
            double best = 0.0;
            for (std::size_t r = 0; r < j.rows(); ++r) {
                double s = 0.0;
                for (std::size_t c = 0; c < j.cols(); ++c) s += std::abs(j(r, c));
                best = std::max(best, s);
            }
            return best;
        }
    }
    // ‖Ju‖ ≤ Σ|u_c|·‖J e_c‖ ≤ n·max_c ‖J e_c‖·‖u‖ since |u_c| ≤ ‖u‖ for any p
    double col = 0.0;
    for (std::size_t c = 0; c < j.cols(); ++c) col = std::max(col, norm(j.col(c), range));
    return static_cast<double>(j.cols()) * col;
}

struct ShiftCheckResult {
    bool passed = true;
    std::size_t trials_run = 0;  // trials whose hypothesis x* ∈ D*_{ε₁}F held
    double eps1 = 0.0;
};

/// Coderivative shift rule: x* ∈ D*_{ε₁}F(x̄,ȳ)(y*) with ε₁ = ε/(‖∇f(x̄)‖+1)
/// implies x* + ∇f(x̄)ᵀy* ∈ D*_ε(F+f)(x̄, ȳ+f(x̄))(y*). Checked on a small
/// sample of gph F and its image under (x, y) ↦ (x, y + f(x)).
inline ShiftCheckResult coderivative_shift_check(const MappingModel& f_map, const std::function<Vec(const Vec&)>& fn,
                                                 const GraphPoint& base, double eps, std::size_t trials,
                                                 std::uint64_t seed) {
    require(eps > 0.0, ErrorKind::invalid_argument, "shift check needs eps > 0");
    const ProductNormSpec prod = f_map.product();
    const std::size_t n = f_map.domain().dimension();
    const Matrix jac = oracles::finite_difference_jacobian(fn, base.x, 1e-6 * (1.0 + euclidean_norm(base.x)));
    for (std::size_t r = 0; r < jac.rows(); ++r)
        for (std::size_t c = 0; c < jac.cols(); ++c)
            require(std::isfinite(jac(r, c)), ErrorKind::invalid_argument, "f is not differentiable at the base point");
    ShiftCheckResult out;
    out.eps1 = eps / (operator_norm(jac, f_map.domain(), f_map.range()) + 1.0);
    const double radius = 1e-5 * eps;
    const SampledGraph sample = sample_graph(f_map, base, radius, SampleLayout{8, 4 * n + 4}, mix_seed(seed, 1));
    SampledGraph shifted{{base.x, base.y + fn(base.x)}, {}, sample.radius};
    for (const auto& z : sample.points) shifted.points.push_back({z.x, z.y + fn(z.x)});

    const auto dirs = default_directions(f_map.range(), std::max<std::size_t>(trials, 2 * f_map.range().dimension()),
                                         mix_seed(seed, 2));
    detail::CoderivativeProblem problem(sample, base, out.eps1, kInf, prod, mix_seed(seed, 3));
    for (std::size_t t = 0; t < trials && t < dirs.size(); ++t) {
        const Vec& ys = dirs[t];
        const auto xs = problem.solve(ys);
        if (!xs || !coderivative_membership(sample, base, ys, *xs, out.eps1, prod)) continue;
        ++out.trials_run;
        const Vec shifted_x = *xs + jac.apply_transpose(ys);
        if (!coderivative_membership(shifted, shifted.base, ys, shifted_x, eps, prod)) out.passed = false;
    }
    return out;
}

}  // namespace regradius
