#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "regradius/mappings.hpp"
#include "regradius/oracles.hpp"

using namespace regradius;

namespace {

MappingModel diag() { return MappingModel::linear(Matrix{{2.0, 0.0}, {0.0, 0.5}}); }
MappingModel abs1() { return MappingModel::smooth(builtins::abs_branches(1)); }

}  // namespace

TEST(Images, Examples) {
    EXPECT_EQ(diag().images(Vec{1, 1}), (std::vector<Vec>{{2.0, 0.5}}));
    EXPECT_EQ(abs1().images(Vec{3}), (std::vector<Vec>{{3.0}, {-3.0}}));
    const MappingModel id = MappingModel::smooth(builtins::identity(2));
    const MappingModel z = add_perturbation(id, Perturbation::zero(2, 2), 1.0, Vec{0, 0});
    EXPECT_EQ(z.images(Vec{0.4, -1}), (std::vector<Vec>{{0.4, -1.0}}));
    EXPECT_THROW(diag().images(Vec{1}), Error);
}

TEST(DistanceToImage, Examples) {
    EXPECT_DOUBLE_EQ(MappingModel::linear(Matrix{{1.0}}).distance_to_image(Vec{1}, Vec{3}), 2.0);
    EXPECT_DOUBLE_EQ(abs1().distance_to_image(Vec{1}, Vec{0}), 1.0);
    EXPECT_DOUBLE_EQ(diag().distance_to_image(Vec{0, 0}, Vec{1, 0}), 1.0);
}

TEST(InverseDistance, Examples) {
    EXPECT_DOUBLE_EQ(MappingModel::linear(Matrix{{1.0}}).inverse_distance(Vec{1}, Vec{3}), 2.0);
    EXPECT_DOUBLE_EQ(abs1().inverse_distance(Vec{1}, Vec{-1}), 0.0);
}

// diag(2, 0.5)u = (2, 0.5) has the single solution (1, 1), so the distance
// from the origin is √2. A grid search over the (one-point) solution set
// confirms it without the mapping's own solver.
TEST(InverseDistance, DiagonalMatchesGridSearch) {
    const Vec y{2.0, 0.5};
    double best = kInf;
    for (int i = -400; i <= 400; ++i)
        for (int j = -400; j <= 400; ++j) {
            const Vec u{i / 100.0, j / 100.0};
            if (std::abs(2.0 * u[0] - y[0]) + std::abs(0.5 * u[1] - y[1]) < 1e-12) best = std::min(best, euclidean_norm(u));
        }
    EXPECT_NEAR(best, std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(diag().inverse_distance(Vec{0, 0}, y), best, 1e-12);
}

// Singular linear map: F⁻¹(y) is an affine line; the distance is the
// Euclidean projection distance, and y outside the range gives +∞.
TEST(InverseDistance, SingularLinear) {
    const MappingModel f = MappingModel::linear(Matrix{{1.0, 1.0}, {2.0, 2.0}});
    const InverseImage inv = f.inverse_image(Vec{2.0, 4.0});
    EXPECT_TRUE(inv.affine());
    // {u : u1 + u2 = 2}; distance from the origin is √2
    EXPECT_NEAR(f.inverse_distance(Vec{0, 0}, Vec{2.0, 4.0}), std::sqrt(2.0), 1e-12);
    EXPECT_EQ(f.inverse_distance(Vec{0, 0}, Vec{1.0, 0.0}), kInf);
}

TEST(SampleGraph, IdentityOnDiagonal) {
    const MappingModel id = MappingModel::smooth(builtins::identity(1));
    const SampledGraph s = sample_graph(id, {{0.0}, {0.0}}, 1.0, 100, 5);
    EXPECT_GE(s.points.size(), 100u);
    for (const auto& z : s.points) EXPECT_EQ(z.x, z.y);
}

TEST(SampleGraph, MembershipAndBranches) {
    const SampledGraph s = sample_graph(abs1(), {{0.0}, {0.0}}, 1.0, 64, 9);
    bool plus = false, minus = false;
    for (const auto& z : s.points) {
        EXPECT_LE(abs1().distance_to_image(z.x, z.y), 1e-10);
        if (z.x[0] != 0.0) (z.y[0] == z.x[0] ? plus : minus) = true;
    }
    EXPECT_TRUE(plus);
    EXPECT_TRUE(minus);

    const MappingModel para = MappingModel::smooth(builtins::parabola(2));
    for (const auto& z : sample_graph(para, {{1.0, 1.0}, {1.0, 1.0}}, 0.5, 80, 2).points)
        EXPECT_LE(para.distance_to_image(z.x, z.y), 1e-10);
}

TEST(SampleGraph, RejectsOffGraphCenter) {
    EXPECT_THROW(sample_graph(diag(), {{0.0, 0.0}, {1.0, 0.0}}, 1.0, 10, 1), Error);
}

TEST(AddPerturbation, ZeroScaleBehavesLikeBase) {
    const MappingModel f = diag();
    const Perturbation g(SinePerturbation{1.0, Matrix{{1.0, 2.0}, {0.5, -1.0}}, Vec{0, 0}});
    const MappingModel h = add_perturbation(f, g, 0.0, Vec{0, 0});
    std::mt19937_64 rng(1);
    std::normal_distribution<double> gauss;
    for (int t = 0; t < 50; ++t) {
        const Vec x{gauss(rng), gauss(rng)}, y{gauss(rng), gauss(rng)};
        EXPECT_EQ(h.images(x), f.images(x));
        EXPECT_NEAR(h.distance_to_image(x, y), f.distance_to_image(x, y), 1e-15);
        EXPECT_NEAR(h.inverse_distance(x, y), f.inverse_distance(x, y), 1e-9);
    }
}

TEST(AddPerturbation, IdentityMinusIdentityIsZero) {
    const MappingModel id = MappingModel::smooth(builtins::identity(2));
    const Perturbation g(LinearPerturbation{Matrix::identity(2).scaled(-1.0), Vec{0, 0}});
    const MappingModel h = add_perturbation(id, g, 1.0, Vec{0, 0});
    for (const Vec& x : {Vec{1, 2}, Vec{-0.3, 0.7}, Vec{0, 0}}) {
        const auto im = h.images(x);
        ASSERT_EQ(im.size(), 1u);
        EXPECT_NEAR(euclidean_norm(im.front()), 0.0, 1e-15);
    }
}

// Eckart–Young destabilizer: A − σ_min u vᵀ is singular.
TEST(AddPerturbation, RankOneDestabilizerIsSingular) {
    const Matrix a{{1.0, 0.3, -0.2}, {0.4, 1.2, 0.1}, {-0.5, 0.2, 0.8}};
    const auto sv = oracles::sigma_min(a);
    const Matrix c = outer(sv.u_min(), sv.v_min()).scaled(-sv.sigma_min());
    const MappingModel h = add_perturbation(MappingModel::linear(a), Perturbation(LinearPerturbation{c, zeros(3)}), 1.0, zeros(3));
    Matrix b(3, 3);
    for (std::size_t j = 0; j < 3; ++j) {
        const Vec col = h.images(unit_vector(3, j)).front();
        for (std::size_t i = 0; i < 3; ++i) b(i, j) = col[i];
    }
    EXPECT_LE(oracles::sigma_min(b).sigma_min(), 1e-12);
}

TEST(AddPerturbation, MustVanishAtBase) {
    const Perturbation g(LinearPerturbation{Matrix::identity(2), Vec{1, 0}});
    EXPECT_THROW(add_perturbation(diag(), g, 1.0, Vec{0, 0}), Error);
}

// Property: for F + f with f smooth, every reported x ∈ (F + f)⁻¹(y) solves
// the inclusion.
TEST(PerturbedInverse, PointsSolveTheInclusion) {
    const MappingModel id = MappingModel::smooth(builtins::identity(2));
    const Perturbation g(SinePerturbation{0.3, Matrix{{1.0, 0.5}, {-0.2, 1.0}}, Vec{0, 0}});
    const MappingModel h = add_perturbation(id, g, 1.0, Vec{0, 0});
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    for (int t = 0; t < 30; ++t) {
        const Vec y{u(rng), u(rng)};
        const InverseImage inv = h.inverse_image(y);
        ASSERT_FALSE(inv.empty());
        for (const Vec& x : inv.points) EXPECT_LE(h.distance_to_image(x, y), 1e-9);
    }
}

// g = id + f with a small bump near the origin is strictly increasing with
// g' ≥ 0.5, so the inverse is a single point; bisection is the oracle. The
// pair (x_k, g(x_k)) once returned u = y as a spurious root 1e-12 away.
TEST(PerturbedInverse, BumpCenterMatchesBisection) {
    BumpPerturbation p;
    p.base_point = {0.0};
    p.domain = NormSpec(1);
    p.range_dimension = 1;
    p.bumps.push_back(BumpSpec{{-2.470529622e-05}, 9.264e-06, {0.49684}, {1.0}, 24});
    const MappingModel h = add_perturbation(MappingModel::smooth(builtins::identity(1)), Perturbation(p), 1.0, Vec{0.0});
    auto g = [&](double x) { return h.images(Vec{x}).front()[0]; };
    auto root = [&](double y) {
        double lo = -1.0, hi = 1.0;
        for (int it = 0; it < 200; ++it) {
            const double m = 0.5 * (lo + hi);
            (g(m) < y ? lo : hi) = m;
        }
        return lo;
    };
    const double c = p.bumps[0].center[0], rho = p.bumps[0].radius;
    std::vector<double> xs{c};
    for (int i = -40; i <= 40; ++i) xs.push_back(c + rho * 1.2 * i / 40.0);
    for (double e : {1e-13, 1e-12, 1e-11, 1e-10, 1e-9}) {
        xs.push_back(c + e);
        xs.push_back(c - e);
    }
    for (double x : xs) {
        const double y = g(x);
        const InverseImage inv = h.inverse_image(Vec{y});
        ASSERT_EQ(inv.points.size(), 1u) << "x = " << x;
        EXPECT_LE(std::abs(inv.points[0][0] - root(y)), 1e-18 + 1e-15 * std::abs(y)) << "x = " << x;
        const double off = x + 1e-12;
        const double ratio = std::abs(y - g(off)) / h.inverse_distance(Vec{off}, Vec{y});
        EXPECT_GE(ratio, 0.5 * (1 - 1e-3)) << "x = " << x;
    }
}

TEST(FiniteGraph, ImagesAreStoredPoints) {
    SampledGraph g{{{0.0}, {0.0}}, {{{0.0}, {0.0}}, {{1.0}, {2.0}}, {{1.0}, {3.0}}}, 2.0};
    const MappingModel f = MappingModel::finite_graph(g);
    EXPECT_EQ(f.images(Vec{1.0}).size(), 2u);
    EXPECT_TRUE(f.images(Vec{0.5}).empty());
    EXPECT_DOUBLE_EQ(f.inverse_distance(Vec{0.0}, Vec{3.0}), 1.0);
}

TEST(RegularityRatio, AdmissibilityRule) {
    EXPECT_EQ(regularity_ratio(1.0, 2.0, 1.0), 0.5);
    EXPECT_FALSE(regularity_ratio(0.0, 0.0, 1.0).has_value());
    EXPECT_FALSE(regularity_ratio(1e-20, 1e-12, 1.0).has_value());
    EXPECT_EQ(regularity_ratio(1.0, kInf, 1.0), 0.0);
    EXPECT_FALSE(regularity_ratio(kInf, kInf, 1.0).has_value());
}
