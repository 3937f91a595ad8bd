#include <gtest/gtest.h>

#include <cmath>

#include "regradius/oracles.hpp"
#include "regradius/radius.hpp"

using namespace regradius;

namespace {

MappingModel diag() { return MappingModel::linear(Matrix{{2.0, 0.0}, {0.0, 0.5}}); }
MappingModel id2() { return MappingModel::smooth(builtins::identity(2)); }
const GraphPoint origin1{{0.0}, {0.0}};
const GraphPoint origin2{{0.0, 0.0}, {0.0, 0.0}};
const ScaleSchedule schedule = ScaleSchedule::geometric();

double sigma_diag() { return oracles::sigma_min(*diag().linear_matrix()).sigma_min(); }

}  // namespace

TEST(Bounds, Identity) {
    const RadiusReport r = radius_bounds(id2(), origin2, schedule);
    EXPECT_NEAR(bounds_lower(r), 1.0, 0.05);
    EXPECT_NEAR(bounds_upper(r), 1.0, 0.1);
    EXPECT_TRUE(r.passed());
}

TEST(Bounds, Diagonal) {
    const RadiusReport r = radius_bounds(diag(), origin2, schedule);
    EXPECT_NEAR(bounds_lower(r), sigma_diag(), 0.1 * sigma_diag());
    EXPECT_NEAR(bounds_upper(r), sigma_diag(), 0.1 * sigma_diag());
    EXPECT_LE(bounds_lower(r), bounds_upper(r) + 0.05);
    EXPECT_TRUE(r.verdicts.at("lower_le_upper"));
    EXPECT_TRUE(r.verdicts.at("near_equality"));
}

TEST(Destabilize, Diagonal) {
    const RadiusReport r = verify_destabilization(diag(), origin2, schedule);
    EXPECT_NEAR(r.lip_f, sigma_diag(), 0.1 * sigma_diag());
    EXPECT_LT(r.rg_perturbed->value, 0.05);
    EXPECT_TRUE(r.passed());
}

TEST(Destabilize, Identity) {
    const RadiusReport r = verify_destabilization(id2(), origin2, schedule);
    EXPECT_NEAR(r.lip_f, 1.0, 0.15);
    EXPECT_LT(r.rg_perturbed->value, 0.1);
    EXPECT_TRUE(r.passed());
}

TEST(Destabilize, ZeroModulusIsTrivial) {
    const RadiusReport r = verify_destabilization(MappingModel::linear(Matrix(2, 2)), origin2, schedule);
    ASSERT_TRUE(r.perturbation.has_value());
    EXPECT_TRUE(r.perturbation->bumps.empty());
    EXPECT_EQ(r.lip_f, 0.0);
    EXPECT_TRUE(r.passed());
}

TEST(Interpolate, ZeroTargetLeavesMapping) {
    const RadiusReport r = verify_interpolation(diag(), origin2, 0.0, schedule);
    EXPECT_EQ(r.alpha, 0.0);
    EXPECT_EQ(r.lip_f, 0.0);
    EXPECT_EQ(r.rg_perturbed->value, r.rg->value);
    EXPECT_TRUE(r.passed());
}

TEST(Interpolate, DiagonalQuarter) {
    const RadiusReport r = verify_interpolation(diag(), origin2, 0.25, schedule);
    EXPECT_NEAR(r.rg_perturbed->value, sigma_diag() - 0.25, 0.075);
    EXPECT_NEAR(r.lip_f, 0.25, 0.075);
    EXPECT_TRUE(r.passed());
}

TEST(Interpolate, DiagonalFull) {
    const RadiusReport r = verify_interpolation(diag(), origin2, 0.5, schedule);
    EXPECT_LT(r.rg_perturbed->value, 0.075);
    EXPECT_NEAR(r.lip_f, 0.5, 0.075);
}

TEST(Interpolate, RejectsTargetAboveModulus) {
    EXPECT_THROW(verify_interpolation(diag(), origin2, 0.9, schedule), Error);
    EXPECT_THROW(verify_interpolation(diag(), origin2, -0.1, schedule), Error);
}

TEST(LyusternikGraves, ZeroPerturbation) {
    const RadiusReport r = verify_lyusternik_graves(diag(), origin2, Perturbation::zero(2, 2), schedule);
    EXPECT_NEAR(r.residuals.at("lower_bound_gap"), 0.0, 1e-9);
    EXPECT_TRUE(r.passed());
}

// rg(I − 0.3I) = σ_min(0.7·I) = 0.7 and the bound 1 − 0.3 is attained.
TEST(LyusternikGraves, IdentityMinusScaledIdentity) {
    const Perturbation g(LinearPerturbation{Matrix::identity(2).scaled(-0.3), zeros(2)});
    const RadiusReport r = verify_lyusternik_graves(id2(), origin2, g, schedule);
    const double oracle = oracles::sigma_min(Matrix::identity(2).scaled(0.7)).sigma_min();
    EXPECT_NEAR(r.rg_perturbed->value, oracle, 0.035);
    EXPECT_NEAR(r.residuals.at("lower_bound_gap"), 0.0, 0.05);
    EXPECT_TRUE(r.passed());
}

TEST(LyusternikGraves, IdentityPlusSmoothSine) {
    // lip = 0.2·‖B‖ = 0.2 for an orthogonal B
    const Perturbation g(SinePerturbation{0.2, Matrix{{0.6, -0.8}, {0.8, 0.6}}, zeros(2)});
    const RadiusReport r = verify_lyusternik_graves(id2(), origin2, g, schedule);
    EXPECT_NEAR(r.lip_f, 0.2, 0.01);
    EXPECT_TRUE(r.passed());
}

TEST(StrongRegularity, Examples) {
    EXPECT_TRUE(strong_regularity_localization_check(id2(), origin2, 0.1, 16));
    EXPECT_TRUE(strong_regularity_localization_check(diag(), origin2, 0.1, 16));
    EXPECT_FALSE(strong_regularity_localization_check(MappingModel::smooth(builtins::abs_branches(1)), origin1, 0.1, 16));
    EXPECT_FALSE(strong_regularity_localization_check(MappingModel::linear(Matrix{{1.0, 1.0}}), {{0.0, 0.0}, {0.0}}, 0.1, 8));
}
