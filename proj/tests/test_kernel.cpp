#include <gtest/gtest.h>

#include <boltz1d/kernel.hpp>

using namespace boltz1d;

TEST(Kernel, VanishesBelowCutoff) {
  const auto k = canonical_kernel(1.0, 1.0, 1.0);
  for (double mu : {-1.0, 0.0, 0.7, 1.0}) EXPECT_EQ(k.eval(0.5, mu), 0.0);
  EXPECT_EQ(total_cross_section(k, 0.5), 0.0);
  EXPECT_EQ(sup_over_angle(k, 0.5), 0.0);
}

TEST(Kernel, EnvelopeAtZeroIsC) {
  const auto k = canonical_kernel(1.0, 1.0, 1e-9);
  EXPECT_NEAR(k.eval(1e-6, 0.3) / 1e-6, 1.0, 1e-4);
  EXPECT_NEAR(k.phi(0.0), 1.0, 1e-12);
}

TEST(Kernel, DeltaForConstantAngle) {
  const auto k = canonical_kernel(1.0, 1.0, 1.0);
  EXPECT_NEAR(k.delta, 4.0 * pi, 1e-9);
}

TEST(Kernel, TotalCrossSectionClosedForm) {
  const auto k = canonical_kernel(1.0, 1.0, 1.0);
  const double l = std::log(3.0);
  EXPECT_NEAR(total_cross_section(k, 2.0), 4.0 * pi * 2.0 / (1.0 + 2.0 * l * l), 1e-10);
}

TEST(Kernel, SupOverAngleOfQuadraticFactor) {
  const auto k = canonical_kernel(1.0, 1.0, 0.5, AngularFactor::polynomial({1.0, 0.0, 1.0}));
  EXPECT_NEAR(sup_over_angle(k, 2.0), 2.0 * k.radial(2.0), 1e-12);
}

TEST(Kernel, CanonicalPassesHypotheses) {
  const auto rep = validate_hypotheses(canonical_kernel(1.0, 1.0, 0.5));
  EXPECT_TRUE(rep.h1_holds);
  EXPECT_TRUE(rep.h2_holds);
  ASSERT_TRUE(rep.estimated_delta.has_value());
}

TEST(Kernel, NoLowSpeedCutoffFailsH2) {
  const auto k = separable_kernel("linear", [](double r) { return r; }, 0.0, AngularFactor::constant(),
                                  [](double) { return 1.0; }, 1.0, 1.0);
  EXPECT_FALSE(validate_hypotheses(k).h2_holds);
}

TEST(Kernel, ZeroKernelVacuous) {
  const auto rep = validate_hypotheses(zero_kernel());
  EXPECT_TRUE(rep.h1_holds);
  EXPECT_TRUE(rep.h2_holds);
  EXPECT_FALSE(rep.estimated_delta.has_value());
}

TEST(Kernel, RejectsBadConstants) {
  EXPECT_THROW(canonical_kernel(0.0, 1.0, 0.5), Error);
  EXPECT_THROW(canonical_kernel(1.0, -1.0, 0.5), Error);
  EXPECT_THROW(AngularFactor::polynomial({}), Error);
}

TEST(Kernel, PolynomialFactorExtremes) {
  const auto b = AngularFactor::polynomial({1.0, 0.0, 1.0});
  EXPECT_NEAR(b.max_value, 2.0, 1e-12);
  EXPECT_NEAR(b.min_value, 1.0, 1e-12);
  EXPECT_NEAR(b.integral, 2.0 + 2.0 / 3.0, 1e-14);
}

TEST(Kernel, TableEnvelopeDominatesRadialOverR) {
  const auto k = table_kernel({{0.0, 0.0}, {1.0, 1.0}, {3.0, 1.5}, {10.0, 0.0}}, 0.5);
  for (double r = 0.6; r < 10.0; r += 0.1) EXPECT_GE(k.phi(r) + 1e-15, k.radial(r) / r);
  EXPECT_GT(k.envelope_l1, 0.0);
  EXPECT_THROW(table_kernel({{0.0, 1.0}}, 0.5), Error);
}
