#include <gtest/gtest.h>

#include <boltz1d/collision.hpp>

using namespace boltz1d;

namespace {

const PhaseGrid small{DomainKind::torus, 1.0, 2, 5.0, 6};

double l1(const CollisionField& q) {
  double s = 0.0;
  for (double v : q.values) s += std::abs(v);
  return s * q.grid.dx() * q.grid.dv3();
}

DistributionState lumpy(const PhaseGrid& g) {
  return discretize([](double x, const Vec3& v) {
    const Vec3 c{v[0] - 0.7, v[1] + 0.2, v[2]};
    return (1.0 + 0.5 * std::cos(2.0 * pi * x)) * (std::exp(-dot(v, v) / 2.0) + 0.5 * std::exp(-dot(c, c) / 0.8));
  }, g);
}

}  // namespace

TEST(Collision, PostCollisionIdentityAndSwap) {
  const Vec3 v{1.0, 0.5, -0.2}, w{-0.3, 0.1, 0.4};
  const Vec3 d = v - w;
  const Vec3 n = (1.0 / norm(d)) * d;
  auto [a, b] = post_collision_velocities(v, w, n);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(a[k], v[k], 1e-15);
    EXPECT_NEAR(b[k], w[k], 1e-15);
  }
  auto [c, e] = post_collision_velocities(v, w, -1.0 * n);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(c[k], w[k], 1e-15);
    EXPECT_NEAR(e[k], v[k], 1e-15);
  }
}

TEST(Collision, PostCollisionHeadOn) {
  auto [a, b] = post_collision_velocities({1, 0, 0}, {-1, 0, 0}, {0, 1, 0});
  EXPECT_NEAR(a[0], 0.0, 1e-15);
  EXPECT_NEAR(a[1], 1.0, 1e-15);
  EXPECT_NEAR(b[1], -1.0, 1e-15);
}

TEST(Collision, PostCollisionConservesMomentumAndEnergy) {
  const Vec3 v{0.3, -1.2, 2.0}, w{1.1, 0.4, -0.5}, s{0.48, 0.6, 0.64};
  auto [a, b] = post_collision_velocities(v, w, s);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(a[k] + b[k], v[k] + w[k], 1e-14);
  EXPECT_NEAR(dot(a, a) + dot(b, b), dot(v, v) + dot(w, w), 1e-13);
}

TEST(Collision, ZeroInputsGiveZeroFields) {
  const auto k = canonical_kernel(1.0, 1.0, 0.5);
  const auto f = lumpy(small);
  const DistributionState z(small);
  for (double v : q_loss(z, f, k).values) EXPECT_EQ(v, 0.0);
  for (double v : q_gain(f, z, k, SphereQuadrature(4, 4)).values) EXPECT_EQ(v, 0.0);
}

TEST(Collision, HugeCutoffKillsLoss) {
  const auto k = canonical_kernel(1.0, 1.0, 2.0 * small.Vmax * std::sqrt(3.0) + 1.0);
  const auto f = lumpy(small);
  for (double v : q_loss(f, f, k).values) EXPECT_EQ(v, 0.0);
}

TEST(Collision, EquilibriumResidualShrinksWithNv) {
  const auto k = canonical_kernel(1.0, 1.0, 0.5);
  double prev = 1e300;
  for (int nv : {6, 8}) {
    const PhaseGrid g{DomainKind::torus, 1.0, 2, 5.0, nv};
    const CollisionOperator op(k, g, SphereQuadrature(8, 6));
    const auto M = maxwellian_state({1.0, {0, 0, 0}, 1.0}, g);
    const double ratio = l1(op.raw_collision(M)) / l1(op.loss(M, M));
    EXPECT_LT(ratio, prev);
    prev = ratio;
  }
}

TEST(Collision, ProjectionLeavesConservativeFieldAlone) {
  const auto k = canonical_kernel(1.0, 1.0, 0.5);
  const CollisionOperator op(k, small, SphereQuadrature(4, 4));
  const auto once = op.collide(lumpy(small));
  CollisionField again = conservative_projection(once);
  for (std::size_t i = 0; i < once.values.size(); ++i) EXPECT_NEAR(again.values[i], once.values[i], 1e-12);
}

TEST(Collision, ProjectionRemovesMassResidual) {
  CollisionField q(small);
  for (int ix = 0; ix < small.Nx; ++ix)
    for (int iv = 0; iv < small.nv3(); ++iv) q.at(ix, iv) = std::exp(-dot(small.velocity(iv), small.velocity(iv)));
  const auto p = conservative_projection(q);
  CollisionField check = p;
  compute_residuals(check);
  for (const auto& r : check.residuals)
    for (double x : r) EXPECT_NEAR(x, 0.0, 1e-12);
}

TEST(Collision, CollideConservesPerCell) {
  const auto k = canonical_kernel(1.0, 1.0, 0.5);
  const CollisionOperator op(k, small, SphereQuadrature(4, 4));
  auto q = op.collide(lumpy(small));
  compute_residuals(q);
  for (const auto& r : q.residuals)
    for (double x : r) EXPECT_NEAR(x, 0.0, 1e-12);
}

TEST(Collision, EntropyProductionNonnegative) {
  const auto k = canonical_kernel(1.0, 1.0, 0.5);
  const CollisionOperator op(k, small, SphereQuadrature(4, 4));
  EXPECT_GE(op.entropy_production(lumpy(small)).value, 0.0);
}

TEST(Collision, DiscreteHTheoremDirection) {
  const auto k = canonical_kernel(1.0, 1.0, 0.5);
  const CollisionOperator op(k, small, SphereQuadrature(8, 6));
  const auto f = lumpy(small);
  const auto q = op.collide(f);
  double s = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    s += q.values[i] * std::log(f.values[i]);
    scale += std::abs(q.values[i] * std::log(f.values[i]));
  }
  EXPECT_LE(s, 1e-2 * scale);
}

TEST(Collision, RateVanishesForSingleVelocity) {
  const auto k = canonical_kernel(1.0, 1.0, 0.5);
  const CollisionOperator op(k, small, SphereQuadrature(2, 2));
  DistributionState f(small);
  f.at(0, small.vindex(2, 3, 3)) = 1.0;
  EXPECT_EQ(op.collision_rate_A(f), 0.0);
}

TEST(Collision, GridMismatchRejected) {
  const auto k = canonical_kernel(1.0, 1.0, 0.5);
  PhaseGrid g = small;
  g.Nx = 3;
  EXPECT_THROW(q_loss(DistributionState(small), DistributionState(g), k), GridMismatch);
}
