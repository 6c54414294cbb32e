#include <gtest/gtest.h>

#include <boltz1d/integrator.hpp>

using namespace boltz1d;

namespace {

const PhaseGrid g{DomainKind::torus, 1.0, 4, 5.0, 6};

DistributionState wavy() {
  return discretize([](double x, const Vec3& v) {
    const Vec3 c{v[0] - 0.5, v[1], v[2]};
    return (1.0 + 0.3 * std::cos(2.0 * pi * x)) * std::exp(-dot(c, c) / 2.0) / std::pow(2.0 * pi, 1.5);
  }, g);
}

}  // namespace

TEST(Integrator, RejectsBadConfig) {
  const CollisionOperator op(canonical_kernel(1.0, 1.0, 0.5), g, SphereQuadrature(2, 2));
  IntegratorConfig c;
  c.dt = 0.0;
  EXPECT_THROW(Integrator(op, c), Error);
  c.dt = 0.1;
  c.snapshot_stride = 0;
  EXPECT_THROW(Integrator(op, c), Error);
}

TEST(Integrator, ZeroEndTimeGivesOneRecord) {
  const CollisionOperator op(canonical_kernel(1.0, 1.0, 0.5), g, SphereQuadrature(2, 2));
  IntegratorConfig c;
  c.t_end = 0.0;
  const auto tr = Integrator(op, c).run(wavy(), {});
  EXPECT_TRUE(tr.complete);
  ASSERT_EQ(tr.records.size(), 1u);
  EXPECT_EQ(tr.records[0].t, 0.0);
}

TEST(Integrator, StrangConservesOnTorus) {
  const CollisionOperator op(canonical_kernel(1.0, 1.0, 0.5), g, SphereQuadrature(4, 4));
  IntegratorConfig c;
  c.dt = 0.05;
  c.t_end = 0.2;
  c.snapshot_stride = 2;
  DiagnosticsOptions d;
  d.entropy_production = false;
  const auto tr = Integrator(op, c).run(wavy(), d);
  ASSERT_TRUE(tr.complete) << tr.error;
  EXPECT_EQ(tr.records.size(), 3u);
  EXPECT_EQ(tr.step_t.size(), 5u);
  const auto& a = tr.records.front();
  const auto& b = tr.records.back();
  EXPECT_NEAR(b.mass, a.mass, 1e-12 * a.mass);
  EXPECT_NEAR(b.energy, a.energy, 1e-11 * a.energy);
  EXPECT_NEAR(b.momentum[0], a.momentum[0], 1e-11);
  EXPECT_EQ(tr.clip_total, 0);
}

TEST(Integrator, LieStepAdvancesTime) {
  const CollisionOperator op(canonical_kernel(1.0, 1.0, 0.5), g, SphereQuadrature(2, 2));
  IntegratorConfig c;
  c.scheme = Scheme::lie;
  c.dt = 0.1;
  const auto s = Integrator(op, c).step(wavy());
  EXPECT_NEAR(s.time, 0.1, 1e-15);
}

TEST(Integrator, PicardZeroDatum) {
  const CollisionOperator op(canonical_kernel(1.0, 1.0, 0.5), g, SphereQuadrature(2, 2));
  const auto pr = picard_solve(DistributionState(g), 0.1, op, 0.05, 1e-10, 10);
  EXPECT_TRUE(pr.converged);
  EXPECT_EQ(pr.iterations, 1);
  for (const auto& s : pr.states)
    for (double v : s.values) EXPECT_EQ(v, 0.0);
}

TEST(Integrator, PicardZeroKernelIsFreeTransport) {
  const CollisionOperator op(zero_kernel(), g, SphereQuadrature(2, 2));
  const auto f = wavy();
  const auto pr = picard_solve(f, 0.2, op, 0.05, 1e-10, 10);
  EXPECT_TRUE(pr.converged);
  EXPECT_EQ(pr.iterations, 1);
  const auto free = shift(shift(f, 0.025), 0.025);
  for (std::size_t i = 0; i < f.values.size(); ++i) EXPECT_NEAR(pr.states[1].values[i], free.values[i], 1e-15);
}

TEST(Integrator, PicardHorizonInfiniteWithoutCollisions) {
  EXPECT_TRUE(std::isinf(picard_horizon(zero_kernel(), 1.0)));
  EXPECT_GT(picard_horizon(canonical_kernel(1.0, 1.0, 0.5), 1.0), 0.0);
}
