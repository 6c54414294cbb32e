#include <gtest/gtest.h>

#include <boltz1d/diagnostics.hpp>
#include <boltz1d/transport.hpp>

using namespace boltz1d;

namespace {

DistributionState bump(const PhaseGrid& g) {
  return discretize([](double x, const Vec3& v) { return std::exp(-x * x / 0.3) * std::exp(-dot(v, v) / 2.0); }, g);
}

}  // namespace

TEST(Transport, ZeroShiftIsIdentity) {
  const PhaseGrid g{DomainKind::line, 2.0, 16, 4.0, 4};
  const auto s = bump(g);
  const auto t = shift(s, 0.0);
  for (std::size_t i = 0; i < s.values.size(); ++i) EXPECT_EQ(t.values[i], s.values[i]);
}

TEST(Transport, HomogeneousStateUnchanged) {
  const PhaseGrid g{DomainKind::torus, 1.0, 8, 4.0, 4};
  const auto s = maxwellian_state({1.0, {0, 0, 0}, 1.0}, g);
  for (double q : {0.013, 0.5, 3.7}) {
    const auto t = shift(s, q);
    for (std::size_t i = 0; i < s.values.size(); ++i) EXPECT_NEAR(t.values[i], s.values[i], 1e-14);
  }
}

TEST(Transport, TorusConservesEverything) {
  const PhaseGrid g{DomainKind::torus, 1.0, 8, 4.0, 6};
  const auto s = discretize([](double x, const Vec3& v) {
    return (1.0 + 0.5 * std::sin(2.0 * pi * x)) * std::exp(-dot(v, v) / 2.0);
  }, g);
  const auto a = moments(s), b = moments(shift(s, 0.37));
  EXPECT_NEAR(b.mass, a.mass, 1e-14 * a.mass);
  EXPECT_NEAR(b.energy, a.energy, 1e-14 * a.energy);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(b.momentum[k], a.momentum[k], 1e-14 * a.energy);
}

TEST(Transport, WholeCellShiftIsExactOnTorus) {
  const PhaseGrid g{DomainKind::torus, 1.0, 8, 1.0, 2};
  DistributionState s(g);
  const int iv = g.vindex(1, 0, 0);  // v1 = 0.5
  s.at(2, iv) = 1.0;
  const auto t = shift(s, g.dx() / 0.5);
  EXPECT_NEAR(t.at(3, iv), 1.0, 1e-14);
  EXPECT_NEAR(t.at(2, iv), 0.0, 1e-14);
}

TEST(Transport, LineOutflowIsRecorded) {
  const PhaseGrid g{DomainKind::line, 1.0, 8, 4.0, 4};
  const auto s = bump(g);
  const auto t = shift(s, 5.0);
  EXPECT_NEAR(moments(t).mass + t.meta.outflow_mass, moments(s).mass, 1e-13);
  EXPECT_GT(t.meta.outflow_mass, 0.0);
}

TEST(Transport, ShiftsCompose) {
  const PhaseGrid g{DomainKind::torus, 1.0, 16, 4.0, 4};
  const auto s = bump(g);
  const auto a = shift(shift(s, 0.1), 0.2);
  const auto b = shift(s, 0.3);
  double d = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i) d += std::abs(a.values[i] - b.values[i]);
  EXPECT_LT(d * g.dx() * g.dv3(), 0.05 * l1_norm(s));
}

TEST(Transport, DispersionRejectsTorus) {
  const PhaseGrid g{DomainKind::torus, 1.0, 8, 4.0, 4};
  EXPECT_THROW(dispersion_bound_check(bump(g), 1.0), Error);
}

TEST(Transport, DispersionHoldsOnBump) {
  const PhaseGrid g{DomainKind::line, 4.0, 32, 4.0, 6};
  const auto s = bump(g);
  for (double t : {1.0, 2.0, 5.0, 10.0}) EXPECT_TRUE(dispersion_bound_check(s, t).holds) << t;
  const auto tiny = dispersion_bound_check(s, 1e-9);
  EXPECT_TRUE(tiny.holds);
  EXPECT_GT(tiny.rhs, 1e6);
}
