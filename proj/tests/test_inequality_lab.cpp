#include <gtest/gtest.h>

#include <boltz1d/inequality_lab.hpp>
#include <boltz1d/verify.hpp>

using namespace boltz1d;

namespace {

std::vector<double> grid(double T, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = T * i / (n - 1);
  return t;
}

GrowthBoundSpec entropy_spec() {
  GrowthBoundSpec s;
  s.mode = GrowthMode::small_entropy;
  s.t = grid(2.0, 128);
  s.c0 = 1.5;
  s.c1 = 0.5;
  s.c2 = 0.3;
  s.alpha = 0.4;
  s.eps = 0.5;
  s.m = 1.0;
  return s;
}

}  // namespace

TEST(Lab, SmallEntropyConstantsExample) {
  const auto k = small_entropy_constants(1.0, 1.0);
  EXPECT_NEAR(k.K, 2.0 * (1.0 / 6.0 + std::sqrt(1.0 / 12.0)), 1e-14);
  EXPECT_NEAR(k.K, 0.9107, 1e-4);
  EXPECT_NEAR(k.alpha, 0.5 * (1.0 + k.K), 1e-14);
  EXPECT_GT(k.eps, 0.0);
}

TEST(Lab, PhiInverse) {
  for (double m : {0.1, 1.0, 10.0})
    for (double h : {1e-10, 1e-3, 0.5, 7.0, 100.0}) EXPECT_NEAR(entropy_phi_inverse(entropy_phi(h, m), m), h, 1e-12 * h);
}

TEST(Lab, BonyBoundExamples) {
  const std::vector<double> t{0.0, 1.0};
  const std::vector<double> zero{0.0, 0.0}, a{1.0 / 16.0, 1.0 / 16.0}, a2{1.0 / 8.0, 1.0 / 8.0};
  EXPECT_NEAR(bony_bound(2.0, t, zero, 1.0), 2.0 * (1.0 + 1.0 / 16.0), 1e-14);
  EXPECT_NEAR(bony_bound(1.0, t, a, 1.0), 4.5, 1e-13);
  // doubling int a squares 2^{16 c int a}
  const double base = bony_bound(1.0, t, zero, 1.0);
  EXPECT_NEAR(bony_bound(1.0, t, a2, 1.0) / base, std::pow(bony_bound(1.0, t, a, 1.0) / base, 2.0), 1e-12);
  EXPECT_THROW(bony_bound(0.0, t, a, 1.0), Error);
}

TEST(Lab, SmallEntropyBoundMonotone) {
  const auto s = entropy_spec();
  const double b = small_entropy_bound(s, 1.0);
  EXPECT_TRUE(std::isfinite(b));
  EXPECT_GE(small_entropy_bound(s, 2.0), b);
  for (auto bump : {&GrowthBoundSpec::c0, &GrowthBoundSpec::c2, &GrowthBoundSpec::alpha}) {
    auto t = s;
    t.*bump *= 1.2;
    EXPECT_GE(small_entropy_bound(t, 1.0), b);
  }
  auto free = s;
  free.c1 = free.c2 = 0.0;
  EXPECT_TRUE(std::isfinite(small_entropy_bound(free, 1.0)));
  auto bad = s;
  bad.alpha = 1.0;
  EXPECT_THROW(small_entropy_bound(bad, 1.0), Error);
}

TEST(Lab, OracleWithoutForcingIsConstant) {
  GrowthBoundSpec s;
  s.t = grid(1.0, 64);
  s.a.assign(64, 0.0);
  s.phi0 = 0.7;
  const auto o = maximal_solution_oracle(s);
  EXPECT_TRUE(o.converged);
  for (double p : o.phi) EXPECT_EQ(p, 0.7);
}

TEST(Lab, OracleMatchesDirectQuadratureWhenSquareBranchIdle) {
  // with c phi^2 far above the forcing the min always takes the a-branch
  GrowthBoundSpec s;
  const int n = 65;
  s.t = grid(1.0, n);
  s.a.assign(n, 0.01);
  s.phi0 = 1.0;
  s.c = 1e3;
  const auto o = maximal_solution_oracle(s);
  ASSERT_TRUE(o.converged);
  const double h = s.t[1];
  for (int i = 1; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < i; ++j) acc += h * (1.0 + 1.0 / (s.t[i] - (j + 0.5) * h)) * 0.01;
    EXPECT_NEAR(o.phi[i], 1.0 + acc, 1e-12);
  }
}

TEST(Lab, OracleBelowBounds) {
  GrowthBoundSpec s;
  s.t = grid(3.0, 256);
  s.a.assign(256, 0.05);
  s.phi0 = 0.5;
  s.c = 0.3;
  const auto o = maximal_solution_oracle(s);
  ASSERT_TRUE(o.converged);
  for (std::size_t k = 0; k < s.t.size(); ++k)
    EXPECT_LE(o.phi[k], bony_bound(s.c, std::span(s.t.data(), k + 1), std::span(s.a.data(), k + 1), s.phi0));
  const auto e = entropy_spec();
  const auto oe = maximal_solution_oracle(e);
  ASSERT_TRUE(oe.converged);
  for (std::size_t k = 0; k < e.t.size(); ++k) EXPECT_LE(std::log(oe.phi[k]), small_entropy_bound_log(e, e.t[k]));
}

TEST(Lab, GrowthSpecValidation) {
  GrowthBoundSpec s;
  s.t = {0.0};
  EXPECT_THROW(s.validate(), Error);
  s.t = {0.0, 1.0};
  s.a = {0.0};
  EXPECT_THROW(s.validate(), Error);
  auto e = entropy_spec();
  e.c0 = 0.5;
  EXPECT_THROW(e.validate(), Error);
}

TEST(Lab, ZeroStatesAreTrivial) {
  const PhaseGrid g{DomainKind::torus, 1.0, 4, 5.0, 6};
  const CollisionOperator op(canonical_kernel(1.0, 1.0, 0.5), g, SphereQuadrature(4, 4));
  const DistributionState z(g);
  const auto bl = verify_bilinear_X(z, z, op, {0.0, 1.0});
  EXPECT_TRUE(bl.holds);
  EXPECT_EQ(bl.lhs, 0.0);
  const auto aa = verify_angular_averaging(z, z, op, 0.5);
  EXPECT_TRUE(aa.holds);
  EXPECT_EQ(aa.lhs, 0.0);
  EXPECT_TRUE(verify_torus_gain_bound(z, op, 1.0).holds);
  EXPECT_THROW(verify_angular_averaging(z, z, op, 0.0), Error);
}

TEST(Lab, HomogeneousMaxwellianBounds) {
  const PhaseGrid g{DomainKind::torus, 1.0, 4, 5.0, 8};
  const CollisionOperator op(canonical_kernel(1.0, 1.0, 0.5, AngularFactor::polynomial({1.0, 0.0, 1.0})), g,
                             SphereQuadrature(8, 6));
  const auto M = maxwellian_state({1.0, {0, 0, 0}, 1.0}, g);
  EXPECT_TRUE(verify_bilinear_X(M, M, op, {0.0, 0.5, 2.0}).holds);
  for (double q : {0.1, 1.0, 10.0}) {
    EXPECT_TRUE(verify_angular_averaging(M, M, op, q).holds) << q;
    EXPECT_TRUE(verify_torus_gain_bound(M, op, q).holds) << q;
  }
  for (double ell : {0.0, 1.0, 2.0, 4.0}) EXPECT_TRUE(verify_moment_and_w11_bounds(M, M, op, ell).holds()) << ell;
}

TEST(Lab, MomentBoundsHoldUpToWeightFour) {
  const PhaseGrid g{DomainKind::torus, 1.0, 4, 5.0, 6};
  const CollisionOperator op(canonical_kernel(1.0, 1.0, 0.5), g, SphereQuadrature(4, 4));
  std::mt19937_64 rng(4);
  const auto f = random_bump_state(g, rng, 2, 0.8);
  for (double ell : {0.0, 1.0, 2.0, 3.0, 4.0}) {
    const auto r = verify_moment_and_w11_bounds(f, f, op, ell);
    ASSERT_TRUE(r.holds()) << ell;
    EXPECT_GT(r.moment_gain.margin(), 0.0);
    EXPECT_GT(r.moment_loss.margin(), 0.0);
  }
}

TEST(Lab, TorusGainRejectsLine) {
  const PhaseGrid g{DomainKind::line, 1.0, 4, 5.0, 4};
  const CollisionOperator op(canonical_kernel(1.0, 1.0, 0.5), g, SphereQuadrature(2, 2));
  EXPECT_THROW(verify_torus_gain_bound(DistributionState(g), op, 1.0), Error);
}

TEST(Lab, ShortSweepsHold) {
  EXPECT_TRUE(run_dispersion_trials(5, 1).holds());
  EXPECT_TRUE(run_rho_l2_trials(5, 1).holds());
  EXPECT_TRUE(run_oracle_trials(GrowthMode::bony, 5, 1).bound.holds());
  EXPECT_TRUE(run_oracle_trials(GrowthMode::small_entropy, 5, 1).bound.holds());
}

TEST(Lab, SweepsAreDeterministic) {
  const auto a = run_dispersion_trials(3, 42), b = run_dispersion_trials(3, 42);
  EXPECT_EQ(a.worst_lhs, b.worst_lhs);
  EXPECT_EQ(a.worst_rhs, b.worst_rhs);
}

TEST(Lab, LemmaNamesResolve) {
  EXPECT_THROW(verify_lemma("nope", 1, 1), Error);
  const auto r = verify_lemma("constants", 0, 1);
  EXPECT_TRUE(r.holds());
  EXPECT_LT(r.extra["max_K"].get<double>(), 1.0);
}
