#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <mft/fullspace_oracle.hpp>

using namespace mft;

TEST(PottsOracle, UniformAtLowCoupling) {
  auto r = potts_fullspace_min(3, 2.0, 60);
  ASSERT_EQ(r.point.x.size(), 3u);
  for (double x : r.point.x) EXPECT_NEAR(x, 1.0 / 3, 1e-6);
  EXPECT_NEAR(r.value, potts_phi(3, 2.0, 0.0), 1e-9);
}

TEST(PottsOracle, OrderedShapeMatchesScalarBranch) {
  double J = 3.0;
  auto r = potts_fullspace_min(3, J, 120);
  auto x = sorted_desc(r.point.x);
  EXPECT_NEAR(std::accumulate(x.begin(), x.end(), 0.0), 1.0, 1e-12);
  EXPECT_GT(x[0], x[1] + 0.1);
  EXPECT_NEAR(x[1], x[2], 1e-6);
  auto mp = solve_branches(ModelSpec::potts(3), J).max_stable_positive().value();
  EXPECT_NEAR(x[0], 1.0 / 3 + mp.m, 1e-6);
  EXPECT_GT(J * x[0], 1.0);
  EXPECT_LT(J * x[1], 1.0);
}

TEST(PottsOracle, ValueAtResolution200) {
  for (double J : {2.0, 2.8, 3.5}) {
    auto r = potts_fullspace_min(3, J, 200);
    auto gm = solve_branches(ModelSpec::potts(3), J).global_min().value();
    EXPECT_LT(std::fabs(r.value - potts_phi(3, J, gm.m)), 1e-3) << "J=" << J;
  }
}

TEST(PottsOracle, Budget) {
  try {
    potts_fullspace_min(7, 3.0, 40);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BudgetExceeded);
  }
  EXPECT_THROW(potts_fullspace_min(6, 3.0, 2000), Error);
  EXPECT_THROW(potts_fullspace_min(3, 3.0, 10), Error);
}

TEST(PottsOracle, Deterministic) {
  auto a = potts_fullspace_min(4, 3.4, 40), b = potts_fullspace_min(4, 3.4, 40);
  EXPECT_EQ(a.point.x, b.point.x);
  EXPECT_EQ(a.value, b.value);
}

TEST(CubicOracle, SymmetricAtLowCoupling) {
  auto r = cubic_fullspace_min(4, 1.0, 40);
  for (double y : r.state.y) EXPECT_NEAR(y, 0.25, 1e-6);
  for (double mu : r.state.mu) EXPECT_NEAR(mu, 0.0, 1e-6);
  EXPECT_NEAR(r.value, r.value_symmetric, 1e-12);
}

TEST(CubicOracle, OneDominantComponentAtStrongCoupling) {
  double J = 12.0;
  auto r = cubic_fullspace_min(4, J, 60);
  auto it = std::max_element(r.state.y.begin(), r.state.y.end());
  std::size_t k = std::size_t(it - r.state.y.begin());
  for (std::size_t i = 0; i < 4; ++i) {
    if (i == k) continue;
    EXPECT_LT(r.state.y[i], *it);
    EXPECT_NEAR(r.state.mu[i], 0.0, 1e-6);
  }
  EXPECT_GT(std::fabs(r.state.mu[k]), 0.5);
  auto mp = solve_branches(ModelSpec::cubic(4), J).max_stable_positive().value();
  EXPECT_NEAR(r.scalar_m, mp.m, 2.0 / 60);
}

TEST(CubicOracle, Budget) { EXPECT_THROW(cubic_fullspace_min(5, 3.0, 40), Error); }

TEST(NematicOracle, ZeroFieldAtLowCoupling) {
  auto r = nematic_dual_min(3, 2.0, 20);
  for (double h : r.field.h) EXPECT_NEAR(h, 0.0, 1e-8);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
}

TEST(NematicOracle, TwoEqualComponentsAtStrongCoupling) {
  auto r = nematic_dual_min(3, 30.0, 40);
  auto h = sorted_desc(r.field.h);
  EXPECT_NEAR(h[0] + h[1] + h[2], 0.0, 1e-9);
  EXPECT_GT(h[0] - h[1], 1.0);
  EXPECT_NEAR(h[1], h[2], 30.0 * 4.0 / 40);
}

TEST(NematicOracle, DualAgreesWithScalarAtStationaryPoint) {
  for (int N : {3, 4}) {
    auto M = ModelSpec::nematic(N);
    double J = N == 3 ? 6.9 : 9.6;
    auto mp = solve_branches(M, J, 600).max_stable_positive().value();
    // on-axis field h = J lambda diag(1, -1/(N-1), ...)
    std::vector<double> h(N, -J * mp.m / (N - 1.0));
    h[0] = J * mp.m;
    double norm2 = 0.0;
    for (double v : h) norm2 += v * v;
    double psi = norm2 / (2 * J) - nematic_G(h);
    EXPECT_NEAR(psi, M.omega_norm_sq * axis_phi_stationary(M, J, mp.m), 1e-8) << "N=" << N;
  }
}

TEST(NematicOracle, GOnAxisMatchesScalarG) {
  for (int N : {3, 4}) {
    auto M = ModelSpec::nematic(N);
    for (double t : {-3.0, 0.5, 4.0}) {
      std::vector<double> h(N, -t / (N - 1.0));
      h[0] = t;
      EXPECT_NEAR(nematic_G(h), M.omega_norm_sq * nematic_g(N, t), 1e-9) << "N=" << N << " t=" << t;
    }
  }
}

TEST(NematicOracle, SamplingAgreesWithQuadrature) {
  std::vector<double> h{3.0, -1.0, -2.0};
  auto [g, se] = detail::sphere_G_sampling(h, 20000, 7);
  EXPECT_LT(std::fabs(g - nematic_G(h)), std::max(5 * se, 1e-3));
  auto r1 = nematic_dual_min(3, 7.0, 16, 4000, SphereMethod::Sampling, 3);
  auto r2 = nematic_dual_min(3, 7.0, 16, 4000, SphereMethod::Sampling, 3);
  EXPECT_EQ(r1.field.h, r2.field.h);
  EXPECT_GT(r1.stderr_G, 0.0);
}

TEST(NematicOracle, Budget) { EXPECT_THROW(nematic_dual_min(5, 10.0, 20), Error); }

class Reduction : public ::testing::TestWithParam<ModelSpec> {};

TEST_P(Reduction, MatchesScalarProblem) {
  auto M = GetParam();
  double J_MF = find_transition(M).J_MF;
  int res = M.kind == ModelKind::Nematic ? 60 : 100;
  for (double f : {0.3, 1.2, 1.9}) {
    auto rc = reduction_check(M, f * J_MF, res);
    EXPECT_TRUE(rc.shape_ok) << M.name() << " J=" << rc.J;
    EXPECT_TRUE(rc.matched) << M.name() << " J=" << rc.J << " oracle=" << rc.oracle_value
                            << " scalar=" << rc.scalar_value;
    EXPECT_NEAR(rc.oracle_m, rc.scalar_m, 4.0 / res) << M.name() << " J=" << rc.J;
  }
}

INSTANTIATE_TEST_SUITE_P(Models, Reduction,
                         ::testing::Values(ModelSpec::potts(3), ModelSpec::potts(4), ModelSpec::cubic(4),
                                           ModelSpec::nematic(3)),
                         [](const auto& info) { return info.param.name() + std::to_string(info.param.param); });
