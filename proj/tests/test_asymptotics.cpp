#include <gtest/gtest.h>

#include <cmath>

#include "fields.hpp"
#include "hardy/asymptotics.hpp"
#include "hardy/config.hpp"

using namespace hardy;
using namespace hardy::testing;

namespace {
const double kR2 = std::sqrt(2.0), kR6 = std::sqrt(6.0);
}

TEST(DetectL0, Examples) {
  EXPECT_EQ(detect_l0(1.41421, 3), 1);
  EXPECT_EQ(detect_l0(0.00003, 3), 0);
  EXPECT_EQ(detect_l0(std::sqrt(12.0) + 0.01, 3), 3);
  EXPECT_THROW(detect_l0(1.9, 3), DetectionError);
  EXPECT_THROW(detect_l0(NAN, 3), DetectionError);
}

TEST(DetectL0, ErrorNamesNeighbours) {
  try {
    detect_l0(1.9, 3);
    FAIL();
  } catch (const DetectionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("1.9"), std::string::npos);
    EXPECT_NE(msg.find("1.41421"), std::string::npos);
    EXPECT_NE(msg.find("2.44949"), std::string::npos);
  }
}

TEST(Kernel, ZeroDegreeLimit) {
  for (double s : {0.01, 0.2, 0.45}) {
    const double lim = representation_kernel(s, 0.5, 0.0, 3);
    EXPECT_NEAR(lim, std::pow(s, 1.5) * std::log(0.5 / s), 1e-15);
    EXPECT_NEAR(representation_kernel(s, 0.5, 1e-5, 3), lim, 1e-4 * std::abs(lim));
  }
}

TEST(BetaRepresentation, ExactModeIsUnitVector) {
  const auto g = make_grid(DomainSpec{3, 0.5}, std::log(2.0) + 12.0, 0.01, build_basis(3, 3));
  const auto ex = exact_mode_solution(g, 1, 2);
  const auto rep = beta_representation(ex.v, linear(g), 0.5, 1);
  ASSERT_EQ(rep.beta.size(), 3u);
  for (int m = 0; m < 3; ++m) EXPECT_NEAR(rep.beta[m], m == 1 ? 1.0 : 0.0, 1e-10);
  EXPECT_FALSE(rep.limit_kernel);
}

TEST(BetaRepresentation, LinearScaling) {
  auto cfg = reference_config();
  cfg.problem.nonlinearity.kappa = 0.0;
  const auto v = solve_semilinear(cfg.problem, cfg.grid()).field;
  const auto a = beta_representation(v, cfg.problem, 0.5, 1).beta;
  const auto b = beta_representation(v.scaled(-3.0), cfg.problem, 0.5, 1).beta;
  for (std::size_t m = 0; m < a.size(); ++m) EXPECT_NEAR(b[m], -3.0 * a[m], 1e-13 * (1.0 + std::abs(a[m])));
}

TEST(BetaRepresentation, ZeroDegreeFlagged) {
  const auto g = unit_grid();
  const auto rep = beta_representation(constant_field(g, 1.0), linear(g), 1.0, 0);
  EXPECT_TRUE(rep.limit_kernel);
  EXPECT_NEAR(rep.beta[0], std::sqrt(4.0 * std::numbers::pi), 1e-10);
}

TEST(BetaTraceLimit, ExactModeIsFlat) {
  const auto g = unit_grid();
  const auto lim = beta_trace_limit(exact_mode_solution(g, 1, 3).v, 1, lambda_grid(1.0, 9.0, 9));
  EXPECT_NEAR(lim.beta_hat[2], 1.0, 1e-12);
  EXPECT_NEAR(lim.beta_hat[0], 0.0, 1e-12);
  EXPECT_TRUE(lim.nondegenerate);
}

TEST(BetaTraceLimit, TwoModeSlowCoefficient) {
  const auto g = unit_grid();
  const auto v = two_mode(g);
  const auto lim = beta_trace_limit(v, 1, lambda_grid(1.0, 9.0, 15));
  EXPECT_NEAR(lim.beta_hat[0], 1.0, 1e-6);
}

TEST(BetaTraceLimit, DegenerateBlockFlagged) {
  // nonzero field with nothing in the degree-1 block
  const auto g = unit_grid();
  const auto lim = beta_trace_limit(exact_mode_solution(g, 2, 1).v, 1, lambda_grid(1.0, 9.0, 9));
  EXPECT_FALSE(lim.nondegenerate);
  EXPECT_FALSE(lim.warnings.empty());
  EXPECT_THROW(beta_trace_limit(two_mode(g), 1, {1.0, 2.0}), FitError);
}

TEST(Profile, SemilinearCrossOracleAndRadiusIndependence) {
  const auto cfg = reference_config();
  const auto v = solve_semilinear(cfg.problem, cfg.grid()).field;
  const auto lam = lambda_grid(2.0, cfg.resolved_t_max() - 3.0, 15);
  const auto p = asymptotic_profile(v, cfg.problem, 1, 0.5, lam);
  EXPECT_LT(p.agreement, 1e-3);
  EXPECT_TRUE(p.nondegenerate);
  EXPECT_NEAR(p.gamma_tilde, kR2 - 0.5, 1e-15);
  const auto q = beta_representation(v, cfg.problem, 0.4, 1).beta;
  EXPECT_LT(relative_distance(q, p.beta), 1e-3);
}

TEST(Convergence, ExactModeDistancesVanish) {
  const auto g = unit_grid();
  const auto v = exact_mode_solution(g, 1, 1).v;
  const auto p = asymptotic_profile(v, linear(g), 1, 1.0, lambda_grid(1.0, 9.0, 9));
  const auto rep = convergence_report(v, p, {0.5, 0.1, 0.01, 0.001});
  for (const auto& row : rep.rows) {
    EXPECT_LT(row.value_distance, 1e-8);
    EXPECT_LT(row.gradient_distance, 1e-8);
  }
}

TEST(Convergence, TwoModeSlope) {
  const auto g = unit_grid();
  const auto v = two_mode(g);
  const auto p = asymptotic_profile(v, linear(g), 1, 1.0, lambda_grid(1.0, 9.0, 15));
  const auto rep = convergence_report(v, p, {0.3, 0.1, 0.03, 0.01, 0.003});
  EXPECT_TRUE(rep.value_decreasing);
  EXPECT_TRUE(rep.gradient_decreasing);
  const auto& a = rep.rows.front();
  const auto& b = rep.rows.back();
  const double slope = std::log(a.value_distance / b.value_distance) / std::log(a.r / b.r);
  EXPECT_NEAR(slope, kR6 - kR2, 0.05 * (kR6 - kR2));
  EXPECT_THROW(convergence_report(v, p, {2.0}), RangeError);
}
