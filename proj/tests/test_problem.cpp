#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hardy/mode_solver.hpp"
#include "hardy/problem.hpp"

using namespace hardy;

namespace {

ProblemSpec spec(double c_h, double eps, double kappa, double p, int n = 3) {
  ProblemSpec s;
  s.domain = {n, 1.0};
  s.potential.c_h = c_h;
  s.potential.eps = eps;
  s.nonlinearity.kappa = kappa;
  s.nonlinearity.p = p;
  return s;
}

}  // namespace

TEST(Potential, HTildeExample) {
  // h(e^{-2} theta) = (e^{-2})^{-1} = e^2
  EXPECT_NEAR(h_tilde(spec(1.0, 1.0, 0.0, 3.0), 2.0, 1.0), std::exp(2.0), 1e-12);
  const std::vector<double> x{0.0, 0.0, std::exp(-2.0)};
  EXPECT_NEAR(h_ball(spec(1.0, 1.0, 0.0, 3.0), BasisMode::full, x), std::exp(2.0), 1e-12);
}

TEST(Potential, Validation) {
  EXPECT_THROW(spec(-1.0, 1.0, 0.0, 3.0).potential.validate(), ConfigError);
  EXPECT_THROW(spec(1.0, 2.0, 0.0, 3.0).potential.validate(), ConfigError);
  EXPECT_THROW(spec(1.0, 0.0, 0.0, 3.0).potential.validate(), ConfigError);
}

TEST(Nonlinearity, FTildeExamples) {
  EXPECT_EQ(f_tilde(spec(0, 1, 0.0, 3.0), 1.7, 2.3), 0.0);
  EXPECT_NEAR(f_tilde(spec(0, 1, 1.0, 3.0), 1.0, 2.0), 4.0 * std::exp(0.5), 1e-12);
}

TEST(Nonlinearity, CriticalExponent) {
  try {
    spec(0, 1, 1.0, 7.0).nonlinearity.validate(3);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_STREQ(e.what(), "p must satisfy 2 < p < 6");
  }
  EXPECT_THROW(spec(0, 1, 1.0, 2.0).nonlinearity.validate(3), ConfigError);
  EXPECT_NO_THROW(spec(0, 1, 1.0, 3.9).nonlinearity.validate(4));
  EXPECT_THROW(spec(0, 1, 1.0, 4.0).nonlinearity.validate(4), ConfigError);
}

TEST(Nonlinearity, GrowthBound) {
  // |f s| + |f'_s s^2| <= C_f (s^2 + |s|^p)
  for (double p : {2.5, 3.0, 4.5}) {
    const auto s = spec(0, 1, -0.7, p);
    const double cf = s.nonlinearity.c_f();
    for (double x = -5.0; x <= 5.0; x += 0.01) {
      const double lhs = std::abs(s.nonlinearity.f(x) * x) + std::abs(s.nonlinearity.f_s(x) * x * x);
      EXPECT_LE(lhs, cf * (x * x + std::pow(std::abs(x), p)) * (1 + 1e-14) + 1e-300);
    }
  }
}

TEST(Nonlinearity, CylinderIdentity) {
  // e^{-2t} f~(t, theta, Tu) = e^{-(N+2)t/2} f(e^{-t} theta, u(e^{-t} theta))
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  for (int n : {3, 4, 5}) {
    const auto s = spec(0, 1, 0.3, n == 3 ? 4.0 : 2.5, n);
    for (int i = 0; i < 200; ++i) {
      const double t = std::abs(ud(rng)) * 3.0, u = ud(rng);
      const double v = std::exp(-0.5 * (n - 2) * t) * u;
      const double lhs = std::exp(-2.0 * t) * f_tilde(s, t, v);
      const double rhs = std::exp(-0.5 * (n + 2) * t) * s.nonlinearity.f(u);
      EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST(ExactMode, ConstantMode) {
  const auto g = make_grid(DomainSpec{3, 0.5}, std::log(2.0) + 8.0, 0.01, build_basis(3, 2));
  const auto ex = exact_mode_solution(g, 0, 1);
  EXPECT_NEAR(ex.gamma_tilde, -0.5, 1e-15);
  const double c = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  EXPECT_LT((ex.v.values().array() - c).abs().maxCoeff(), 1e-14);
  const std::vector<double> x{0.1, 0.2, -0.05};
  EXPECT_NEAR(ex.u.value(x), std::pow(norm(x), -0.5) * c, 1e-13);
}

TEST(ExactMode, DipoleAndResidual) {
  const auto g = make_grid(DomainSpec{3, 0.5}, std::log(2.0) + 12.0, 0.01, build_basis(3, 3));
  const auto ex = exact_mode_solution(g, 1, 1);
  const std::size_t k = g->basis().index_of(1, 1);
  for (std::size_t i = 0; i < g->num_t(); i += 50)
    EXPECT_NEAR(ex.v.modes()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)), std::exp(-std::sqrt(2.0) * g->t(i)), 1e-15);
  ProblemSpec lin;
  lin.domain = g->domain();
  EXPECT_LT(equation_residual(ex.v, lin), 1e-9);
  EXPECT_EQ(ex.beta, (std::vector<double>{1.0, 0.0, 0.0}));
}

TEST(ExactMode, AnalyticGradient) {
  const auto g = make_grid(DomainSpec{3, 1.0}, 8.0, 0.01, build_basis(3, 3));
  const auto ex = exact_mode_solution(g, 2, 2);
  const std::vector<double> x{0.2, -0.3, 0.4};
  const auto grad = ex.u.gradient(x);
  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    EXPECT_NEAR(grad[i], (ex.u.value(xp) - ex.u.value(xm)) / (2 * h), 1e-7);
  }
}

TEST(FundamentalPair, Avatars) {
  const auto fp = fundamental_pair(4);
  const std::vector<double> x{0.3, 0.0, 0.0, 0.0};
  EXPECT_NEAR(fp.psi_minus.value(x), 1.0 / 0.3, 1e-12);
  EXPECT_NEAR(fp.psi_plus.value(x), std::log(1.0 / 0.3) / 0.3, 1e-12);
  EXPECT_THROW(fundamental_pair(2), DomainError);
}

TEST(ProblemSpec, BoundaryModesMustFitBasis) {
  auto s = spec(0.1, 1.0, 0.0, 3.0);
  s.boundary = {{3, 1, 1.0}};
  EXPECT_THROW(s.validate(*build_basis(3, 2)), ConfigError);
  s.boundary = {{1, 4, 1.0}};
  EXPECT_THROW(s.validate(*build_basis(3, 2)), ConfigError);
  s.boundary = {{1, 3, 1.0}};
  EXPECT_NO_THROW(s.validate(*build_basis(3, 2)));
}
