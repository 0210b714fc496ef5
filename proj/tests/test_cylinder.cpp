#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hardy/cylinder.hpp"
#include "hardy/problem.hpp"

using namespace hardy;

namespace {

GridPtr grid3(double radius = 1.0, double span = 12.0, double dt = 0.01, int lmax = 3) {
  return make_grid(DomainSpec{3, radius}, -std::log(radius) + span, dt, build_basis(3, lmax));
}

}  // namespace

TEST(Grid, Invariants) {
  const auto b = build_basis(3, 2);
  EXPECT_THROW(make_grid(DomainSpec{3, 1.0}, 5.0, 0.01, b), DomainError);  // T_max <= T0 + 5
  EXPECT_THROW(make_grid(DomainSpec{3, 1.0}, 6.0, 0.5, b), DomainError);   // fewer than 64 nodes
  EXPECT_THROW(make_grid(DomainSpec{3, 1.0}, 8.0, 0.0, b), DomainError);
  EXPECT_THROW(make_grid(DomainSpec{2, 1.0}, 8.0, 0.01, b), DomainError);
  EXPECT_THROW(make_grid(DomainSpec{3, -1.0}, 8.0, 0.01, b), DomainError);
  const auto g = make_grid(DomainSpec{3, 0.5}, std::log(2.0) + 6.0, 0.01, b);
  EXPECT_NEAR(g->t0(), std::log(2.0), 1e-15);
  EXPECT_EQ(g->num_t(), 601u);
}

TEST(Forward, ConstantAvatar) {
  const auto g = grid3();
  const auto v = emden_fowler_forward(fundamental_pair(3).psi_minus, g);
  EXPECT_LT((v.values().array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(Forward, ExactModeAvatar) {
  const auto g = grid3(0.5);
  const auto ex = exact_mode_solution(g, 1, 1);
  const auto v = emden_fowler_forward(ex.u, g);
  EXPECT_LT((v.modes() - ex.v.modes()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Forward, PsiPlusIsLinearInT) {
  const auto g = grid3();
  const auto v = emden_fowler_forward(fundamental_pair(3).psi_plus, g);
  for (std::size_t i = 0; i < g->num_t(); i += 97)
    for (Eigen::Index j = 0; j < v.values().cols(); ++j) EXPECT_NEAR(v.values()(static_cast<Eigen::Index>(i), j), g->t(i), 1e-12);
}

TEST(Forward, PsiPlusEnergyGrowsLinearlyWithTmax) {
  // |d_t v|^2 = 1 on the sphere: truncated energy = 4 pi (T_max - T0)
  double energy[2];
  for (int i = 0; i < 2; ++i) {
    const auto g = grid3(1.0, 8.0 * (i + 1));
    const auto v = emden_fowler_forward(fundamental_pair(3).psi_plus, g);
    const auto e = gradient_energy_density(v);
    energy[i] = g->line().integrate(e, g->t0(), g->t_max());
    EXPECT_TRUE(hmu_norm(v).divergent);
  }
  EXPECT_NEAR(energy[0], 4.0 * std::numbers::pi * 8.0, 1e-8);
  EXPECT_NEAR(energy[1] / energy[0], 2.0, 1e-10);
}

TEST(Forward, UnevaluableFunctionRaises) {
  BallFunction bad;
  bad.value = [](std::span<const double>) { return NAN; };
  EXPECT_THROW(emden_fowler_forward(bad, grid3()), EvaluationError);
}

TEST(Inverse, ConstantField) {
  const auto g = grid3();
  const auto v = emden_fowler_forward(fundamental_pair(3).psi_minus, g);
  const auto u = emden_fowler_inverse(v, 0.25);
  EXPECT_LT((u.array() - 2.0).abs().maxCoeff(), 1e-12);
}

TEST(Inverse, ExactModeMatchesClosedForm) {
  const auto g = grid3();
  const auto ex = exact_mode_solution(g, 1, 1);
  const double r = std::exp(-2.0) * 1.003;  // off-node
  const auto u = emden_fowler_inverse(ex.v, r);
  const auto& nodes = g->basis().nodes();
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    auto x = nodes[j].cartesian(3);
    for (double& c : x) c *= r;
    EXPECT_NEAR(u(static_cast<Eigen::Index>(j)), ex.u.value(x), 1e-10);
  }
}

TEST(Inverse, RoundTripAndRange) {
  const auto g = grid3(0.5);
  BallFunction u;
  u.value = [](std::span<const double> x) { return 1.0 + x[0] - 2.0 * x[1] * x[2] + x[2] * x[2]; };
  const auto v = emden_fowler_forward(u, g);
  for (double r : {0.5, 0.3, 0.1, 0.01}) {
    const auto back = emden_fowler_inverse(v, r);
    const auto& nodes = g->basis().nodes();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      auto x = nodes[j].cartesian(3);
      for (double& c : x) c *= r;
      EXPECT_NEAR(back(static_cast<Eigen::Index>(j)), u.value(x), 1e-10) << "r=" << r;
    }
  }
  EXPECT_THROW(emden_fowler_inverse(v, 0.6), RangeError);
  EXPECT_THROW(emden_fowler_inverse(v, 1e-9), RangeError);
}

TEST(Field, ParsevalConsistency) {
  const auto g = grid3(0.5);
  BallFunction u;
  u.value = [](std::span<const double> x) { return x[0] * x[1] + std::pow(x[2], 3); };
  const auto v = emden_fowler_forward(u, g);
  EXPECT_LT(v.parseval_defect(), 1e-8);
}

TEST(Integrals, ExponentialTail) {
  const auto g = grid3(1.0);
  const auto v = emden_fowler_forward(fundamental_pair(3).psi_minus, g);
  const RowMatrix w = map_samples(v, [](double t, std::size_t, double) { return std::exp(-2.0 * t); });
  const auto r = integrate_tail(*g, w, 0.0);
  EXPECT_NEAR(r.value, 2.0 * std::numbers::pi, 1e-9);
  EXPECT_GT(std::abs(r.tail.correction), 0.0);
}

TEST(Integrals, TraceOfExactMode) {
  const auto g = grid3();
  const auto ex = exact_mode_solution(g, 1, 1);
  const RowMatrix sq = map_samples(ex.v, [](double, std::size_t, double x) { return x * x; });
  for (double t : {0.5, 2.345, 7.0}) EXPECT_NEAR(trace_integral(*g, sq, t), std::exp(-2.0 * std::sqrt(2.0) * t), 1e-10);
}

TEST(Integrals, ZeroAndAdditivity) {
  const auto g = grid3();
  const RowMatrix zero = RowMatrix::Zero(static_cast<Eigen::Index>(g->num_t()), static_cast<Eigen::Index>(g->basis().num_nodes()));
  EXPECT_EQ(integrate_tail(*g, zero, 0.0).value, 0.0);
  const auto ex = exact_mode_solution(g, 2, 3);
  const RowMatrix sq = map_samples(ex.v, [](double t, std::size_t, double x) { return (1.0 + std::sin(t)) * x * x; });
  const double a = integrate_tail(*g, sq, 1.0).value;
  const double b = integrate_tail(*g, sq, 3.0).value;
  const auto ang = angular_integrals(*g, sq);
  const double mid = g->line().integrate(ang, 1.0, 3.0);
  EXPECT_NEAR(a, mid + b, 1e-12 * std::abs(a));
}

TEST(Integrals, NonFiniteRaises) {
  const auto g = grid3();
  RowMatrix bad = RowMatrix::Zero(static_cast<Eigen::Index>(g->num_t()), static_cast<Eigen::Index>(g->basis().num_nodes()));
  bad(3, 2) = NAN;
  EXPECT_THROW(integrate_tail(*g, bad, 0.0), NumericError);
  EXPECT_THROW(integrate_tail(*g, RowMatrix::Zero(4, 4), 0.0), ShapeError);
  EXPECT_THROW(trace_integral(*g, RowMatrix::Zero(static_cast<Eigen::Index>(g->num_t()), static_cast<Eigen::Index>(g->basis().num_nodes())), 20.0),
               RangeError);
}

TEST(Isometry, CutoffFunction) {
  const auto g = grid3(1.0, 14.0);
  BallFunction u;
  u.value = [](std::span<const double> x) {
    const double r = norm(x);
    const double s = (r - 0.3) / 0.2;
    const double eta = std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
    return std::pow(r, -0.5) * eta * (1.0 + 0.3 * x[2] / r);
  };
  const auto rep = isometry_check(u, g);
  EXPECT_GT(rep.lhs, 0.0);
  EXPECT_LT(rep.defect, 1e-8);
}

TEST(Isometry, ZeroAndExactMode) {
  BallFunction zero;
  zero.value = [](std::span<const double>) { return 0.0; };
  const auto g = grid3(0.5, 24.0);
  const auto z = isometry_check(zero, g);
  EXPECT_EQ(z.lhs, 0.0);
  EXPECT_EQ(z.rhs, 0.0);
  const auto rep = isometry_check(exact_mode_solution(g, 1, 1).u, g);
  EXPECT_LT(rep.defect, 1e-8);
}

TEST(Serialization, RoundTrip) {
  const auto g = grid3(0.5, 8.0, 0.02, 2);
  const auto ex = exact_mode_solution(g, 2, 4);
  std::stringstream csv;
  write_field_csv(ex.v, csv);
  const auto meta = field_metadata(ex.v);
  EXPECT_EQ(meta.at("n"), 3);
  EXPECT_EQ(meta.at("l_max"), 2);
  EXPECT_EQ(meta.at("num_t"), g->num_t());
  const auto back = read_field(meta, csv);
  EXPECT_EQ(back.grid().num_t(), g->num_t());
  EXPECT_EQ((back.modes() - ex.v.modes()).cwiseAbs().maxCoeff(), 0.0);
}
