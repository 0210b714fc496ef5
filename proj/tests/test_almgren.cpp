#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fields.hpp"
#include "hardy/almgren.hpp"
#include "hardy/config.hpp"
#include "hardy/mode_solver.hpp"

using namespace hardy;
using namespace hardy::testing;

namespace {
const double kR2 = std::sqrt(2.0), kR6 = std::sqrt(6.0);
}

TEST(FrequencyTerms, ExactModeHAndD) {
  const auto g = unit_grid();
  const auto v = exact_mode_solution(g, 1, 1).v;
  for (double t : {0.5, 3.0, 6.25}) {
    const double h = std::exp(-2.0 * kR2 * t);
    EXPECT_NEAR(compute_H(v, t), h, 1e-12 * h);
    EXPECT_NEAR(compute_H_quadrature(v, t), h, 1e-9 * h);
    EXPECT_NEAR(compute_D(v, linear(g), t), kR2 * h, 1e-8 * h);
  }
}

TEST(FrequencyTerms, ConstantField) {
  const auto g = unit_grid();
  const auto v = constant_field(g, 0.7);
  EXPECT_NEAR(compute_H(v, 2.0), 4.0 * std::numbers::pi * 0.49, 1e-12);
  EXPECT_NEAR(compute_D(v, linear(g), 2.0), 0.0, 1e-12);
  const auto tr = frequency_trace(v, linear(g));
  EXPECT_LT(check_Hprime(tr), 1e-10);
  EXPECT_LT(pohozaev_max_residual(tr), 1e-10);
  EXPECT_NEAR(tr.gamma_hat, 0.0, 1e-10);
}

TEST(FrequencyTerms, TwoHPathsAgreeOnSolvedField) {
  const auto cfg = reference_config();
  const auto v = solve_semilinear(cfg.problem, cfg.grid()).field;
  for (double t : {1.0, 4.0, 9.0}) {
    const double a = compute_H(v, t), b = compute_H_quadrature(v, t);
    EXPECT_NEAR(a, b, 1e-9 * a);
  }
}

TEST(FrequencyTerms, RangeAndDegeneracy) {
  const auto g = unit_grid();
  const auto zero = constant_field(g, 0.0);
  EXPECT_THROW(compute_H(zero, 1.0), DegeneracyError);
  EXPECT_THROW(frequency_trace(zero, linear(g)), DegeneracyError);
  EXPECT_THROW(compute_H(exact_mode_solution(g, 1, 1).v, 40.0), RangeError);
}

TEST(FrequencyTrace, ExactModeIsConstant) {
  const auto g = unit_grid();
  const auto tr = frequency_trace(exact_mode_solution(g, 1, 1).v, linear(g));
  for (std::size_t i = tr.i_lo; i <= tr.i_hi; ++i) {
    EXPECT_NEAR(tr.N[i], kR2, 1e-8);
    EXPECT_NEAR(tr.nu1[i], 0.0, 1e-8);
  }
  EXPECT_NEAR(tr.gamma_hat, kR2, 1e-8);
  EXPECT_LT(check_Hprime(tr), 1e-8);
  EXPECT_LT(check_Nprime(tr), 1e-8);
  EXPECT_LT(pohozaev_max_residual(tr), 1e-8);
}

TEST(FrequencyTrace, TwoModeDecreasesToSlowRoot) {
  const auto g = unit_grid();
  const auto tr = frequency_trace(two_mode(g), linear(g));
  for (std::size_t i = tr.i_lo + 1; i <= tr.i_hi; ++i) EXPECT_LE(tr.N[i], tr.N[i - 1] + 1e-12);
  EXPECT_NEAR(tr.gamma_hat, kR2, 1e-4);
  EXPECT_LE(tr.nu1_max, 1e-8);
  EXPECT_LT(check_Nprime(tr), 1e-6);
}

TEST(FrequencyTrace, SemilinearField) {
  const auto cfg = reference_config();
  const auto v = solve_semilinear(cfg.problem, cfg.grid()).field;
  const auto tr = frequency_trace(v, cfg.problem);
  EXPECT_NEAR(tr.gamma_hat, kR2, 1e-3);
  EXPECT_LE(tr.nu1_max, 1e-8);
  EXPECT_GE(tr.coercivity_margin, -1e-8);
  EXPECT_TRUE(std::isfinite(tr.sup_ratio));
  EXPECT_LE(tr.sup_ratio_late, tr.sup_ratio);
}

TEST(FrequencyTrace, SecondOrderStencilConverges) {
  double hp[2], pz[2];
  for (int i = 0; i < 2; ++i) {
    auto cfg = reference_config();
    cfg.dt = 0.01 / (1 << i);
    const auto v = solve_semilinear(cfg.problem, cfg.grid()).field;
    const auto tr = frequency_trace(v, cfg.problem, {2.0, 10.0}, Stencil::central2);
    hp[i] = check_Hprime(tr);
    pz[i] = pohozaev_max_residual(tr);
  }
  EXPECT_GE(hp[0] / hp[1], 3.5);
  EXPECT_GE(pz[0] / pz[1], 3.5);
}

TEST(FrequencyTrace, WindowTooShort) {
  const auto g = unit_grid();
  const auto v = exact_mode_solution(g, 1, 1).v;
  EXPECT_THROW(frequency_trace(v, linear(g), {3.0, 3.03}), FitError);
  EXPECT_THROW(frequency_trace(v, linear(g), {3.0, 30.0}), FitError);
}

TEST(Pohozaev, ExactModeTerms) {
  const auto g = unit_grid();
  const auto T = frequency_terms(exact_mode_solution(g, 1, 1).v, linear(g));
  const std::size_t i = 250;
  const auto p = pohozaev_terms_at(T, i);
  const double e = std::exp(-2.0 * kR2 * T.t[i]);
  EXPECT_NEAR(p.lhs, 2.0 * e, 1e-9 * e);
  EXPECT_NEAR(p.boundary_ds, 2.0 * e, 1e-9 * e);
  EXPECT_LT(pohozaev_residual(exact_mode_solution(g, 1, 1).v, linear(g), T.t[i]), 1e-8);
}

TEST(HDecay, ExactMode) {
  const auto g = unit_grid();
  const auto tr = frequency_trace(exact_mode_solution(g, 1, 1).v, linear(g));
  const auto rep = h_decay_check(tr, kR2);
  EXPECT_NEAR(rep.K1, 1.0, 1e-10);
  EXPECT_LT(rep.drift, 1e-8);
  EXPECT_FALSE(rep.window_warning);
}

TEST(HDecay, TwoModeLimitAndDrift) {
  const auto g = unit_grid();
  const auto tr = frequency_trace(two_mode(g), linear(g));
  const auto rep = h_decay_check(tr, kR2);
  EXPECT_NEAR(rep.limit, 1.0, 1e-4);
  for (std::size_t i = 0; i < rep.t.size(); i += 25)
    EXPECT_NEAR(rep.scaled[i], 1.0 + 0.25 * std::exp(-2.0 * (kR6 - kR2) * rep.t[i]), 1e-10);
  for (std::size_t i = 1; i < rep.scaled.size(); ++i) EXPECT_LT(rep.scaled[i], rep.scaled[i - 1]);
}

TEST(Blowup, ExactModeIsItsOwnLimit) {
  const auto g = unit_grid();
  const auto b = blowup_profile(exact_mode_solution(g, 1, 1).v, {1.0, 2.0, 4.0, 8.0}, 2.0);
  EXPECT_EQ(b.l0, 1);
  for (double m : b.metric) EXPECT_LT(m, 1e-9);
  for (double n : b.trace_norm) EXPECT_NEAR(n, 1.0, 1e-14);
  EXPECT_NEAR(std::abs(b.psi_modes[g->basis().index_of(1, 1)]), 1.0, 1e-12);
}

TEST(Blowup, TwoModeMetricDecaysAtTheGapRate) {
  const auto g = unit_grid();
  const auto b = blowup_profile(two_mode(g), {1.0, 2.0, 3.0, 4.0, 5.0, 6.0}, 2.0);
  for (std::size_t i = 1; i < b.metric.size(); ++i) {
    EXPECT_LT(b.metric[i], b.metric[i - 1]);
    if (i >= 3) EXPECT_NEAR(std::log(b.metric[i - 1] / b.metric[i]), kR6 - kR2, 0.05 * (kR6 - kR2));
  }
}

TEST(Blowup, Errors) {
  const auto g = unit_grid();
  const auto v = exact_mode_solution(g, 1, 1).v;
  EXPECT_THROW(blowup_profile(v, {11.5}, 2.0), RangeError);
  EXPECT_THROW(blowup_profile(v, {}, 2.0), DomainError);
  EXPECT_THROW(blowup_profile(constant_field(g, 0.0), {1.0}, 1.0), DegeneracyError);
}
