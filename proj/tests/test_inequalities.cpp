#include <gtest/gtest.h>

#include <cmath>

#include "fields.hpp"
#include "hardy/inequalities.hpp"

using namespace hardy;
using namespace hardy::testing;

TEST(HardyBoundary, ConstantField) {
  const auto g = unit_grid();
  const auto r = hardy_boundary_check(constant_field(g, 1.0), 2.0, 0.0);
  EXPECT_DOUBLE_EQ(*r.asserted_constant, 1.0);
  EXPECT_NEAR(r.worst_ratio, 0.5, 1e-10);
  EXPECT_TRUE(r.passed);
}

TEST(HardyBoundary, ZeroField) {
  const auto g = unit_grid();
  const auto r = hardy_boundary_check(constant_field(g, 0.0), 1.0, 0.5);
  EXPECT_EQ(r.worst_ratio, 0.0);
  EXPECT_TRUE(r.passed);
  EXPECT_THROW(hardy_boundary_check(constant_field(g, 1.0), 0.0, 0.5), DomainError);
}

TEST(HardyBoundary, Constant) {
  EXPECT_DOUBLE_EQ(hardy_boundary_constant(0.5), 16.0);
  EXPECT_DOUBLE_EQ(hardy_boundary_constant(2.0), 1.0);
  EXPECT_DOUBLE_EQ(hardy_boundary_constant(4.0), 0.5);
}

TEST(HardyBoundary, RandomSuite) {
  const auto g = unit_grid();
  for (const auto& r : hardy_boundary_suite(g, 7, 25, {0.5, 1.0, 2.0})) {
    EXPECT_TRUE(r.passed) << r.id << " worst " << r.worst_ratio;
    EXPECT_EQ(r.census, 25u);
    EXPECT_LE(r.worst_ratio, 1.0 + 1e-8);
  }
}

TEST(SobolevTrace, ExactModeTranslationInvariance) {
  const auto g = unit_grid();
  const auto v = exact_mode_solution(g, 1, 1).v;
  const auto a = sobolev_trace_ratio(v, 2.0, 1.0);
  const auto b = sobolev_trace_ratio(v, 2.0, 3.0);
  EXPECT_GT(a.worst_ratio, 0.0);
  EXPECT_NEAR(b.worst_ratio / a.worst_ratio, 1.0, 1e-6);
  EXPECT_EQ(sobolev_trace_ratio(constant_field(g, 0.0), 2.0, 1.0).worst_ratio, 0.0);
}

TEST(SobolevTrace, ExponentRange) {
  const auto g = unit_grid();
  const auto v = exact_mode_solution(g, 1, 1).v;
  EXPECT_THROW(sobolev_trace_ratio(v, 6.0, 1.0), DomainError);
  EXPECT_THROW(sobolev_trace_ratio(v, 0.5, 1.0), DomainError);
}

TEST(SobolevTrace, RandomSuite) {
  const auto g = unit_grid();
  for (const auto& r : sobolev_suite(g, 8, 12, {1.0, 2.0, 3.0})) {
    EXPECT_TRUE(r.passed) << r.id << ": " << r.note;
    EXPECT_TRUE(std::isfinite(r.empirical_constant));
    EXPECT_GT(r.empirical_constant, 0.0);
  }
}

TEST(EquivNorm, ConstantAndZero) {
  const auto g = unit_grid();
  EXPECT_NEAR(equiv_norm_check(constant_field(g, 1.0), 0.0).worst_ratio, 0.5, 1e-10);
  EXPECT_EQ(equiv_norm_check(constant_field(g, 0.0), 0.0).worst_ratio, 0.0);
}

TEST(EquivNorm, RandomSuiteIsTwoSided) {
  const auto r = equiv_norm_suite(unit_grid(), 9, 30);
  EXPECT_TRUE(r.passed);
  EXPECT_GT(r.min_ratio, 0.0);
  EXPECT_TRUE(std::isfinite(r.worst_ratio));
}

TEST(Poincare, BumpTimesDipole) {
  const auto g = unit_grid();
  RandomField f;
  Profile p;
  p.centre = 3.0;
  p.width = 1.5;
  f.modes = {g->basis().index_of(1, 1)};
  f.coefs = {1.0};
  f.profiles = {p};
  const auto r = poincare_check(f.instantiate(g), 2.0);
  EXPECT_TRUE(r.passed);
  EXPECT_GT(r.worst_ratio, 0.0);
  EXPECT_TRUE(std::isfinite(r.worst_ratio));
  const auto hf = hardy_form_cross_check(f, g);
  EXPECT_GT(hf.cylinder, 0.0);
  EXPECT_LT(hf.relative, 1e-7);
}

TEST(Poincare, ZeroAndSuite) {
  const auto g = unit_grid();
  EXPECT_TRUE(poincare_check(constant_field(g, 0.0), 2.0).passed);
  const auto r = poincare_suite(g, 10, 20, 2.0);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.census, 20u);
}

TEST(HardyForm, BallMatchesCylinder) {
  const auto r = hardy_form_suite(unit_grid(), 11, 10);
  EXPECT_TRUE(r.passed) << r.note;
}

TEST(Suites, Deterministic) {
  const auto g = unit_grid();
  const auto a = equiv_norm_suite(g, 5, 10);
  const auto b = equiv_norm_suite(g, 5, 10);
  EXPECT_EQ(a.worst_ratio, b.worst_ratio);
  EXPECT_EQ(a.min_ratio, b.min_ratio);
  SuiteRng r1(1), r2(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(r1.normal(), r2.normal());
  SuiteRng r3(2);
  for (int i = 0; i < 1000; ++i) {
    const int k = r3.integer(1, 4);
    EXPECT_GE(k, 1);
    EXPECT_LE(k, 4);
  }
}
