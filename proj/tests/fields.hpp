// Closed-form cylinder fields shared by the unit tests.
#pragma once

#include <cmath>

#include "hardy/cylinder.hpp"
#include "hardy/problem.hpp"

namespace hardy::testing {

inline GridPtr unit_grid(double span = 12.0, double dt = 0.01, int lmax = 3) {
  return make_grid(DomainSpec{3, 1.0}, span, dt, build_basis(3, lmax));
}

inline ProblemSpec linear(const GridPtr& g) {
  ProblemSpec p;
  p.domain = g->domain();
  return p;
}

/// e^{-sqrt2 t} Y_{1,1} + a e^{-sqrt6 t} Y_{2,1}
inline CylinderField two_mode(const GridPtr& g, double a = 0.5) {
  ColMatrix m = ColMatrix::Zero(static_cast<Eigen::Index>(g->num_t()), static_cast<Eigen::Index>(g->basis().num_modes()));
  const auto k1 = static_cast<Eigen::Index>(g->basis().index_of(1, 1));
  const auto k2 = static_cast<Eigen::Index>(g->basis().index_of(2, 1));
  for (std::size_t i = 0; i < g->num_t(); ++i) {
    m(static_cast<Eigen::Index>(i), k1) = std::exp(-std::sqrt(2.0) * g->t(i));
    m(static_cast<Eigen::Index>(i), k2) = a * std::exp(-std::sqrt(6.0) * g->t(i));
  }
  return CylinderField::from_modes(g, std::move(m));
}

inline CylinderField constant_field(const GridPtr& g, double c) {
  ColMatrix m = ColMatrix::Zero(static_cast<Eigen::Index>(g->num_t()), static_cast<Eigen::Index>(g->basis().num_modes()));
  m.col(static_cast<Eigen::Index>(g->basis().index_of(0, 1))).setConstant(c * std::sqrt(4.0 * std::numbers::pi));
  return CylinderField::from_modes(g, std::move(m));
}

}  // namespace hardy::testing
