#pragma once

// Problem instances for
//   -Delta u - ((N-2)/2)^2 u / |x|^2 = h(x) u + f(x, u)   in B_R,
// with h(x) = C_h |x|^{-2+eps} a(x/|x|) and f(x, s) = kappa |s|^{p-2} s,
// their cylinder versions h~, f~, and closed-form reference solutions.

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "hardy/cylinder.hpp"
#include "hardy/error.hpp"
#include "hardy/harmonics.hpp"

namespace hardy {

struct ModeTerm {
  int l = 0;
  int m = 1;
  double coef = 0.0;
};

/// Harmonic of the given family evaluated at an arbitrary direction, with its
/// tangential gradient in Cartesian components.
struct HarmonicPoint {
  double value = 0.0;
  std::vector<double> tangential;
};

inline HarmonicPoint harmonic_at(int n, BasisMode mode, int l, int m, std::span<const double> x) {
  const SphereNode node = SphereNode::from_direction(x);
  const double r = norm(x);
  HarmonicPoint out;
  out.tangential.assign(n, 0.0);
  if (mode == BasisMode::full) {
    const HarmonicSample s = real_harmonic_s2(l, m, node);
    out.value = s.value;
    const double ct = node.cos_theta, st = node.sin_theta;
    const double cp = std::cos(node.phi), sp = std::sin(node.phi);
    if (st > 1e-300) {
      out.tangential = {s.d_theta * ct * cp - s.d_phi * sp, s.d_theta * ct * sp + s.d_phi * cp, -s.d_theta * st};
    }
    return out;
  }
  if (m != 1) throw DomainError("zonal family only has m = 1");
  const HarmonicSample s = zonal_harmonic(l, n, node);
  out.value = s.value;
  if (node.sin_theta > 1e-300) {
    // grad_S Y = Y'(c) (e_N - c omega), c = omega_N, Y'(c) = -dY/dtheta / sin(theta)
    const double dy_dc = -s.d_theta / node.sin_theta;
    const double c = node.cos_theta;
    for (int i = 0; i < n; ++i) out.tangential[i] = -dy_dc * c * x[i] / r;
    out.tangential[n - 1] += dy_dc;
  }
  return out;
}

struct PotentialSpec {
  double c_h = 0.0;
  double eps = 1.0;
  std::vector<ModeTerm> a_modes;  // empty: a == 1

  void validate() const {
    if (!(c_h >= 0.0) || !std::isfinite(c_h)) throw ConfigError("c_h must be >= 0");
    if (!(eps > 0.0 && eps < 2.0)) throw ConfigError("eps must satisfy 0 < eps < 2");
  }
};

struct NonlinearitySpec {
  double kappa = 0.0;
  double p = 3.0;

  static double critical_exponent(int n) { return 2.0 * n / (n - 2.0); }

  void validate(int n) const {
    const double crit = critical_exponent(n);
    if (!(p > 2.0 && p < crit)) throw ConfigError(fmt::format("p must satisfy 2 < p < {:g}", crit));
    if (!std::isfinite(kappa)) throw ConfigError("kappa must be finite");
  }

  double f(double s) const { return kappa * std::pow(std::abs(s), p - 2.0) * s; }
  double F(double s) const { return kappa * std::pow(std::abs(s), p) / p; }
  double f_s(double s) const { return kappa * (p - 1.0) * std::pow(std::abs(s), p - 2.0); }

  /// Constant in |f s| + |f'_s s^2| + |grad_x F . x| <= C_f (s^2 + |s|^p).
  double c_f() const { return std::abs(kappa) * p; }
};

struct ProblemSpec {
  DomainSpec domain;
  PotentialSpec potential;
  NonlinearitySpec nonlinearity;
  std::vector<ModeTerm> boundary;  // u(R theta) = sum coef Y_{l,m}(theta)

  void validate(const HarmonicBasis& basis) const {
    domain.validate();
    potential.validate();
    nonlinearity.validate(domain.n);
    if (basis.dimension() != domain.n) throw ConfigError("basis dimension does not match n");
    auto check_terms = [&](const std::vector<ModeTerm>& terms, const char* what) {
      for (const auto& t : terms) {
        if (t.l > basis.l_max())
          throw ConfigError(fmt::format("{} mode l = {} exceeds l_max = {}", what, t.l, basis.l_max()));
        const int count = basis.mode() == BasisMode::full ? 2 * t.l + 1 : 1;
        if (t.l < 0 || t.m < 1 || t.m > count)
          throw ConfigError(fmt::format("{} mode (l={}, m={}) not in the basis", what, t.l, t.m));
        if (!std::isfinite(t.coef)) throw ConfigError(fmt::format("{} coefficient must be finite", what));
      }
    };
    check_terms(potential.a_modes, "a_modes");
    check_terms(boundary, "boundary_modes");
  }

  int n() const { return domain.n; }
};

/// a(theta_j) on the quadrature nodes.
inline std::vector<double> angular_factor(const PotentialSpec& pot, const HarmonicBasis& basis) {
  std::vector<double> a(basis.num_nodes(), pot.a_modes.empty() ? 1.0 : 0.0);
  for (const auto& term : pot.a_modes) {
    const std::size_t k = basis.index_of(term.l, term.m);
    for (std::size_t j = 0; j < a.size(); ++j) a[j] += term.coef * basis.values()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
  }
  return a;
}

inline double angular_factor_at(const PotentialSpec& pot, int n, BasisMode mode, std::span<const double> x) {
  if (pot.a_modes.empty()) return 1.0;
  double a = 0.0;
  for (const auto& term : pot.a_modes) a += term.coef * harmonic_at(n, mode, term.l, term.m, x).value;
  return a;
}

/// h(x) = C_h |x|^{-2+eps} a(x/|x|).
inline double h_ball(const ProblemSpec& spec, BasisMode mode, std::span<const double> x) {
  const double r = norm(x);
  return spec.potential.c_h * std::pow(r, -2.0 + spec.potential.eps) *
         angular_factor_at(spec.potential, spec.n(), mode, x);
}

/// h~(t, theta) = h(e^{-t} theta) = C_h e^{(2-eps) t} a(theta).
inline double h_tilde(const ProblemSpec& spec, double t, double a_theta) {
  return spec.potential.c_h * std::exp((2.0 - spec.potential.eps) * t) * a_theta;
}

/// f~(t, theta, s) = e^{-(N-2)t/2} f(e^{-t} theta, e^{(N-2)t/2} s)
///                 = kappa e^{(p-2)(N-2)t/2} |s|^{p-2} s.
inline double f_tilde(const ProblemSpec& spec, double t, double s) {
  const auto& nl = spec.nonlinearity;
  if (nl.kappa == 0.0) return 0.0;
  return std::exp(0.5 * (nl.p - 2.0) * (spec.n() - 2) * t) * nl.f(s);
}

/// e^{-N t} F(e^{-t} theta, e^{(N-2)t/2} s).
inline double F_weighted(const ProblemSpec& spec, double t, double s) {
  const auto& nl = spec.nonlinearity;
  if (nl.kappa == 0.0) return 0.0;
  const int n = spec.n();
  return std::exp((-n + 0.5 * nl.p * (n - 2)) * t) * nl.F(s);
}

/// e^{-(N+1) t} grad_x F(e^{-t} theta, e^{(N-2)t/2} s) . theta; zero for
/// x-independent nonlinearities.
inline double gradF_weighted(const ProblemSpec&, double, double) { return 0.0; }

/// Right-hand side of the cylinder equation, e^{-2t}(h~ v + f~(t, theta, v)).
inline double cylinder_rhs(const ProblemSpec& spec, double t, double a_theta, double v) {
  return std::exp(-2.0 * t) * (h_tilde(spec, t, a_theta) * v + f_tilde(spec, t, v));
}

// ---------------------------------------------------------------------------
// Reference solutions

struct ExactMode {
  BallFunction u;
  CylinderField v;
  double gamma = 0.0;          // sqrt(lambda_l)
  double gamma_tilde = 0.0;    // -(N-2)/2 + sqrt(lambda_l)
  std::vector<double> beta;    // unit vector over the degree-l block
};

/// u = |x|^{gamma~} Y_{l,m}(x/|x|), which solves the equation with h = f = 0;
/// v(t, theta) = e^{-sqrt(lambda_l) t} Y_{l,m}(theta).
inline ExactMode exact_mode_solution(const GridPtr& grid, int l, int m) {
  const auto& basis = grid->basis();
  const int n = grid->dimension();
  const std::size_t k = basis.index_of(l, m);
  const BasisMode mode = basis.mode();
  const double gamma = std::sqrt(static_cast<double>(eigenvalue(l, n)));
  const double gt = -0.5 * (n - 2) + gamma;
  BallFunction u;
  u.value = [=](std::span<const double> x) {
    return std::pow(norm(x), gt) * harmonic_at(n, mode, l, m, x).value;
  };
  u.gradient = [=](std::span<const double> x) {
    const double r = norm(x);
    const HarmonicPoint y = harmonic_at(n, mode, l, m, x);
    std::vector<double> g(n);
    const double rp = std::pow(r, gt - 1.0);
    for (int i = 0; i < n; ++i) g[i] = rp * (gt * y.value * x[i] / r + y.tangential[i]);
    return g;
  };
  auto v = CylinderField::from_mode_functions(grid, {{k, [gamma](double t) { return std::exp(-gamma * t); }}});
  std::vector<double> beta;
  for (std::size_t kk : basis.block(l)) beta.push_back(kk == k ? 1.0 : 0.0);
  ExactMode out{std::move(u), std::move(v), gamma, gt, std::move(beta)};
  return out;
}

struct FundamentalPair {
  BallFunction psi_plus;   // |x|^{-(N-2)/2} log(1/|x|), cylinder avatar v = t
  BallFunction psi_minus;  // |x|^{-(N-2)/2}, cylinder avatar v = 1
};

/// Psi+ is not in the energy space: its cylinder gradient energy grows
/// linearly with the truncation length.
inline FundamentalPair fundamental_pair(int n) {
  if (n < 3) throw DomainError("dimension N must be >= 3");
  const double a = 0.5 * (n - 2);
  FundamentalPair out;
  out.psi_minus.value = [a](std::span<const double> x) { return std::pow(norm(x), -a); };
  out.psi_minus.gradient = [a, n](std::span<const double> x) {
    const double r = norm(x);
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = -a * std::pow(r, -a - 2.0) * x[i];
    return g;
  };
  out.psi_plus.value = [a](std::span<const double> x) {
    const double r = norm(x);
    return std::pow(r, -a) * std::log(1.0 / r);
  };
  out.psi_plus.gradient = [a, n](std::span<const double> x) {
    const double r = norm(x);
    std::vector<double> g(n);
    const double radial = std::pow(r, -a - 1.0) * (-a * std::log(1.0 / r) - 1.0);
    for (int i = 0; i < n; ++i) g[i] = radial * x[i] / r;
    return g;
  };
  return out;
}

}  // namespace hardy
