#pragma once

// Leading asymptotics of a solution: the degree l0 selected by the frequency
// limit, the coefficients beta on the degree-l0 block (representation formula
// and rescaled-trace limit), and convergence of the rescaled traces.

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hardy/almgren.hpp"
#include "hardy/cylinder.hpp"
#include "hardy/error.hpp"
#include "hardy/fit.hpp"
#include "hardy/harmonics.hpp"
#include "hardy/mode_solver.hpp"
#include "hardy/problem.hpp"

namespace hardy {

/// Degree whose sqrt(lambda) matches gamma_hat.  Accepted only inside the band
/// of width half the gap to the neighbouring sqrt(lambda) on that side.
inline int detect_l0(double gamma_hat, int n, int l_max = 64) {
  if (!std::isfinite(gamma_hat)) throw DetectionError("gamma_hat is not finite");
  auto root = [n](int l) { return std::sqrt(static_cast<double>(eigenvalue(l, n))); };
  int best = 0;
  for (int l = 1; l <= l_max; ++l)
    if (std::abs(gamma_hat - root(l)) < std::abs(gamma_hat - root(best))) best = l;
  const double centre = root(best);
  const int other = gamma_hat >= centre ? best + 1 : best - 1;
  if (other >= 0) {
    const double gap = std::abs(root(other) - centre);
    if (std::abs(gamma_hat - centre) > 0.25 * gap)
      throw DetectionError(fmt::format(
          "gamma_hat = {:.6g} does not match a spectral value: nearest sqrt(lambda_{}) = {:.6g}, next sqrt(lambda_{}) = {:.6g}",
          gamma_hat, best, centre, other, root(other)));
  }
  return best;
}

/// Radial kernel of the representation formula,
///   (s^{-g~+1} - s^{g~+N-1} / R^{2g~+N-2}) / (2g~+N-2),  g~ = -(N-2)/2 + gamma,
/// and for gamma = 0 its limit s^{N/2} log(R/s).
inline double representation_kernel(double s, double radius, double gamma, int n) {
  const double gt = -0.5 * (n - 2) + gamma;
  const double denom = 2.0 * gt + n - 2;  // = 2 gamma
  if (gamma == 0.0) return std::pow(s, 0.5 * n) * std::log(radius / s);
  return (std::pow(s, -gt + 1.0) - std::pow(s, gt + n - 1.0) / std::pow(radius, denom)) / denom;
}

struct BetaRepresentation {
  std::vector<double> beta;
  std::vector<double> boundary_part;  // int u(R theta) R^{-g~} Y dS
  std::vector<double> tail_fraction;  // tail beyond T_max relative to the radial integral
  bool limit_kernel = false;          // l0 = 0: kernel replaced by its gamma -> 0 limit
};

/// beta_m = int_S [u(R theta) / R^{g~} + int_0^R (h u + f(u))(s theta) K(s) ds] Y_{l0,m} dS,
/// evaluated on the t-grid with s = e^{-t}, ds = s dt, and u = s^{-(N-2)/2} v.
inline BetaRepresentation beta_representation(const CylinderField& v, const ProblemSpec& spec, double r_eval, int l0) {
  const auto& grid = v.grid();
  const auto& line = grid.line();
  const int n = grid.dimension();
  if (!(r_eval <= grid.domain().radius * (1.0 + 1e-14)) || !(r_eval > std::exp(-grid.t_max())))
    throw RangeError(fmt::format("R_eval = {} outside (exp(-T_max), R]", r_eval));
  if (l0 > v.basis().l_max()) throw DomainError(fmt::format("l0 = {} exceeds l_max", l0));
  const double T = std::max(-std::log(r_eval), grid.t0());
  const double gamma = std::sqrt(static_cast<double>(eigenvalue(l0, n)));
  const double gt = -0.5 * (n - 2) + gamma;

  BetaRepresentation out;
  out.limit_kernel = l0 == 0;
  const ColMatrix zeta = projected_rhs(spec, v);
  const Eigen::VectorXd phiT = v.modes_at(T);
  for (std::size_t k : v.basis().block(l0)) {
    // projected (h u + f(u))(s theta) = e^{(N+2)t/2} zeta_k(t)
    std::vector<double> g(grid.num_t());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double t = grid.t(i), s = std::exp(-t);
      g[i] = std::exp(0.5 * (n + 2) * t) * zeta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) *
             representation_kernel(s, r_eval, gamma, n) * s;
    }
    const auto tail = line.fit_tail(g);
    if (tail.divergent) throw TruncationError("representation integrand does not decay; increase t_max");
    const double resolved = line.integrate(g, T, line.t_end());
    const double radial = resolved + tail.correction;
    const double frac = std::abs(radial) > 0.0 ? std::abs(tail.correction) / std::abs(radial) : 0.0;
    if (frac > 0.01 && std::abs(tail.correction) > 1e-14 * (1.0 + std::abs(phiT(static_cast<Eigen::Index>(k)))))
      throw TruncationError(fmt::format("representation tail carries {:.3g} of the radial integral; increase t_max", frac));
    // u(R theta) R^{-g~} projected = R^{-(N-2)/2 - g~} phi_k(T) = e^{gamma T} phi_k(T)
    const double boundary = std::pow(r_eval, -0.5 * (n - 2) - gt) * phiT(static_cast<Eigen::Index>(k));
    out.boundary_part.push_back(boundary);
    out.tail_fraction.push_back(frac);
    out.beta.push_back(boundary + radial);
  }
  return out;
}

struct BetaTraceLimit {
  std::vector<double> beta_hat;
  std::vector<double> rate;      // fitted decay rate of e^{gamma t} phi - beta, 0 when flat
  std::vector<double> last;      // e^{gamma lambda_max} phi(lambda_max)
  bool nondegenerate = true;     // beta_hat != 0
  std::vector<std::string> warnings;
};

/// beta_hat_i = lim e^{gamma lambda} phi_i(lambda), extrapolated by a fit
/// a + b e^{-delta lambda} over lambda_list.
inline BetaTraceLimit beta_trace_limit(const CylinderField& v, int l0, const std::vector<double>& lambdas) {
  const auto& grid = v.grid();
  if (lambdas.size() < 4) throw FitError("beta_trace_limit needs at least 4 values of lambda");
  for (double lam : lambdas)
    if (lam < grid.t0() - 1e-12 || lam > grid.t_max() + 1e-12)
      throw RangeError(fmt::format("lambda = {} outside [{}, {}]", lam, grid.t0(), grid.t_max()));
  const double gamma = std::sqrt(static_cast<double>(eigenvalue(l0, grid.dimension())));
  BetaTraceLimit out;
  std::vector<Eigen::VectorXd> coeffs;
  for (double lam : lambdas) coeffs.push_back(v.modes_at(lam));
  double scale = 0.0;
  for (std::size_t q = 0; q < lambdas.size(); ++q)
    scale = std::max(scale, std::exp(gamma * lambdas[q]) * coeffs[q].cwiseAbs().maxCoeff());
  double norm2 = 0.0;
  for (std::size_t k : v.basis().block(l0)) {
    std::vector<double> y;
    for (std::size_t q = 0; q < lambdas.size(); ++q)
      y.push_back(std::exp(gamma * lambdas[q]) * coeffs[q](static_cast<Eigen::Index>(k)));
    const auto fit = fit_exponential(lambdas, y);
    double b = fit.a;
    if (!fit.constant && fit.at_lower_bound) {
      out.warnings.push_back(fmt::format("mode {}: no decaying trend, using the last value", k));
      b = y.back();
    }
    bool inc = true, dec = true;
    for (std::size_t q = 1; q < y.size(); ++q) {
      inc = inc && y[q] >= y[q - 1] - 1e-14 * scale;
      dec = dec && y[q] <= y[q - 1] + 1e-14 * scale;
    }
    if (!inc && !dec) out.warnings.push_back(fmt::format("mode {}: non-monotone rescaled trace, extrapolation uncertain", k));
    out.beta_hat.push_back(b);
    out.rate.push_back(fit.constant ? 0.0 : fit.rate);
    out.last.push_back(y.back());
    norm2 += b * b;
  }
  out.nondegenerate = std::sqrt(norm2) > 1e-10 * std::max(scale, 1e-300);
  if (!out.nondegenerate)
    out.warnings.push_back("beta vanishes on the detected block: contradicts nondegeneracy of the leading term");
  return out;
}

/// Evenly spaced lambdas over [lo, hi].
inline std::vector<double> lambda_grid(double lo, double hi, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
  return out;
}

// ---------------------------------------------------------------------------

struct AsymptoticProfile {
  int l0 = 0;
  double gamma = 0.0;
  double gamma_tilde = 0.0;
  std::vector<std::size_t> block;  // flat indices of the degree-l0 modes
  std::vector<double> beta, beta_hat, beta_error;
  double agreement = 0.0;  // |beta - beta_hat| / (|beta_hat| + 1e-12)
  bool limit_kernel = false;
  bool nondegenerate = true;
  std::vector<std::string> warnings;
};

inline double relative_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    nb += b[i] * b[i];
  }
  return std::sqrt(d) / (std::sqrt(nb) + 1e-12);
}

inline AsymptoticProfile asymptotic_profile(const CylinderField& v, const ProblemSpec& spec, int l0, double r_eval,
                                            const std::vector<double>& lambdas) {
  AsymptoticProfile p;
  p.l0 = l0;
  p.gamma = std::sqrt(static_cast<double>(eigenvalue(l0, spec.n())));
  p.gamma_tilde = -0.5 * (spec.n() - 2) + p.gamma;
  p.block = v.basis().block(l0);
  const auto rep = beta_representation(v, spec, r_eval, l0);
  const auto lim = beta_trace_limit(v, l0, lambdas);
  p.beta = rep.beta;
  p.beta_hat = lim.beta_hat;
  for (std::size_t i = 0; i < p.beta.size(); ++i) p.beta_error.push_back(std::abs(p.beta[i] - p.beta_hat[i]));
  p.agreement = relative_distance(p.beta, p.beta_hat);
  p.limit_kernel = rep.limit_kernel;
  p.nondegenerate = lim.nondegenerate;
  p.warnings = lim.warnings;
  if (p.limit_kernel) p.warnings.push_back("l0 = 0: representation kernel replaced by its limit s^{N/2} log(R/s)");
  return p;
}

// ---------------------------------------------------------------------------
// Convergence of r^{(N-2)/2 - gamma} u(r theta) and r^{N/2 - gamma} grad u(r theta)

struct ConvergenceRow {
  double r = 0.0;
  double value_distance = 0.0;     // sup_theta |rescaled u - sum beta Y|
  double gradient_distance = 0.0;  // sup_theta |rescaled grad u - predicted field|
  double rescaled_sup = 0.0;       // sup_theta |r^{(N-2)/2 - gamma} u(r theta)|
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;  // sorted by decreasing r
  bool value_decreasing = true;
  bool gradient_decreasing = true;
  double pointwise_bound = 0.0;      // running sup of rescaled_sup
};

inline ConvergenceReport convergence_report(const CylinderField& v, const AsymptoticProfile& prof,
                                            std::vector<double> r_list) {
  const auto& grid = v.grid();
  const auto& basis = v.basis();
  const int n = grid.dimension();
  std::sort(r_list.begin(), r_list.end(), std::greater<>());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.num_modes()));
  for (std::size_t i = 0; i < prof.block.size(); ++i) beta(static_cast<Eigen::Index>(prof.block[i])) = prof.beta[i];
  const Eigen::VectorXd limit_val = basis.values().transpose() * beta;
  std::vector<Eigen::VectorXd> limit_grad;
  for (int c = 0; c < basis.gradient_components(); ++c) limit_grad.push_back(basis.gradient(c).transpose() * beta);

  ConvergenceReport rep;
  for (double r : r_list) {
    const double t = -std::log(r);
    if (t < grid.t0() - 1e-12 || t > grid.t_max() + 1e-12)
      throw RangeError(fmt::format("r = {} outside the resolved radii", r));
    const double tc = std::clamp(t, grid.t0(), grid.t_max());
    const Eigen::VectorXd c = v.modes_at(tc);
    const Eigen::VectorXd dc = v.mode_derivatives_at(tc);
    const double e = std::exp(prof.gamma * tc);
    const Eigen::VectorXd val = e * (basis.values().transpose() * c);
    const Eigen::VectorXd radial = e * (basis.values().transpose() * (-0.5 * (n - 2) * c - dc));
    ConvergenceRow row;
    row.r = r;
    row.value_distance = (val - limit_val).cwiseAbs().maxCoeff();
    row.rescaled_sup = val.cwiseAbs().maxCoeff();
    Eigen::VectorXd sq = (radial - prof.gamma_tilde * limit_val).cwiseAbs2();
    for (int k = 0; k < basis.gradient_components(); ++k)
      sq += (e * (basis.gradient(k).transpose() * c) - limit_grad[static_cast<std::size_t>(k)]).cwiseAbs2();
    row.gradient_distance = std::sqrt(sq.maxCoeff());
    if (!rep.rows.empty()) {
      rep.value_decreasing = rep.value_decreasing && row.value_distance < rep.rows.back().value_distance;
      rep.gradient_decreasing = rep.gradient_decreasing && row.gradient_distance < rep.rows.back().gradient_distance;
    }
    rep.pointwise_bound = std::max(rep.pointwise_bound, row.rescaled_sup);
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace hardy
