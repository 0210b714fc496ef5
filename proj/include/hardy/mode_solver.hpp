#pragma once

// Per-mode two-point problems -phi'' + mu phi = zeta on [T0, inf) with the
// decaying branch selected at infinity, and the Picard iteration for the
// semilinear cylinder equation built on top of them.

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hardy/cylinder.hpp"
#include "hardy/error.hpp"
#include "hardy/parallel.hpp"
#include "hardy/problem.hpp"
#include "hardy/uniform_line.hpp"

namespace hardy {

struct ModeSolution {
  std::vector<double> phi;
  double tail_fraction = 0.0;  // |tail correction| / |integral| of the branch-selecting integral
};

/// Variation of parameters.  For mu > 0 (g = sqrt(mu))
///   phi(t) = [A(t) + B(t)] / (2g) + (phi(T0) - B(T0) / (2g)) e^{-g (t - T0)},
///   A(t) = int_{T0}^t e^{-g (t-s)} zeta(s) ds,  B(t) = int_t^inf e^{-g (s-t)} zeta(s) ds,
/// which is the representation with the growing-branch coefficient set to
/// int_{T0}^inf e^{-g s} zeta / (2g).  For mu = 0
///   phi(t) = phi(T0) + int_{T0}^t (s - T0) zeta ds + (t - T0) int_t^inf zeta ds,
/// i.e. slope b = int zeta so that phi' -> 0.
inline ModeSolution solve_mode(double mu, std::span<const double> zeta, double boundary_value,
                               const UniformLine& line, double max_tail_fraction = 0.01) {
  if (!(mu >= 0.0)) throw DomainError("solve_mode: mu must be >= 0");
  const std::size_t n = line.size();
  if (zeta.size() != n) throw ShapeError("solve_mode: zeta must be sampled on the full grid");
  for (double z : zeta)
    if (!std::isfinite(z)) throw NumericError("solve_mode: non-finite right-hand side");

  double zmax = 0.0;
  for (double z : zeta) zmax = std::max(zmax, std::abs(z));
  const TailEstimate fit = line.fit_tail(zeta);
  const double length = line.t_end() - line.t0();

  ModeSolution out;
  out.phi.assign(n, 0.0);
  const double h = line.h();

  auto check_tail = [&](double tail, double integral, double scale) {
    const double frac = std::abs(integral) > 0.0 ? std::abs(tail) / std::abs(integral) : 0.0;
    out.tail_fraction = frac;
    if (frac > max_tail_fraction && std::abs(tail) > 1e-13 * scale)
      throw TruncationError(fmt::format(
          "tail beyond T_max = {} carries {:.3g} of the branch-selecting integral; increase t_max",
          line.t_end(), frac));
  };

  if (mu == 0.0) {
    std::vector<double> weighted(n);
    for (std::size_t i = 0; i < n; ++i) weighted[i] = (line.t(i) - line.t0()) * zeta[i];
    const auto head = line.cumulative_head(weighted);
    auto tail = line.cumulative_tail(zeta);
    double corr = 0.0;
    if (fit.fitted && !fit.divergent) corr = fit.correction;
    else if (fit.divergent) throw TruncationError("solve_mode: right-hand side does not decay; tail integral diverges");
    for (double& z : tail) z += corr;
    check_tail(corr, tail[0], zmax * length + std::abs(boundary_value));
    for (std::size_t i = 0; i < n; ++i)
      out.phi[i] = boundary_value + head[i] + (line.t(i) - line.t0()) * tail[i];
    return out;
  }

  const double g = std::sqrt(mu);
  const auto w = line.exp_weights(g);
  const double decay = std::exp(-g * h);

  std::vector<double> a(n, 0.0), b(n, 0.0);
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const std::size_t s = line.interp_start(c);
    const auto& wf = w.fwd[c - s];
    double acc = 0.0;
    for (int j = 0; j < UniformLine::kInterpPoints; ++j) acc += wf[j] * zeta[s + j];
    a[c + 1] = decay * a[c] + acc;
  }
  // exponential tail of zeta beyond T_max: int e^{-g(s-T)} zeta(T) e^{-rho(s-T)} ds
  double end_tail = 0.0;
  if (fit.fitted && zeta[n - 1] != 0.0) {
    if (!(fit.rate + g > 0.0)) throw TruncationError("solve_mode: weighted tail integral diverges");
    end_tail = zeta[n - 1] / (g + fit.rate);
  }
  b[n - 1] = end_tail;
  for (std::size_t c = n - 1; c-- > 0;) {
    const std::size_t s = line.interp_start(c);
    const auto& wb = w.bwd[c - s];
    double acc = 0.0;
    for (int j = 0; j < UniformLine::kInterpPoints; ++j) acc += wb[j] * zeta[s + j];
    b[c] = decay * b[c + 1] + acc;
  }
  check_tail(std::exp(-g * length) * end_tail, b[0], zmax / g + std::abs(boundary_value));
  const double homogeneous = boundary_value - b[0] / (2.0 * g);
  for (std::size_t i = 0; i < n; ++i)
    out.phi[i] = (a[i] + b[i]) / (2.0 * g) + homogeneous * std::exp(-g * (line.t(i) - line.t0()));
  return out;
}

/// Second-order central differences, Dirichlet value at T0 and the decay
/// condition phi'(T_max) = -sqrt(mu) phi(T_max) (phi' = 0 when mu = 0).
inline std::vector<double> fd_oracle_mode(double mu, std::span<const double> zeta, double boundary_value,
                                          const UniformLine& line) {
  if (!(mu >= 0.0)) throw DomainError("fd_oracle_mode: mu must be >= 0");
  const std::size_t n = line.size();
  if (zeta.size() != n) throw ShapeError("fd_oracle_mode: zeta must be sampled on the full grid");
  const double h = line.h(), h2 = h * h;
  const std::size_t m = n - 1;  // unknowns phi_1 .. phi_{n-1}
  std::vector<double> lo(m, 0.0), di(m, 0.0), up(m, 0.0), rhs(m, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t i = r + 1;
    rhs[r] = zeta[i];
    if (i < n - 1) {
      lo[r] = -1.0 / h2;
      di[r] = 2.0 / h2 + mu;
      up[r] = -1.0 / h2;
    } else {
      lo[r] = -2.0 / h2;
      di[r] = (2.0 + 2.0 * h * std::sqrt(mu)) / h2 + mu;
    }
  }
  rhs[0] += boundary_value / h2;
  // Thomas algorithm
  for (std::size_t r = 1; r < m; ++r) {
    if (std::abs(di[r - 1]) < 1e-300) throw NumericError("fd_oracle_mode: singular tridiagonal system");
    const double f = lo[r] / di[r - 1];
    di[r] -= f * up[r - 1];
    rhs[r] -= f * rhs[r - 1];
  }
  if (std::abs(di[m - 1]) < 1e-300) throw NumericError("fd_oracle_mode: singular tridiagonal system");
  std::vector<double> phi(n, 0.0);
  phi[0] = boundary_value;
  phi[n - 1] = rhs[m - 1] / di[m - 1];
  for (std::size_t r = m - 1; r-- > 0;) phi[r + 1] = (rhs[r] - up[r] * phi[r + 2]) / di[r];
  return phi;
}

// ---------------------------------------------------------------------------
// Semilinear problem

struct SolveControls {
  int max_iterations = 200;
  double damping = 1.0;
  double tolerance = 1e-13;  // relative sup-distance of successive iterates
  bool fd_oracle = false;    // use the finite-difference solver for every mode

  void validate() const {
    if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("damping must lie in (0, 1]");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  }
};

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  double final_distance = 0.0;
  double residual = 0.0;
  double max_tail_fraction = 0.0;
  std::vector<double> distances;
  std::vector<double> contraction;  // distances[i] / distances[i-1]
};

/// zeta_k(t_i): projection of e^{-2t}(h~ v + f~(t, theta, v)) on the basis.
inline ColMatrix projected_rhs(const ProblemSpec& spec, const CylinderField& v) {
  const auto& basis = v.basis();
  const auto a = angular_factor(spec.potential, basis);
  const RowMatrix g = map_samples(v, [&](double t, std::size_t j, double val) {
    return cylinder_rhs(spec, t, a[j], val);
  });
  return g * basis.weighted_values().transpose();
}

/// phi_k(T0) from the boundary data u(R theta) = sum coef Y_{l,m}.
inline Eigen::VectorXd inlet_modes(const ProblemSpec& spec, const HarmonicBasis& basis) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.num_modes()));
  const double scale = std::pow(spec.domain.radius, 0.5 * (spec.n() - 2));
  for (const auto& term : spec.boundary) c(static_cast<Eigen::Index>(basis.index_of(term.l, term.m))) += scale * term.coef;
  return c;
}

/// Decaying harmonic extension of the inlet data.
inline CylinderField harmonic_extension(const Eigen::VectorXd& inlet, const GridPtr& grid) {
  const auto& mu = grid->basis().mu();
  ColMatrix modes(static_cast<Eigen::Index>(grid->num_t()), inlet.size());
  for (Eigen::Index k = 0; k < inlet.size(); ++k) {
    const double g = std::sqrt(mu[static_cast<std::size_t>(k)]);
    for (std::size_t i = 0; i < grid->num_t(); ++i)
      modes(static_cast<Eigen::Index>(i), k) = inlet(k) * std::exp(-g * (grid->t(i) - grid->t0()));
  }
  return CylinderField::from_modes(grid, std::move(modes));
}

/// Weak-form defect of the cylinder equation against w = Y_k hat_i(t) for
/// every interior node, max over (i, k) of |defect| / ||w||, divided by the
/// H_mu norm of v.
inline double equation_residual(const CylinderField& v, const ProblemSpec& spec) {
  const auto& grid = v.grid();
  const auto& line = grid.line();
  const auto& mu = v.basis().mu();
  const ColMatrix zeta = projected_rhs(spec, v);
  const double h = line.h();
  const std::size_t n = grid.num_t();
  std::vector<double> worst(v.num_modes(), 0.0);
  parallel_for(v.num_modes(), [&](std::size_t k) {
    const auto phi = v.mode_series(k);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = mu[k] * phi[i] - zeta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    double w = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double stiff = (2.0 * phi[i] - phi[i - 1] - phi[i + 1]) / h;
      const double defect = stiff + line.hat_integral(g, i);
      const double wnorm = std::sqrt(2.0 / h + (mu[k] + std::exp(-2.0 * line.t(i))) * 2.0 * h / 3.0);
      w = std::max(w, std::abs(defect) / wnorm);
    }
    worst[k] = w;
  });
  double r = 0.0;
  for (double w : worst) r = std::max(r, w);
  const double vn = hmu_norm(v).norm();
  return vn > 0.0 ? r / vn : r;
}

struct SemilinearResult {
  CylinderField field;
  SolveReport report;
};

/// Solves one linear sweep: modes of the next iterate given zeta.
inline ColMatrix linear_sweep(const ColMatrix& zeta, const Eigen::VectorXd& inlet, const CylinderGrid& grid,
                              const SolveControls& controls, double& max_tail) {
  const auto& mu = grid.basis().mu();
  ColMatrix out(zeta.rows(), zeta.cols());
  std::vector<double> tails(static_cast<std::size_t>(zeta.cols()), 0.0);
  parallel_for(static_cast<std::size_t>(zeta.cols()), [&](std::size_t k) {
    const auto col = static_cast<Eigen::Index>(k);
    std::span<const double> z(zeta.col(col).data(), static_cast<std::size_t>(zeta.rows()));
    std::vector<double> phi;
    if (controls.fd_oracle) {
      phi = fd_oracle_mode(mu[k], z, inlet(col), grid.line());
    } else {
      auto sol = solve_mode(mu[k], z, inlet(col), grid.line());
      tails[k] = sol.tail_fraction;
      phi = std::move(sol.phi);
    }
    for (std::size_t i = 0; i < phi.size(); ++i) out(static_cast<Eigen::Index>(i), col) = phi[i];
  });
  for (double t : tails) max_tail = std::max(max_tail, t);
  return out;
}

/// Picard iteration v^{n+1} = (1 - w) v^n + w S(zeta(v^n)), starting from the
/// decaying harmonic extension of the boundary data.
inline SemilinearResult solve_semilinear(const ProblemSpec& spec, const GridPtr& grid,
                                         const SolveControls& controls = {}) {
  spec.validate(grid->basis());
  controls.validate();
  const Eigen::VectorXd inlet = inlet_modes(spec, grid->basis());
  CylinderField v = harmonic_extension(inlet, grid);
  SolveReport rep;
  int growth = 0;
  for (int it = 1; it <= controls.max_iterations; ++it) {
    const ColMatrix zeta = projected_rhs(spec, v);
    ColMatrix next = linear_sweep(zeta, inlet, *grid, controls, rep.max_tail_fraction);
    if (controls.damping < 1.0) next = (1.0 - controls.damping) * v.modes() + controls.damping * next;
    const double scale = std::max(v.modes().cwiseAbs().maxCoeff(), next.cwiseAbs().maxCoeff());
    const double diff = (next - v.modes()).cwiseAbs().maxCoeff();
    const double dist = scale > 0.0 ? diff / scale : 0.0;
    if (!std::isfinite(dist)) throw ConvergenceError("Picard iteration produced non-finite values; reduce R or kappa");
    if (!rep.distances.empty()) {
      rep.contraction.push_back(rep.distances.back() > 0.0 ? dist / rep.distances.back() : 0.0);
      growth = dist > rep.distances.back() ? growth + 1 : 0;
    }
    rep.distances.push_back(dist);
    rep.iterations = it;
    rep.final_distance = dist;
    v = CylinderField::from_modes(grid, std::move(next));
    if (dist <= controls.tolerance) {
      rep.converged = true;
      break;
    }
    if (growth >= 3)
      throw ConvergenceError(fmt::format(
          "Picard iteration diverging (distance {:.3g} grew 3 times in a row); reduce the radius R or kappa", dist));
  }
  if (!rep.converged)
    throw ConvergenceError(fmt::format("Picard iteration did not converge in {} iterations (distance {:.3g})",
                                       controls.max_iterations, rep.final_distance));
  rep.residual = equation_residual(v, spec);
  return {std::move(v), std::move(rep)};
}

}  // namespace hardy
