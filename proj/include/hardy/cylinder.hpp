#pragma once

// Emden-Fowler cylinder: grids, fields and integrals.
//
// A function u on the punctured ball B_R \ {0} corresponds to
//   v(t, theta) = exp(-(N-2) t / 2) u(exp(-t) theta),   t >= T0 = -log R,
// on the half-cylinder.  Fields are stored both as samples on the angular
// quadrature nodes and as harmonic coefficients phi_k(t).

#include <Eigen/Dense>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hardy/error.hpp"
#include "hardy/harmonics.hpp"
#include "hardy/quadrature.hpp"
#include "hardy/uniform_line.hpp"

namespace hardy {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMatrix = Eigen::MatrixXd;

struct DomainSpec {
  int n = 3;
  double radius = 1.0;

  double t0() const { return -std::log(radius); }

  void validate() const {
    if (n < 3) throw DomainError("dimension N must be >= 3");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("ball radius must be positive");
  }
};

/// Uniform t-grid on [T0, T_max] times the angular quadrature.
class CylinderGrid {
 public:
  static constexpr std::size_t kMinNodes = 64;
  static constexpr double kMinWindow = 5.0;

  CylinderGrid(DomainSpec domain, double t_max, double dt, std::shared_ptr<const HarmonicBasis> basis)
      : domain_(domain), basis_(std::move(basis)) {
    domain_.validate();
    if (!basis_) throw DomainError("cylinder grid needs a harmonic basis");
    if (basis_->dimension() != domain_.n) throw DomainError("basis dimension does not match the domain");
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    const double t0 = domain_.t0();
    if (!(t_max > t0 + kMinWindow))
      throw DomainError(fmt::format("t_max = {} must exceed T0 + 5 = {}", t_max, t0 + kMinWindow));
    const auto cells = static_cast<std::size_t>(std::llround((t_max - t0) / dt));
    if (cells + 1 < kMinNodes) throw DomainError("cylinder grid needs at least 64 t-nodes");
    line_ = UniformLine(t0, dt, cells + 1);
  }

  const DomainSpec& domain() const { return domain_; }
  int dimension() const { return domain_.n; }
  const UniformLine& line() const { return line_; }
  const HarmonicBasis& basis() const { return *basis_; }
  const std::shared_ptr<const HarmonicBasis>& basis_ptr() const { return basis_; }
  std::size_t num_t() const { return line_.size(); }
  double t(std::size_t i) const { return line_.t(i); }
  double t0() const { return line_.t0(); }
  double t_max() const { return line_.t_end(); }
  double dt() const { return line_.h(); }

 private:
  DomainSpec domain_;
  std::shared_ptr<const HarmonicBasis> basis_;
  UniformLine line_;
};

using GridPtr = std::shared_ptr<const CylinderGrid>;

inline GridPtr make_grid(DomainSpec domain, double t_max, double dt, std::shared_ptr<const HarmonicBasis> basis) {
  return std::make_shared<const CylinderGrid>(domain, t_max, dt, std::move(basis));
}

/// A field on the cylinder: samples v(t_i, theta_j) (row per t-node) and
/// harmonic coefficients phi_k(t_i) (column per mode).
class CylinderField {
 public:
  static CylinderField from_values(GridPtr grid, RowMatrix values) {
    check_shape(*grid, values.rows(), values.cols(), grid->basis().num_nodes());
    ColMatrix modes = values * grid->basis().weighted_values().transpose();
    return CylinderField(std::move(grid), std::move(values), std::move(modes));
  }

  static CylinderField from_modes(GridPtr grid, ColMatrix modes) {
    check_shape(*grid, modes.rows(), modes.cols(), grid->basis().num_modes());
    RowMatrix values = modes * grid->basis().values();
    return CylinderField(std::move(grid), std::move(values), std::move(modes));
  }

  /// Field with phi_k(t) given by closed-form functions of t.
  static CylinderField from_mode_functions(GridPtr grid,
                                           const std::vector<std::pair<std::size_t, std::function<double(double)>>>& terms) {
    ColMatrix modes = ColMatrix::Zero(static_cast<Eigen::Index>(grid->num_t()),
                                      static_cast<Eigen::Index>(grid->basis().num_modes()));
    for (const auto& [k, fn] : terms)
      for (std::size_t i = 0; i < grid->num_t(); ++i) modes(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) += fn(grid->t(i));
    return from_modes(std::move(grid), std::move(modes));
  }

  const CylinderGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const HarmonicBasis& basis() const { return grid_->basis(); }
  const RowMatrix& values() const { return values_; }
  const ColMatrix& modes() const { return modes_; }
  const ColMatrix& mode_derivatives() const { return dmodes_; }
  std::size_t num_modes() const { return static_cast<std::size_t>(modes_.cols()); }

  std::span<const double> mode_series(std::size_t k) const {
    return {modes_.col(static_cast<Eigen::Index>(k)).data(), static_cast<std::size_t>(modes_.rows())};
  }
  std::span<const double> mode_derivative_series(std::size_t k) const {
    return {dmodes_.col(static_cast<Eigen::Index>(k)).data(), static_cast<std::size_t>(dmodes_.rows())};
  }

  /// Coefficients interpolated at an arbitrary t in [T0, T_max].
  Eigen::VectorXd modes_at(double t) const {
    std::size_t s = 0;
    const auto w = grid_->line().interp_weights(t, s);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(modes_.cols());
    for (int j = 0; j < UniformLine::kInterpPoints; ++j) c += w[j] * modes_.row(static_cast<Eigen::Index>(s + j)).transpose();
    return c;
  }

  Eigen::VectorXd mode_derivatives_at(double t) const {
    Eigen::VectorXd c(modes_.cols());
    for (Eigen::Index k = 0; k < modes_.cols(); ++k)
      c(k) = grid_->line().derivative_at(mode_series(static_cast<std::size_t>(k)), t);
    return c;
  }

  /// Band-limited samples on the quadrature nodes at t.
  Eigen::VectorXd values_at(double t) const {
    const Eigen::VectorXd c = modes_at(t);
    return grid_->basis().synthesize({c.data(), static_cast<std::size_t>(c.size())});
  }

  /// d v / d t synthesized from the mode derivatives at node i.
  Eigen::VectorXd time_derivative_row(std::size_t i) const {
    return grid_->basis().values().transpose() * dmodes_.row(static_cast<Eigen::Index>(i)).transpose();
  }

  /// max over t_i of |sum_j w_j v^2 - sum_k phi_k^2| / (1 + sum_k phi_k^2).
  double parseval_defect() const {
    const auto& w = grid_->basis().weights();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      double quad = 0.0;
      for (Eigen::Index j = 0; j < values_.cols(); ++j) quad += w[j] * values_(i, j) * values_(i, j);
      const double spec = modes_.row(i).squaredNorm();
      worst = std::max(worst, std::abs(quad - spec) / (1.0 + spec));
    }
    return worst;
  }

  /// Same field with every mode scaled by c.
  CylinderField scaled(double c) const { return from_modes(grid_, modes_ * c); }

 private:
  CylinderField(GridPtr grid, RowMatrix values, ColMatrix modes)
      : grid_(std::move(grid)), values_(std::move(values)), modes_(std::move(modes)) {
    dmodes_.resize(modes_.rows(), modes_.cols());
    for (Eigen::Index k = 0; k < modes_.cols(); ++k) {
      const auto d = grid_->line().derivative(mode_series(static_cast<std::size_t>(k)));
      for (Eigen::Index i = 0; i < modes_.rows(); ++i) dmodes_(i, k) = d[static_cast<std::size_t>(i)];
    }
  }

  static void check_shape(const CylinderGrid& grid, Eigen::Index rows, Eigen::Index cols, std::size_t expected_cols) {
    if (static_cast<std::size_t>(rows) != grid.num_t() || static_cast<std::size_t>(cols) != expected_cols)
      throw ShapeError(fmt::format("field shape {}x{} does not match grid {}x{}", rows, cols, grid.num_t(), expected_cols));
  }

  GridPtr grid_;
  RowMatrix values_;
  ColMatrix modes_;
  ColMatrix dmodes_;
};

// ---------------------------------------------------------------------------
// Ball-side functions and the transform

/// A function on the punctured ball, optionally with its gradient.
struct BallFunction {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
};

inline double norm(std::span<const double> x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return std::sqrt(s);
}

inline CylinderField emden_fowler_forward(const BallFunction& u, const GridPtr& grid) {
  const auto& basis = grid->basis();
  const int n = grid->dimension();
  RowMatrix values(static_cast<Eigen::Index>(grid->num_t()), static_cast<Eigen::Index>(basis.num_nodes()));
  std::vector<std::vector<double>> dirs;
  for (const auto& node : basis.nodes()) dirs.push_back(node.cartesian(n));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < grid->num_t(); ++i) {
    const double t = grid->t(i);
    const double r = std::exp(-t);
    const double scale = std::exp(-0.5 * (n - 2) * t);
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      for (int c = 0; c < n; ++c) x[c] = r * dirs[j][c];
      const double val = u.value(x);
      if (!std::isfinite(val))
        throw EvaluationError(fmt::format("ball function not evaluable at radius {}", r));
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = scale * val;
    }
  }
  return CylinderField::from_values(grid, std::move(values));
}

/// u(r theta_j) = r^{-(N-2)/2} v(-log r, theta_j), modes interpolated in t.
inline Eigen::VectorXd emden_fowler_inverse(const CylinderField& v, double r) {
  const auto& grid = v.grid();
  const double r_min = std::exp(-grid.t_max());
  const double r_max = grid.domain().radius;
  if (!(r > r_min * (1.0 - 1e-14)) || r > r_max * (1.0 + 1e-14))
    throw RangeError(fmt::format("radius {} outside (exp(-T_max), R] = ({}, {}]", r, r_min, r_max));
  const double t = std::clamp(-std::log(r), grid.t0(), grid.t_max());
  return std::pow(r, -0.5 * (grid.dimension() - 2)) * v.values_at(t);
}

// ---------------------------------------------------------------------------
// Integrals

/// Tail integrals of a 1-D series at every node: value[i] = int_{t_i}^inf g,
/// including the fitted exponential tail beyond T_max.
struct TailSeries {
  std::vector<double> value;
  TailEstimate tail;
};

inline TailSeries tail_integrals(const UniformLine& line, std::span<const double> g) {
  TailSeries out;
  out.value = line.cumulative_tail(g);
  out.tail = line.fit_tail(g);
  for (double& v : out.value) v += out.tail.correction;
  return out;
}

struct TailIntegral {
  double value = 0.0;       // integral including the tail correction
  double truncated = 0.0;   // integral over [t_from, T_max] only
  TailEstimate tail;
};

inline void check_finite(const RowMatrix& g) {
  if (!g.allFinite()) throw NumericError("non-finite samples in cylinder integral");
}

/// Angular integrals a(t_i) = int_{S^{N-1}} g(t_i, .) dS.
inline std::vector<double> angular_integrals(const CylinderGrid& grid, const RowMatrix& g) {
  if (static_cast<std::size_t>(g.rows()) != grid.num_t() ||
      static_cast<std::size_t>(g.cols()) != grid.basis().num_nodes())
    throw ShapeError("grid function shape does not match the cylinder grid");
  check_finite(g);
  std::vector<double> a(grid.num_t(), 0.0);
  const auto& w = grid.basis().weights();
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < g.cols(); ++j) s += w[j] * g(i, j);
    a[static_cast<std::size_t>(i)] = s;
  }
  return a;
}

inline TailIntegral integrate_tail_series(const UniformLine& line, std::span<const double> a, double t_from) {
  if (t_from < line.t0() - 1e-12 || t_from > line.t_end() + 1e-12)
    throw RangeError(fmt::format("t = {} outside [{}, {}]", t_from, line.t0(), line.t_end()));
  for (double x : a)
    if (!std::isfinite(x)) throw NumericError("non-finite samples in cylinder integral");
  TailIntegral out;
  out.truncated = line.integrate(a, std::clamp(t_from, line.t0(), line.t_end()), line.t_end());
  out.tail = line.fit_tail(a);
  out.value = out.truncated + out.tail.correction;
  return out;
}

/// int over [t_from, inf) x S^{N-1} of g dmu.
inline TailIntegral integrate_tail(const CylinderGrid& grid, const RowMatrix& g, double t_from) {
  const auto a = angular_integrals(grid, g);
  return integrate_tail_series(grid.line(), a, t_from);
}

/// int over Gamma_t of g dS, interpolating in t between nodes.
inline double trace_integral(const CylinderGrid& grid, const RowMatrix& g, double t) {
  if (t < grid.t0() - 1e-12 || t > grid.t_max() + 1e-12)
    throw RangeError(fmt::format("t = {} outside [{}, {}]", t, grid.t0(), grid.t_max()));
  const auto a = angular_integrals(grid, g);
  return grid.line().interpolate(a, t);
}

/// Pointwise map of the field samples.
template <class F>
RowMatrix map_samples(const CylinderField& v, F&& fn) {
  RowMatrix out(v.values().rows(), v.values().cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double t = v.grid().t(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = fn(t, static_cast<std::size_t>(j), v.values()(i, j));
  }
  return out;
}

/// Spectral energy density sum_k (phi_k'^2 + mu_k phi_k^2) at every node.
inline std::vector<double> gradient_energy_density(const CylinderField& v) {
  const auto& mu = v.basis().mu();
  std::vector<double> e(v.grid().num_t(), 0.0);
  for (std::size_t k = 0; k < v.num_modes(); ++k) {
    const auto p = v.mode_series(k);
    const auto d = v.mode_derivative_series(k);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] += d[i] * d[i] + mu[k] * p[i] * p[i];
  }
  return e;
}

/// Discrete H_mu norm pieces on C_{t_from}.
struct HmuNorm {
  double gradient_energy = 0.0;  // int |grad_C v|^2 dmu
  double weighted_l2 = 0.0;      // int e^{-2t} v^2 dmu
  bool divergent = false;        // the gradient energy does not decay at T_max
  double norm() const { return std::sqrt(gradient_energy + weighted_l2); }
};

inline HmuNorm hmu_norm(const CylinderField& v, double t_from) {
  HmuNorm out;
  const auto& line = v.grid().line();
  const auto e = gradient_energy_density(v);
  const auto ge = integrate_tail_series(line, e, t_from);
  std::vector<double> w(v.grid().num_t(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = std::exp(-2.0 * v.grid().t(i)) * v.modes().row(static_cast<Eigen::Index>(i)).squaredNorm();
  const auto wl = integrate_tail_series(line, w, t_from);
  out.gradient_energy = ge.value;
  out.weighted_l2 = wl.value;
  out.divergent = ge.tail.divergent || wl.tail.divergent;
  return out;
}

inline HmuNorm hmu_norm(const CylinderField& v) { return hmu_norm(v, v.grid().t0()); }

// ---------------------------------------------------------------------------
// Isometry int_{B_R} u^2 dx = int_C e^{-2t} (Tu)^2 dmu

struct IsometryReport {
  double lhs = 0.0;  // ball side
  double rhs = 0.0;  // cylinder side
  double defect = 0.0;
};

namespace detail {

/// int over the ball B_R of g(x) dx by geometric radial panels times the
/// angular quadrature; g is given the radius and node index.
template <class G>
double ball_integral(const HarmonicBasis& basis, double radius, G&& g, int octaves = 60, int per_octave = 8, int points = 16) {
  const GaussRule gl = gauss_legendre(points);
  const int n = basis.dimension();
  const double ratio = std::exp2(-1.0 / per_octave);
  double total = 0.0;
  double hi = radius;
  for (int p = 0; p < octaves * per_octave; ++p) {
    const double lo = ratio * hi;
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (int q = 0; q < points; ++q) {
      const double r = mid + half * gl.nodes[q];
      double ang = 0.0;
      for (std::size_t j = 0; j < basis.num_nodes(); ++j) ang += basis.weights()[j] * g(r, j);
      total += half * gl.weights[q] * std::pow(r, n - 1) * ang;
    }
    hi = lo;
  }
  return total;
}

}  // namespace detail

inline IsometryReport isometry_check(const BallFunction& u, const GridPtr& grid) {
  const auto& basis = grid->basis();
  const int n = grid->dimension();
  std::vector<std::vector<double>> dirs;
  for (const auto& node : basis.nodes()) dirs.push_back(node.cartesian(n));
  std::vector<double> x(n);
  IsometryReport rep;
  rep.lhs = detail::ball_integral(basis, grid->domain().radius, [&](double r, std::size_t j) {
    for (int c = 0; c < n; ++c) x[c] = r * dirs[j][c];
    const double val = u.value(x);
    return val * val;
  });
  const CylinderField v = emden_fowler_forward(u, grid);
  const RowMatrix g = map_samples(v, [](double t, std::size_t, double val) { return std::exp(-2.0 * t) * val * val; });
  rep.rhs = integrate_tail(*grid, g, grid->t0()).value;
  rep.defect = std::abs(rep.lhs - rep.rhs) / (1.0 + std::abs(rep.rhs));
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization: CSV of phi_k(t_i) plus JSON metadata

inline std::string mode_label(const ModeIndex& m) { return fmt::format("l{}m{}", m.l, m.m); }

inline nlohmann::json field_metadata(const CylinderField& v) {
  const auto& g = v.grid();
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& m : g.basis().modes()) modes.push_back({m.l, m.m});
  const auto& nodes = g.basis().nodes();
  int polar = 0;
  for (const auto& node : nodes)
    if (node.phi == 0.0) ++polar;
  return {{"n", g.dimension()},
          {"radius", g.domain().radius},
          {"t0", g.t0()},
          {"t_max", g.t_max()},
          {"dt", g.dt()},
          {"num_t", g.num_t()},
          {"l_max", g.basis().l_max()},
          {"basis_mode", to_string(g.basis().mode())},
          {"angular_resolution", polar},
          {"angular_nodes", nodes.size()},
          {"num_modes", g.basis().num_modes()},
          {"modes", modes}};
}

inline void write_field_csv(const CylinderField& v, std::ostream& os) {
  os << "t";
  for (const auto& m : v.basis().modes()) os << ',' << mode_label(m);
  os << '\n';
  for (std::size_t i = 0; i < v.grid().num_t(); ++i) {
    os << fmt::format("{:.17g}", v.grid().t(i));
    for (std::size_t k = 0; k < v.num_modes(); ++k)
      os << fmt::format(",{:.17g}", v.modes()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
    os << '\n';
  }
}

/// Rebuilds a field from its metadata and CSV.
inline CylinderField read_field(const nlohmann::json& meta, std::istream& csv) {
  const int n = meta.at("n").get<int>();
  const auto mode = meta.at("basis_mode").get<std::string>() == "full" ? BasisMode::full : BasisMode::zonal;
  auto basis = build_basis(n, meta.at("l_max").get<int>(), meta.at("angular_resolution").get<int>(), mode);
  const DomainSpec dom{n, meta.at("radius").get<double>()};
  auto grid = make_grid(dom, meta.at("t_max").get<double>(), meta.at("dt").get<double>(), basis);
  ColMatrix modes(static_cast<Eigen::Index>(grid->num_t()), static_cast<Eigen::Index>(basis->num_modes()));
  std::string line;
  if (!std::getline(csv, line)) throw ShapeError("empty field CSV");
  Eigen::Index row = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    if (row >= modes.rows()) throw ShapeError("field CSV has too many rows");
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    for (Eigen::Index k = 0; k < modes.cols(); ++k) {
      if (!std::getline(ss, cell, ',')) throw ShapeError("field CSV row too short");
      modes(row, k) = std::stod(cell);
    }
    ++row;
  }
  if (row != modes.rows()) throw ShapeError("field CSV has too few rows");
  return CylinderField::from_modes(grid, std::move(modes));
}

}  // namespace hardy
