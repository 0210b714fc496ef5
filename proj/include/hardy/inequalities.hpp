#pragma once

// Numerical stress tests of the functional inequalities on the cylinder:
// boundary Hardy, Hardy-Sobolev trace scaling, norm equivalence, and the
// Poincare-Sobolev inequality with the borderline Hardy form, plus the
// ball/cylinder cross-check of that form.

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hardy/cylinder.hpp"
#include "hardy/error.hpp"
#include "hardy/problem.hpp"
#include "hardy/quadrature.hpp"

namespace hardy {

struct InequalityReport {
  std::string id;
  std::size_t census = 0;                   // number of fields tested
  double worst_ratio = 0.0;                 // max LHS / RHS
  double min_ratio = 0.0;                   // min LHS / RHS (two-sided checks)
  std::optional<double> asserted_constant;  // set when the constant is explicit
  bool passed = true;
  double empirical_constant = 0.0;
  std::optional<std::size_t> witness;       // index of the worst field
  std::string note;
};

namespace detail {

/// int_{C_t} g over t-series (already integrated over the sphere).
inline double tail_from(const CylinderGrid& grid, const std::vector<double>& a, double t) {
  return integrate_tail_series(grid.line(), a, t).value;
}

inline std::vector<double> energy_series(const CylinderField& v) { return gradient_energy_density(v); }

inline std::vector<double> mass_series(const CylinderField& v) {
  std::vector<double> h(v.grid().num_t());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = v.modes().row(static_cast<Eigen::Index>(i)).squaredNorm();
  return h;
}

/// int_{C_t} |grad v|^2 + int_{Gamma_t} v^2.
inline double boundary_energy(const CylinderField& v, double t) {
  const auto& g = v.grid();
  return tail_from(g, energy_series(v), t) + g.line().interpolate(mass_series(v), t);
}

inline void check_t(const CylinderGrid& g, double t) {
  if (t < g.t0() - 1e-12 || t > g.t_max() + 1e-12)
    throw RangeError(fmt::format("t = {} outside [{}, {}]", t, g.t0(), g.t_max()));
}

}  // namespace detail

/// max{2/sigma, 4/sigma^2}.
inline double hardy_boundary_constant(double sigma) { return std::max(2.0 / sigma, 4.0 / (sigma * sigma)); }

/// int_{C_t} e^{-sigma s} v^2 <= C e^{-sigma t} (int_{C_t} |grad v|^2 + int_{Gamma_t} v^2).
inline InequalityReport hardy_boundary_check(const CylinderField& v, double sigma, double t) {
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  const auto& g = v.grid();
  detail::check_t(g, t);
  auto mass = detail::mass_series(v);
  for (std::size_t i = 0; i < mass.size(); ++i) mass[i] *= std::exp(-sigma * g.t(i));
  const double lhs = detail::tail_from(g, mass, t);
  const double c = hardy_boundary_constant(sigma);
  const double rhs = c * std::exp(-sigma * t) * detail::boundary_energy(v, t);
  InequalityReport r;
  r.id = "hardy_boundary";
  r.census = 1;
  r.asserted_constant = c;
  r.worst_ratio = r.min_ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0);
  r.empirical_constant = r.worst_ratio * c;
  r.passed = r.worst_ratio <= 1.0 + 1e-8;
  if (!r.passed) r.note = fmt::format("violated: LHS {:.6g} > RHS {:.6g}; indicates a quadrature defect", lhs, rhs);
  return r;
}

/// (int_{C_t} e^{(-N+(N-2)q/2)s} |v|^q)^{2/q} / [e^{(-2N/q+N-2)t} (int |grad v|^2 + int_Gamma v^2)].
/// The constant is not explicit; the report carries the ratio.
inline InequalityReport sobolev_trace_ratio(const CylinderField& v, double q, double t) {
  const auto& g = v.grid();
  const int n = g.dimension();
  if (!(q >= 1.0 && q < 2.0 * n / (n - 2.0))) throw DomainError(fmt::format("q must satisfy 1 <= q < {}", 2.0 * n / (n - 2.0)));
  detail::check_t(g, t);
  const double a = -n + 0.5 * (n - 2) * q;
  const RowMatrix w = map_samples(v, [&](double s, std::size_t, double val) { return std::exp(a * s) * std::pow(std::abs(val), q); });
  const double lhs = std::pow(std::max(integrate_tail(g, w, t).value, 0.0), 2.0 / q);
  const double rhs = std::exp((-2.0 * n / q + n - 2) * t) * detail::boundary_energy(v, t);
  InequalityReport r;
  r.id = "sobolev_trace";
  r.census = 1;
  r.worst_ratio = r.min_ratio = rhs > 0.0 ? lhs / rhs : 0.0;
  r.empirical_constant = r.worst_ratio;
  return r;
}

/// Ratio A / B of the two quadratic forms
///   A = int_{C_t} |grad v|^2 + e^{2t} int_{C_t} e^{-2s} v^2,  B = int_{C_t} |grad v|^2 + int_{Gamma_t} v^2.
inline InequalityReport equiv_norm_check(const CylinderField& v, double t) {
  const auto& g = v.grid();
  detail::check_t(g, t);
  auto mass = detail::mass_series(v);
  for (std::size_t i = 0; i < mass.size(); ++i) mass[i] *= std::exp(-2.0 * g.t(i));
  const double grad = detail::tail_from(g, detail::energy_series(v), t);
  const double A = grad + std::exp(2.0 * t) * detail::tail_from(g, mass, t);
  const double B = detail::boundary_energy(v, t);
  InequalityReport r;
  r.id = "equiv_norm";
  r.census = 1;
  r.worst_ratio = r.min_ratio = B > 0.0 ? A / B : 0.0;
  r.empirical_constant = r.worst_ratio;
  r.passed = A >= 0.0 && B >= 0.0 && (A > 0.0) == (B > 0.0);
  return r;
}

/// Poincare-Sobolev: (int_B |u|^q)^{2/q} <= C [int |grad u|^2 - ((N-2)/2)^2 int u^2/|x|^2],
/// the bracket evaluated as int_C |grad_C Tu|^2.  Asserts only bracket >= -1e-9.
inline InequalityReport poincare_check(const CylinderField& v, double q) {
  const auto& g = v.grid();
  const int n = g.dimension();
  if (!(q >= 1.0 && q <= 2.0 * n / (n - 2.0))) throw DomainError("q outside [1, 2N/(N-2)]");
  const double bracket = detail::tail_from(g, detail::energy_series(v), g.t0());
  // int_B |u|^q dx = int_C e^{-Nt} |e^{(N-2)t/2} v|^q dmu
  const RowMatrix w = map_samples(v, [&](double s, std::size_t, double val) {
    return std::exp(-n * s) * std::pow(std::exp(0.5 * (n - 2) * s) * std::abs(val), q);
  });
  const double lhs = std::pow(std::max(integrate_tail(g, w, g.t0()).value, 0.0), 2.0 / q);
  InequalityReport r;
  r.id = "poincare";
  r.census = 1;
  r.worst_ratio = r.min_ratio = bracket > 0.0 ? lhs / bracket : 0.0;
  r.empirical_constant = r.worst_ratio;
  r.passed = bracket >= -1e-9;
  if (!r.passed) r.note = fmt::format("borderline Hardy form negative ({:.3g}): quadrature failure", bracket);
  return r;
}

// ---------------------------------------------------------------------------
// Random band-limited test fields

/// Portable generator: mt19937_64 with explicit uniform and normal draws, so
/// identical seeds give identical fields on every platform.
class SuiteRng {
 public:
  explicit SuiteRng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)) % (hi - lo + 1); }

 private:
  std::mt19937_64 eng_;
};

/// t-profile: smooth bump exp(1 - 1/(1 - x^2)), x = (t - centre)/width, or a
/// decaying exponential (1 + slope (t - T0)) e^{-rate (t - T0)}.
struct Profile {
  bool bump = true;
  double centre = 0.0, width = 1.0;  // bump
  double rate = 1.0, slope = 0.0;    // exponential
  double t0 = 0.0;

  double value(double t) const {
    if (bump) {
      const double x = (t - centre) / width;
      return std::abs(x) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - x * x)) : 0.0;
    }
    const double s = t - t0;
    return (1.0 + slope * s) * std::exp(-rate * s);
  }
  double derivative(double t) const {
    if (bump) {
      const double x = (t - centre) / width;
      if (!(std::abs(x) < 1.0)) return 0.0;
      const double d = 1.0 - x * x;
      return value(t) * (-2.0 * x / (d * d)) / width;
    }
    const double s = t - t0;
    return (slope - rate * (1.0 + slope * s)) * std::exp(-rate * s);
  }
};

struct RandomField {
  std::vector<std::size_t> modes;
  std::vector<double> coefs;
  std::vector<Profile> profiles;

  /// Field on the grid with every profile delayed by `shift`.
  CylinderField instantiate(const GridPtr& grid, double shift = 0.0) const {
    std::vector<std::pair<std::size_t, std::function<double(double)>>> terms;
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const Profile p = profiles[i];
      const double c = coefs[i];
      terms.push_back({modes[i], [p, c, shift](double t) { return c * p.value(t - shift); }});
    }
    return CylinderField::from_mode_functions(grid, terms);
  }
};

/// Band-limited field with 1..4 active modes.  compact: all profiles are
/// bumps inside [T0 + margin, T0 + margin + span]; otherwise profiles mix
/// bumps and exponentials starting at T0.
inline RandomField random_field(SuiteRng& rng, const CylinderGrid& grid, bool compact, double span = 5.0) {
  RandomField f;
  const auto& basis = grid.basis();
  const int count = rng.integer(1, 4);
  const double t0 = grid.t0();
  for (int c = 0; c < count; ++c) {
    const auto k = static_cast<std::size_t>(rng.integer(0, static_cast<int>(basis.num_modes()) - 1));
    Profile p;
    p.t0 = t0;
    p.bump = compact || rng.uniform() < 0.5;
    if (p.bump) {
      p.width = rng.uniform(1.5, 0.5 * span);
      const double lo = compact ? t0 + 0.5 + p.width : t0 + 0.2;
      const double hi = t0 + 0.5 + span - p.width;
      p.centre = rng.uniform(lo, std::max(lo, hi));
    } else {
      p.rate = rng.uniform(0.5, 3.0);
      p.slope = rng.uniform(-0.5, 1.0);
    }
    f.modes.push_back(k);
    f.coefs.push_back(rng.normal() / (1.0 + basis.modes()[k].l));
    f.profiles.push_back(p);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Borderline Hardy form on the ball side versus int_C |grad_C Tu|^2

struct HardyFormCheck {
  double ball = 0.0;      // int |grad u|^2 - ((N-2)/2)^2 int u^2/|x|^2, direct quadrature
  double cylinder = 0.0;  // int_C |grad_C Tu|^2
  double relative = 0.0;
};

/// u = T^{-1} v for a random field, with gradient from the analytic profiles.
/// The ball side integrates in x with Gauss-Legendre panels in r (not in t).
inline HardyFormCheck hardy_form_cross_check(const RandomField& f, const GridPtr& grid, int panels_per_unit = 24,
                                             int points = 12) {
  const auto& basis = grid->basis();
  const int n = grid->dimension();
  const double a = 0.5 * (n - 2);
  // support in t: union of profile supports, truncated to the grid
  double tlo = grid->t_max(), thi = grid->t0();
  for (const auto& p : f.profiles) {
    if (!p.bump) throw DomainError("hardy_form_cross_check needs compactly supported profiles");
    tlo = std::min(tlo, p.centre - p.width);
    thi = std::max(thi, p.centre + p.width);
  }
  tlo = std::max(tlo, grid->t0());
  thi = std::min(thi, grid->t_max());
  const double rlo = std::exp(-thi), rhi = std::exp(-tlo);
  const GaussRule gl = gauss_legendre(points);
  // geometric panels in r
  const int panels = std::max(8, static_cast<int>(std::ceil((thi - tlo) * panels_per_unit)));
  const double ratio = std::pow(rlo / rhi, 1.0 / panels);
  HardyFormCheck out;
  double total = 0.0;
  double hi = rhi;
  const auto& Y = basis.values();
  for (int pnl = 0; pnl < panels; ++pnl) {
    const double lo = hi * ratio;
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (int q = 0; q < points; ++q) {
      const double r = mid + half * gl.nodes[q];
      const double t = -std::log(r);
      double ang = 0.0;
      for (std::size_t j = 0; j < basis.num_nodes(); ++j) {
        // u = r^{-a} sum c b(t) Y,  d_r u = r^{-a-1} sum c (-a b - b') Y,  |x|^{-1} grad_S u
        double u = 0.0, ur = 0.0;
        std::vector<double> tang(static_cast<std::size_t>(basis.gradient_components()), 0.0);
        for (std::size_t m = 0; m < f.modes.size(); ++m) {
          const auto k = static_cast<Eigen::Index>(f.modes[m]);
          const auto jj = static_cast<Eigen::Index>(j);
          const double b = f.coefs[m] * f.profiles[m].value(t);
          const double db = f.coefs[m] * f.profiles[m].derivative(t);
          u += b * Y(k, jj);
          ur += (-a * b - db) * Y(k, jj);
          for (int c = 0; c < basis.gradient_components(); ++c) tang[static_cast<std::size_t>(c)] += b * basis.gradient(c)(k, jj);
        }
        const double scale = std::pow(r, -a - 1.0);
        double grad2 = ur * ur;
        for (double x : tang) grad2 += x * x;
        grad2 *= scale * scale;
        const double uu = std::pow(r, -a) * u;
        ang += basis.weights()[j] * (grad2 - a * a * uu * uu / (r * r));
      }
      total += half * gl.weights[q] * std::pow(r, n - 1) * ang;
    }
    hi = lo;
  }
  out.ball = total;
  const auto v = f.instantiate(grid);
  out.cylinder = detail::tail_from(*grid, gradient_energy_density(v), grid->t0());
  out.relative = std::abs(out.ball - out.cylinder) / std::max(std::abs(out.cylinder), 1e-300);
  return out;
}

// ---------------------------------------------------------------------------
// Randomized suites

struct SuiteResult {
  std::vector<InequalityReport> reports;
  bool passed = true;
};

inline void absorb(InequalityReport& agg, const InequalityReport& r, std::size_t index) {
  if (agg.census == 0 || r.worst_ratio > agg.worst_ratio) {
    agg.worst_ratio = r.worst_ratio;
    agg.witness = index;
  }
  agg.min_ratio = agg.census == 0 ? r.min_ratio : std::min(agg.min_ratio, r.min_ratio);
  agg.census += 1;
  agg.passed = agg.passed && r.passed;
  if (!r.passed && agg.note.empty()) agg.note = r.note;
}

/// Boundary Hardy inequality on `count` random fields for each sigma.
inline std::vector<InequalityReport> hardy_boundary_suite(const GridPtr& grid, std::uint64_t seed, int count,
                                                          const std::vector<double>& sigmas) {
  std::vector<InequalityReport> out;
  for (double sigma : sigmas) {
    SuiteRng rng(seed);
    InequalityReport agg;
    agg.id = fmt::format("hardy_boundary(sigma={:g})", sigma);
    agg.asserted_constant = hardy_boundary_constant(sigma);
    for (int i = 0; i < count; ++i) {
      const auto f = random_field(rng, *grid, false);
      const double t = grid->t0() + rng.uniform(0.0, 2.0);
      absorb(agg, hardy_boundary_check(f.instantiate(grid), sigma, t), static_cast<std::size_t>(i));
    }
    agg.empirical_constant = agg.worst_ratio * *agg.asserted_constant;
    out.push_back(agg);
  }
  return out;
}

/// Hardy-Sobolev ratios; also checks that delaying a compact field by `shift`
/// and moving t by the same amount leaves the ratio unchanged within 5%.
inline std::vector<InequalityReport> sobolev_suite(const GridPtr& grid, std::uint64_t seed, int count,
                                                   const std::vector<double>& qs, double shift = 1.0) {
  std::vector<InequalityReport> out;
  const double sh = std::round(shift / grid->dt()) * grid->dt();
  for (double q : qs) {
    SuiteRng rng(seed);
    InequalityReport agg;
    agg.id = fmt::format("sobolev_trace(q={:g})", q);
    double worst_shift = 0.0;
    for (int i = 0; i < count; ++i) {
      const auto f = random_field(rng, *grid, true);
      const double t = grid->t0() + 0.25;
      auto r = sobolev_trace_ratio(f.instantiate(grid), q, t);
      const auto r2 = sobolev_trace_ratio(f.instantiate(grid, sh), q, t + sh);
      const double drift = r.worst_ratio > 0.0 ? std::abs(r2.worst_ratio / r.worst_ratio - 1.0) : 0.0;
      worst_shift = std::max(worst_shift, drift);
      r.passed = drift <= 0.05;
      absorb(agg, r, static_cast<std::size_t>(i));
    }
    agg.empirical_constant = agg.worst_ratio;
    agg.note = fmt::format("max translation drift {:.3g}", worst_shift);
    out.push_back(agg);
  }
  return out;
}

inline InequalityReport equiv_norm_suite(const GridPtr& grid, std::uint64_t seed, int count) {
  SuiteRng rng(seed);
  InequalityReport agg;
  agg.id = "equiv_norm";
  for (int i = 0; i < count; ++i) {
    const auto f = random_field(rng, *grid, false);
    const double t = grid->t0() + rng.uniform(0.0, 2.0);
    absorb(agg, equiv_norm_check(f.instantiate(grid), t), static_cast<std::size_t>(i));
  }
  agg.passed = agg.passed && agg.min_ratio > 0.0 && std::isfinite(agg.worst_ratio);
  agg.empirical_constant = std::max(agg.worst_ratio, agg.min_ratio > 0.0 ? 1.0 / agg.min_ratio : INFINITY);
  agg.note = fmt::format("A/B in [{:.6g}, {:.6g}]", agg.min_ratio, agg.worst_ratio);
  return agg;
}

inline InequalityReport poincare_suite(const GridPtr& grid, std::uint64_t seed, int count, double q) {
  SuiteRng rng(seed);
  InequalityReport agg;
  agg.id = fmt::format("poincare(q={:g})", q);
  for (int i = 0; i < count; ++i) {
    const auto f = random_field(rng, *grid, true);
    absorb(agg, poincare_check(f.instantiate(grid), q), static_cast<std::size_t>(i));
  }
  agg.empirical_constant = agg.worst_ratio;
  return agg;
}

/// Ball/cylinder cross-check of the borderline Hardy form on compact fields.
inline InequalityReport hardy_form_suite(const GridPtr& grid, std::uint64_t seed, int count, double tolerance = 1e-7) {
  SuiteRng rng(seed);
  InequalityReport agg;
  agg.id = "hardy_form_ball_vs_cylinder";
  agg.asserted_constant = tolerance;
  for (int i = 0; i < count; ++i) {
    const auto f = random_field(rng, *grid, true);
    const auto c = hardy_form_cross_check(f, grid);
    InequalityReport r;
    r.worst_ratio = r.min_ratio = c.relative;
    r.passed = c.relative <= tolerance;
    if (!r.passed) r.note = fmt::format("field {}: ball {:.12g} vs cylinder {:.12g}", i, c.ball, c.cylinder);
    absorb(agg, r, static_cast<std::size_t>(i));
  }
  agg.empirical_constant = agg.worst_ratio;
  return agg;
}

}  // namespace hardy
