#pragma once

// Calculus on a uniform 1-D grid t_i = t0 + i*h, i = 0..n-1.
//
// Every grid function is read as its local degree-5 Lagrange interpolant
// (6-point stencil containing the cell, centred where possible), so
// interpolation, cell integrals and weighted integrals all come from the same
// piecewise polynomial.  Derivatives use 7-point (6th order) stencils.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "hardy/error.hpp"
#include "hardy/quadrature.hpp"

namespace hardy {

/// Finite-difference weights (Fornberg) at `x0` for nodes `x`, derivatives
/// 0..max_order.  Result is indexed [order][node].
inline std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> x,
                                                         int max_order) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(max_order + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0, c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

/// Exponential tail fitted to the last samples of a grid function.
struct TailEstimate {
  double correction = 0.0;  // estimate of the integral over [t_max, inf)
  double rate = 0.0;        // fitted decay rate rho in g ~ exp(-rho t)
  bool fitted = false;      // a single-signed exponential was fitted
  bool divergent = false;   // fitted rate <= 0: the integral does not converge
};

class UniformLine {
 public:
  static constexpr int kInterpPoints = 6;
  static constexpr int kDerivPoints = 7;

  UniformLine() = default;
  UniformLine(double t0, double h, std::size_t n) : t0_(t0), h_(h), n_(n) {
    if (!(h > 0.0)) throw DomainError("uniform grid: spacing must be positive");
    if (n < static_cast<std::size_t>(kDerivPoints))
      throw DomainError("uniform grid: at least 7 nodes required");
    build_tables();
  }

  double t0() const { return t0_; }
  double h() const { return h_; }
  std::size_t size() const { return n_; }
  double t(std::size_t i) const { return t0_ + static_cast<double>(i) * h_; }
  double t_end() const { return t(n_ - 1); }

  /// Index of the cell [t_i, t_{i+1}] containing `tau` (clamped to the grid).
  std::size_t cell_of(double tau) const {
    const double s = std::floor((tau - t0_) / h_);
    if (s <= 0.0) return 0;
    const auto i = static_cast<std::size_t>(s);
    return std::min(i, n_ - 2);
  }

  /// First node of the interpolation stencil for cell i.
  std::size_t interp_start(std::size_t cell) const {
    const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(cell) - 2;
    const std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(n_) - kInterpPoints;
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(s, 0, hi));
  }

  /// Lagrange weights of the local interpolant at tau; `start` receives the
  /// first stencil node.
  std::array<double, kInterpPoints> interp_weights(double tau, std::size_t& start) const {
    const std::size_t cell = cell_of(tau);
    start = interp_start(cell);
    std::array<double, kInterpPoints> xs{};
    for (int j = 0; j < kInterpPoints; ++j) xs[j] = static_cast<double>(start + j);
    const double x0 = (tau - t0_) / h_;
    const auto w = fornberg_weights(x0, xs, 0);
    std::array<double, kInterpPoints> out{};
    std::copy(w[0].begin(), w[0].end(), out.begin());
    return out;
  }

  double interpolate(std::span<const double> g, double tau) const {
    check(g);
    std::size_t s = 0;
    const auto w = interp_weights(tau, s);
    double acc = 0.0;
    for (int j = 0; j < kInterpPoints; ++j) acc += w[j] * g[s + j];
    return acc;
  }

  /// 6th-order derivative at every node.
  std::vector<double> derivative(std::span<const double> g) const {
    check(g);
    std::vector<double> d(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t s = deriv_start(i);
      const auto& w = deriv_w_[i - s];
      double acc = 0.0;
      for (int j = 0; j < kDerivPoints; ++j) acc += w[j] * g[s + j];
      d[i] = acc / h_;
    }
    return d;
  }

  /// Derivative of the local interpolant at an arbitrary point.
  double derivative_at(std::span<const double> g, double tau) const {
    check(g);
    const std::size_t cell = cell_of(tau);
    const std::size_t s = interp_start(cell);
    std::array<double, kInterpPoints> xs{};
    for (int j = 0; j < kInterpPoints; ++j) xs[j] = static_cast<double>(s + j);
    const auto w = fornberg_weights((tau - t0_) / h_, xs, 1);
    double acc = 0.0;
    for (int j = 0; j < kInterpPoints; ++j) acc += w[1][j] * g[s + j];
    return acc / h_;
  }

  /// Integral over cell [t_i, t_{i+1}].
  double cell_integral(std::span<const double> g, std::size_t cell) const {
    const std::size_t s = interp_start(cell);
    const auto& w = cell_w_[cell - s];
    double acc = 0.0;
    for (int j = 0; j < kInterpPoints; ++j) acc += w[j] * g[s + j];
    return acc * h_;
  }

  /// Integral of the interpolant over [a, b] inside [t0, t_end].
  double integrate(std::span<const double> g, double a, double b) const {
    check(g);
    if (b < a) return -integrate(g, b, a);
    const std::size_t ca = cell_of(a), cb = cell_of(b);
    if (ca == cb) return partial_cell(g, ca, a, b);
    double acc = partial_cell(g, ca, a, t(ca + 1));
    for (std::size_t c = ca + 1; c < cb; ++c) acc += cell_integral(g, c);
    acc += partial_cell(g, cb, t(cb), b);
    return acc;
  }

  /// tail[i] = integral over [t_i, t_end], accumulated backwards from the end.
  std::vector<double> cumulative_tail(std::span<const double> g) const {
    check(g);
    std::vector<double> tail(n_, 0.0);
    for (std::size_t c = n_ - 1; c-- > 0;) tail[c] = tail[c + 1] + cell_integral(g, c);
    return tail;
  }

  /// head[i] = integral over [t0, t_i].
  std::vector<double> cumulative_head(std::span<const double> g) const {
    check(g);
    std::vector<double> head(n_, 0.0);
    for (std::size_t c = 0; c + 1 < n_; ++c) head[c + 1] = head[c] + cell_integral(g, c);
    return head;
  }

  /// Length of the window used for tail fitting: one decade in r = exp(-t),
  /// capped at a quarter of the grid.
  double tail_window() const {
    return std::min(std::log(10.0), 0.25 * (t_end() - t0_));
  }

  /// Fit g ~ A exp(-rho t) on the last decade and integrate it to infinity.
  TailEstimate fit_tail(std::span<const double> g) const {
    check(g);
    TailEstimate est;
    const auto span = std::max<std::size_t>(
        8, static_cast<std::size_t>(std::llround(tail_window() / h_)) + 1);
    const std::size_t first = n_ - std::min(span, n_);
    bool all_zero = true, pos = true, neg = true;
    for (std::size_t i = first; i < n_; ++i) {
      if (!std::isfinite(g[i])) throw NumericError("non-finite sample in tail fit");
      if (g[i] != 0.0) all_zero = false;
      pos = pos && g[i] > 0.0;
      neg = neg && g[i] < 0.0;
    }
    if (all_zero) {
      est.fitted = true;
      return est;
    }
    if (!pos && !neg) return est;
    // least squares for log|g| = a - rho (t - t_end)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double cnt = static_cast<double>(n_ - first);
    for (std::size_t i = first; i < n_; ++i) {
      const double x = t(i) - t_end();
      const double y = std::log(std::abs(g[i]));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    est.rate = -slope;
    est.fitted = true;
    if (!(est.rate > 1e-12)) {
      est.divergent = true;
      return est;
    }
    // The decade average misses slow drift of the rate (sums of exponentials).
    // Use the local rate rho = -d log|g|/dt and its drift at the node m three
    // cells before T_max (centred stencils there), expand
    //   int_{t_m}^inf g = g / rho - g rho' / rho^3 + ...,
    // and subtract the resolved part over [t_m, T_max].
    constexpr int half = kDerivPoints / 2;
    const std::size_t m = n_ - 1 - half;
    std::array<double, kDerivPoints> xs{}, lg{};
    for (int j = 0; j < kDerivPoints; ++j) {
      xs[j] = j;
      lg[j] = std::log(std::abs(g[m - half + j]));
    }
    const auto w = fornberg_weights(half, xs, 2);
    double local = 0.0, drift = 0.0;
    for (int j = 0; j < kDerivPoints; ++j) {
      local -= w[1][j] * lg[j];
      drift -= w[2][j] * lg[j];
    }
    local /= h_;
    drift /= h_ * h_;
    if (local > 0.5 * est.rate && local < 2.0 * est.rate) {
      est.rate = local;
      const double second = std::abs(drift) < 0.1 * local * local ? drift / (local * local) : 0.0;
      const double from_m = g[m] / local * (1.0 - second);
      double resolved = 0.0;
      for (std::size_t c = m; c + 1 < n_; ++c) resolved += cell_integral(g, c);
      est.correction = from_m - resolved;
      return est;
    }
    est.correction = g[n_ - 1] / est.rate;
    return est;
  }

  /// Weights for the exponentially weighted cell integrals
  ///   fwd: int_{t_i}^{t_{i+1}} exp(-gamma (t_{i+1} - s)) g(s) ds
  ///   bwd: int_{t_i}^{t_{i+1}} exp(-gamma (s - t_i)) g(s) ds
  /// tabulated per cell offset in the stencil.
  struct ExpWeights {
    std::array<std::array<double, kInterpPoints>, kInterpPoints - 1> fwd{};
    std::array<std::array<double, kInterpPoints>, kInterpPoints - 1> bwd{};
  };

  ExpWeights exp_weights(double gamma) const {
    ExpWeights out;
    const GaussRule gl = gauss_legendre(12, 0.0, 1.0);
    std::array<double, kInterpPoints> xs{};
    for (int j = 0; j < kInterpPoints; ++j) xs[j] = j;
    for (int o = 0; o < kInterpPoints - 1; ++o) {
      out.fwd[o].fill(0.0);
      out.bwd[o].fill(0.0);
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double u = gl.nodes[q];
        const auto l = fornberg_weights(o + u, xs, 0);
        const double ef = std::exp(-gamma * h_ * (1.0 - u));
        const double eb = std::exp(-gamma * h_ * u);
        for (int j = 0; j < kInterpPoints; ++j) {
          out.fwd[o][j] += gl.weights[q] * ef * l[0][j] * h_;
          out.bwd[o][j] += gl.weights[q] * eb * l[0][j] * h_;
        }
      }
    }
    return out;
  }

  /// Integral of g against the hat function centred at interior node i.
  double hat_integral(std::span<const double> g, std::size_t i) const {
    double acc = 0.0;
    for (int side = 0; side < 2; ++side) {
      const std::size_t cell = side == 0 ? i - 1 : i;
      const std::size_t s = interp_start(cell);
      const auto& w = side == 0 ? hat_up_w_[cell - s] : hat_down_w_[cell - s];
      for (int j = 0; j < kInterpPoints; ++j) acc += w[j] * g[s + j];
    }
    return acc * h_;
  }

 private:
  void check(std::span<const double> g) const {
    if (g.size() != n_) throw ShapeError("grid function length does not match the grid");
  }

  std::size_t deriv_start(std::size_t i) const {
    const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(i) - kDerivPoints / 2;
    const std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(n_) - kDerivPoints;
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(s, 0, hi));
  }

  double partial_cell(std::span<const double> g, std::size_t cell, double a, double b) const {
    if (b <= a) return 0.0;
    const std::size_t s = interp_start(cell);
    std::array<double, kInterpPoints> xs{};
    for (int j = 0; j < kInterpPoints; ++j) xs[j] = static_cast<double>(s + j);
    const GaussRule gl = gauss_legendre(4, (a - t0_) / h_, (b - t0_) / h_);
    double acc = 0.0;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const auto l = fornberg_weights(gl.nodes[q], xs, 0);
      double v = 0.0;
      for (int j = 0; j < kInterpPoints; ++j) v += l[0][j] * g[s + j];
      acc += gl.weights[q] * v;
    }
    return acc * h_;
  }

  void build_tables() {
    std::array<double, kDerivPoints> xd{};
    for (int j = 0; j < kDerivPoints; ++j) xd[j] = j;
    for (int o = 0; o < kDerivPoints; ++o) {
      const auto w = fornberg_weights(o, xd, 1);
      std::copy(w[1].begin(), w[1].end(), deriv_w_[o].begin());
    }
    const GaussRule gl = gauss_legendre(6, 0.0, 1.0);
    std::array<double, kInterpPoints> xs{};
    for (int j = 0; j < kInterpPoints; ++j) xs[j] = j;
    for (int o = 0; o < kInterpPoints - 1; ++o) {
      cell_w_[o].fill(0.0);
      hat_up_w_[o].fill(0.0);
      hat_down_w_[o].fill(0.0);
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double u = gl.nodes[q];
        const auto l = fornberg_weights(o + u, xs, 0);
        for (int j = 0; j < kInterpPoints; ++j) {
          cell_w_[o][j] += gl.weights[q] * l[0][j];
          hat_up_w_[o][j] += gl.weights[q] * u * l[0][j];
          hat_down_w_[o][j] += gl.weights[q] * (1.0 - u) * l[0][j];
        }
      }
    }
  }

  double t0_ = 0.0;
  double h_ = 1.0;
  std::size_t n_ = 0;
  std::array<std::array<double, kDerivPoints>, kDerivPoints> deriv_w_{};
  std::array<std::array<double, kInterpPoints>, kInterpPoints - 1> cell_w_{};
  std::array<std::array<double, kInterpPoints>, kInterpPoints - 1> hat_up_w_{};
  std::array<std::array<double, kInterpPoints>, kInterpPoints - 1> hat_down_w_{};
};

}  // namespace hardy
