#pragma once

// Least-squares fit of y(t) = a + b exp(-rate (t - t_ref)) by variable
// projection: a 1-D search over the rate, linear least squares for (a, b).

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "hardy/error.hpp"

namespace hardy {

struct ExpFit {
  double a = 0.0;      // limit value
  double b = 0.0;      // amplitude at t_ref
  double rate = 0.0;   // decay rate (> 0 for a proper fit)
  double t_ref = 0.0;
  double rms = 0.0;
  bool constant = false;  // data flat to roundoff; a = mean, rate undefined
  bool at_lower_bound = false;
};

namespace detail {

struct LinearFit {
  double a = 0.0, b = 0.0, sse = 0.0;
};

inline LinearFit fit_linear(std::span<const double> t, std::span<const double> y, double rate, double t_ref) {
  // basis {1, e}; normal equations on centred data
  const std::size_t n = t.size();
  std::vector<double> e(n);
  double me = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = std::exp(-rate * (t[i] - t_ref));
    me += e[i];
    my += y[i];
  }
  me /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double see = 0.0, sey = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    see += (e[i] - me) * (e[i] - me);
    sey += (e[i] - me) * (y[i] - my);
  }
  LinearFit f;
  f.b = see > 0.0 ? sey / see : 0.0;
  f.a = my - f.b * me;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.a - f.b * e[i];
    f.sse += r * r;
  }
  return f;
}

}  // namespace detail

inline ExpFit fit_exponential(std::span<const double> t, std::span<const double> y, double rate_min = 1e-3,
                              double rate_max = 40.0) {
  if (t.size() != y.size() || t.size() < 4) throw FitError("exponential fit needs at least 4 samples");
  ExpFit out;
  out.t_ref = t.front();
  double lo = y[0], hi = y[0], scale = 0.0, mean = 0.0;
  for (double v : y) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    scale = std::max(scale, std::abs(v));
    mean += v;
  }
  mean /= static_cast<double>(y.size());
  if (hi - lo <= 1e-10 * (1.0 + scale)) {
    out.constant = true;
    out.a = mean;
    return out;
  }
  // coarse log scan, then golden section around the best bracket
  const int scan = 240;
  const double l0 = std::log(rate_min), l1 = std::log(rate_max);
  int best = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  std::vector<double> sse(scan + 1);
  for (int i = 0; i <= scan; ++i) {
    sse[i] = detail::fit_linear(t, y, std::exp(l0 + (l1 - l0) * i / scan), out.t_ref).sse;
    if (sse[i] < best_sse) {
      best_sse = sse[i];
      best = i;
    }
  }
  double a = l0 + (l1 - l0) * std::max(best - 1, 0) / scan;
  double b = l0 + (l1 - l0) * std::min(best + 1, scan) / scan;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = detail::fit_linear(t, y, std::exp(x1), out.t_ref).sse;
  double f2 = detail::fit_linear(t, y, std::exp(x2), out.t_ref).sse;
  for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = detail::fit_linear(t, y, std::exp(x1), out.t_ref).sse;
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = detail::fit_linear(t, y, std::exp(x2), out.t_ref).sse;
    }
  }
  out.rate = std::exp(0.5 * (a + b));
  const auto lf = detail::fit_linear(t, y, out.rate, out.t_ref);
  out.a = lf.a;
  out.b = lf.b;
  out.rms = std::sqrt(lf.sse / static_cast<double>(t.size()));
  out.at_lower_bound = best == 0 && out.rate < rate_min * 1.01;
  return out;
}

}  // namespace hardy
