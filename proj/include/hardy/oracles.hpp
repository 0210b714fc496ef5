#pragma once

// Brute-force references for the spherical spectrum: homogeneous harmonic
// polynomials found by enumerating monomials and taking the kernel of the
// Laplacian.  Independent of the closed formulas in harmonics.hpp.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "hardy/error.hpp"

namespace hardy::oracle {

using Monomial = std::vector<int>;  // exponents, one per variable

inline void enumerate(int n, int degree, Monomial& cur, std::size_t var, std::vector<Monomial>& out) {
  if (var + 1 == static_cast<std::size_t>(n)) {
    cur[var] = degree;
    out.push_back(cur);
    return;
  }
  for (int e = degree; e >= 0; --e) {
    cur[var] = e;
    enumerate(n, degree - e, cur, var + 1, out);
  }
}

inline std::vector<Monomial> monomials(int n, int degree) {
  std::vector<Monomial> out;
  if (degree < 0) return out;
  Monomial cur(static_cast<std::size_t>(n), 0);
  enumerate(n, degree, cur, 0, out);
  return out;
}

/// Matrix of the Laplacian from degree-l to degree-(l-2) monomials.
inline Eigen::MatrixXd laplacian_matrix(int n, int l) {
  const auto src = monomials(n, l);
  const auto dst = monomials(n, l - 2);
  std::map<Monomial, Eigen::Index> row;
  for (std::size_t i = 0; i < dst.size(); ++i) row[dst[i]] = static_cast<Eigen::Index>(i);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dst.size()), static_cast<Eigen::Index>(src.size()));
  for (std::size_t c = 0; c < src.size(); ++c)
    for (std::size_t v = 0; v < src[c].size(); ++v) {
      const int e = src[c][v];
      if (e < 2) continue;
      Monomial m = src[c];
      m[v] -= 2;
      L(row.at(m), static_cast<Eigen::Index>(c)) += e * (e - 1);
    }
  return L;
}

/// Dimension of homogeneous harmonic polynomials of degree l in n variables.
inline std::int64_t harmonic_dimension(int n, int l) {
  if (n < 2 || l < 0) throw DomainError("harmonic_dimension needs n >= 2, l >= 0");
  const auto count = static_cast<std::int64_t>(monomials(n, l).size());
  if (l < 2) return count;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(laplacian_matrix(n, l));
  lu.setThreshold(1e-9);
  return count - lu.rank();
}

/// Spherical-Laplacian eigenvalue of a harmonic polynomial of degree l,
/// measured by a 4th-order finite-difference Laplacian of P(x/|x|) on the
/// unit sphere and rounded to the nearest integer.
inline std::int64_t harmonic_eigenvalue(int n, int l) {
  if (l == 0) return 0;
  const auto mons = monomials(n, l);
  Eigen::VectorXd coef;
  if (l < 2) {
    coef = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mons.size()));
    coef(0) = 1.0;
  } else {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(laplacian_matrix(n, l));
    lu.setThreshold(1e-9);
    coef = lu.kernel().col(0);
  }
  auto poly = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < mons.size(); ++i) {
      double term = coef(static_cast<Eigen::Index>(i));
      for (std::size_t v = 0; v < x.size(); ++v) term *= std::pow(x[v], mons[i][v]);
      s += term;
    }
    return s;
  };
  auto f = [&](std::vector<double> x) {
    double r = 0.0;
    for (double c : x) r += c * c;
    r = std::sqrt(r);
    for (double& c : x) c /= r;
    return poly(x);
  };
  // a generic point on the sphere where P is not small
  std::vector<double> best;
  double best_val = 0.0;
  for (int trial = 0; trial < 16; ++trial) {
    std::vector<double> x(static_cast<std::size_t>(n));
    double r = 0.0;
    for (int v = 0; v < n; ++v) {
      x[static_cast<std::size_t>(v)] = std::sin(1.3 * (trial + 1) + 0.7 * v * v + 0.4 * v);
      r += x[static_cast<std::size_t>(v)] * x[static_cast<std::size_t>(v)];
    }
    for (double& c : x) c /= std::sqrt(r);
    const double val = std::abs(f(x));
    if (val > best_val) {
      best_val = val;
      best = x;
    }
  }
  const double h = 1e-3;
  double lap = 0.0;
  for (int v = 0; v < n; ++v) {
    auto at = [&](double d) {
      auto y = best;
      y[static_cast<std::size_t>(v)] += d;
      return f(y);
    };
    lap += (-at(2 * h) + 16 * at(h) - 30 * at(0) + 16 * at(-h) - at(-2 * h)) / (12 * h * h);
  }
  return std::llround(-lap / f(best));
}

}  // namespace hardy::oracle
