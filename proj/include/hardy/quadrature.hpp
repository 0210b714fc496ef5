#pragma once

// Gauss rules for the Gegenbauer weight (1 - x^2)^(lambda - 1/2) on [-1, 1].
// lambda = 1/2 gives Gauss-Legendre; lambda = (N-2)/2 gives the zonal rule on
// S^{N-1} (Gauss-Jacobi with alpha = beta = (N-3)/2).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hardy/error.hpp"

namespace hardy {

struct GaussRule {
  std::vector<double> nodes;    // ascending
  std::vector<double> weights;  // sum = integral of the weight function
};

namespace detail {

/// Off-diagonal entries of the symmetric Jacobi matrix for the Gegenbauer
/// weight: b_k = sqrt(k (k + 2 lambda - 1) / (4 (k + lambda) (k + lambda - 1))).
inline double gegenbauer_jacobi_offdiag(int k, double lambda) {
  const double kk = k;
  return std::sqrt(kk * (kk + 2.0 * lambda - 1.0) /
                   (4.0 * (kk + lambda) * (kk + lambda - 1.0)));
}

inline double gegenbauer_weight_mass(double lambda) {
  // integral of (1 - x^2)^(lambda - 1/2) over [-1, 1]
  return std::sqrt(std::numbers::pi) * std::tgamma(lambda + 0.5) / std::tgamma(lambda + 1.0);
}

}  // namespace detail

/// n-point Gauss rule, nodes from Golub-Welsch and polished by Newton on the
/// orthonormal recurrence; weights from the Christoffel function.
inline GaussRule gauss_gegenbauer(int n, double lambda) {
  if (n < 1) throw DomainError("gauss_gegenbauer: need at least one node");
  if (!(lambda > 0.0)) throw DomainError("gauss_gegenbauer: lambda must be positive");
  const double mass = detail::gegenbauer_weight_mass(lambda);

  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = mass;
    return rule;
  }

  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = detail::gegenbauer_jacobi_offdiag(k, lambda);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  const Eigen::VectorXd& x0 = eig.eigenvalues();

  // p_k orthonormal w.r.t. weight/mass; returns p_n(x), p_n'(x) and sum p_k^2, k < n.
  auto evaluate = [&](double x, double& pn, double& dpn, double& christoffel) {
    double p_prev = 0.0, p = 1.0, d_prev = 0.0, d = 0.0;
    christoffel = 1.0;
    double b_prev = 0.0;
    for (int k = 0; k < n; ++k) {
      const double b = detail::gegenbauer_jacobi_offdiag(k + 1, lambda);
      const double p_next = (x * p - b_prev * p_prev) / b;
      const double d_next = (p + x * d - b_prev * d_prev) / b;
      p_prev = p;
      p = p_next;
      d_prev = d;
      d = d_next;
      b_prev = b;
      if (k + 1 < n) christoffel += p * p;
    }
    pn = p;
    dpn = d;
  };

  for (int i = 0; i < n; ++i) {
    double x = x0(i);
    double pn = 0, dpn = 0, chr = 0;
    for (int it = 0; it < 3; ++it) {
      evaluate(x, pn, dpn, chr);
      if (dpn == 0.0) break;
      x -= pn / dpn;
    }
    evaluate(x, pn, dpn, chr);
    rule.nodes[i] = x;
    rule.weights[i] = mass / chr;
  }
  // symmetrize: the weight is even
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

inline GaussRule gauss_legendre(int n) { return gauss_gegenbauer(n, 0.5); }

/// Gauss-Legendre mapped to [a, b].
inline GaussRule gauss_legendre(int n, double a, double b) {
  GaussRule rule = gauss_legendre(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

}  // namespace hardy
