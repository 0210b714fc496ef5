#pragma once

// Spectrum of the Laplace-Beltrami operator on S^{N-1}, real spherical
// harmonics and the quadrature used as angular discretization.
//
// Mode numbering.  Degree l, index m = 1..m_l (1-based as in the literature).
// For the full N = 3 family, m = 1 is the zonal harmonic, m = 2j and m = 2j+1
// carry cos(j phi) and sin(j phi).  Zonal bases keep only m = 1 for each l.
// Flat indices k are 0-based and run degree by degree.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "hardy/error.hpp"
#include "hardy/quadrature.hpp"

namespace hardy {

// ---------------------------------------------------------------------------
// Spectrum

inline void check_degree(int l, int n) {
  if (n < 3) throw DomainError("dimension N must be >= 3, got " + std::to_string(n));
  if (l < 0) throw DomainError("degree l must be >= 0, got " + std::to_string(l));
}

/// lambda_l = (N - 2 + l) l.
inline std::int64_t eigenvalue(int l, int n) {
  check_degree(l, n);
  return static_cast<std::int64_t>(n - 2 + l) * l;
}

/// m_l = (N-3+l)! (N+2l-2) / (l! (N-2)!), evaluated as
/// binom(N-3+l, l) (N+2l-2) / (N-2) without forming factorials.
inline std::int64_t multiplicity(int l, int n) {
  check_degree(l, n);
  // binom(N-3+l, l) built incrementally; every partial product is integral
  unsigned __int128 binom = 1;
  for (int i = 1; i <= l; ++i) {
    binom = binom * static_cast<unsigned>(n - 3 + i) / static_cast<unsigned>(i);
  }
  const unsigned __int128 m = binom * static_cast<unsigned>(n + 2 * l - 2) / static_cast<unsigned>(n - 2);
  if (m > static_cast<unsigned __int128>(INT64_MAX)) throw DomainError("multiplicity overflows 64 bits");
  return static_cast<std::int64_t>(m);
}

/// Surface measure of S^{N-1}.
inline double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

struct SpectrumEntry {
  int l;
  std::int64_t lambda;
  std::int64_t multiplicity;
};

struct ModeIndex {
  int l;
  int m;  // 1-based
};

class SphericalSpectrum {
 public:
  SphericalSpectrum(int n, int l_max) : n_(n) {
    check_degree(l_max, n);
    for (int l = 0; l <= l_max; ++l) entries_.push_back({l, eigenvalue(l, n), multiplicity(l, n)});
  }

  int dimension() const { return n_; }
  const std::vector<SpectrumEntry>& entries() const { return entries_; }

  /// Flat map k -> (l, m) with eigenvalues repeated by multiplicity.
  std::vector<ModeIndex> flat_index() const {
    std::vector<ModeIndex> out;
    for (const auto& e : entries_)
      for (std::int64_t m = 1; m <= e.multiplicity; ++m) out.push_back({e.l, static_cast<int>(m)});
    return out;
  }

  std::vector<double> mu() const {
    std::vector<double> out;
    for (const auto& e : entries_)
      for (std::int64_t m = 0; m < e.multiplicity; ++m) out.push_back(static_cast<double>(e.lambda));
    return out;
  }

 private:
  int n_;
  std::vector<SpectrumEntry> entries_;
};

// ---------------------------------------------------------------------------
// Pointwise harmonics

/// Point on the sphere.  For N = 3 the Cartesian point is
/// (sin t cos p, sin t sin p, cos t); zonal functions in higher N are
/// represented on the meridian (sin t, 0, ..., 0, cos t).
struct SphereNode {
  double cos_theta = 1.0;
  double sin_theta = 0.0;
  double phi = 0.0;

  std::vector<double> cartesian(int n) const {
    std::vector<double> x(n, 0.0);
    if (n == 3) {
      x[0] = sin_theta * std::cos(phi);
      x[1] = sin_theta * std::sin(phi);
      x[2] = cos_theta;
    } else {
      x[0] = sin_theta;
      x[n - 1] = cos_theta;
    }
    return x;
  }

  static SphereNode from_direction(std::span<const double> x) {
    const int n = static_cast<int>(x.size());
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    const double r = std::sqrt(r2);
    SphereNode node;
    node.cos_theta = x[n - 1] / r;
    node.sin_theta = std::sqrt(std::max(0.0, 1.0 - node.cos_theta * node.cos_theta));
    node.phi = n == 3 ? std::atan2(x[1], x[0]) : 0.0;
    return node;
  }
};

/// Value and tangential gradient (components along e_theta, e_phi).
struct HarmonicSample {
  double value = 0.0;
  double d_theta = 0.0;
  double d_phi = 0.0;  // (1/sin theta) d/dphi
};

namespace detail {

/// Orthonormal associated Legendre functions p_{l,j}(x) for l = j..l_max,
/// normalised so that p_{l,0} = Y_{l,0} on S^2.
inline std::vector<double> normalized_legendre(int l_max, int j, double x, double s) {
  std::vector<double> p(l_max + 1, 0.0);
  if (j > l_max) return p;
  double pjj = std::sqrt(1.0 / (4.0 * std::numbers::pi));
  for (int i = 1; i <= j; ++i) pjj *= std::sqrt((2.0 * i + 1.0) / (2.0 * i)) * s;
  p[j] = pjj;
  if (j + 1 <= l_max) p[j + 1] = x * std::sqrt(2.0 * j + 3.0) * pjj;
  for (int l = j + 2; l <= l_max; ++l) {
    const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - j * j));
    const double a_prev =
        std::sqrt((4.0 * (l - 1) * (l - 1) - 1.0) / (static_cast<double>(l - 1) * (l - 1) - j * j));
    p[l] = a * (x * p[l - 1] - p[l - 2] / a_prev);
  }
  return p;
}

inline double gegenbauer(int l, double alpha, double x) {
  if (l == 0) return 1.0;
  double c0 = 1.0, c1 = 2.0 * alpha * x;
  for (int k = 2; k <= l; ++k) {
    const double c2 = (2.0 * x * (k + alpha - 1.0) * c1 - (k + 2.0 * alpha - 2.0) * c0) / k;
    c0 = c1;
    c1 = c2;
  }
  return c1;
}

/// L^2(S^{N-1}) norm of the zonal function C_l^alpha(cos theta), alpha = (N-2)/2.
inline double zonal_norm(int l, int n) {
  const double alpha = 0.5 * (n - 2);
  const double h = std::numbers::pi * std::pow(2.0, 1.0 - 2.0 * alpha) *
                   std::exp(std::lgamma(l + 2.0 * alpha) - std::lgamma(l + 1.0) -
                            2.0 * std::lgamma(alpha)) /
                   (l + alpha);
  return std::sqrt(h * sphere_area(n - 1));
}

}  // namespace detail

/// Real spherical harmonic Y_{l,m} on S^2 (m 1-based, see file comment).
inline HarmonicSample real_harmonic_s2(int l, int m, const SphereNode& node) {
  if (l < 0 || m < 1 || m > 2 * l + 1) throw DomainError("invalid (l, m) for S^2");
  const int j = m / 2;  // azimuthal order
  const double x = node.cos_theta, s = node.sin_theta;
  const auto p = detail::normalized_legendre(l, j, x, s);
  const double plj = p[l];
  const double plm1 = l - 1 >= j ? p[l - 1] : 0.0;
  // d p_{l,j} / d theta = (l x p_{l,j} - sqrt((2l+1)/(2l-1) (l^2-j^2)) p_{l-1,j}) / sin theta
  double dtheta = 0.0;
  if (l > 0) {
    const double c = l > j ? std::sqrt((2.0 * l + 1.0) / (2.0 * l - 1.0) * (1.0 * l * l - 1.0 * j * j)) : 0.0;
    dtheta = (l * x * plj - c * plm1) / s;
  }
  HarmonicSample out;
  if (j == 0) {
    out.value = plj;
    out.d_theta = dtheta;
    return out;
  }
  const double scale = std::sqrt(2.0);
  const bool cosine = (m % 2 == 0);
  const double trig = cosine ? std::cos(j * node.phi) : std::sin(j * node.phi);
  const double dtrig = cosine ? -j * std::sin(j * node.phi) : j * std::cos(j * node.phi);
  out.value = scale * plj * trig;
  out.d_theta = scale * dtheta * trig;
  out.d_phi = scale * plj * dtrig / s;
  return out;
}

/// L^2-normalized zonal harmonic of degree l on S^{N-1}.
inline HarmonicSample zonal_harmonic(int l, int n, const SphereNode& node) {
  check_degree(l, n);
  const double alpha = 0.5 * (n - 2);
  const double norm = detail::zonal_norm(l, n);
  HarmonicSample out;
  out.value = detail::gegenbauer(l, alpha, node.cos_theta) / norm;
  if (l > 0) {
    const double dcdx = 2.0 * alpha * detail::gegenbauer(l - 1, alpha + 1.0, node.cos_theta);
    out.d_theta = -node.sin_theta * dcdx / norm;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Basis

enum class BasisMode { full, zonal };

inline std::string to_string(BasisMode mode) { return mode == BasisMode::full ? "full" : "zonal"; }

/// Quadrature on S^{N-1} plus tabulated harmonics and tangential gradients.
class HarmonicBasis {
 public:
  /// Smallest angular resolution (number of polar nodes) that integrates
  /// products of retained harmonics exactly.
  static int minimal_resolution(int l_max) { return l_max + 1; }
  static int default_resolution(int l_max) { return 2 * (l_max + 1); }

  HarmonicBasis(int n, int l_max, int resolution, BasisMode mode) : n_(n), l_max_(l_max), mode_(mode) {
    check_degree(l_max, n);
    if (mode == BasisMode::full && n != 3)
      throw DomainError("full harmonic bases are provided for N = 3 only; use zonal mode");
    if (resolution < minimal_resolution(l_max))
      throw ConfigError("angular resolution " + std::to_string(resolution) +
                        " too low for l_max = " + std::to_string(l_max) + "; minimal resolution is " +
                        std::to_string(minimal_resolution(l_max)));
    build_nodes(resolution);
    build_modes();
    tabulate();
  }

  int dimension() const { return n_; }
  int l_max() const { return l_max_; }
  BasisMode mode() const { return mode_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_modes() const { return modes_.size(); }
  const std::vector<SphereNode>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<ModeIndex>& modes() const { return modes_; }
  const std::vector<double>& mu() const { return mu_; }
  /// Number of tangential gradient components stored (2 for full, 1 for zonal).
  int gradient_components() const { return mode_ == BasisMode::full ? 2 : 1; }

  /// Y_k(theta_j): rows = modes, columns = nodes.
  const Eigen::MatrixXd& values() const { return y_; }
  /// Tangential gradient components: grad_[c](k, j).
  const Eigen::MatrixXd& gradient(int component) const { return grad_[component]; }
  /// w_j Y_k(theta_j), used by projection.
  const Eigen::MatrixXd& weighted_values() const { return wy_; }

  /// Flat index of (l, m); throws if the mode is not retained.
  std::size_t index_of(int l, int m) const {
    for (std::size_t k = 0; k < modes_.size(); ++k)
      if (modes_[k].l == l && modes_[k].m == m) return k;
    throw DomainError("mode (l=" + std::to_string(l) + ", m=" + std::to_string(m) + ") not in basis");
  }

  /// Flat indices of the degree-l block.
  std::vector<std::size_t> block(int l) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < modes_.size(); ++k)
      if (modes_[k].l == l) out.push_back(k);
    return out;
  }

  HarmonicSample evaluate(std::size_t k, const SphereNode& node) const {
    const auto& mi = modes_.at(k);
    return mode_ == BasisMode::full ? real_harmonic_s2(mi.l, mi.m, node) : zonal_harmonic(mi.l, n_, node);
  }

  Eigen::VectorXd project(std::span<const double> samples) const {
    if (samples.size() != nodes_.size()) throw ShapeError("sample count does not match quadrature nodes");
    Eigen::Map<const Eigen::VectorXd> f(samples.data(), static_cast<Eigen::Index>(samples.size()));
    return wy_ * f;
  }

  Eigen::VectorXd synthesize(std::span<const double> coefficients) const {
    if (coefficients.size() != modes_.size()) throw ShapeError("coefficient count does not match basis");
    Eigen::Map<const Eigen::VectorXd> c(coefficients.data(), static_cast<Eigen::Index>(coefficients.size()));
    return y_.transpose() * c;
  }

  double integrate(std::span<const double> samples) const {
    if (samples.size() != nodes_.size()) throw ShapeError("sample count does not match quadrature nodes");
    double acc = 0.0;
    for (std::size_t j = 0; j < samples.size(); ++j) acc += weights_[j] * samples[j];
    return acc;
  }

 private:
  void build_nodes(int resolution) {
    if (mode_ == BasisMode::full) {
      const GaussRule gl = gauss_legendre(resolution);
      const int n_phi = 2 * resolution;
      const double dphi = 2.0 * std::numbers::pi / n_phi;
      for (int i = 0; i < resolution; ++i) {
        const double x = gl.nodes[i];
        const double s = std::sqrt((1.0 - x) * (1.0 + x));
        for (int j = 0; j < n_phi; ++j) {
          nodes_.push_back({x, s, j * dphi});
          weights_.push_back(gl.weights[i] * dphi);
        }
      }
    } else {
      const GaussRule gj = gauss_gegenbauer(resolution, 0.5 * (n_ - 2));
      const double ring = sphere_area(n_ - 1);
      for (int i = 0; i < resolution; ++i) {
        const double x = gj.nodes[i];
        nodes_.push_back({x, std::sqrt((1.0 - x) * (1.0 + x)), 0.0});
        weights_.push_back(gj.weights[i] * ring);
      }
    }
  }

  void build_modes() {
    for (int l = 0; l <= l_max_; ++l) {
      const int count = mode_ == BasisMode::full ? 2 * l + 1 : 1;
      for (int m = 1; m <= count; ++m) {
        modes_.push_back({l, m});
        mu_.push_back(static_cast<double>(eigenvalue(l, n_)));
      }
    }
  }

  void tabulate() {
    const auto nm = static_cast<Eigen::Index>(modes_.size());
    const auto nn = static_cast<Eigen::Index>(nodes_.size());
    y_.resize(nm, nn);
    wy_.resize(nm, nn);
    grad_.assign(gradient_components(), Eigen::MatrixXd(nm, nn));
    for (Eigen::Index k = 0; k < nm; ++k) {
      for (Eigen::Index j = 0; j < nn; ++j) {
        const HarmonicSample s = evaluate(static_cast<std::size_t>(k), nodes_[j]);
        y_(k, j) = s.value;
        wy_(k, j) = s.value * weights_[j];
        grad_[0](k, j) = s.d_theta;
        if (gradient_components() > 1) grad_[1](k, j) = s.d_phi;
      }
    }
  }

  int n_;
  int l_max_;
  BasisMode mode_;
  std::vector<SphereNode> nodes_;
  std::vector<double> weights_;
  std::vector<ModeIndex> modes_;
  std::vector<double> mu_;
  Eigen::MatrixXd y_;
  Eigen::MatrixXd wy_;
  std::vector<Eigen::MatrixXd> grad_;
};

inline BasisMode default_mode(int n) { return n == 3 ? BasisMode::full : BasisMode::zonal; }

/// resolution <= 0 selects the default resolution.
inline std::shared_ptr<const HarmonicBasis> build_basis(int n, int l_max, int resolution, BasisMode mode) {
  if (resolution <= 0) resolution = HarmonicBasis::default_resolution(l_max);
  return std::make_shared<const HarmonicBasis>(n, l_max, resolution, mode);
}

inline std::shared_ptr<const HarmonicBasis> build_basis(int n, int l_max, int resolution = 0) {
  return build_basis(n, l_max, resolution, default_mode(n));
}

}  // namespace hardy
