#pragma once

// Frequency machinery on the half-cylinder: H, D, N = D/H, the splitting
// N' = nu1 + nu2, the Pohozaev identity, decay of H and blow-up rescaling.
//
// All nonlinear terms are evaluated on the band-limited samples of the field,
// so the discrete versions of H' = -2D and of the Pohozaev identity hold up to
// the t-discretization error of the solver.

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hardy/cylinder.hpp"
#include "hardy/error.hpp"
#include "hardy/fit.hpp"
#include "hardy/problem.hpp"

namespace hardy {

/// Difference stencil for d/dt in the traces and checks.  central2 is the
/// plain (g[i+1] - g[i-1]) / (2 dt) (one-sided second order at the ends);
/// high_order is the grid's 7-point stencil.
enum class Stencil { central2, high_order };

inline std::vector<double> central_difference(std::span<const double> g, double h) {
  const std::size_t n = g.size();
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (g[i + 1] - g[i - 1]) / (2.0 * h);
  d[0] = (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * h);
  d[n - 1] = (3.0 * g[n - 1] - 4.0 * g[n - 2] + g[n - 3]) / (2.0 * h);
  return d;
}

/// Node-wise ingredients shared by the trace, the Pohozaev check and the
/// frequency derivative.
struct FrequencyTerms {
  std::vector<double> t;
  std::vector<double> H;         // int_Gamma v^2
  std::vector<double> vs2;       // int_Gamma (d_s v)^2
  std::vector<double> vvs;       // int_Gamma v d_s v
  std::vector<double> grad_th;   // int_Gamma |grad_theta v|^2
  std::vector<double> h_v2;      // e^{-2t} int_Gamma h~ v^2
  std::vector<double> f_v;       // e^{-2t} int_Gamma f~ v
  std::vector<double> F_w;       // e^{-Nt} int_Gamma F
  std::vector<double> gradF;     // e^{-(N+1)t} int_Gamma grad_x F . theta
  // tail integrals over C_t
  std::vector<double> energy;    // int |grad_C v|^2
  std::vector<double> h_v2_tail, f_v_tail, h_vvs_tail, F_tail, gradF_tail;
  std::vector<double> D;
  double max_tail_correction = 0.0;  // largest fitted tail relative to its integral at T0
  int n = 3;
  Stencil stencil = Stencil::high_order;
};

namespace detail {

/// floor: magnitude below which a non-decaying integrand is roundoff (the
/// derivative of a constant mode, say) and its tail is taken as zero.
inline std::vector<double> tail_of(const UniformLine& line, const std::vector<double>& g, double& worst, double floor) {
  auto ts = tail_integrals(line, g);
  if (ts.tail.divergent) {
    double late = 0.0;
    for (std::size_t i = g.size() - g.size() / 10 - 1; i < g.size(); ++i) late = std::max(late, std::abs(g[i]));
    if (late > floor) throw TruncationError("cylinder integrand does not decay at T_max; increase t_max");
  }
  if (std::abs(ts.value[0]) > 0.0) worst = std::max(worst, std::abs(ts.tail.correction) / std::abs(ts.value[0]));
  return std::move(ts.value);
}

}  // namespace detail

inline FrequencyTerms frequency_terms(const CylinderField& v, const ProblemSpec& spec,
                                      Stencil stencil = Stencil::high_order) {
  const auto& grid = v.grid();
  const auto& basis = v.basis();
  const auto& line = grid.line();
  const auto& mu = basis.mu();
  const std::size_t nt = grid.num_t();
  const auto a = angular_factor(spec.potential, basis);
  const auto& w = basis.weights();

  ColMatrix central;
  if (stencil == Stencil::central2) {
    central.resize(v.modes().rows(), v.modes().cols());
    for (std::size_t k = 0; k < v.num_modes(); ++k) {
      const auto d = central_difference(v.mode_series(k), grid.dt());
      for (std::size_t i = 0; i < nt; ++i) central(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = d[i];
    }
  }
  const ColMatrix& dmodes = stencil == Stencil::central2 ? central : v.mode_derivatives();

  FrequencyTerms out;
  out.n = spec.n();
  out.stencil = stencil;
  out.t.resize(nt);
  for (auto* vec : {&out.H, &out.vs2, &out.vvs, &out.grad_th, &out.h_v2, &out.f_v, &out.F_w, &out.gradF})
    vec->assign(nt, 0.0);
  std::vector<double> h_vvs(nt, 0.0), energy_density(nt, 0.0);

  for (std::size_t i = 0; i < nt; ++i) {
    const double t = grid.t(i);
    out.t[i] = t;
    const auto ii = static_cast<Eigen::Index>(i);
    double H = 0.0, vs2 = 0.0, vvs = 0.0, th = 0.0;
    for (std::size_t k = 0; k < v.num_modes(); ++k) {
      const double p = v.modes()(ii, static_cast<Eigen::Index>(k));
      const double d = dmodes(ii, static_cast<Eigen::Index>(k));
      H += p * p;
      vs2 += d * d;
      vvs += p * d;
      th += mu[k] * p * p;
    }
    out.H[i] = H;
    out.vs2[i] = vs2;
    out.vvs[i] = vvs;
    out.grad_th[i] = th;
    energy_density[i] = vs2 + th;

    const Eigen::VectorXd vt = basis.values().transpose() * dmodes.row(ii).transpose();
    const double e2t = std::exp(-2.0 * t);
    double hv2 = 0.0, fv = 0.0, Fw = 0.0, hvvs = 0.0, gF = 0.0;
    for (std::size_t j = 0; j < basis.num_nodes(); ++j) {
      const double val = v.values()(ii, static_cast<Eigen::Index>(j));
      const double ht = h_tilde(spec, t, a[j]);
      hv2 += w[j] * e2t * ht * val * val;
      hvvs += w[j] * e2t * ht * val * vt(static_cast<Eigen::Index>(j));
      fv += w[j] * e2t * f_tilde(spec, t, val) * val;
      Fw += w[j] * F_weighted(spec, t, val);
      gF += w[j] * gradF_weighted(spec, t, val);
    }
    out.h_v2[i] = hv2;
    out.f_v[i] = fv;
    out.F_w[i] = Fw;
    out.gradF[i] = gF;
    h_vvs[i] = hvvs;
  }
  double worst = 0.0;
  const double floor = 1e-20 * *std::max_element(out.H.begin(), out.H.end());
  out.energy = detail::tail_of(line, energy_density, worst, floor);
  out.h_v2_tail = detail::tail_of(line, out.h_v2, worst, floor);
  out.f_v_tail = detail::tail_of(line, out.f_v, worst, floor);
  out.h_vvs_tail = detail::tail_of(line, h_vvs, worst, floor);
  out.F_tail = detail::tail_of(line, out.F_w, worst, floor);
  out.gradF_tail = detail::tail_of(line, out.gradF, worst, floor);
  out.max_tail_correction = worst;
  out.D.resize(nt);
  for (std::size_t i = 0; i < nt; ++i) out.D[i] = out.energy[i] - out.h_v2_tail[i] - out.f_v_tail[i];
  return out;
}

/// H(t) = int_{Gamma_t} v^2 dS = sum_k phi_k(t)^2.
inline double compute_H(const CylinderField& v, double t) {
  const auto& g = v.grid();
  if (t < g.t0() - 1e-12 || t > g.t_max() + 1e-12)
    throw RangeError(fmt::format("t = {} outside [{}, {}]", t, g.t0(), g.t_max()));
  const double H = v.modes_at(std::clamp(t, g.t0(), g.t_max())).squaredNorm();
  if (!(H >= 1e-300)) throw DegeneracyError(fmt::format("H({}) = {:.3g}: the field vanishes on Gamma_t", t, H));
  return H;
}

/// Same quantity by trace quadrature of v^2 on the sphere nodes.
inline double compute_H_quadrature(const CylinderField& v, double t) {
  const RowMatrix sq = v.values().cwiseProduct(v.values());
  return trace_integral(v.grid(), sq, t);
}

inline double compute_D(const CylinderField& v, const ProblemSpec& spec, double t) {
  const auto terms = frequency_terms(v, spec);
  const auto& line = v.grid().line();
  if (t < line.t0() - 1e-12 || t > line.t_end() + 1e-12)
    throw RangeError(fmt::format("t = {} outside [{}, {}]", t, line.t0(), line.t_end()));
  return line.interpolate(terms.D, std::clamp(t, line.t0(), line.t_end()));
}

// ---------------------------------------------------------------------------

struct FrequencyWindow {
  double lo = std::numeric_limits<double>::quiet_NaN();  // NaN: choose automatically
  double hi = std::numeric_limits<double>::quiet_NaN();
};

struct FrequencyTrace {
  std::vector<double> t, H, D, N, nu1, nu2;
  double dt = 0.0;
  double t_bar = 0.0;  // first node where D + H >= 1.1 * (E + H) / 2
  double window_lo = 0.0, window_hi = 0.0;
  std::size_t i_lo = 0, i_hi = 0;  // window node range, inclusive
  ExpFit fit;
  double gamma_hat = 0.0;
  // diagnostics
  double nu1_max = 0.0;            // should be <= 0 up to quadrature error
  double nu2_abs_integral = 0.0;   // int over the window of |nu2|
  double nu2_decay_rate = 0.0;     // fitted rate of |nu2|, 0 when not fitted
  double coercivity_margin = 0.0;  // min over window of (D + H) - (E + H)/2, relative
  double sup_ratio = 0.0;          // max over window of sup_theta v^2 / H
  double sup_ratio_late = 0.0;     // same over the second half of the window
  double max_tail_correction = 0.0;
  std::vector<std::string> warnings;
  FrequencyTerms terms;
};

inline FrequencyTrace frequency_trace(const CylinderField& v, const ProblemSpec& spec, FrequencyWindow window = {},
                                      Stencil stencil = Stencil::high_order) {
  FrequencyTrace tr;
  tr.terms = frequency_terms(v, spec, stencil);
  const auto& T = tr.terms;
  const auto& grid = v.grid();
  const std::size_t nt = grid.num_t();
  tr.dt = grid.dt();
  tr.t = T.t;
  tr.H = T.H;
  tr.D = T.D;
  tr.N.resize(nt);
  tr.nu1.resize(nt);
  tr.nu2.resize(nt);
  tr.max_tail_correction = T.max_tail_correction;
  const int n = spec.n();

  // t_bar: coercivity with a 10% margin
  std::size_t ibar = nt - 1;
  for (std::size_t i = 0; i < nt; ++i)
    if (T.D[i] + T.H[i] >= 1.1 * 0.5 * (T.energy[i] + T.H[i])) {
      ibar = i;
      break;
    }
  tr.t_bar = T.t[ibar];
  tr.window_lo = std::isnan(window.lo) ? std::max(tr.t_bar, grid.t0() + 1.0) : window.lo;
  tr.window_hi = std::isnan(window.hi) ? grid.t_max() - 1.0 : window.hi;
  if (!(tr.window_lo >= grid.t0() && tr.window_hi <= grid.t_max() && tr.window_hi > tr.window_lo))
    throw FitError(fmt::format("analysis window [{}, {}] is empty or outside the grid", tr.window_lo, tr.window_hi));
  tr.i_lo = static_cast<std::size_t>(std::ceil((tr.window_lo - grid.t0()) / grid.dt() - 1e-9));
  tr.i_hi = static_cast<std::size_t>(std::floor((tr.window_hi - grid.t0()) / grid.dt() + 1e-9));
  if (tr.i_hi < tr.i_lo + 8) throw FitError("analysis window holds fewer than 8 nodes; window too short");

  for (std::size_t i = 0; i < nt; ++i) {
    const double H = T.H[i];
    if (!(H >= 1e-300)) {
      if (i >= tr.i_lo && i <= tr.i_hi)
        throw DegeneracyError(fmt::format("H({}) = {:.3g} on the analysis window: the field vanishes", T.t[i], H));
      tr.N[i] = tr.nu1[i] = tr.nu2[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    tr.N[i] = T.D[i] / H;
    tr.nu1[i] = -2.0 * (T.vs2[i] * H - T.vvs[i] * T.vvs[i]) / (H * H);
    tr.nu2[i] = (2.0 * T.h_vvs_tail[i] + T.h_v2[i] + 2.0 * T.gradF_tail[i] + 2.0 * n * T.F_tail[i] -
                 (n - 2) * T.f_v_tail[i] + T.f_v[i] - 2.0 * T.F_w[i]) /
                H;
  }

  std::vector<double> tw(tr.t.begin() + tr.i_lo, tr.t.begin() + tr.i_hi + 1);
  std::vector<double> nw(tr.N.begin() + tr.i_lo, tr.N.begin() + tr.i_hi + 1);
  tr.fit = fit_exponential(tw, nw);
  if (!tr.fit.constant && (tr.fit.at_lower_bound || !(tr.fit.rate > 0.0)))
    throw FitError(fmt::format("frequency fit degenerate (rate {:.3g} <= 0); window too short", tr.fit.rate));
  tr.gamma_hat = tr.fit.a;
  if (tr.gamma_hat < -1e-8) tr.warnings.push_back(fmt::format("gamma_hat = {:.6g} is negative", tr.gamma_hat));

  // diagnostics over the window
  std::vector<double> abs_nu2;
  tr.nu1_max = -std::numeric_limits<double>::infinity();
  tr.coercivity_margin = std::numeric_limits<double>::infinity();
  const auto& vals = v.values();
  const std::size_t mid = (tr.i_lo + tr.i_hi) / 2;
  for (std::size_t i = tr.i_lo; i <= tr.i_hi; ++i) {
    tr.nu1_max = std::max(tr.nu1_max, tr.nu1[i]);
    abs_nu2.push_back(std::abs(tr.nu2[i]));
    const double rhs = 0.5 * (T.energy[i] + T.H[i]);
    tr.coercivity_margin = std::min(tr.coercivity_margin, (T.D[i] + T.H[i] - rhs) / rhs);
    const double sup = vals.row(static_cast<Eigen::Index>(i)).cwiseAbs2().maxCoeff();
    tr.sup_ratio = std::max(tr.sup_ratio, sup / T.H[i]);
    if (i >= mid) tr.sup_ratio_late = std::max(tr.sup_ratio_late, sup / T.H[i]);
  }
  {
    const UniformLine wl(tw.front(), grid.dt(), tw.size());
    tr.nu2_abs_integral = wl.integrate(abs_nu2, wl.t0(), wl.t_end());
    double mx = 0.0;
    for (double x : abs_nu2) mx = std::max(mx, x);
    if (mx > 1e-14) {
      // log-linear fit of |nu2| for an empirical integrability rate
      double st = 0, sl = 0, stt = 0, stl = 0;
      std::size_t cnt = 0;
      for (std::size_t q = 0; q < abs_nu2.size(); ++q) {
        if (abs_nu2[q] <= 0.0) continue;
        const double lg = std::log(abs_nu2[q]);
        st += tw[q];
        sl += lg;
        stt += tw[q] * tw[q];
        stl += tw[q] * lg;
        ++cnt;
      }
      const double den = cnt * stt - st * st;
      if (cnt > 2 && den > 0.0) tr.nu2_decay_rate = -(cnt * stl - st * sl) / den;
    }
  }
  if (tr.nu1_max > 1e-8) tr.warnings.push_back(fmt::format("nu1 positive up to {:.3g}", tr.nu1_max));
  if (tr.coercivity_margin < -1e-8)
    tr.warnings.push_back(fmt::format("coercivity D + H >= (E + H)/2 violated by {:.3g}", tr.coercivity_margin));
  return tr;
}

// ---------------------------------------------------------------------------
// Derivative identities

namespace detail {

inline std::vector<double> differentiate(const FrequencyTrace& tr, const std::vector<double>& g) {
  if (tr.terms.stencil == Stencil::central2) return central_difference(g, tr.dt);
  const UniformLine line(tr.t.front(), tr.dt, g.size());
  return line.derivative(g);
}

}  // namespace detail

/// max over the window of |H' + 2D| / max |H'|, with the trace's stencil.
/// When H is constant to roundoff (H' = D = 0) the scale falls back to max H.
inline double check_Hprime(const FrequencyTrace& tr) {
  const auto dH = detail::differentiate(tr, tr.H);
  double worst = 0.0, scale = 0.0, hmax = 0.0;
  for (std::size_t i = tr.i_lo; i <= tr.i_hi; ++i) {
    worst = std::max(worst, std::abs(dH[i] + 2.0 * tr.D[i]));
    scale = std::max(scale, std::abs(dH[i]));
    hmax = std::max(hmax, tr.H[i]);
  }
  if (scale <= 1e-12 * hmax) scale = hmax;
  return scale > 0.0 ? worst / scale : worst;
}

/// max over the window of |N' - nu1 - nu2| / (max |N'| + 1).
inline double check_Nprime(const FrequencyTrace& tr) {
  const auto dN = detail::differentiate(tr, tr.N);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = tr.i_lo; i <= tr.i_hi; ++i) {
    worst = std::max(worst, std::abs(dN[i] - tr.nu1[i] - tr.nu2[i]));
    scale = std::max(scale, std::abs(dN[i]));
  }
  return worst / (scale + 1.0);
}

// ---------------------------------------------------------------------------
// Pohozaev identity

struct PohozaevTerms {
  double lhs = 0.0;  // (1/2) int_Gamma |grad_C v|^2
  // right-hand side, in the order of the identity
  double boundary_ds = 0.0;   // int_Gamma |d_s v|^2
  double h_term = 0.0;        // - int_{C_t} e^{-2s} h~ v d_s v
  double f_term = 0.0;        // (N-2)/2 int_{C_t} e^{-2s} f~ v
  double gradF_term = 0.0;    // - int_{C_t} e^{-(N+1)s} grad_x F . theta
  double F_volume = 0.0;      // - N int_{C_t} e^{-Ns} F
  double F_boundary = 0.0;    // int_Gamma e^{-Nt} F
  double rhs() const { return boundary_ds + h_term + f_term + gradF_term + F_volume + F_boundary; }
  double H = 0.0;     // int_Gamma v^2, sets the roundoff floor of the normalization
  double residual() const {
    const double s = std::max(std::abs(lhs) + std::abs(boundary_ds) + std::abs(h_term) + std::abs(f_term) +
                                  std::abs(gradF_term) + std::abs(F_volume) + std::abs(F_boundary),
                              1e-12 * H);
    return s > 0.0 ? std::abs(lhs - rhs()) / s : 0.0;
  }
};

inline PohozaevTerms pohozaev_terms_at(const FrequencyTerms& T, std::size_t i) {
  PohozaevTerms p;
  p.lhs = 0.5 * (T.vs2[i] + T.grad_th[i]);
  p.boundary_ds = T.vs2[i];
  p.h_term = -T.h_vvs_tail[i];
  p.f_term = 0.5 * (T.n - 2) * T.f_v_tail[i];
  p.gradF_term = -T.gradF_tail[i];
  p.F_volume = -T.n * T.F_tail[i];
  p.F_boundary = T.F_w[i];
  p.H = T.H[i];
  return p;
}

/// Pohozaev residual at the node nearest to t.
inline double pohozaev_residual(const FrequencyTerms& T, double dt, double t) {
  const double t0 = T.t.front();
  const auto i = static_cast<std::size_t>(std::clamp<long long>(std::llround((t - t0) / dt), 0,
                                                                static_cast<long long>(T.t.size()) - 1));
  return pohozaev_terms_at(T, i).residual();
}

inline double pohozaev_residual(const CylinderField& v, const ProblemSpec& spec, double t,
                                Stencil stencil = Stencil::high_order) {
  const auto& g = v.grid();
  if (t < g.t0() - 1e-12 || t > g.t_max() + 1e-12)
    throw RangeError(fmt::format("t = {} outside [{}, {}]", t, g.t0(), g.t_max()));
  return pohozaev_residual(frequency_terms(v, spec, stencil), g.dt(), t);
}

/// Largest Pohozaev residual over the trace window.
inline double pohozaev_max_residual(const FrequencyTrace& tr) {
  double worst = 0.0;
  for (std::size_t i = tr.i_lo; i <= tr.i_hi; ++i) worst = std::max(worst, pohozaev_terms_at(tr.terms, i).residual());
  return worst;
}

// ---------------------------------------------------------------------------
// Decay of H

struct HDecayReport {
  double K1 = 0.0;      // sup over the window of e^{2 gamma t} H(t)
  double limit = 0.0;   // mean over the last quarter of the window
  double drift = 0.0;   // |last value - limit| / limit
  bool window_warning = false;
  std::vector<double> t, scaled;  // e^{2 gamma t} H(t) over the window
};

inline HDecayReport h_decay_check(const FrequencyTrace& tr, double gamma) {
  HDecayReport rep;
  for (std::size_t i = tr.i_lo; i <= tr.i_hi; ++i) {
    if (!(tr.H[i] >= 1e-300)) throw DegeneracyError("H vanishes on the analysis window");
    rep.t.push_back(tr.t[i]);
    rep.scaled.push_back(std::exp(2.0 * gamma * tr.t[i]) * tr.H[i]);
  }
  for (double s : rep.scaled) rep.K1 = std::max(rep.K1, s);
  const std::size_t q = rep.scaled.size() - std::max<std::size_t>(1, rep.scaled.size() / 4);
  double acc = 0.0;
  for (std::size_t i = q; i < rep.scaled.size(); ++i) acc += rep.scaled[i];
  rep.limit = acc / static_cast<double>(rep.scaled.size() - q);
  rep.drift = std::abs(rep.scaled.back() - rep.limit) / rep.limit;
  rep.window_warning = rep.drift > 0.05;
  return rep;
}

// ---------------------------------------------------------------------------
// Blow-up rescaling w_lambda(t, theta) = v(t + lambda, theta) / sqrt(H(lambda))

struct BlowupProfile {
  std::vector<double> lambdas;
  double t_window = 0.0;
  int l0 = 0;                     // degree of the most energetic block at lambda_max
  double gamma = 0.0;             // sqrt(lambda_{l0})
  std::vector<double> psi_modes;  // coefficients of psi on the full basis, unit norm
  std::vector<double> metric;     // sup |w_lambda - e^{-gamma t} psi| over the window grid
  std::vector<double> trace_norm; // int_{Gamma_0} w_lambda^2, equal to 1 by construction
};

inline BlowupProfile blowup_profile(const CylinderField& v, std::vector<double> lambdas, double t_window) {
  if (lambdas.empty()) throw DomainError("blowup_profile needs at least one lambda");
  if (!(t_window > 0.0)) throw DomainError("t_window must be positive");
  std::sort(lambdas.begin(), lambdas.end());
  const auto& g = v.grid();
  for (double lam : lambdas)
    if (lam < g.t0() - 1e-12 || lam + t_window > g.t_max() + 1e-12)
      throw RangeError(fmt::format("lambda = {} with window {} leaves the grid [{}, {}]", lam, t_window, g.t0(), g.t_max()));
  const auto& basis = v.basis();
  const auto steps = static_cast<std::size_t>(std::llround(t_window / g.dt()));

  BlowupProfile out;
  out.lambdas = lambdas;
  out.t_window = t_window;
  auto coeffs_at = [&](double lam, double s) -> Eigen::VectorXd {
    return v.modes_at(std::min(lam + s, g.t_max()));
  };
  // psi from w_{lambda_max}(0, .)
  Eigen::VectorXd c = coeffs_at(lambdas.back(), 0.0);
  const double Hmax = c.squaredNorm();
  if (!(Hmax >= 1e-300)) throw DegeneracyError(fmt::format("H({}) vanishes", lambdas.back()));
  double best = -1.0;
  for (int l = 0; l <= basis.l_max(); ++l) {
    double e = 0.0;
    for (std::size_t k : basis.block(l)) e += c(static_cast<Eigen::Index>(k)) * c(static_cast<Eigen::Index>(k));
    if (e > best) {
      best = e;
      out.l0 = l;
    }
  }
  out.gamma = std::sqrt(static_cast<double>(eigenvalue(out.l0, basis.dimension())));
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(c.size());
  for (std::size_t k : basis.block(out.l0)) psi(static_cast<Eigen::Index>(k)) = c(static_cast<Eigen::Index>(k));
  psi /= psi.norm();
  out.psi_modes.assign(psi.data(), psi.data() + psi.size());
  const Eigen::VectorXd psi_vals = basis.values().transpose() * psi;

  for (double lam : lambdas) {
    const double H = coeffs_at(lam, 0.0).squaredNorm();
    if (!(H >= 1e-300)) throw DegeneracyError(fmt::format("H({}) vanishes", lam));
    const double scale = 1.0 / std::sqrt(H);
    double m = 0.0;
    for (std::size_t s = 0; s <= steps; ++s) {
      const double ts = static_cast<double>(s) * g.dt();
      const Eigen::VectorXd w = scale * (basis.values().transpose() * coeffs_at(lam, ts));
      m = std::max(m, (w - std::exp(-out.gamma * ts) * psi_vals).cwiseAbs().maxCoeff());
    }
    out.metric.push_back(m);
    out.trace_norm.push_back(scale * scale * H);
  }
  return out;
}

}  // namespace hardy
