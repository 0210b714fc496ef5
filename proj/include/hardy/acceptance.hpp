#pragma once

// The acceptance matrix: eight property checks with analytic or independent
// oracles.  Shared by the acceptance test binary and `hardyfreq verify`.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hardy/almgren.hpp"
#include "hardy/asymptotics.hpp"
#include "hardy/config.hpp"
#include "hardy/harmonics.hpp"
#include "hardy/inequalities.hpp"
#include "hardy/mode_solver.hpp"
#include "hardy/oracles.hpp"
#include "hardy/pipeline.hpp"
#include "hardy/problem.hpp"

namespace hardy::acceptance {

struct Result {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;  // reported on the console only, never written to artifacts
};

/// Least-squares slope of y against x.
inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline GridPtr reference_grid(double dt = 0.01) {
  auto cfg = reference_config();
  cfg.dt = dt;
  return cfg.grid();
}

inline ProblemSpec linear_problem(const GridPtr& grid) {
  ProblemSpec p;
  p.domain = grid->domain();
  return p;
}

// 1. closed-form eigenvalues and multiplicities against brute-force counting
inline Result spectrum_exactness() {
  Result r{1, "spectrum exactness"};
  int mismatches = 0, checked = 0;
  for (int n : {3, 4, 5})
    for (int l = 0; l <= 6; ++l) {
      const auto entry = SphericalSpectrum(n, 6).entries()[static_cast<std::size_t>(l)];
      const bool ok = eigenvalue(l, n) == static_cast<std::int64_t>(l) * (n - 2 + l) && entry.lambda == eigenvalue(l, n) &&
                      entry.multiplicity == multiplicity(l, n) && oracle::harmonic_dimension(n, l) == multiplicity(l, n) &&
                      oracle::harmonic_eigenvalue(n, l) == eigenvalue(l, n);
      mismatches += ok ? 0 : 1;
      ++checked;
    }
  r.passed = mismatches == 0;
  r.detail = fmt::format("{} (N, l) pairs, {} mismatches against monomial-kernel counting", checked, mismatches);
  return r;
}

// 2. exact modes l = 0, 1, 2 with h = f = 0
inline Result exact_mode_frequency() {
  Result r{2, "exact-mode frequency"};
  const auto grid = reference_grid();
  const auto lin = linear_problem(grid);
  double worst_n = 0.0, worst_h = 0.0, worst_p = 0.0;
  for (int l : {0, 1, 2}) {
    const auto ex = exact_mode_solution(grid, l, 1);
    const auto tr = frequency_trace(ex.v, lin);
    for (std::size_t i = tr.i_lo; i <= tr.i_hi; ++i) worst_n = std::max(worst_n, std::abs(tr.N[i] - ex.gamma));
    worst_h = std::max(worst_h, check_Hprime(tr));
    worst_p = std::max(worst_p, pohozaev_max_residual(tr));
  }
  r.passed = worst_n < 1e-8 && worst_h < 1e-8 && worst_p < 1e-8;
  r.detail = fmt::format("max |N - sqrt(lambda)| {:.2e}, H'+2D defect {:.2e}, Pohozaev defect {:.2e} (limit 1e-8)", worst_n,
                         worst_h, worst_p);
  return r;
}

// 3. v = e^{-sqrt2 t} Y_{1,1} + 0.5 e^{-sqrt6 t} Y_{2,1}
inline Result two_mode_closed_form() {
  Result r{3, "two-mode closed form"};
  const auto grid = reference_grid();
  const auto& basis = grid->basis();
  const double s2 = std::numbers::sqrt2, s6 = std::sqrt(6.0);
  const auto v = CylinderField::from_mode_functions(
      grid, {{basis.index_of(1, 1), [s2](double t) { return std::exp(-s2 * t); }},
             {basis.index_of(2, 1), [s6](double t) { return 0.5 * std::exp(-s6 * t); }}});
  const auto tr = frequency_trace(v, linear_problem(grid));
  const double gamma_err = std::abs(tr.gamma_hat - s2);
  const auto hd = h_decay_check(tr, s2);
  const double limit_err = std::abs(hd.limit - 1.0);

  const auto lams = lambda_grid(2.0, grid->t_max() - 3.0, 15);
  const auto bp = blowup_profile(v, lams, 2.0);
  std::vector<double> lm;
  for (double m : bp.metric) lm.push_back(std::log(m));
  const double blow = slope(bp.lambdas, lm), blow_expect = -(s6 - s2);
  const double blow_err = std::abs(blow / blow_expect - 1.0);

  const auto lim = beta_trace_limit(v, 1, lambda_grid(tr.window_lo, tr.window_hi, 21));
  const std::vector<double> unit{1.0, 0.0, 0.0};
  double beta_err = 0.0;
  for (std::size_t i = 0; i < unit.size(); ++i) beta_err = std::max(beta_err, std::abs(lim.beta_hat[i] - unit[i]));

  r.passed = gamma_err <= 1e-4 && limit_err <= 1e-3 && blow_err <= 0.05 && beta_err <= 1e-4;
  r.detail = fmt::format(
      "gamma_hat err {:.2e} (1e-4); e^(2 sqrt2 t)H limit {:.7f} (1 +- 1e-3); blow-up slope {:.5f} vs {:.5f} ({:.2f}%, 5%); "
      "beta_hat err {:.2e} (1e-4)",
      gamma_err, hd.limit, blow, blow_expect, 100.0 * blow_err, beta_err);
  return r;
}

// 4. the semilinear reference problem end to end
inline Result semilinear_pipeline() {
  Result r{4, "semilinear pipeline"};
  Session s(reference_config());
  const auto& sol = s.solution();
  const auto& tr = s.trace();
  const double gamma_err = std::abs(tr.gamma_hat - std::numbers::sqrt2);
  const auto a = run_asymptotics(s);
  const auto& rows = a.convergence.rows;
  const double decades = std::log10(rows.front().r / rows.back().r);
  r.passed = sol.report.converged && sol.report.residual < 1e-7 && gamma_err <= 1e-3 && s.l0() == 1 &&
             a.profile.agreement <= 1e-3 && a.r_independence <= 1e-3 && a.convergence.value_decreasing &&
             a.convergence.gradient_decreasing && decades >= 1.0;
  r.detail = fmt::format(
      "Picard {} iterations, residual {:.2e} (1e-7); gamma_hat err {:.2e} (1e-3); l0 {}; beta vs beta_hat {:.2e} (1e-3); "
      "R-independence {:.2e} (1e-3); distances decreasing over {:.2f} decades of r",
      sol.report.iterations, sol.report.residual, gamma_err, s.l0(), a.profile.agreement, a.r_independence, decades);
  return r;
}

// 5. solve_mode against the finite-difference oracle
struct CrossOracleStats {
  int cases = 0, zero_mu = 0;
  double worst = 0.0;  // largest sup-distance
  double bound = 0.0;
  bool passed = true;
};

inline CrossOracleStats cross_oracle_suite(std::uint64_t seed, int count, double dt) {
  SuiteRng rng(seed);
  const UniformLine line(0.0, dt, static_cast<std::size_t>(std::llround(12.0 / dt)) + 1);
  CrossOracleStats st;
  st.bound = std::max(1e-6, 10.0 * dt * dt);
  for (int c = 0; c < count; ++c) {
    const double mu = c % 5 == 0 ? 0.0 : rng.uniform(0.1, 30.0);
    double amp[3], rate[3], freq[3], phase[3];
    for (int j = 0; j < 3; ++j) {
      amp[j] = rng.normal();
      rate[j] = rng.uniform(1.0, 4.0);
      freq[j] = rng.uniform(0.0, 3.0);
      phase[j] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    const double bv = rng.normal();
    std::vector<double> zeta(line.size());
    for (std::size_t i = 0; i < zeta.size(); ++i) {
      const double t = line.t(i);
      for (int j = 0; j < 3; ++j) zeta[i] += amp[j] * std::exp(-rate[j] * t) * std::cos(freq[j] * t + phase[j]);
    }
    const auto a = solve_mode(mu, zeta, bv, line).phi;
    const auto b = fd_oracle_mode(mu, zeta, bv, line);
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    st.worst = std::max(st.worst, d);
    st.passed = st.passed && d <= st.bound;
    st.zero_mu += mu == 0.0 ? 1 : 0;
    ++st.cases;
  }
  return st;
}

inline Result cross_oracle_ode(std::uint64_t seed) {
  Result r{5, "cross-oracle ODE"};
  const auto st = cross_oracle_suite(seed, 200, 0.01);
  r.passed = st.passed;
  r.detail = fmt::format("{} cases ({} with mu = 0), worst sup-distance {:.2e} (bound {:.1e})", st.cases, st.zero_mu, st.worst,
                         st.bound);
  return r;
}

// 6. boundary Hardy inequality and the ball/cylinder Hardy form
inline Result inequality_suite(std::uint64_t seed) {
  Result r{6, "inequality suite"};
  auto cfg = reference_config();
  const auto grid = inequality_grid(cfg);
  const auto hardy = hardy_boundary_suite(grid, seed, 100, {0.5, 1.0, 2.0});
  const auto form = hardy_form_suite(grid, seed + 4, 50);
  bool ok = form.passed;
  std::string worst;
  for (const auto& h : hardy) {
    ok = ok && h.passed && h.census == 100;
    worst += fmt::format("{}{:.3f}", worst.empty() ? "" : "/", h.worst_ratio);
  }
  r.passed = ok;
  r.detail = fmt::format("boundary Hardy worst ratios {} over 100 fields each (must be <= 1); Hardy form ball vs cylinder "
                         "worst {:.2e} over 50 fields (1e-7)",
                         worst, form.worst_ratio);
  return r;
}

// 7. grid refinement of the derivative identities on the semilinear field
struct RefinementStats {
  double h_coarse = 0, h_fine = 0, p_coarse = 0, p_fine = 0;
  double h_ratio() const { return h_coarse / h_fine; }
  double p_ratio() const { return p_coarse / p_fine; }
};

inline RefinementStats refinement(Stencil stencil) {
  RefinementStats st;
  auto cfg = reference_config();
  const auto coarse_grid = reference_grid(0.01);
  const auto fine_grid = reference_grid(0.005);
  const auto vc = solve_semilinear(cfg.problem, coarse_grid).field;
  const auto vf = solve_semilinear(cfg.problem, fine_grid).field;
  const auto tc = frequency_trace(vc, cfg.problem, {}, stencil);
  const auto tf = frequency_trace(vf, cfg.problem, {tc.window_lo, tc.window_hi}, stencil);
  st.h_coarse = check_Hprime(tc);
  st.h_fine = check_Hprime(tf);
  st.p_coarse = pohozaev_max_residual(tc);
  st.p_fine = pohozaev_max_residual(tf);
  return st;
}

inline Result grid_convergence() {
  Result r{7, "grid convergence"};
  const auto c2 = refinement(Stencil::central2);
  const auto ho = refinement(Stencil::high_order);
  r.passed = c2.h_ratio() >= 3.5 && c2.p_ratio() >= 3.5;
  r.detail = fmt::format(
      "central-difference stencil, dt 0.01 -> 0.005: H' defect {:.3e} -> {:.3e} ({:.2f}x), Pohozaev {:.3e} -> {:.3e} "
      "({:.2f}x); 6th-order stencil for reference: H' {:.2e} -> {:.2e}, Pohozaev {:.2e} -> {:.2e}",
      c2.h_coarse, c2.h_fine, c2.h_ratio(), c2.p_coarse, c2.p_fine, c2.p_ratio(), ho.h_coarse, ho.h_fine, ho.p_coarse,
      ho.p_fine);
  return r;
}

// 8. two runs, different worker counts, byte-identical artifacts
inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Result determinism(const fs::path& dir, std::uint64_t seed) {
  Result r{8, "determinism"};
  auto cfg = reference_config();
  cfg.seed = seed;
  const int saved = thread_count();
  cfg.threads = 1;
  const auto a = full_run(cfg);
  cfg.threads = 3;
  const auto b = full_run(cfg);
  set_thread_count(saved);
  const auto pa = a.commit(dir / "run_a");
  const auto pb = b.commit(dir / "run_b");
  int differing = 0;
  std::size_t bytes = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const auto x = read_file(pa[i]), y = read_file(pb[i]);
    bytes += x.size();
    differing += (x == y && pa[i].filename() == pb[i].filename()) ? 0 : 1;
  }
  r.passed = pa.size() == pb.size() && !pa.empty() && differing == 0;
  r.detail = fmt::format("{} artifacts ({} bytes) from runs with 1 and 3 workers, {} differ", pa.size(), bytes, differing);
  return r;
}

/// Runs one criterion, converting library errors into a failed result.
inline Result timed(const std::function<Result()>& fn, int id, const std::string& name) {
  const auto start = std::chrono::steady_clock::now();
  Result r;
  try {
    r = fn();
  } catch (const std::exception& e) {
    r = Result{id, name, false, fmt::format("error: {}", e.what())};
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline std::vector<Result> run_all(const fs::path& dir, std::uint64_t seed, const std::function<void(const Result&)>& on_result = {}) {
  const std::vector<std::pair<std::string, std::function<Result()>>> steps{
      {"spectrum exactness", spectrum_exactness},
      {"exact-mode frequency", exact_mode_frequency},
      {"two-mode closed form", two_mode_closed_form},
      {"semilinear pipeline", semilinear_pipeline},
      {"cross-oracle ODE", [seed] { return cross_oracle_ode(seed); }},
      {"inequality suite", [seed] { return inequality_suite(seed); }},
      {"grid convergence", grid_convergence},
      {"determinism", [dir, seed] { return determinism(dir / "determinism", seed); }}};
  std::vector<Result> out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out.push_back(timed(steps[i].second, static_cast<int>(i + 1), steps[i].first));
    if (on_result) on_result(out.back());
  }
  return out;
}

inline std::string format_line(const Result& r) {
  return fmt::format("{} criterion {} ({}): {} [{:.2f} s]", r.passed ? "PASS" : "FAIL", r.id, r.name, r.detail, r.seconds);
}

/// Summary without timings, so repeated runs produce identical files.
inline nlohmann::json summary_json(const std::vector<Result>& results, std::uint64_t seed) {
  nlohmann::json j{{"tool", "hardyfreq"}, {"version", kVersion}, {"kind", "acceptance"}, {"seed", seed}};
  auto cfg = reference_config();
  cfg.seed = seed;
  j["config_hash"] = config_hash(cfg);
  j["criteria"] = nlohmann::json::array();
  bool all = true;
  for (const auto& r : results) {
    j["criteria"].push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    all = all && r.passed;
  }
  j["passed"] = all;
  return j;
}

}  // namespace hardy::acceptance
