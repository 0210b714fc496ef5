#pragma once

// Run pipelines behind the command-line subcommands.  Every artifact is built
// in memory first and committed at the end (temp file + rename), so a failing
// run leaves no partial output.  JSON artifacts carry the config hash and the
// tool version; nothing time- or host-dependent is written.

#include <fmt/format.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hardy/almgren.hpp"
#include "hardy/asymptotics.hpp"
#include "hardy/config.hpp"
#include "hardy/cylinder.hpp"
#include "hardy/harmonics.hpp"
#include "hardy/inequalities.hpp"
#include "hardy/mode_solver.hpp"
#include "hardy/parallel.hpp"

namespace hardy {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Artifacts

inline void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot open '{}' for writing", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw Error(fmt::format("write to '{}' failed", tmp.string()));
    }
  }
  fs::rename(tmp, path);
}

/// Files of one run, keyed by name relative to the output directory.
struct ArtifactSet {
  std::map<std::string, std::string> files;

  void add(const std::string& name, std::string content) { files[name] = std::move(content); }
  void add_json(const std::string& name, const nlohmann::json& j) { files[name] = j.dump(2) + "\n"; }

  std::vector<fs::path> commit(const fs::path& dir) const {
    std::vector<fs::path> out;
    for (const auto& [name, content] : files) {
      write_atomic(dir / name, content);
      out.push_back(dir / name);
    }
    return out;
  }
};

inline std::string num(double x) { return fmt::format("{:.17g}", x); }

/// CSV with a header row; one row per entry of the columns.
inline std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& cols) {
  std::string s;
  for (std::size_t c = 0; c < header.size(); ++c) s += (c ? "," : "") + header[c];
  s += "\n";
  const std::size_t rows = cols.empty() ? 0 : cols.front().size();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < cols.size(); ++c) s += (c ? "," : "") + num(cols[c][i]);
    s += "\n";
  }
  return s;
}

inline nlohmann::json envelope(const RunConfig& cfg, const std::string& kind) {
  return {{"tool", "hardyfreq"}, {"version", kVersion}, {"kind", kind}, {"config_hash", config_hash(cfg)}};
}

inline std::string spectrum_csv(int n, int l_max) {
  if (l_max < 0) throw DomainError("l_max must be >= 0");
  std::string s = "l,lambda,multiplicity\n";
  const SphericalSpectrum spec(n, l_max);
  for (const auto& e : spec.entries()) s += fmt::format("{},{},{}\n", e.l, e.lambda, e.multiplicity);
  return s;
}

// ---------------------------------------------------------------------------
// Session: the solved field and its trace, computed once per run

class Session {
 public:
  explicit Session(RunConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    if (cfg_.threads > 0) set_thread_count(cfg_.threads);
    grid_ = cfg_.grid();
  }

  const RunConfig& config() const { return cfg_; }
  const GridPtr& grid() const { return grid_; }

  const SemilinearResult& solution() {
    if (!solution_) solution_ = solve_semilinear(cfg_.problem, grid_, cfg_.picard);
    return *solution_;
  }

  const FrequencyTrace& trace() {
    if (!trace_) trace_ = frequency_trace(solution().field, cfg_.problem, {cfg_.window_lo, cfg_.window_hi}, cfg_.resolved_stencil());
    return *trace_;
  }

  int l0() {
    if (!l0_) l0_ = detect_l0(trace().gamma_hat, cfg_.problem.n(), grid_->basis().l_max());
    return *l0_;
  }

 private:
  RunConfig cfg_;
  GridPtr grid_;
  std::optional<SemilinearResult> solution_;
  std::optional<FrequencyTrace> trace_;
  std::optional<int> l0_;
};

// ---------------------------------------------------------------------------
// Subcommand bodies

inline nlohmann::json solve_report_json(const SolveReport& r) {
  return {{"iterations", r.iterations},
          {"converged", r.converged},
          {"final_distance", r.final_distance},
          {"residual", r.residual},
          {"max_tail_fraction", r.max_tail_fraction},
          {"distances", r.distances},
          {"contraction", r.contraction}};
}

inline void add_solve(Session& s, ArtifactSet& out) {
  const auto& sol = s.solution();
  std::ostringstream csv;
  write_field_csv(sol.field, csv);
  out.add("field.csv", csv.str());
  auto meta = envelope(s.config(), "field");
  meta["field"] = field_metadata(sol.field);
  out.add_json("field.json", meta);
  auto rep = envelope(s.config(), "solve");
  rep["config"] = config_json(s.config());
  rep["report"] = solve_report_json(sol.report);
  out.add_json("solve.json", rep);
}

inline void add_frequency(Session& s, ArtifactSet& out) {
  const auto& tr = s.trace();
  out.add("frequency.csv", csv_table({"t", "H", "D", "N", "nu1", "nu2"}, {tr.t, tr.H, tr.D, tr.N, tr.nu1, tr.nu2}));
  const auto hd = h_decay_check(tr, tr.gamma_hat);
  auto j = envelope(s.config(), "frequency");
  j["gamma_hat"] = tr.gamma_hat;
  j["fit"] = {{"limit", tr.fit.a}, {"amplitude", tr.fit.b}, {"rate", tr.fit.rate}, {"t_ref", tr.fit.t_ref},
              {"rms", tr.fit.rms}, {"constant", tr.fit.constant}};
  j["window"] = {tr.window_lo, tr.window_hi};
  j["t_bar"] = tr.t_bar;
  j["stencil"] = s.config().stencil;
  j["Hprime_defect"] = check_Hprime(tr);
  j["Nprime_defect"] = check_Nprime(tr);
  j["nu1_max"] = tr.nu1_max;
  j["nu2_abs_integral"] = tr.nu2_abs_integral;
  j["nu2_decay_rate"] = tr.nu2_decay_rate;
  j["coercivity_margin"] = tr.coercivity_margin;
  j["sup_ratio"] = tr.sup_ratio;
  j["sup_ratio_late"] = tr.sup_ratio_late;
  j["max_tail_correction"] = tr.max_tail_correction;
  j["h_decay"] = {{"K1", hd.K1}, {"limit", hd.limit}, {"drift", hd.drift}, {"window_warning", hd.window_warning}};
  j["warnings"] = tr.warnings;
  out.add_json("frequency.json", j);
}

inline void add_pohozaev(Session& s, ArtifactSet& out) {
  const auto& tr = s.trace();
  std::vector<std::vector<double>> cols(9);
  for (std::size_t i = tr.i_lo; i <= tr.i_hi; ++i) {
    const auto p = pohozaev_terms_at(tr.terms, i);
    const double row[] = {tr.t[i], p.lhs, p.boundary_ds, p.h_term, p.f_term, p.gradF_term, p.F_volume, p.F_boundary, p.residual()};
    for (std::size_t c = 0; c < cols.size(); ++c) cols[c].push_back(row[c]);
  }
  out.add("pohozaev.csv", csv_table({"t", "lhs", "boundary_ds", "h_term", "f_term", "gradF_term", "F_volume", "F_boundary",
                                     "residual"},
                                    cols));
  auto j = envelope(s.config(), "pohozaev");
  j["max_residual"] = pohozaev_max_residual(tr);
  j["window"] = {tr.window_lo, tr.window_hi};
  j["stencil"] = s.config().stencil;
  out.add_json("pohozaev.json", j);
}

/// Radii for the convergence table: 11 points over the first half of the window.
inline std::vector<double> convergence_radii(const FrequencyTrace& tr) {
  std::vector<double> r;
  const double hi = tr.window_lo + 0.5 * (tr.window_hi - tr.window_lo);
  for (double t : lambda_grid(tr.window_lo, hi, 11)) r.push_back(std::exp(-t));
  return r;
}

struct AsymptoticsRun {
  AsymptoticProfile profile;
  std::vector<std::vector<double>> beta_by_radius;
  double r_independence = 0.0;
  ConvergenceReport convergence;
};

inline AsymptoticsRun run_asymptotics(Session& s) {
  const auto& v = s.solution().field;
  const auto& tr = s.trace();
  const int l0 = s.l0();
  const auto radii = s.config().resolved_r_eval();
  AsymptoticsRun out;
  out.profile = asymptotic_profile(v, s.config().problem, l0, radii.front(), lambda_grid(tr.window_lo, tr.window_hi, 21));
  for (double r : radii) {
    out.beta_by_radius.push_back(beta_representation(v, s.config().problem, r, l0).beta);
    out.r_independence = std::max(out.r_independence, relative_distance(out.beta_by_radius.back(), out.beta_by_radius.front()));
  }
  out.convergence = convergence_report(v, out.profile, convergence_radii(tr));
  return out;
}

inline void add_asymptotics(Session& s, ArtifactSet& out) {
  const auto a = run_asymptotics(s);
  const auto& p = a.profile;
  auto j = envelope(s.config(), "asymptotics");
  j["l0"] = p.l0;
  j["gamma"] = p.gamma;
  j["gamma_tilde"] = p.gamma_tilde;
  j["gamma_hat"] = s.trace().gamma_hat;
  j["beta"] = p.beta;
  j["beta_hat"] = p.beta_hat;
  j["beta_error"] = p.beta_error;
  j["agreement"] = p.agreement;
  j["r_eval"] = s.config().resolved_r_eval();
  j["beta_by_radius"] = a.beta_by_radius;
  j["r_independence"] = a.r_independence;
  j["limit_kernel"] = p.limit_kernel;
  j["nondegenerate"] = p.nondegenerate;
  j["value_decreasing"] = a.convergence.value_decreasing;
  j["gradient_decreasing"] = a.convergence.gradient_decreasing;
  j["pointwise_bound"] = a.convergence.pointwise_bound;
  j["warnings"] = p.warnings;
  out.add_json("asymptotics.json", j);
  std::vector<std::vector<double>> cols(4);
  for (const auto& row : a.convergence.rows) {
    cols[0].push_back(row.r);
    cols[1].push_back(row.value_distance);
    cols[2].push_back(row.gradient_distance);
    cols[3].push_back(row.rescaled_sup);
  }
  out.add("convergence.csv", csv_table({"r", "value_distance", "gradient_distance", "rescaled_sup"}, cols));
}

inline void add_blowup(Session& s, ArtifactSet& out) {
  const auto& tr = s.trace();
  const double t_window = std::min(2.0, 0.25 * (tr.window_hi - tr.window_lo));
  const auto bp = blowup_profile(s.solution().field, lambda_grid(tr.window_lo, tr.window_hi - t_window, 15), t_window);
  out.add("blowup.csv", csv_table({"lambda", "metric", "trace_norm"}, {bp.lambdas, bp.metric, bp.trace_norm}));
  auto j = envelope(s.config(), "blowup");
  j["l0"] = bp.l0;
  j["gamma"] = bp.gamma;
  j["t_window"] = bp.t_window;
  j["psi_modes"] = bp.psi_modes;
  bool decreasing = true;
  for (std::size_t i = 1; i < bp.metric.size(); ++i) decreasing = decreasing && bp.metric[i] <= 1.05 * bp.metric[i - 1];
  j["metric_decreasing"] = decreasing;
  out.add_json("blowup.json", j);
}

inline nlohmann::json inequality_json(const InequalityReport& r) {
  nlohmann::json j{{"id", r.id},
                   {"census", r.census},
                   {"worst_ratio", r.worst_ratio},
                   {"min_ratio", r.min_ratio},
                   {"passed", r.passed},
                   {"empirical_constant", r.empirical_constant}};
  j["asserted_constant"] = r.asserted_constant ? nlohmann::json(*r.asserted_constant) : nlohmann::json();
  j["witness"] = r.witness ? nlohmann::json(*r.witness) : nlohmann::json();
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

/// Grid for the inequality suite: the config's N and angular basis on R = 1.
inline GridPtr inequality_grid(const RunConfig& cfg) {
  DomainSpec d{cfg.problem.domain.n, 1.0};
  return make_grid(d, 12.0, cfg.dt, cfg.basis());
}

inline std::vector<InequalityReport> run_inequalities(const RunConfig& cfg) {
  const auto grid = inequality_grid(cfg);
  const int count = cfg.suite_fields;
  const int half = std::max(1, count / 2);
  std::vector<InequalityReport> out = hardy_boundary_suite(grid, cfg.seed, count, {0.5, 1.0, 2.0});
  for (auto& r : sobolev_suite(grid, cfg.seed + 1, half, {1.0, 2.0, 3.0})) out.push_back(r);
  out.push_back(equiv_norm_suite(grid, cfg.seed + 2, count));
  out.push_back(poincare_suite(grid, cfg.seed + 3, half, 2.0));
  out.push_back(hardy_form_suite(grid, cfg.seed + 4, half));
  return out;
}

inline void add_inequalities(const RunConfig& cfg, ArtifactSet& out) {
  auto j = envelope(cfg, "inequalities");
  j["reports"] = nlohmann::json::array();
  for (const auto& r : run_inequalities(cfg)) j["reports"].push_back(inequality_json(r));
  out.add_json("inequalities.json", j);
}

/// Everything a full run emits for one configuration.
inline ArtifactSet full_run(const RunConfig& cfg) {
  Session s(cfg);
  ArtifactSet out;
  add_solve(s, out);
  add_frequency(s, out);
  add_pohozaev(s, out);
  add_asymptotics(s, out);
  add_blowup(s, out);
  add_inequalities(s.config(), out);
  return out;
}

}  // namespace hardy
