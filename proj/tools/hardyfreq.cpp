// hardyfreq: solve, analyse and verify the borderline Hardy problem on a ball.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hardy/acceptance.hpp"
#include "hardy/config.hpp"
#include "hardy/pipeline.hpp"

namespace {

constexpr const char* kOutEnv = "HARDYFREQ_OUT";

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> n;
  std::optional<int> lmax;
  std::vector<std::string> overrides;
};

hardy::RunConfig resolve_config(const Flags& f) {
  hardy::RunConfig cfg;
  if (!f.config.empty()) cfg = hardy::load_config(f.config);
  if (const char* env = std::getenv(kOutEnv); env && *env) cfg.out_dir = env;
  if (f.n) cfg.problem.domain.n = *f.n;
  if (f.lmax) cfg.l_max = *f.lmax;
  for (const auto& kv : f.overrides) hardy::apply_override(cfg, kv);
  if (f.seed) cfg.seed = *f.seed;
  if (f.threads) cfg.threads = *f.threads;
  if (!f.out.empty()) cfg.out_dir = f.out;
  cfg.validate();
  if (cfg.threads > 0) hardy::set_thread_count(cfg.threads);
  return cfg;
}

void report(const std::vector<hardy::fs::path>& written) {
  for (const auto& p : written) fmt::print("wrote {}\n", p.string());
}

int run(const std::string& cmd, const Flags& flags) {
  if (cmd == "spectrum") {
    const int n = flags.n.value_or(3);
    const int lmax = flags.lmax.value_or(4);
    const auto csv = hardy::spectrum_csv(n, lmax);
    std::fputs(csv.c_str(), stdout);
    if (!flags.out.empty()) {
      hardy::ArtifactSet a;
      a.add("spectrum.csv", csv);
      a.commit(flags.out);
    }
    return 0;
  }
  auto cfg = resolve_config(flags);
  if (cmd == "verify") {
    const auto results = hardy::acceptance::run_all(cfg.out_dir, cfg.seed, [](const auto& r) {
      fmt::print("{}\n", hardy::acceptance::format_line(r));
      std::fflush(stdout);
    });
    hardy::ArtifactSet a;
    a.add_json("acceptance.json", hardy::acceptance::summary_json(results, cfg.seed));
    report(a.commit(cfg.out_dir));
    for (const auto& r : results)
      if (!r.passed) {
        fmt::print(stderr, "verify failed: criterion {} ({})\n", r.id, r.name);
        return 3;
      }
    return 0;
  }
  hardy::ArtifactSet a;
  if (cmd == "inequalities") {
    hardy::add_inequalities(cfg, a);
  } else {
    hardy::Session s(cfg);
    if (cmd == "solve") hardy::add_solve(s, a);
    else if (cmd == "frequency") hardy::add_frequency(s, a);
    else if (cmd == "pohozaev") hardy::add_pohozaev(s, a);
    else if (cmd == "asymptotics") hardy::add_asymptotics(s, a);
    else if (cmd == "blowup") hardy::add_blowup(s, a);
  }
  report(a.commit(cfg.out_dir));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-function analysis of -Lu - ((N-2)/2)^2 u/|x|^2 = h u + f(u) on a ball"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  app.add_option("--config", flags.config, "YAML configuration file");
  app.add_option("--out", flags.out, fmt::format("output directory (else ${}, else config out_dir)", kOutEnv));
  app.add_option("--seed", flags.seed, "seed for the randomized suites");
  app.add_option("--threads", flags.threads, "worker threads (else $HARDY_THREADS)");
  app.add_option("--set", flags.overrides, "override a config key: --set key=value")->allow_extra_args(false);
  app.add_option("--n", flags.n, "dimension N");
  app.add_option("--lmax", flags.lmax, "largest spherical-harmonic degree");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"spectrum", "print the (l, lambda_l, m_l) table as CSV"},
      {"solve", "solve the semilinear problem, write the field and the solve report"},
      {"frequency", "frequency trace N(t) = D/H with its fit and diagnostics"},
      {"pohozaev", "Pohozaev identity terms and residual over the analysis window"},
      {"asymptotics", "leading degree, beta coefficients and the convergence table"},
      {"blowup", "blow-up rescalings and their distance to the limit profile"},
      {"inequalities", "randomized checks of the functional inequalities"},
      {"verify", "run the acceptance matrix"}};
  std::string chosen;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->callback([&chosen, name = name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return run(chosen, flags);
  } catch (const hardy::Error& e) {
    fmt::print(stderr, "{}: {}\n", e.exit_code() == 2 ? "configuration error" : "numerical failure", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return 3;
  }
}
