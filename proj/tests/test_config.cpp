#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "hardy/config.hpp"
#include "hardy/pipeline.hpp"

using namespace hardy;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("hardy_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Config, ParsesFlatYaml) {
  const auto c = parse_config_string(R"(
n: 4
radius: 0.8
kappa: -0.2
p: 2.5
boundary_modes: [[0, 1, 1.0], [2, 1, -0.5]]
l_max: 3
dt: 0.02
stencil: central2
r_eval: [0.8, 0.6]
seed: 42
)");
  EXPECT_EQ(c.problem.domain.n, 4);
  EXPECT_DOUBLE_EQ(c.problem.domain.radius, 0.8);
  EXPECT_DOUBLE_EQ(c.problem.nonlinearity.kappa, -0.2);
  ASSERT_EQ(c.problem.boundary.size(), 2u);
  EXPECT_EQ(c.problem.boundary[1].l, 2);
  EXPECT_EQ(c.resolved_stencil(), Stencil::central2);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_NEAR(c.resolved_t_max(), -std::log(0.8) + 12.0, 1e-15);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, UnknownKeyRejected) {
  EXPECT_EQ(message_of([] { parse_config_string("lmax: 3\n"); }), "unknown key 'lmax'");
  RunConfig c;
  EXPECT_EQ(message_of([&] { apply_override(c, "nn=3"); }), "unknown key 'nn'");
}

TEST(Config, BadValues) {
  EXPECT_NE(message_of([] { parse_config_string("dt: fast\n"); }).find("key 'dt'"), std::string::npos);
  EXPECT_NE(message_of([] { parse_config_string("boundary_modes: [[1, 1]]\n"); }).find("[l, m, coef]"), std::string::npos);
  EXPECT_NE(message_of([] { parse_config_string("- 1\n- 2\n"); }).find("mapping"), std::string::npos);
  EXPECT_NE(message_of([] { parse_config_string("n: [\n"); }).find("malformed"), std::string::npos);
  RunConfig c;
  EXPECT_NE(message_of([&] { apply_override(c, "novalue"); }).find("key=value"), std::string::npos);
}

TEST(Config, Overrides) {
  RunConfig c = reference_config();
  apply_override(c, "kappa=0.25");
  apply_override(c, "boundary_modes=[[2, 1, 3.5]]");
  apply_override(c, "fd_oracle=true");
  EXPECT_DOUBLE_EQ(c.problem.nonlinearity.kappa, 0.25);
  EXPECT_EQ(c.problem.boundary[0].l, 2);
  EXPECT_TRUE(c.picard.fd_oracle);
}

TEST(Config, SupercriticalExponentMessage) {
  RunConfig c = reference_config();
  apply_override(c, "p=7");
  EXPECT_EQ(message_of([&] { c.validate(); }), "p must satisfy 2 < p < 6");
}

TEST(Config, ValidationNamesKeys) {
  RunConfig c;
  c.dt = -1.0;
  EXPECT_NE(message_of([&] { c.validate(); }).find("dt"), std::string::npos);
  c = {};
  c.stencil = "fancy";
  EXPECT_NE(message_of([&] { c.validate(); }).find("stencil"), std::string::npos);
  c = {};
  c.basis_mode = "full";
  c.problem.domain.n = 4;
  EXPECT_FALSE(message_of([&] { c.validate(); }).empty());
}

TEST(Config, HashIsCanonical) {
  const auto a = reference_config();
  auto b = reference_config();
  b.out_dir = "elsewhere";
  b.threads = 7;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.problem.nonlinearity.p = 3.5;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, JsonRoundTrip) {
  // the resolved JSON is valid YAML and parses back to the same configuration
  auto c = reference_config();
  c.window_hi = 9.0;
  const auto back = parse_config_string(config_json(c).dump());
  EXPECT_EQ(config_json(back), config_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
}

TEST(Config, LoadFromFile) {
  const auto dir = scratch("cfg");
  fs::create_directories(dir);
  std::ofstream(dir / "c.yaml") << "n: 5\nl_max: 2\n";
  EXPECT_EQ(load_config((dir / "c.yaml").string()).problem.domain.n, 5);
  EXPECT_NE(message_of([&] { load_config((dir / "missing.yaml").string()); }).find("cannot read"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Artifacts, AtomicWrite) {
  const auto dir = scratch("atomic");
  write_atomic(dir / "sub" / "a.txt", "hello\n");
  std::ifstream in(dir / "sub" / "a.txt");
  std::string s;
  std::getline(in, s);
  EXPECT_EQ(s, "hello");
  EXPECT_FALSE(fs::exists(dir / "sub" / "a.txt.partial"));
  fs::remove_all(dir);
}

TEST(Artifacts, SpectrumCsv) {
  EXPECT_EQ(spectrum_csv(3, 3), "l,lambda,multiplicity\n0,0,1\n1,2,3\n2,6,5\n3,12,7\n");
  EXPECT_EQ(spectrum_csv(4, 1), "l,lambda,multiplicity\n0,0,1\n1,3,4\n");
}

TEST(Artifacts, EnvelopeCarriesHashAndVersion) {
  const auto c = reference_config();
  const auto j = envelope(c, "solve");
  EXPECT_EQ(j.at("config_hash"), config_hash(c));
  EXPECT_EQ(j.at("version"), kVersion);
  EXPECT_EQ(j.at("kind"), "solve");
}

TEST(Pipeline, SolveArtifacts) {
  Session s(reference_config());
  ArtifactSet a;
  add_solve(s, a);
  add_frequency(s, a);
  for (const char* name : {"field.csv", "field.json", "solve.json", "frequency.csv", "frequency.json"})
    EXPECT_TRUE(a.files.contains(name)) << name;
  const auto j = nlohmann::json::parse(a.files.at("frequency.json"));
  EXPECT_NEAR(j.at("gamma_hat").get<double>(), std::sqrt(2.0), 1e-3);
}
