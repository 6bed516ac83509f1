#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "common/error.hpp"
#include "common/rates.hpp"
#include "harness/config.hpp"
#include "harness/experiments.hpp"

using namespace mfg;
using namespace mfg::harness;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(schema_version: 1
model:
  hamiltonian: relativistic
  eps: 0.1
numerics:
  M: 16
  S: 16
  T: 0.25
experiment:
  m0: {kind: wrapped_gaussian, center: [0.3], width: 0.1}
  N: [2, 3, 4]
output:
  dir: out
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mfglab_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("configuration: defaults, parsed values and schema version") {
  const ExperimentConfig c = parse_config(kSmall);
  CHECK(c.numerics.M == 16);
  CHECK(c.numerics.T == 0.25);
  CHECK(c.numerics.tol == 1e-9);
  CHECK(c.experiment.m0.kind == "wrapped_gaussian");
  CHECK(c.experiment.N == std::vector<int>{2, 3, 4});
  CHECK_THROWS_AS(parse_config("model: {eps: 0.1}\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("schema_version: 2\n"), ConfigError);
}

TEST_CASE("configuration: unknown keys and ill-typed values are rejected") {
  CHECK_THROWS_AS(parse_config("schema_version: 1\nmodel: {epsilon: 0.1}\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("schema_version: 1\nplots: {}\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("schema_version: 1\nnumerics: {M: many}\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("schema_version: 1\nexperiment: {m0: {kind: cauchy}}\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("schema_version: 1\nnumerics: [1, 2]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("schema_version: 1\nmodel: {eps: [\n"), ConfigError);
}

TEST_CASE("configuration: environment overrides any key, case-insensitively") {
  const ExperimentConfig c = parse_config(kSmall, {{"MFGLAB_NUMERICS_M", "32"},
                                                   {"MFGLAB_EXPERIMENT_N", "[2, 4]"},
                                                   {"MFGLAB_MODEL_EPS", "0"},
                                                   {"MFGLAB_LOG", "debug"},
                                                   {"OTHER_VAR", "x"}});
  CHECK(c.numerics.M == 32);
  CHECK(c.experiment.N == std::vector<int>{2, 4});
  CHECK(c.model.eps == 0.0);
  CHECK_THROWS_AS(parse_config(kSmall, {{"MFGLAB_MODEL_COLOR", "red"}}), ConfigError);
}

TEST_CASE("configuration hash: stable, sensitive to results, blind to output and threads") {
  ExperimentConfig a = parse_config(kSmall);
  const std::string h = config_hash(a);
  CHECK(h.size() == 16);
  CHECK(h == config_hash(parse_config(kSmall)));
  a.output.dir = "elsewhere";
  a.threads = 4;
  CHECK(config_hash(a) == h);
  a.numerics.M = 32;
  CHECK(config_hash(a) != h);
}

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("measure descriptors") {
  const Grid g(1, 32);
  MeasureSpec u;
  CHECK(build_measure(u, g).density().sup_norm() == doctest::Approx(1.0));
  MeasureSpec mix;
  mix.kind = "mixture";
  mix.components = {{{0.25}, 0.05, 1.0}, {{0.75}, 0.05, 3.0}};
  const Measure m = build_measure(mix, g);
  CHECK(m.density().integral() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m[24] > 2.5 * m[8]);
}

TEST_CASE("slope fit: exact power laws") {
  const std::vector<double> N{2, 3, 4, 5, 8};
  std::vector<double> e1, e2;
  for (double n : N) {
    e1.push_back(0.7 / n);
    e2.push_back(0.7 / (n * n));
  }
  const SlopeFit f1 = fit_slope(N, e1), f2 = fit_slope(N, e2);
  CHECK_FALSE(f1.degenerate);
  CHECK(std::abs(f1.slope + 1.0) <= 1e-12);
  CHECK(std::abs(f2.slope + 2.0) <= 1e-12);
  CHECK(std::exp(f1.intercept) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("slope fit: noisy 1/N data lands within its own standard error") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<double> N, e;
  for (int n = 2; n <= 64; n *= 2)
    for (int rep = 0; rep < 4; ++rep) {
      N.push_back(n);
      e.push_back(std::exp(noise(rng)) / n);
    }
  const SlopeFit f = fit_slope(N, e);
  CHECK(f.stderr_ > 0.0);
  CHECK(std::abs(f.slope + 1.0) <= 2 * f.stderr_);
}

TEST_CASE("slope fit: degenerate tables") {
  CHECK(fit_slope(std::vector<double>{2, 3}, std::vector<double>{1, 0.5}).degenerate);
  CHECK(fit_slope(std::vector<double>{2, 3, 4}, std::vector<double>{0, 0, 0}).degenerate);
  CHECK(fit_slope(std::vector<double>{2, 2, 2}, std::vector<double>{1, 0.5, 0.2}).degenerate);
  const SlopeFit d = fit_slope(std::vector<double>{2, 3, 4}, std::vector<double>{0, 0, 0});
  CHECK(d.marker() == "degenerate");
  std::vector<RateRow> rows{{2, 0.5, 0, 0}, {4, 0.25, 0, 0}, {8, 0.125, 0, 0}};
  CHECK(fit_slope(rows).slope == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("residual sample design is shared across resolutions") {
  SolverConfig c;
  c.grid = Grid(1, 32);
  c.steps = 64;
  c.T = 0.5;
  SolverConfig f = c;
  f.grid = Grid(1, 64);
  f.steps = 128;
  const auto a = residual_samples(5, c), b = residual_samples(5, f);
  for (int k = 0; k < 5; ++k) {
    CHECK(a[std::size_t(k)].t == b[std::size_t(k)].t);
    CHECK(a[std::size_t(k)].x == b[std::size_t(k)].x);
  }
  CHECK(a[0].t == 0.125);
}

TEST_CASE("runs are deterministic and every artifact carries the configuration hash") {
  ExperimentConfig cfg = parse_config(kSmall);
  const fs::path d1 = scratch("det1"), d2 = scratch("det2");
  const RunOutcome r1 = run("solve-mfg", cfg, d1);
  cfg.threads = 2;
  const RunOutcome r2 = run("solve-mfg", cfg, d2);
  CHECK(r1.config_hash == r2.config_hash);
  REQUIRE(!r1.artifacts.empty());
  for (const auto& a : r1.artifacts) {
    CHECK(slurp(d1 / a) == slurp(d2 / a));
    if (a.ends_with(".csv")) CHECK(slurp(d1 / a).starts_with("# config_hash=" + r1.config_hash + "\n"));
  }
  CHECK(slurp(d1 / "manifest.json") == slurp(d2 / "manifest.json"));
  CHECK(slurp(d1 / "manifest.json").find(r1.config_hash) != std::string::npos);
  CHECK(fs::exists(d1 / "timing.json"));
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("converge on the decoupled model: zero errors and a degenerate slope") {
  ExperimentConfig cfg = parse_config(kSmall);
  cfg.model.hamiltonian = "constant";
  cfg.model.eps = 0.0;
  cfg.model.coupling = "zero";
  const fs::path d = scratch("trivial_converge");
  const RunOutcome r = run("converge", cfg, d);
  for (double e : r.summary.at("errors")) CHECK(e == 0.0);
  CHECK(r.summary.at("slope").at("marker") == "degenerate");
  CHECK(slurp(d / "converge_slope.csv").find("degenerate") != std::string::npos);
  fs::remove_all(d);
}

TEST_CASE("non-convergence writes an error manifest and a gap log") {
  ExperimentConfig cfg = parse_config(kSmall);
  cfg.numerics.max_iters = 2;
  const fs::path d = scratch("nonconv");
  try {
    run("solve-mfg", cfg, d);
    FAIL("expected non-convergence");
  } catch (const NonConvergence& e) {
    CHECK(e.code() == ErrorCode::NonConvergence);
  }
  const std::string manifest = slurp(d / "manifest.json");
  CHECK(manifest.find("\"error\"") != std::string::npos);
  const std::string log = slurp(d / "gap_log.csv");
  CHECK(log.find("iteration,gap\n1,") != std::string::npos);
  fs::remove_all(d);
}

TEST_CASE("unknown subcommand is a configuration error; budget overflow is a budget error") {
  ExperimentConfig cfg = parse_config(kSmall);
  const fs::path d = scratch("errors");
  CHECK_THROWS_AS(run("plot", cfg, d), ConfigError);
  cfg.experiment.N = {7};
  CHECK_THROWS_AS(run("nash", cfg, d), BudgetExceeded);
  fs::remove_all(d);
}

TEST_CASE("tree run persists a node bundle with its topology") {
  ExperimentConfig cfg = parse_config(kSmall);
  cfg.numerics.K = 2;
  cfg.numerics.S = 12;
  cfg.model.beta = 0.5;
  const fs::path d = scratch("tree");
  const RunOutcome r = run("tree", cfg, d);
  CHECK(fs::exists(d / "tree.json"));
  CHECK(fs::exists(d / "tree_u.bin"));
  CHECK(r.summary.contains("K2"));
  CHECK(r.summary.contains("K3"));
  fs::remove_all(d);
}
