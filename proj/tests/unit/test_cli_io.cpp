#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "occlab/cli.hpp"
#include "occlab/config.hpp"
#include "occlab/error.hpp"
#include "occlab/io.hpp"

using namespace occlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("occlab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "occlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const auto p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

const char* kSmallRate = R"({
  "experiment": "rate-study",
  "process": {"kind": "bm"},
  "function": "gauss:0:1",
  "n_ladder": [16, 32, 64, 128],
  "replications": 30,
  "oracle_factor": 8,
  "seed": 5
})";

}  // namespace

TEST_CASE("config defaults and process objects") {
  const auto c = parse_config_text(R"({"experiment": "rate-study", "process": "bm", "function": "indicator:0:1"})");
  CHECK(c.kind == ExperimentKind::RateStudy);
  CHECK(c.function_id == "indicator:0:1");
  CHECK(c.replications == 2000);
  CHECK(c.oracle_factor == 64);
  CHECK(c.n_ladder == std::vector<std::size_t>{64, 128, 256, 512, 1024, 2048, 4096});
  CHECK(c.resolved_n_fine() == 64 * 4096);
  CHECK(c.drop_smallest);

  const auto f = parse_config_text(R"({"experiment": "rate-study",
      "process": {"kind": "fbm", "hurst": 0.3, "horizon": 2.0}, "function": "hat:0:1"})");
  CHECK(f.process.kind() == ProcessKind::FractionalBM);
  CHECK(hurst_of(f.process) == 0.3);
  CHECK(f.process.horizon == 2.0);

  const auto o = parse_config_text(R"({"experiment": "clt-study",
      "process": {"kind": "diffusion", "model": "ou", "theta": 1.0, "sigma": 1.0},
      "function": "gauss:0:1", "n_ladder": [1024]})");
  CHECK(o.process.kind() == ProcessKind::ItoDiffusion);
}

TEST_CASE("config errors") {
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"experiment": "rate-study", "process": "bm", "function": "gauss:0:1",
      "n_ladder": [64, 96], "n_fine": 1024})"),
                       doctest::Contains("does not divide"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config_text(R"({"experiment": "rate-study", "process": {"kind": "levy-flight"}, "function": "gauss:0:1"})"),
      doctest::Contains("valid kinds: bm, diffusion, fbm, stable, poisson"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config_text(R"({"experiment": "rate-study", "process": "bm", "function": "gauss:0:1", "replicatons": 5})"),
      doctest::Contains("replicatons"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"experiment": "rate-study", "process": {"kind": "fbm"}, "function": "gauss:0:1"})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config("/nonexistent/occlab.json"), ConfigError);
}

TEST_CASE("config hash ignores key order and whitespace") {
  const auto a = config_hash(R"({"experiment": "rate-study", "process": "bm", "seed": 3})");
  const auto b = config_hash("{\"seed\":3,\n \"process\":\"bm\",\"experiment\":\"rate-study\"}");
  const auto c = config_hash(R"({"experiment": "rate-study", "process": "bm", "seed": 4})");
  CHECK(a == b);
  CHECK(a != c);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("plot data") {
  const auto dir = scratch("plot");
  std::vector<LadderPoint> rows;
  for (std::size_t n : {64u, 128u, 256u}) {
    LadderPoint p;
    p.n = n;
    p.dt = 1.0 / static_cast<double>(n);
    p.l2_error = 0.3 * std::pow(p.dt, 0.75);
    rows.push_back(p);
  }
  RateFit fit;
  fit.slope = 0.75;
  fit.intercept = std::log(0.3);
  const auto path = (dir / "loglog.csv").string();
  emit_plot_data(rows, fit, path);
  const auto data = read_plot_data(path);
  CHECK(data.header == std::vector<std::string>{"log10_dt", "log10_error", "fit_log10_error",
                                                "slope", "intercept_log10"});
  REQUIRE(data.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(data.rows[i][3] == 0.75);
    CHECK(std::abs(data.rows[i][0] - std::log10(rows[i].dt)) <= 1e-12);
    CHECK(std::abs(data.rows[i][1] - std::log10(rows[i].l2_error)) <= 1e-12);
    CHECK(std::abs(data.rows[i][2] - data.rows[i][1]) <= 1e-12);
  }
  CHECK_THROWS_AS(emit_plot_data({}, fit, path), ParameterError);
  CHECK_THROWS_AS(write_text("/nonexistent/dir/x.txt", "x"), IoError);
}

TEST_CASE("JSON dump keeps 17 digits and sorts keys") {
  nlohmann::json j{{"b", 0.1}, {"a", 1}, {"c", std::nan("")}};
  const auto text = dump_json(j, -1);
  CHECK(text == R"({"a":1,"b":0.10000000000000001,"c":null})");
}

TEST_CASE("rate-study writes its outputs and reruns byte-identically") {
  const auto dir = scratch("rate");
  const auto cfg = write_config(dir, kSmallRate);
  const auto a = dir / "a", b = dir / "b";
  auto r = cli({"rate-study", "--config", cfg.string(), "--out", a.string()});
  REQUIRE_MESSAGE(r.code == kExitOk, r.err);
  for (const char* f : {"samples.csv", "loglog.csv", "summary.json", "manifest.json"}) {
    CHECK_MESSAGE(fs::exists(a / f), f);
  }
  r = cli({"rate-study", "--config", cfg.string(), "--out", b.string(), "--threads", "2"});
  REQUIRE(r.code == kExitOk);
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  CHECK(slurp(a / "samples.csv") == slurp(b / "samples.csv"));
  CHECK(slurp(a / "loglog.csv") == slurp(b / "loglog.csv"));

  const auto summary = nlohmann::json::parse(slurp(a / "summary.json"));
  CHECK(summary.contains("predicted_exponent"));
  CHECK(summary.contains("deviation"));
  CHECK(summary["csv_schema_version"] == kCsvSchemaVersion);
  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["config_hash"].get<std::string>() == hex64(config_hash(kSmallRate)));
  CHECK(manifest["master_seed"] == 5);
  CHECK(manifest["tool_version"] == std::string(kToolVersion));
  CHECK(slurp(a / "samples.csv").rfind("n,dt,T,replicate,estimator,error\n", 0) == 0);
}

TEST_CASE("output directory falls back to the environment") {
  const auto dir = scratch("env");
  const auto cfg = write_config(dir, kSmallRate);
  const auto target = dir / "from_env";
  setenv("OCCLAB_OUTPUT_DIR", target.c_str(), 1);
  const auto r = cli({"rate-study", "--config", cfg.string()});
  unsetenv("OCCLAB_OUTPUT_DIR");
  CHECK(r.code == kExitOk);
  CHECK(fs::exists(target / "summary.json"));
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  auto cfg = write_config(dir, R"({"experiment": "rate-study", "process": {"kind": "levy-flight"}, "function": "gauss:0:1"})");
  auto r = cli({"rate-study", "--config", cfg.string(), "--out", (dir / "o").string()});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("valid kinds") != std::string::npos);
  CHECK(cli({"no-such-command"}).code == kExitConfig);
  CHECK(cli({"rate-study"}).code == kExitConfig);
  CHECK(cli({"predict-rate", "--process", "bm", "--smoothness", "1.5"}).code == kExitConfig);

  // a ladder that outruns the oracle is an oracle failure
  cfg = write_config(dir, R"({"experiment": "rate-study", "process": "bm", "function": "gauss:0:1",
      "n_ladder": [16, 32, 64], "oracle_factor": 8, "n_fine": 256, "replications": 2})");
  r = cli({"rate-study", "--config", cfg.string(), "--out", (dir / "o2").string()});
  CHECK(r.code == kExitGate);

  // an output path that is a regular file
  std::ofstream(dir / "blocker") << "x";
  cfg = write_config(dir, kSmallRate);
  r = cli({"rate-study", "--config", cfg.string(), "--out", (dir / "blocker").string()});
  CHECK(r.code == kExitFailure);
}

TEST_CASE("predict-rate output") {
  auto r = cli({"predict-rate", "--process", "fbm", "--hurst", "0.3", "--smoothness", "0.49"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("delta_exponent 0.647") != std::string::npos);
  r = cli({"predict-rate", "--process", "bm", "--function", "indicator:0:1", "--json"});
  CHECK(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["delta_exponent"].get<double>() == doctest::Approx(0.745));
  r = cli({"predict-rate", "--process", "fbm", "--hurst", "0.5", "--context", "local-time"});
  CHECK(r.out.find("delta_exponent 0.25") != std::string::npos);
}

TEST_CASE("simulate is deterministic and writes a readable path") {
  const auto dir = scratch("sim");
  for (const char* sub : {"a", "b"}) {
    const auto r = cli({"simulate", "--process", "fbm", "--hurst", "0.7", "--n", "64", "--seed",
                        "11", "--out", (dir / sub).string()});
    REQUIRE(r.code == kExitOk);
  }
  CHECK(slurp(dir / "a" / "path.csv") == slurp(dir / "b" / "path.csv"));
  std::ifstream in(dir / "a" / "path.csv");
  const auto grid = PathGrid::read_csv(in);
  CHECK(grid.intervals() == 64);
  CHECK(grid.value(0) == 0.0);
}

TEST_CASE("the installed binary runs") {
  const auto dir = scratch("bin");
  const std::string cmd = std::string(OCCLAB_CLI_PATH) + " predict-rate --process bm -s 0.49 > " +
                          (dir / "out.txt").string();
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(slurp(dir / "out.txt").find("delta_exponent 0.745") != std::string::npos);
  const std::string bad = std::string(OCCLAB_CLI_PATH) + " predict-rate --process levy 2>/dev/null";
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == kExitConfig);
}

TEST_CASE("every shipped config parses and has a rate or an explicit coverage error") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(OCCLAB_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    INFO(entry.path().filename().string());
    ExperimentConfig c;
    REQUIRE_NOTHROW(c = parse_config(entry.path().string()));
    if (c.kind == ExperimentKind::LocalTimeStudy) {
      RateOptions o;
      o.rho = c.rho;
      CHECK_NOTHROW(theoretical_rate(c.process, 0.0, ErrorContext::LocalTime, o));
      continue;
    }
    const auto f = resolve_function(c);
    try {
      const auto p = theoretical_rate(c.process, prediction_smoothness(c.process, f),
                                      ErrorContext::L2Error, c.rate_options);
      CHECK(p.delta_exponent > 0.0);
    } catch (const CoverageError&) {
      // explicit, allowed
    }
  }
  CHECK(seen >= 10);
}
