#include "occlab/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "occlab/config.hpp"
#include "occlab/error.hpp"
#include "occlab/format.hpp"
#include "occlab/harness.hpp"
#include "occlab/io.hpp"
#include "occlab/simulate.hpp"
#include "occlab/theory.hpp"

namespace occlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Parameter:
    case ErrorKind::Coverage:
    case ErrorKind::Capability:
    case ErrorKind::Model:
    case ErrorKind::Alignment:
      return kExitConfig;
    case ErrorKind::Numeric:
    case ErrorKind::Oracle:
    case ErrorKind::Resolution:
    case ErrorKind::Fit:
    case ErrorKind::Simulation:
      return kExitGate;
    case ErrorKind::Io:
      return kExitFailure;
  }
  return kExitFailure;
}

std::string short_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// Process flags shared by simulate, predict-rate and eval-bound.
struct ProcessFlags {
  std::string kind = "bm";
  std::string model = "ou";
  double hurst = 0.5;
  double stability = 2.0;
  double scale = 0.5;
  double rate = 1.0;
  std::string jumps = "gaussian";
  double jump_mean = 0.0;
  std::size_t dim = 1;
  double horizon = 1.0;

  void add_to(CLI::App* app) {
    app->add_option("--process", kind, "bm, diffusion, fbm, stable or poisson")->required();
    app->add_option("--model", model, "diffusion model: ou, constant or sine");
    app->add_option("--hurst", hurst, "Hurst index of fbm");
    app->add_option("--stability", stability, "stability index gamma of stable");
    app->add_option("--scale", scale, "scale c of stable");
    app->add_option("--rate", rate, "jump intensity of poisson");
    app->add_option("--jumps", jumps, "jump law of poisson: gaussian, point or rademacher");
    app->add_option("--jump-mean", jump_mean, "mean of gaussian jumps");
    app->add_option("--dim", dim, "dimension");
    app->add_option("--horizon,-T", horizon, "time horizon");
  }

  ProcessSpec build() const {
    json node{{"kind", kind}, {"dim", dim}, {"horizon", horizon}};
    if (kind == "diffusion") node["model"] = model;
    if (kind == "fbm") node["hurst"] = hurst;
    if (kind == "stable") {
      node["stability"] = stability;
      node["scale"] = scale;
    }
    if (kind == "poisson") {
      node["rate"] = rate;
      node["jumps"] = json{{"law", jumps}};
      if (jumps == "gaussian") node["jumps"]["mean"] = jump_mean;
    }
    return process_from_json(node, "--process");
  }
};

std::string output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("OCCLAB_OUTPUT_DIR"); env && *env) return env;
  return "out";
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir + ": cannot create directory: " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string command_line(int argc, const char* const* argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
  return s;
}

struct StudyFlags {
  std::string config;
  std::string out;
  std::size_t threads = 0;
  std::size_t replications = 0;

  void add_to(CLI::App* app) {
    app->add_option("--config,-c", config, "experiment config (JSON)")->required();
    app->add_option("--out,-o", out, "output directory");
    app->add_option("--threads", threads, "worker threads (0 = all cores)");
    app->add_option("--replications,-R", replications, "override the replication count");
  }
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err, std::string command)
      : out_(out), err_(err), command_(std::move(command)) {}

  int study(const StudyFlags& flags, ExperimentKind kind) {
    const std::string text = read_file(flags.config);
    ExperimentConfig c = parse_config_text(text);
    if (c.kind != kind) {
      throw ConfigError("experiment: config is for " + std::string(to_string(c.kind)) +
                        ", not " + std::string(to_string(kind)));
    }
    if (flags.threads) c.threads = flags.threads;
    if (flags.replications) c.replications = flags.replications;

    const std::string dir = output_dir(flags.out);
    make_dir(dir);
    RunManifest m;
    m.config_hash = hex64(config_hash(text));
    m.tool_version = std::string(kToolVersion);
    m.master_seed = c.seed.master_seed;
    m.command = command_;
    m.started_at = utc_timestamp();
    m.config = json::parse(text);

    int code = kExitOk;
    std::vector<std::string> files;
    const auto file = [&](const std::string& name) {
      files.push_back(name);
      return (fs::path(dir) / name).string();
    };
    switch (kind) {
      case ExperimentKind::RateStudy: {
        const auto r = rate_study(c, true);
        write_samples_csv(file("samples.csv"), r.table.samples);
        emit_plot_data(r.table.rows, r.fit, file("loglog.csv"));
        write_text(file("summary.json"), dump_json(summary_json(c, r)));
        out_ << "fitted slope " << short_num(r.fit.slope) << " +- "
             << short_num(r.fit.slope_stderr);
        if (r.prediction) {
          out_ << ", predicted " << short_num(r.prediction->delta_exponent) << " ("
               << r.prediction->source << ")";
        } else {
          out_ << ", no prediction: " << r.coverage_note;
        }
        out_ << '\n';
        break;
      }
      case ExperimentKind::CLTStudy: {
        const auto r = clt_experiment(c);
        std::string csv = "statistic\n";
        for (double z : r.statistics) csv += format_double(z) + '\n';
        write_text(file("statistics.csv"), csv);
        write_text(file("summary.json"), dump_json(summary_json(c, r)));
        out_ << "ks " << short_num(r.ks_distance) << ", mean " << short_num(r.mean)
             << ", variance " << short_num(r.variance) << ", excluded " << r.excluded_count
             << '\n';
        if (!r.valid) {
          err_ << "clt-study: more than 5% of replicates had degenerate AVAR; run flagged invalid\n";
          code = kExitGate;
        }
        break;
      }
      case ExperimentKind::EfficiencyStudy: {
        const auto r = efficiency_experiment(c);
        std::string csv =
            "n,dt,riemann_error,trapezoid_error,bridge_error,bridge_family_error,predicted_floor\n";
        for (const auto& p : r.points) {
          csv += std::to_string(p.n) + ',' + format_double(p.dt) + ',' +
                 format_double(p.riemann_error) + ',' + format_double(p.trapezoid_error) + ',' +
                 format_double(p.bridge_error) + ',' + format_double(p.bridge_family_error) +
                 ',' + format_double(p.predicted_floor) + '\n';
        }
        write_text(file("efficiency.csv"), csv);
        write_text(file("summary.json"), dump_json(summary_json(c, r)));
        const auto& last = r.points.back();
        out_ << "n " << last.n << ": trapezoid / floor "
             << short_num(last.trapezoid_error / last.predicted_floor) << '\n';
        break;
      }
      case ExperimentKind::LocalTimeStudy: {
        const auto r = local_time_experiment(c, false);
        std::string csv =
            "level,n,dt,bandwidth,l2_error,standard_error,l2_error_half_oracle,oracle_sensitivity\n";
        for (const auto& lv : r.levels) {
          for (const auto& p : lv.points) {
            csv += format_double(lv.level) + ',' + std::to_string(p.n) + ',' +
                   format_double(p.dt) + ',' + format_double(p.bandwidth) + ',' +
                   format_double(p.l2_error) + ',' + format_double(p.standard_error) + ',' +
                   format_double(p.l2_error_half_oracle) + ',' +
                   format_double(p.oracle_sensitivity) + '\n';
          }
        }
        write_text(file("local_time.csv"), csv);
        std::vector<LadderPoint> rows;
        for (const auto& p : r.levels.front().points) {
          rows.push_back({p.n, p.dt, p.l2_error, p.standard_error, 0.0});
        }
        emit_plot_data(rows, r.levels.front().fit, file("loglog.csv"));
        write_text(file("summary.json"), dump_json(summary_json(c, r)));
        for (const auto& lv : r.levels) {
          out_ << "level " << short_num(lv.level) << ": slope " << short_num(lv.fit.slope)
               << ", predicted " << short_num(r.prediction.delta_exponent) << '\n';
        }
        if (!r.gate_passed) {
          err_ << "local-time: oracle halving moved the L2 error by "
               << short_num(100.0 * r.max_sensitivity) << "% (limit 10%)\n";
          code = kExitGate;
        }
        break;
      }
      case ExperimentKind::TScalingStudy: {
        const auto r = t_scaling_experiment(c);
        std::vector<double> x, e;
        for (const auto& p : r.points) {
          x.push_back(p.horizon);
          e.push_back(p.l2_error);
        }
        emit_loglog(x, e, r.fit, "T", file("loglog.csv"));
        write_text(file("summary.json"), dump_json(summary_json(c, r)));
        out_ << "fitted T exponent " << short_num(r.fit.slope) << " +- "
             << short_num(r.fit.slope_stderr) << '\n';
        if (r.overflow_flag) {
          err_ << "t-scaling: more than 1% of paths left the identity window\n";
        }
        break;
      }
    }
    m.finished_at = utc_timestamp();
    files.push_back("manifest.json");
    m.outputs = files;
    write_text((fs::path(dir) / "manifest.json").string(), dump_json(to_json(m)));
    return code;
  }

  int simulate_cmd(const ProcessFlags& pf, std::size_t n, std::uint64_t seed,
                   std::uint64_t replicate, const std::string& out_flag) {
    const ProcessSpec spec = pf.build();
    const PathGrid path = simulate(spec, n, SeedPolicy{seed}, replicate);
    const std::string dir = output_dir(out_flag);
    make_dir(dir);
    RunManifest m;
    m.tool_version = std::string(kToolVersion);
    m.master_seed = seed;
    m.command = command_;
    m.started_at = utc_timestamp();
    const std::string file = (fs::path(dir) / "path.csv").string();
    write_path_csv(file, path);
    m.finished_at = utc_timestamp();
    m.outputs = {"path.csv", "manifest.json"};
    m.config = json{{"process", pf.kind}, {"n", n}, {"seed", seed}, {"replicate", replicate}};
    m.config_hash = hex64(config_hash(m.config.dump()));
    write_text((fs::path(dir) / "manifest.json").string(), dump_json(to_json(m)));
    out_ << file << '\n';
    return kExitOk;
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
  std::string command_;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Occupation-time functional simulation and verification lab", "occlab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  ProcessFlags sim_pf;
  std::size_t sim_n = 1024;
  std::uint64_t sim_seed = 0, sim_rep = 0;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "write one simulated path to path.csv");
  sim_pf.add_to(sim);
  sim->add_option("--n", sim_n, "number of grid intervals");
  sim->add_option("--seed", sim_seed, "master seed");
  sim->add_option("--replicate", sim_rep, "replicate index");
  sim->add_option("--out,-o", sim_out, "output directory");

  StudyFlags rate_f, clt_f, lt_f, eff_f, ts_f;
  rate_f.add_to(app.add_subcommand("rate-study", "L2 error ladder and fitted rate"));
  clt_f.add_to(app.add_subcommand("clt-study", "feasible CLT diagnostics"));
  lt_f.add_to(app.add_subcommand("local-time", "local-time estimator rate study"));
  eff_f.add_to(app.add_subcommand("efficiency", "estimators against the efficiency floor"));
  ts_f.add_to(app.add_subcommand("t-scaling", "error growth in the horizon at fixed dt"));

  ProcessFlags pr_pf;
  double pr_s = -1.0, pr_rho = 0.0;
  std::string pr_context = "l2", pr_function;
  bool pr_sharp = false, pr_json = false;
  auto* pr = app.add_subcommand("predict-rate", "print the predicted error exponents");
  pr_pf.add_to(pr);
  auto* s_opt = pr->add_option("--smoothness,-s", pr_s, "Sobolev index s of the function");
  pr->add_option("--function,-f", pr_function, "function id; its smoothness is used")
      ->excludes(s_opt);
  pr->add_option("--context", pr_context, "l2 or local-time");
  pr->add_option("--rho", pr_rho, "slack of the local-time exponent");
  pr->add_flag("--sharp-indicator", pr_sharp, "exact 3/4 for indicators under BM");
  pr->add_flag("--json", pr_json, "print JSON");

  ProcessFlags eb_pf;
  std::string eb_function = "gauss:0:1";
  std::size_t eb_n = 8;
  FourierBoundOptions eb_opts;
  auto* eb = app.add_subcommand("eval-bound", "evaluate the Fourier-domain error bound (C = 1)");
  eb_pf.add_to(eb);
  eb->add_option("--function,-f", eb_function, "function id with a Fourier transform");
  eb->add_option("--n", eb_n, "number of observations");
  eb->add_option("--truncation", eb_opts.truncation, "frequency box half width");
  eb->add_option("--panel-width", eb_opts.panel_width, "frequency panel width");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  Runner runner(out, err, command_line(argc, argv));
  set_fbm_decision_log([&err](const std::string& line) { err << "occlab: " << line << '\n'; });
  struct Unhook {
    ~Unhook() { set_fbm_decision_log(nullptr); }
  } unhook;
  try {
    if (sim->parsed()) return runner.simulate_cmd(sim_pf, sim_n, sim_seed, sim_rep, sim_out);
    if (app.got_subcommand("rate-study")) return runner.study(rate_f, ExperimentKind::RateStudy);
    if (app.got_subcommand("clt-study")) return runner.study(clt_f, ExperimentKind::CLTStudy);
    if (app.got_subcommand("local-time")) {
      return runner.study(lt_f, ExperimentKind::LocalTimeStudy);
    }
    if (app.got_subcommand("efficiency")) {
      return runner.study(eff_f, ExperimentKind::EfficiencyStudy);
    }
    if (app.got_subcommand("t-scaling")) return runner.study(ts_f, ExperimentKind::TScalingStudy);
    if (pr->parsed()) {
      const ProcessSpec spec = pr_pf.build();
      double s = pr_s;
      if (!pr_function.empty()) {
        if (!is_valid_function_id(pr_function)) {
          throw ConfigError("--function: invalid function id '" + pr_function + "'");
        }
        s = prediction_smoothness(spec, parse_function_id(pr_function, 1.0));
      }
      ErrorContext ctx = ErrorContext::L2Error;
      if (pr_context == "local-time") {
        ctx = ErrorContext::LocalTime;
      } else if (pr_context != "l2") {
        throw ConfigError("--context: expected l2 or local-time");
      }
      if (ctx == ErrorContext::L2Error && s < 0.0) {
        throw ConfigError("--smoothness: required (or give --function)");
      }
      const RatePrediction p = theoretical_rate(spec, s, ctx, RateOptions{pr_sharp, pr_rho});
      if (pr_json) {
        out << dump_json(to_json(p));
      } else {
        out << "delta_exponent " << short_num(p.delta_exponent) << '\n'
            << "T_exponent " << short_num(p.T_exponent) << '\n'
            << "log_factor " << (p.log_factor ? "true" : "false") << '\n'
            << "source: " << p.source << '\n';
      }
      return kExitOk;
    }
    if (eb->parsed()) {
      const ProcessSpec spec = eb_pf.build();
      if (!is_valid_function_id(eb_function)) {
        throw ConfigError("--function: invalid function id '" + eb_function + "'");
      }
      const double v = fourier_bound_evaluator(spec, parse_function_id(eb_function), eb_n,
                                               spec.horizon, eb_opts);
      out << format_double(v) << '\n';
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "occlab: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "occlab: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace occlab
