#include "occlab/io.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "occlab/config.hpp"
#include "occlab/error.hpp"
#include "occlab/format.hpp"

namespace occlab {

using nlohmann::json;

namespace {

void dump_into(const json& v, int indent, int depth, std::string& out) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_into(it.value(), indent, depth + 1, out);
      }
      newline(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        newline(depth + 1);
        dump_into(v[i], indent, depth + 1, out);
      }
      newline(depth);
      out += ']';
      return;
    }
    case json::value_t::number_float: {
      const double x = v.get<double>();
      out += std::isfinite(x) ? format_double(x) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError(path + ": write failed");
}

json ladder_json(const std::vector<LadderPoint>& rows) {
  json a = json::array();
  for (const auto& p : rows) {
    a.push_back({{"n", p.n},
                 {"dt", p.dt},
                 {"l2_error", p.l2_error},
                 {"standard_error", p.standard_error},
                 {"mean_error", p.mean_error}});
  }
  return a;
}

json config_summary(const ExperimentConfig& c) {
  json j{{"experiment", std::string(to_string(c.kind))},
         {"process", c.process_label},
         {"process_kind", std::string(to_string(c.process.kind()))},
         {"dim", c.process.dim},
         {"horizon", c.process.horizon},
         {"function", c.function_id},
         {"replications", c.replications},
         {"oracle_factor", c.oracle_factor},
         {"seed", c.seed.master_seed},
         {"csv_schema_version", kCsvSchemaVersion},
         {"tool_version", std::string(kToolVersion)}};
  if (c.kind != ExperimentKind::TScalingStudy) {
    j["n_ladder"] = c.n_ladder;
    j["n_fine"] = c.resolved_n_fine();
  }
  if (c.process.kind() == ProcessKind::FractionalBM) j["hurst"] = hurst_of(c.process);
  return j;
}

}  // namespace

std::string dump_json(const json& value, int indent) {
  std::string out;
  dump_into(value, indent, 0, out);
  if (indent >= 0) out += '\n';
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

void write_samples_csv(const std::string& path, const std::vector<ErrorSample>& samples) {
  auto out = open_out(path);
  out << "n,dt,T,replicate,estimator,error\n";
  for (const auto& s : samples) {
    out << s.n << ',' << format_double(s.dt) << ',' << format_double(s.horizon) << ','
        << s.replicate << ',' << to_string(s.estimator) << ',' << format_double(s.error) << '\n';
  }
  finish(out, path);
}

void emit_loglog(const std::vector<double>& x, const std::vector<double>& error,
                 const RateFit& fit, const std::string& x_name, const std::string& path) {
  if (x.empty()) throw ParameterError("emit_plot_data: empty table");
  if (x.size() != error.size()) throw ParameterError("emit_plot_data: column lengths differ");
  auto out = open_out(path);
  const double ln10 = std::log(10.0);
  const double intercept10 = fit.intercept / ln10;
  out << "log10_" << x_name << ",log10_error,fit_log10_error,slope,intercept_log10\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log10(x[i]);
    out << format_double(lx) << ',' << format_double(std::log10(error[i])) << ','
        << format_double(fit.slope * lx + intercept10) << ',' << format_double(fit.slope) << ','
        << format_double(intercept10) << '\n';
  }
  finish(out, path);
}

void emit_plot_data(const std::vector<LadderPoint>& rows, const RateFit& fit,
                    const std::string& path) {
  std::vector<double> x, e;
  for (const auto& p : rows) {
    x.push_back(p.dt);
    e.push_back(p.l2_error);
  }
  emit_loglog(x, e, fit, "dt", path);
}

PlotData read_plot_data(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open for reading");
  PlotData data;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  std::stringstream header(line);
  for (std::string cell; std::getline(header, cell, ',');) data.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::vector<double> values;
    for (std::string cell; std::getline(row, cell, ',');) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError(path + ": bad number '" + cell + "'");
      }
    }
    if (values.size() != data.header.size()) throw IoError(path + ": ragged row");
    data.rows.push_back(std::move(values));
  }
  return data;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json to_json(const RunManifest& m) {
  return {{"config_hash", m.config_hash},
          {"tool_version", m.tool_version},
          {"master_seed", m.master_seed},
          {"command", m.command},
          {"started_at", m.started_at},
          {"finished_at", m.finished_at},
          {"outputs", m.outputs},
          {"csv_schema_version", kCsvSchemaVersion},
          {"config", m.config}};
}

json to_json(const RatePrediction& p) {
  return {{"delta_exponent", p.delta_exponent},
          {"T_exponent", p.T_exponent},
          {"log_factor", p.log_factor},
          {"source", p.source}};
}

json to_json(const RateFit& f) {
  return {{"slope", f.slope},
          {"intercept", f.intercept},
          {"slope_stderr", f.slope_stderr},
          {"r_squared", f.r_squared},
          {"points_used", f.points_used},
          {"residuals", f.residuals}};
}

json summary_json(const ExperimentConfig& c, const RateStudyResult& r) {
  json j = config_summary(c);
  j["ladder"] = ladder_json(r.table.rows);
  j["fit"] = to_json(r.fit);
  j["drop_smallest"] = c.drop_smallest;
  if (r.prediction) {
    j["prediction"] = to_json(*r.prediction);
    j["predicted_exponent"] = r.prediction->delta_exponent;
    j["deviation"] = r.deviation;
  } else {
    j["prediction"] = nullptr;
    j["coverage_note"] = r.coverage_note;
  }
  if (r.table.overflow_fraction > 0.0) j["overflow_fraction"] = r.table.overflow_fraction;
  return j;
}

json summary_json(const ExperimentConfig& c, const CltDiagnostics& r) {
  json j = config_summary(c);
  j["n"] = r.n;
  j["excluded_count"] = r.excluded_count;
  j["valid"] = r.valid;
  j["ks_distance"] = r.ks_distance;
  j["mean"] = r.mean;
  j["variance"] = r.variance;
  j["riemann"] = {{"mean", r.riemann_mean},
                  {"variance", r.riemann_variance},
                  {"second_moment", r.riemann_second_moment}};
  j["pooled"] = {{"trapezoid_second_moment", r.pooled_trapezoid_second_moment},
                 {"riemann_second_moment", r.pooled_riemann_second_moment},
                 {"empirical_ratio", r.empirical_ratio},
                 {"predicted_ratio", r.predicted_ratio}};
  return j;
}

json summary_json(const ExperimentConfig& c, const EfficiencyResult& r) {
  json j = config_summary(c);
  j["inner_samples"] = r.inner_samples;
  json pts = json::array();
  for (const auto& p : r.points) {
    pts.push_back({{"n", p.n},
                   {"dt", p.dt},
                   {"riemann_error", p.riemann_error},
                   {"trapezoid_error", p.trapezoid_error},
                   {"bridge_error", p.bridge_error},
                   {"bridge_family_error", p.bridge_family_error},
                   {"predicted_floor", p.predicted_floor},
                   {"riemann_stderr", p.riemann_stderr},
                   {"trapezoid_stderr", p.trapezoid_stderr},
                   {"bridge_stderr", p.bridge_stderr},
                   {"floor_stderr", p.floor_stderr},
                   {"family_violations", p.family_violations}});
  }
  j["points"] = pts;
  return j;
}

json summary_json(const ExperimentConfig& c, const LocalTimeResult& r) {
  json j = config_summary(c);
  j.erase("function");
  j["rho"] = r.rho;
  j["exponent"] = r.exponent;
  j["oracle_bandwidth"] = r.oracle_bandwidth;
  j["max_oracle_sensitivity"] = r.max_sensitivity;
  j["gate_passed"] = r.gate_passed;
  j["prediction"] = to_json(r.prediction);
  json levels = json::array();
  for (const auto& lv : r.levels) {
    json pts = json::array();
    for (const auto& p : lv.points) {
      pts.push_back({{"n", p.n},
                     {"dt", p.dt},
                     {"bandwidth", p.bandwidth},
                     {"l2_error", p.l2_error},
                     {"standard_error", p.standard_error},
                     {"l2_error_half_oracle", p.l2_error_half_oracle},
                     {"oracle_sensitivity", p.oracle_sensitivity},
                     {"pathwise_oracle_change", p.pathwise_oracle_change}});
    }
    levels.push_back({{"level", lv.level},
                      {"points", pts},
                      {"fit", to_json(lv.fit)},
                      {"deviation", std::abs(lv.fit.slope - r.prediction.delta_exponent)}});
  }
  j["levels"] = levels;
  return j;
}

json summary_json(const ExperimentConfig& c, const TScalingResult& r) {
  json j = config_summary(c);
  j["fixed_dt"] = c.fixed_dt;
  j["t_ladder"] = c.t_ladder;
  j["window"] = r.window;
  j["overflow_flag"] = r.overflow_flag;
  json pts = json::array();
  for (const auto& p : r.points) {
    pts.push_back({{"T", p.horizon},
                   {"n", p.n},
                   {"l2_error", p.l2_error},
                   {"standard_error", p.standard_error},
                   {"overflow_fraction", p.overflow_fraction}});
  }
  j["points"] = pts;
  j["fit"] = to_json(r.fit);
  if (r.prediction) {
    j["prediction"] = to_json(*r.prediction);
    j["deviation"] = std::abs(r.fit.slope - r.prediction->T_exponent);
  }
  return j;
}

void write_path_csv(const std::string& path, const PathGrid& grid) {
  auto out = open_out(path);
  grid.write_csv(out);
  finish(out, path);
}

}  // namespace occlab
