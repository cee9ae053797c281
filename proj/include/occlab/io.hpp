#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "occlab/harness.hpp"
#include "occlab/path_grid.hpp"
#include "occlab/theory.hpp"

namespace occlab {

/// Bumped whenever a CSV header or column meaning changes. Recorded in
/// summary.json and manifest.json.
inline constexpr int kCsvSchemaVersion = 1;

/// JSON text with every non-integer number written with 17 significant
/// digits. Object keys come out sorted.
std::string dump_json(const nlohmann::json& value, int indent = 2);

/// I/O error naming the path on failure.
void write_text(const std::string& path, const std::string& text);

/// Header: n,dt,T,replicate,estimator,error
void write_samples_csv(const std::string& path, const std::vector<ErrorSample>& samples);

/// Header: log10_dt,log10_error,fit_log10_error,slope,intercept_log10.
/// One row per ladder point; the fitted line is evaluated at each dt.
/// Parameter error on an empty table.
void emit_plot_data(const std::vector<LadderPoint>& rows, const RateFit& fit,
                    const std::string& path);
/// Same layout for any log-log pair; `x_name` replaces "dt" in the header.
void emit_loglog(const std::vector<double>& x, const std::vector<double>& error,
                 const RateFit& fit, const std::string& x_name, const std::string& path);

struct PlotData {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
PlotData read_plot_data(const std::string& path);

struct RunManifest {
  std::string config_hash;
  std::string tool_version;
  std::uint64_t master_seed = 0;
  std::string command;
  std::string started_at;   // UTC, ISO 8601
  std::string finished_at;
  std::vector<std::string> outputs;
  nlohmann::json config;  // the document as parsed
};

nlohmann::json to_json(const RunManifest& manifest);
std::string utc_timestamp();

nlohmann::json to_json(const RatePrediction& p);
nlohmann::json to_json(const RateFit& fit);

// summary.json bodies. No timestamps, so reruns are byte-identical.
nlohmann::json summary_json(const ExperimentConfig& c, const RateStudyResult& r);
nlohmann::json summary_json(const ExperimentConfig& c, const CltDiagnostics& r);
nlohmann::json summary_json(const ExperimentConfig& c, const EfficiencyResult& r);
nlohmann::json summary_json(const ExperimentConfig& c, const LocalTimeResult& r);
nlohmann::json summary_json(const ExperimentConfig& c, const TScalingResult& r);

/// CSV of a sampled path (PathGrid::write_csv) to a file.
void write_path_csv(const std::string& path, const PathGrid& grid);

}  // namespace occlab
