#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scint/dataset.hpp"
#include "scint/error.hpp"
#include "scint/eval.hpp"
#include "scint/ismr.hpp"
#include "scint/model.hpp"
#include "scint/preprocess.hpp"
#include "scint/solar.hpp"

namespace scint {

struct PipelineSeeds {
  std::uint64_t balance = 1;
  std::uint64_t split = 2;
  std::uint64_t grid = 3;
};

struct SolarConfig {
  SolarSource source = SolarSource::LocalFile;
  std::filesystem::path path;
  std::string endpoint = SolarClientOptions{}.endpoint;
};

/// Declarative pipeline configuration. Relative paths resolve against
/// base_dir (the directory holding the config file).
struct PipelineConfig {
  std::vector<std::string> inputs;  // paths or glob patterns
  ColumnMap columns;
  bool repair_week_rollover = false;
  std::int64_t rollover_reference_week = 2048;
  std::vector<Constellation> constellations = {Constellation::GPS, Constellation::GLONASS, Constellation::GALILEO,
                                               Constellation::BEIDOU};
  double elevation_threshold_deg = 20.0;
  std::int64_t window_seconds = 300;
  std::size_t min_window_samples = 180;
  SeverityThresholds thresholds;
  std::size_t per_class = 9000;
  double train_fraction = 0.8;
  bool stratified = true;
  PipelineSeeds seeds;
  ModelSpec model{ModelKind::Gbdt, {{"learning_rate", 0.3}, {"max_depth", 9}}};
  std::optional<GridSpec> grid;
  SolarConfig solar;
  std::filesystem::path output_dir = "out";
  bool parallel = true;

  std::filesystem::path base_dir;
  /// "key=value" overrides applied on top of the file, in order.
  std::vector<std::string> overrides;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  /// Throws InvalidConfig.
  void validate() const;
  /// Canonical form; base_dir and overrides are not part of it.
  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j, std::filesystem::path base_dir = {});
  /// Reads a config file, applies overrides, and resolves paths against the
  /// file's directory.
  static PipelineConfig load(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
};

/// Sets a dotted key ("model.params.max_depth") to a value parsed as JSON,
/// falling back to a plain string. Throws InvalidConfig on a malformed
/// assignment.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// 16 hex digits of FNV-1a 64 over the canonical config JSON.
std::string config_hash(const PipelineConfig& config);

/// An error raised inside a named pipeline stage. what() reads
/// "stage <name>: <Kind>: <cause>".
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause);
  StageError(std::string stage, const std::exception& cause);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Expands globs (sorted matches) and checks plain paths exist.
std::vector<std::filesystem::path> expand_inputs(const PipelineConfig& config);

struct StageRecord {
  std::string name;
  std::size_t items_in = 0;
  std::size_t items_out = 0;
  double seconds = 0.0;
};

struct IngestStageResult {
  std::vector<std::filesystem::path> files;
  std::vector<RawIsmrRecord> records;
  IngestReport report;
};

struct PreprocessStageResult {
  Dataset dataset;
  nlohmann::json counts = nlohmann::json::object();
  SolarParseReport solar_report;
};

/// Runs the pipeline stages one at a time, recording them in order.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config, std::shared_ptr<HttpTransport> transport = nullptr);

  const PipelineConfig& config() const noexcept { return config_; }
  const std::string& hash() const noexcept { return hash_; }
  const std::vector<StageRecord>& stages() const noexcept { return stages_; }

  /// Reads inputs, then elevation mask and constellation filter.
  IngestStageResult ingest();
  /// S4 correction, UTC conversion, smoothing, solar join, labels, balance.
  PreprocessStageResult preprocess(IngestStageResult ingested);
  std::pair<Dataset, Dataset> split(const Dataset& data);
  GridSearchResult grid_search(const Dataset& train);
  TrainedModel train(const Dataset& train, const ModelSpec& spec);
  EvalReport evaluate(const TrainedModel& model, const Dataset& test);

 private:
  template <typename F>
  auto stage(const std::string& name, std::size_t items_in, F&& body);

  PipelineConfig config_;
  std::string hash_;
  std::vector<std::filesystem::path> inputs_;
  std::shared_ptr<HttpTransport> transport_;
  std::vector<StageRecord> stages_;
};

struct PipelineResult {
  std::string config_hash;
  Dataset dataset;
  Dataset train;
  Dataset test;
  std::optional<GridSearchResult> grid;
  TrainedModel model;
  EvalReport report;
  IngestReport ingest_report;
  std::vector<StageRecord> stages;
  std::filesystem::path output_dir;
};

/// Full run. Artifacts written to the output directory:
///   dataset.csv, dataset.provenance.json, ingest_report.json,
///   [grid_search.json, grid_search.csv], model.json, eval_report.json,
///   eval_report.csv, confusion_heatmap.csv, class_metrics.csv,
///   provenance.json (the only file with wall-clock data).
PipelineResult run_pipeline(const PipelineConfig& config, std::shared_ptr<HttpTransport> transport = nullptr);

// ---- Artifact formats ------------------------------------------------------

/// eval_report.csv: metric,class,value rows; undefined values are written
/// as "undefined".
std::string eval_report_csv(const EvalReport& report);

/// Writes confusion_heatmap.csv (truth_class,predicted_class,count) and
/// class_metrics.csv (class,support,predicted,precision,recall). A non-empty
/// hash is written as a leading "# config_hash: ..." line.
void emit_plot_data(const EvalReport& report, const std::filesystem::path& out_dir,
                    const std::string& config_hash = {});

/// Rebuilds a report from the two plot CSV files.
EvalReport read_plot_data(const std::filesystem::path& out_dir);

}  // namespace scint
