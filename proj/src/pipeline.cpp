#include "scint/pipeline.hpp"

#include <glob.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "scint/rng.hpp"

namespace scint {

namespace {

std::string_view source_name(SolarSource s) { return s == SolarSource::Remote ? "remote" : "local"; }

SolarSource source_from(const std::string& s) {
  if (s == "remote") return SolarSource::Remote;
  if (s == "local") return SolarSource::LocalFile;
  throw Error(ErrorKind::InvalidConfig, "solar.source must be 'local' or 'remote', got '" + s + "'");
}

bool is_glob(const std::string& s) { return s.find_first_of("*?[") != std::string::npos; }

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  return format_iso8601(UtcTimestamp{std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count()});
}

// Holds <dir>/.scint.lock for the duration of a run.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& dir) : path_(dir / ".scint.lock") {
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (f == nullptr) {
      throw Error(ErrorKind::IoError, "output directory " + dir.string() + " is in use (remove " + path_.string() +
                                          " if no run is active)");
    }
    std::fclose(f);
  }
  ~OutputLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

std::string hash_comment(const std::string& hash) { return "# config_hash: " + hash + "\n"; }

std::string cell_or_undefined(const std::optional<double>& v) { return v ? format_double(*v) : "undefined"; }

std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.starts_with('#')) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw Error(ErrorKind::MalformedField, path.string() + " has no header");
  return rows;
}

template <typename T>
T parse_number(const std::string& s, const std::string& what) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw Error(ErrorKind::MalformedField, what + ": '" + s + "'");
  return v;
}

std::optional<double> parse_optional(const std::string& s, const std::string& what) {
  if (s == "undefined") return std::nullopt;
  return parse_number<double>(s, what);
}

}  // namespace

// ---- Config ----------------------------------------------------------------

std::filesystem::path PipelineConfig::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

void PipelineConfig::validate() const {
  if (inputs.empty()) throw Error(ErrorKind::InvalidConfig, "no input files configured");
  columns.validate();
  if (constellations.empty()) throw Error(ErrorKind::InvalidConfig, "constellation list is empty");
  if (std::find(constellations.begin(), constellations.end(), Constellation::OTHER) != constellations.end()) {
    throw Error(ErrorKind::InvalidConfig, "constellation OTHER has no feature encoding and cannot be selected");
  }
  if (!(elevation_threshold_deg >= 0.0 && elevation_threshold_deg <= 90.0)) {
    throw Error(ErrorKind::InvalidConfig, "elevation_threshold_deg must lie in [0, 90]");
  }
  if (window_seconds <= 0) throw Error(ErrorKind::InvalidConfig, "window_seconds must be positive");
  if (!(thresholds.low > 0.0 && thresholds.low < thresholds.high)) {
    throw Error(ErrorKind::InvalidConfig, "class thresholds must satisfy 0 < low < high");
  }
  if (per_class == 0) throw Error(ErrorKind::InvalidConfig, "per_class must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "train_fraction must lie strictly between 0 and 1");
  }
  if (grid) grid->validate();
  if (solar.source == SolarSource::LocalFile && solar.path.empty()) {
    throw Error(ErrorKind::InvalidConfig, "solar.path is required for a local solar source");
  }
}

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json names = nlohmann::json::array();
  for (auto c : constellations) names.push_back(std::string(to_string(c)));
  return nlohmann::json{
      {"inputs", inputs},
      {"columns", columns},
      {"repair_week_rollover", repair_week_rollover},
      {"rollover_reference_week", rollover_reference_week},
      {"constellations", names},
      {"elevation_threshold_deg", elevation_threshold_deg},
      {"window_seconds", window_seconds},
      {"min_window_samples", min_window_samples},
      {"thresholds", {{"low", thresholds.low}, {"high", thresholds.high}}},
      {"per_class", per_class},
      {"train_fraction", train_fraction},
      {"stratified", stratified},
      {"seeds", {{"balance", seeds.balance}, {"split", seeds.split}, {"grid", seeds.grid}}},
      {"model", model.to_json()},
      {"grid", grid ? grid->to_json() : nlohmann::json(nullptr)},
      {"solar", {{"source", source_name(solar.source)}, {"path", solar.path.string()}, {"endpoint", solar.endpoint}}},
      {"output_dir", output_dir.string()},
      {"parallel", parallel},
  };
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j, std::filesystem::path base_dir) {
  static const std::vector<std::string> known = {
      "inputs",     "columns",      "repair_week_rollover", "rollover_reference_week", "constellations",
      "elevation_threshold_deg", "window_seconds", "min_window_samples", "thresholds", "per_class",
      "train_fraction", "stratified", "seeds", "model", "grid", "solar", "output_dir", "parallel"};
  if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, "config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorKind::InvalidConfig, "unknown config key '" + key + "'");
    }
  }
  PipelineConfig c;
  c.base_dir = std::move(base_dir);
  try {
    if (j.contains("inputs")) {
      const auto& in = j.at("inputs");
      c.inputs = in.is_string() ? std::vector<std::string>{in.get<std::string>()} : in.get<std::vector<std::string>>();
    }
    if (j.contains("columns")) c.columns = j.at("columns").get<ColumnMap>();
    c.repair_week_rollover = j.value("repair_week_rollover", c.repair_week_rollover);
    c.rollover_reference_week = j.value("rollover_reference_week", c.rollover_reference_week);
    if (j.contains("constellations")) {
      c.constellations.clear();
      for (const auto& n : j.at("constellations")) c.constellations.push_back(constellation_from_string(n.get<std::string>()));
    }
    c.elevation_threshold_deg = j.value("elevation_threshold_deg", c.elevation_threshold_deg);
    c.window_seconds = j.value("window_seconds", c.window_seconds);
    c.min_window_samples = j.value("min_window_samples", c.min_window_samples);
    if (j.contains("thresholds")) {
      const auto& t = j.at("thresholds");
      if (t.is_array()) {
        c.thresholds = {t.at(0).get<double>(), t.at(1).get<double>()};
      } else {
        c.thresholds.low = t.value("low", c.thresholds.low);
        c.thresholds.high = t.value("high", c.thresholds.high);
      }
    }
    c.per_class = j.value("per_class", c.per_class);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.stratified = j.value("stratified", c.stratified);
    if (j.contains("seeds")) {
      const auto& s = j.at("seeds");
      c.seeds.balance = s.value("balance", c.seeds.balance);
      c.seeds.split = s.value("split", c.seeds.split);
      c.seeds.grid = s.value("grid", c.seeds.grid);
    }
    if (j.contains("model")) c.model = ModelSpec::from_json(j.at("model"));
    if (j.contains("grid") && !j.at("grid").is_null()) c.grid = GridSpec::from_json(j.at("grid"));
    if (j.contains("solar")) {
      const auto& s = j.at("solar");
      c.solar.source = source_from(s.value("source", std::string("local")));
      c.solar.path = s.value("path", std::string{});
      c.solar.endpoint = s.value("endpoint", c.solar.endpoint);
    }
    c.output_dir = j.value("output_dir", c.output_dir.string());
    c.parallel = j.value("parallel", c.parallel);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("config: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, path.string() + ": " + e.what());
  }
  for (const auto& o : overrides) apply_override(j, o);
  auto c = from_json(j, path.parent_path());
  c.overrides = overrides;
  return c;
}

void apply_override(nlohmann::json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorKind::InvalidConfig, "override '" + assignment + "' is not of the form key=value");
  }
  const auto key = assignment.substr(0, eq);
  const auto text = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    value = text;
  }
  nlohmann::json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const auto part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw Error(ErrorKind::InvalidConfig, "override key '" + key + "' has an empty component");
    if (node->is_null()) *node = nlohmann::json::object();
    if (!node->is_object()) throw Error(ErrorKind::InvalidConfig, "override key '" + key + "' descends into a non-object");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

std::string config_hash(const PipelineConfig& config) {
  auto j = config.to_json();
  // Neither changes any artifact byte.
  j.erase("output_dir");
  j.erase("parallel");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

StageError::StageError(std::string stage, const Error& cause)
    : Error(Preformatted{}, cause.kind(), "stage " + stage + ": " + cause.what()), stage_(std::move(stage)) {}

StageError::StageError(std::string stage, const std::exception& cause)
    : Error(Preformatted{}, dynamic_cast<const std::filesystem::filesystem_error*>(&cause) ? ErrorKind::IoError
                                                                                        : ErrorKind::InvalidConfig,
            "stage " + stage + ": " + cause.what()),
      stage_(std::move(stage)) {}

std::vector<std::filesystem::path> expand_inputs(const PipelineConfig& config) {
  std::vector<std::filesystem::path> out;
  for (const auto& input : config.inputs) {
    const auto resolved = config.resolve(input).string();
    if (is_glob(input)) {
      glob_t g{};
      const int rc = ::glob(resolved.c_str(), 0, nullptr, &g);
      if (rc == 0) {
        for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
      }
      globfree(&g);
      if (rc != 0) throw Error(ErrorKind::IoError, "input pattern '" + resolved + "' matches no files");
    } else {
      if (!std::filesystem::is_regular_file(resolved)) {
        throw Error(ErrorKind::IoError, "input file '" + resolved + "' not found");
      }
      out.emplace_back(resolved);
    }
  }
  return out;
}

// ---- Stages ----------------------------------------------------------------

template <typename F>
auto Pipeline::stage(const std::string& name, std::size_t items_in, F&& body) {
  StageRecord rec{name, items_in, 0, 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto result = body(rec);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stages_.push_back(rec);
    return result;
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  } catch (const std::exception& e) {
    throw StageError(name, e);
  }
}

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  stage("config", 0, [&](StageRecord&) {
    config_.validate();
    hash_ = config_hash(config_);
    inputs_ = expand_inputs(config_);
    if (config_.solar.source == SolarSource::LocalFile && !std::filesystem::exists(config_.resolve(config_.solar.path))) {
      throw Error(ErrorKind::IoError, "solar index file " + config_.resolve(config_.solar.path).string() + " does not exist");
    }
    return 0;
  });
}

IngestStageResult Pipeline::ingest() {
  auto result = stage("ingest", config_.inputs.size(), [&](StageRecord& rec) {
    IngestStageResult r;
    r.files = inputs_;
    IngestOptions options;
    options.columns = config_.columns;
    options.repair_week_rollover = config_.repair_week_rollover;
    options.rollover_reference_week = config_.rollover_reference_week;
    auto ingested = read_ismr_files(r.files, options, config_.parallel);
    r.records = std::move(ingested.records);
    r.report = std::move(ingested.report);
    rec.items_out = r.records.size();
    return r;
  });
  result.records = stage("elevation_mask", result.records.size(), [&](StageRecord& rec) {
    auto kept = apply_elevation_mask(result.records, config_.elevation_threshold_deg);
    rec.items_out = kept.size();
    return kept;
  });
  result.records = stage("constellation_filter", result.records.size(), [&](StageRecord& rec) {
    auto kept = filter_constellations(result.records, config_.constellations);
    rec.items_out = kept.size();
    return kept;
  });
  return result;
}

PreprocessStageResult Pipeline::preprocess(IngestStageResult ingested) {
  PreprocessStageResult out;
  const auto& records = ingested.records;
  const auto n = static_cast<std::ptrdiff_t>(records.size());
  const bool parallel = config_.parallel;

  auto obs = stage("s4_correction", records.size(), [&](StageRecord& rec) {
    std::vector<CorrectedObservation> v(records.size());
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto& r = records[static_cast<std::size_t>(i)];
      auto& o = v[static_cast<std::size_t>(i)];
      o.svid = r.svid;
      o.constellation = svid_to_constellation(r.svid);
      o.azimuth_deg = r.azimuth_deg;
      o.elevation_deg = r.elevation_deg;
      o.s4_corrected = correct_s4(r.s4_total, r.s4_noise);
    }
    rec.items_out = v.size();
    return v;
  });
  stage("utc_conversion", obs.size(), [&](StageRecord& rec) {
    const auto& table = LeapSecondTable::embedded();
    bool failed = false;
    std::string first_error;
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto& t = records[static_cast<std::size_t>(i)].time;
      try {
        const auto gps_seconds = t.week_number * kSecondsPerWeek + t.time_of_week;
        obs[static_cast<std::size_t>(i)].utc = gps_to_utc(t, table.offset_at_gps(gps_seconds));
      } catch (const Error& e) {
#pragma omp critical(scint_utc_error)
        if (!failed) {
          failed = true;
          first_error = e.what();
        }
      }
    }
    if (failed) throw Error(ErrorKind::InvalidTime, first_error);
    rec.items_out = obs.size();
    return 0;
  });
  const auto smoothed = stage("smoothing", obs.size(), [&](StageRecord& rec) {
    sort_for_smoothing(obs);
    const SmoothingOptions options{config_.window_seconds, config_.min_window_samples};
    auto r = parallel ? smooth_windows_parallel(obs, options) : smooth_windows_serial(obs, options);
    if (r.samples.empty()) {
      throw Error(ErrorKind::EmptyDataset, "no window kept (" + std::to_string(r.dropped_windows) +
                                               " dropped below min_window_samples=" +
                                               std::to_string(config_.min_window_samples) + ")");
    }
    out.counts["windows"] = r.samples.size();
    out.counts["dropped_windows"] = r.dropped_windows;
    rec.items_out = r.samples.size();
    return r.samples;
  });
  obs.clear();
  obs.shrink_to_fit();

  const auto joined = stage("solar_join", smoothed.size(), [&](StageRecord& rec) {
    auto [lo, hi] = std::minmax_element(smoothed.begin(), smoothed.end(), [](const auto& a, const auto& b) {
      return a.window_start_utc.seconds_since_unix_epoch < b.window_start_utc.seconds_since_unix_epoch;
    });
    IndexQuery query{utc_date(lo->window_start_utc), utc_date(hi->window_start_utc), config_.solar.source,
                     config_.resolve(config_.solar.path)};
    SolarClientOptions options;
    options.endpoint = config_.solar.endpoint;
    options.cache_dir = cache_dir_from_env();
    auto transport = transport_ ? transport_ : std::make_shared<CurlTransport>();
    SolarClient client(options, transport);
    auto indices = client.load(query);
    out.solar_report = indices.report;
    auto r = join_solar(smoothed, indices.table);
    out.counts["joined"] = r.joined.size();
    out.counts["join_dropped"] = r.dropped;
    rec.items_out = r.joined.size();
    return r.joined;
  });

  const auto labeled = stage("labeling", joined.size(), [&](StageRecord& rec) {
    auto v = label_samples(joined, config_.thresholds);
    std::vector<std::size_t> per(3, 0);
    for (const auto& s : v) ++per[static_cast<std::size_t>(s.label)];
    out.counts["labeled_per_class"] = per;
    rec.items_out = v.size();
    return v;
  });

  out.dataset = stage("balancing", labeled.size(), [&](StageRecord& rec) {
    auto ds = balance_classes(labeled, config_.per_class, config_.seeds.balance);
    rec.items_out = ds.rows();
    return ds;
  });
  auto& prov = out.dataset.provenance();
  for (const auto& f : ingested.files) {
    prov.source_files.push_back(config_.base_dir.empty() ? f.string() : f.lexically_proximate(config_.base_dir).string());
  }
  out.counts["records_after_filter"] = records.size();
  prov.extra = {{"config_hash", hash_},
                {"counts", out.counts},
                {"thresholds", {config_.thresholds.low, config_.thresholds.high}},
                {"window_seconds", config_.window_seconds},
                {"min_window_samples", config_.min_window_samples},
                {"elevation_threshold_deg", config_.elevation_threshold_deg}};
  return out;
}

std::pair<Dataset, Dataset> Pipeline::split(const Dataset& data) {
  return stage("split", data.rows(), [&](StageRecord& rec) {
    const auto s = holdout_split(data.labels(), data.n_classes(), config_.train_fraction, config_.seeds.split,
                                 config_.stratified);
    auto parts = apply_split(data, s);
    rec.items_out = parts.first.rows() + parts.second.rows();
    return parts;
  });
}

GridSearchResult Pipeline::grid_search(const Dataset& train) {
  if (!config_.grid) throw StageError("grid_search", Error(ErrorKind::InvalidConfig, "no grid configured"));
  return stage("grid_search", train.rows(), [&](StageRecord& rec) {
    auto r = scint::grid_search(train, *config_.grid, config_.seeds.grid, config_.parallel);
    rec.items_out = r.table.size();
    return r;
  });
}

TrainedModel Pipeline::train(const Dataset& train, const ModelSpec& spec) {
  return stage("train", train.rows(), [&](StageRecord& rec) {
    auto m = fit_model(train, spec, config_.parallel);
    rec.items_out = 1;
    return m;
  });
}

EvalReport Pipeline::evaluate(const TrainedModel& model, const Dataset& test) {
  return stage("evaluate", test.rows(), [&](StageRecord& rec) {
    auto r = scint::evaluate(model, test, config_.parallel);
    rec.items_out = r.matrix.total();
    return r;
  });
}

// ---- Full run --------------------------------------------------------------

PipelineResult run_pipeline(const PipelineConfig& config, std::shared_ptr<HttpTransport> transport) {
  const auto started = now_iso8601();
  Pipeline p(config, std::move(transport));
  PipelineResult result;
  result.config_hash = p.hash();
  result.output_dir = config.resolve(config.output_dir);
  {
    std::error_code ec;
    std::filesystem::create_directories(result.output_dir, ec);
    if (ec) {
      throw StageError("config", Error(ErrorKind::IoError, "cannot create " + result.output_dir.string() + ": " + ec.message()));
    }
  }
  std::optional<OutputLock> lock;
  try {
    lock.emplace(result.output_dir);
  } catch (const Error& e) {
    throw StageError("config", e);
  }

  auto ingested = p.ingest();
  result.ingest_report = ingested.report;
  auto pre = p.preprocess(std::move(ingested));
  result.dataset = std::move(pre.dataset);
  std::tie(result.train, result.test) = p.split(result.dataset);
  ModelSpec spec = config.model;
  if (config.grid) {
    result.grid = p.grid_search(result.train);
    spec = result.grid->best;
  }
  result.model = p.train(result.train, spec);
  result.report = p.evaluate(result.model, result.test);

  const auto& hash = result.config_hash;
  const auto& dir = result.output_dir;
  std::vector<StageRecord> stages = p.stages();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    write_text_file_atomic(dir / "dataset.csv", hash_comment(hash) + result.dataset.to_csv());
    auto prov = result.dataset.provenance().to_json();
    prov["config_hash"] = hash;
    prov["rows"] = result.dataset.rows();
    prov["split"] = {{"train_rows", result.train.rows()},
                     {"test_rows", result.test.rows()},
                     {"train_fraction", config.train_fraction},
                     {"stratified", config.stratified},
                     {"seed", config.seeds.split}};
    write_text_file_atomic(dir / "dataset.provenance.json", prov.dump(1) + "\n");

    auto ingest_json = result.ingest_report.to_json();
    ingest_json["config_hash"] = hash;
    ingest_json["solar"] = pre.solar_report.to_json();
    write_text_file_atomic(dir / "ingest_report.json", ingest_json.dump(1) + "\n");

    if (result.grid) {
      auto g = result.grid->to_json();
      g["config_hash"] = hash;
      write_text_file_atomic(dir / "grid_search.json", g.dump(1) + "\n");
      write_text_file_atomic(dir / "grid_search.csv", hash_comment(hash) + result.grid->to_csv());
    }

    auto model_json = result.model.to_json();
    model_json["config_hash"] = hash;
    write_text_file_atomic(dir / "model.json", model_json.dump(1) + "\n");

    auto report_json = result.report.to_json();
    report_json["config_hash"] = hash;
    write_text_file_atomic(dir / "eval_report.json", report_json.dump(1) + "\n");
    write_text_file_atomic(dir / "eval_report.csv", hash_comment(hash) + eval_report_csv(result.report));
    emit_plot_data(result.report, dir, hash);
  } catch (const Error& e) {
    throw StageError("report", e);
  } catch (const std::exception& e) {
    throw StageError("report", e);
  }
  stages.push_back({"report", 1, 1, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
  result.stages = stages;

  nlohmann::json stage_json = nlohmann::json::array();
  for (const auto& s : stages) {
    stage_json.push_back({{"name", s.name}, {"items_in", s.items_in}, {"items_out", s.items_out}, {"seconds", s.seconds}});
  }
  const nlohmann::json provenance{{"config_hash", hash},
                                  {"config", config.to_json()},
                                  {"overrides", config.overrides},
                                  {"cache_dir", cache_dir_from_env().string()},
                                  {"prng", Rng::kAlgorithm},
                                  {"stages", stage_json},
                                  {"started_at", started},
                                  {"finished_at", now_iso8601()}};
  write_text_file_atomic(dir / "provenance.json", provenance.dump(1) + "\n");
  return result;
}

// ---- Artifact formats ------------------------------------------------------

std::string eval_report_csv(const EvalReport& report) {
  std::string out = "metric,class,value\n";
  out += "accuracy,all," + format_double(report.accuracy) + "\n";
  for (std::size_t c = 0; c < report.precision.size(); ++c) {
    out += "precision," + std::to_string(c + 1) + "," + cell_or_undefined(report.precision[c]) + "\n";
  }
  for (std::size_t c = 0; c < report.recall.size(); ++c) {
    out += "recall," + std::to_string(c + 1) + "," + cell_or_undefined(report.recall[c]) + "\n";
  }
  return out;
}

void emit_plot_data(const EvalReport& report, const std::filesystem::path& out_dir, const std::string& config_hash) {
  const auto& m = report.matrix;
  const std::string comment = config_hash.empty() ? "" : hash_comment(config_hash);
  std::string heat = comment + "truth_class,predicted_class,count\n";
  for (int t = 0; t < m.n_classes(); ++t) {
    for (int p = 0; p < m.n_classes(); ++p) {
      heat += std::to_string(t + 1) + "," + std::to_string(p + 1) + "," + std::to_string(m.at(t, p)) + "\n";
    }
  }
  std::string bars = comment + "class,support,predicted,precision,recall\n";
  for (int c = 0; c < m.n_classes(); ++c) {
    const auto i = static_cast<std::size_t>(c);
    bars += std::to_string(c + 1) + "," + std::to_string(m.row_sum(c)) + "," + std::to_string(m.col_sum(c)) + "," +
            cell_or_undefined(report.precision.at(i)) + "," + cell_or_undefined(report.recall.at(i)) + "\n";
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + out_dir.string() + ": " + ec.message());
  write_text_file_atomic(out_dir / "confusion_heatmap.csv", heat);
  write_text_file_atomic(out_dir / "class_metrics.csv", bars);
}

EvalReport read_plot_data(const std::filesystem::path& out_dir) {
  const auto heat = read_csv_rows(out_dir / "confusion_heatmap.csv");
  const auto bars = read_csv_rows(out_dir / "class_metrics.csv");
  const auto n_classes = static_cast<int>(bars.size() - 1);
  if (n_classes < 1 || heat.size() - 1 != static_cast<std::size_t>(n_classes * n_classes)) {
    throw Error(ErrorKind::SchemaMismatch, "plot files disagree on the class count");
  }
  ConfusionMatrix m(n_classes);
  for (std::size_t r = 1; r < heat.size(); ++r) {
    const auto& row = heat[r];
    if (row.size() != 3) throw Error(ErrorKind::SchemaMismatch, "confusion_heatmap.csv row " + std::to_string(r));
    const int t = parse_number<int>(row[0], "truth_class") - 1;
    const int p = parse_number<int>(row[1], "predicted_class") - 1;
    if (t < 0 || t >= n_classes || p < 0 || p >= n_classes) throw Error(ErrorKind::LabelOutOfRange, "heatmap class");
    m.at(t, p) = parse_number<std::size_t>(row[2], "count");
  }
  EvalReport r;
  r.matrix = m;
  r.accuracy = m.total() == 0 ? 0.0 : static_cast<double>(m.trace()) / static_cast<double>(m.total());
  for (std::size_t i = 1; i < bars.size(); ++i) {
    const auto& row = bars[i];
    if (row.size() != 5) throw Error(ErrorKind::SchemaMismatch, "class_metrics.csv row " + std::to_string(i));
    r.precision.push_back(parse_optional(row[3], "precision"));
    r.recall.push_back(parse_optional(row[4], "recall"));
  }
  return r;
}

}  // namespace scint
