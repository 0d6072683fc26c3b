#include <doctest.h>
#include <omp.h>

#include <fstream>

#include "scint/pipeline.hpp"
#include "scint/synth.hpp"
#include "test_support.hpp"

using namespace scint;

namespace {

// One small corpus shared by every case in this file.
const SynthOutput& corpus() {
  static testing::TempDir dir("pipeline_corpus");
  static const SynthOutput out = [] {
    SynthSpec spec;
    spec.days = 3;
    return generate(spec, dir.path());
  }();
  return out;
}

PipelineConfig small_config(const std::filesystem::path& out_dir, std::vector<std::string> extra = {}) {
  std::vector<std::string> overrides{"per_class=600", "model.params.n_rounds=20", "model.params.max_depth=4",
                                     "output_dir=" + out_dir.string()};
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  return PipelineConfig::load(corpus().pipeline_config_file, overrides);
}

std::string stage_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const StageError& e) {
    return e.stage();
  } catch (const std::exception& e) {
    return std::string("untagged: ") + e.what();
  }
  return "no error";
}

}  // namespace

TEST_CASE("full run on a small synthetic corpus") {
  testing::TempDir out("pipeline_run");
  const auto r = run_pipeline(small_config(out.path()));
  CHECK(r.dataset.rows() == 1800);
  CHECK(r.train.rows() == 1440);
  CHECK(r.test.rows() == 360);
  CHECK(r.report.accuracy > 0.6);
  CHECK(r.ingest_report.error_count() == 0);

  std::vector<std::string> names;
  for (const auto& s : r.stages) names.push_back(s.name);
  const std::vector<std::string> expected{"config",    "ingest",   "elevation_mask", "constellation_filter",
                                          "s4_correction", "utc_conversion", "smoothing", "solar_join",
                                          "labeling",  "balancing", "split",          "train",
                                          "evaluate",  "report"};
  CHECK(names == expected);

  for (const char* f : {"dataset.csv", "dataset.provenance.json", "ingest_report.json", "model.json",
                        "eval_report.json", "eval_report.csv", "confusion_heatmap.csv", "class_metrics.csv",
                        "provenance.json"}) {
    INFO(f);
    CHECK(std::filesystem::exists(out.path() / f));
  }
  CHECK_FALSE(std::filesystem::exists(out.path() / ".scint.lock"));
  const auto eval_json = nlohmann::json::parse(read_text_file(out.path() / "eval_report.json"));
  CHECK(eval_json["config_hash"] == r.config_hash);
  CHECK(read_text_file(out.path() / "dataset.csv").rfind("# config_hash: " + r.config_hash + "\n", 0) == 0);
  const auto prov = nlohmann::json::parse(read_text_file(out.path() / "provenance.json"));
  CHECK(prov.contains("started_at"));
  CHECK(prov["prng"] == Rng::kAlgorithm);

  const auto reloaded = TrainedModel::load(out.path() / "model.json");
  const auto again = evaluate(reloaded, Dataset::load(out.path() / "dataset.csv"));
  CHECK(again.matrix.total() == 1800);
}

TEST_CASE("artifacts are byte-identical across runs and thread counts") {
  testing::TempDir a("pipeline_det_a"), b("pipeline_det_b");
  omp_set_num_threads(4);
  run_pipeline(small_config(a.path()));
  omp_set_num_threads(1);
  run_pipeline(small_config(b.path(), {"parallel=false"}));
  omp_set_num_threads(4);
  for (const char* f : {"dataset.csv", "model.json", "eval_report.json", "eval_report.csv", "confusion_heatmap.csv",
                        "class_metrics.csv", "ingest_report.json"}) {
    INFO(f);
    CHECK(read_text_file(a.path() / f) == read_text_file(b.path() / f));
  }
}

TEST_CASE("plot data round-trips to the report") {
  testing::TempDir out("pipeline_plot");
  const auto report = metrics(ConfusionMatrix(3, {10, 2, 0, 1, 7, 0, 0, 0, 0}));
  emit_plot_data(report, out.path(), "abc");
  CHECK(read_text_file(out.path() / "class_metrics.csv").find("undefined") != std::string::npos);
  const auto back = read_plot_data(out.path());
  CHECK(back.matrix == report.matrix);
  CHECK(back.accuracy == report.accuracy);
  CHECK(*back.precision[0] == *report.precision[0]);
  CHECK_FALSE(back.precision[2].has_value());
  CHECK_FALSE(back.recall[2].has_value());
}

TEST_CASE("missing inputs fail in the config stage") {
  testing::TempDir out("pipeline_missing");
  CHECK(stage_of([&] { Pipeline p(small_config(out.path(), {"inputs=[\"nope_*.csv\"]"})); }) == "config");
  CHECK(stage_of([&] { Pipeline p(small_config(out.path(), {"inputs=[\"absent.csv\"]"})); }) == "config");
  CHECK(stage_of([&] { Pipeline p(small_config(out.path(), {"solar.path=absent.txt"})); }) == "config");
  try {
    Pipeline p(small_config(out.path(), {"inputs=[\"absent.csv\"]"}));
  } catch (const StageError& e) {
    CHECK(std::string(e.what()).rfind("stage config: IoError: ", 0) == 0);
  }
}

TEST_CASE("later failures are tagged with their stage") {
  testing::TempDir out("pipeline_tagged");
  CHECK(stage_of([&] { run_pipeline(small_config(out.path(), {"per_class=1000000"})); }) == "balancing");
  CHECK(stage_of([&] { run_pipeline(small_config(out.path(), {"model.params.max_depth=0"})); }) == "train");
}

TEST_CASE("a held output directory lock refuses a second run") {
  testing::TempDir out("pipeline_lock");
  std::ofstream(out.path() / ".scint.lock") << "1\n";
  CHECK(stage_of([&] { run_pipeline(small_config(out.path())); }) == "config");
}

TEST_CASE("config parsing, overrides and hashing") {
  const auto base = small_config("x");
  CHECK(base.per_class == 600);
  CHECK(base.model.params["n_rounds"] == 20);
  CHECK(base.min_window_samples == 3);
  CHECK(base.overrides.size() == 4);

  CHECK(config_hash(base) == config_hash(small_config("x")));
  CHECK(config_hash(base) == config_hash(small_config("elsewhere", {"parallel=false"})));
  CHECK(config_hash(base) != config_hash(small_config("x", {"seeds.split=9"})));
  CHECK(config_hash(base).size() == 16);

  const auto round = PipelineConfig::from_json(base.to_json(), base.base_dir);
  CHECK(round.to_json() == base.to_json());

  nlohmann::json j = nlohmann::json::object();
  apply_override(j, "a.b.c=3");
  apply_override(j, "name=hello world");
  apply_override(j, "flag=true");
  CHECK(j["a"]["b"]["c"] == 3);
  CHECK(j["name"] == "hello world");
  CHECK(j["flag"] == true);
  CHECK_THROWS_AS(apply_override(j, "novalue"), Error);

  CHECK_THROWS_AS(PipelineConfig::from_json(nlohmann::json::parse(R"({"per_clas": 10})")), Error);
  CHECK_THROWS_AS(PipelineConfig::from_json(nlohmann::json::parse(R"({"constellations": ["OTHER"]})")).validate(), Error);
  CHECK_THROWS_AS(PipelineConfig::from_json(nlohmann::json::parse(R"({"train_fraction": 1.5})")).validate(), Error);
  const auto t = PipelineConfig::from_json(nlohmann::json::parse(R"({"thresholds": [0.1, 0.4]})"));
  CHECK(t.thresholds.low == 0.1);
  CHECK(t.thresholds.high == 0.4);
}

TEST_CASE("grid section drives model selection") {
  testing::TempDir out("pipeline_grid");
  auto cfg = small_config(out.path(), {R"(grid={"kind": "knn", "grid": [["n_neighbors", [1, 12]]], "folds": 3})"});
  const auto r = run_pipeline(cfg);
  REQUIRE(r.grid.has_value());
  CHECK(r.grid->table.size() == 2);
  CHECK(r.model.kind() == ModelKind::Knn);
  CHECK(std::filesystem::exists(out.path() / "grid_search.csv"));
}

TEST_CASE("remote solar indices come through the transport") {
  class LocalFileTransport : public HttpTransport {
   public:
    int calls = 0;
    HttpResponse get(const std::string&) override {
      ++calls;
      return {200, "<pre>\n" + read_text_file(corpus().solar_file) + "</pre>\n"};
    }
  };
  testing::TempDir out("pipeline_remote");
  auto transport = std::make_shared<LocalFileTransport>();
  const auto remote = run_pipeline(small_config(out.path(), {"solar.source=remote"}), transport);
  CHECK(transport->calls == 1);
  testing::TempDir out2("pipeline_local");
  const auto local = run_pipeline(small_config(out2.path()));
  const auto body = [](const std::filesystem::path& f) {
    const auto text = read_text_file(f);
    return text.substr(text.find('\n') + 1);
  };
  CHECK(remote.config_hash != local.config_hash);
  CHECK(body(out.path() / "dataset.csv") == body(out2.path() / "dataset.csv"));
}
