// scint: command-line front end for the scintillation pipeline.
#include <omp.h>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scint/pipeline.hpp"
#include "scint/synth.hpp"

namespace {

using namespace scint;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  int threads = 0;
};

PipelineConfig load_config(const Common& c) {
  if (c.config_path.empty()) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& o : c.overrides) apply_override(j, o);
    auto cfg = PipelineConfig::from_json(j);
    cfg.overrides = c.overrides;
    return cfg;
  }
  return PipelineConfig::load(c.config_path, c.overrides);
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file_atomic(dir / "eval_report.json", report.to_json().dump(1) + "\n");
  write_text_file_atomic(dir / "eval_report.csv", eval_report_csv(report));
  emit_plot_data(report, dir);
}

std::string pct(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * *v);
  return buf;
}

void print_summary(const EvalReport& r) {
  std::cout << "accuracy " << pct(r.accuracy) << " on " << r.matrix.total() << " rows\n";
  for (std::size_t c = 0; c < r.precision.size(); ++c) {
    std::cout << "class " << c + 1 << ": precision " << pct(r.precision[c]) << ", recall " << pct(r.recall[c]) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GNSS scintillation severity pipeline"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("-c,--config", common.config_path, "Pipeline config file (JSON)");
    if (needs_config) opt->required();
    sub->add_option("--set", common.overrides, "Override a config field: key.path=value (repeatable)");
    sub->add_option("--threads", common.threads, "OpenMP thread count (default: runtime default)");
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic ISMR corpus");
  std::string spec_path, synth_out;
  std::optional<std::uint64_t> synth_seed;
  std::optional<int> synth_days;
  synth->add_option("--spec", spec_path, "Synth spec file (JSON); defaults when omitted");
  synth->add_option("-o,--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Override the spec seed");
  synth->add_option("--days", synth_days, "Override the number of days");

  auto* ingest = app.add_subcommand("ingest", "Read ISMR inputs, apply elevation mask and constellation filter");
  add_common(ingest, true);
  std::string ingest_out;
  ingest->add_option("-o,--out", ingest_out, "Write the ingest report here (default: stdout)");

  auto* preprocess = app.add_subcommand("preprocess", "Build the labeled, balanced dataset");
  add_common(preprocess, true);
  std::string dataset_out;
  preprocess->add_option("-o,--out", dataset_out, "Dataset CSV path (default: <output_dir>/dataset.csv)");

  auto* train = app.add_subcommand("train", "Fit a model on a dataset CSV");
  add_common(train, false);
  std::string train_dataset, model_out, split_dir;
  train->add_option("-d,--dataset", train_dataset, "Dataset CSV")->required();
  train->add_option("-o,--out", model_out, "Model file to write")->required();
  train->add_option("--split-dir", split_dir,
                    "Hold out a test split first and write train.csv/test.csv to this directory");

  auto* evaluate = app.add_subcommand("evaluate", "Score a model on a dataset CSV");
  add_common(evaluate, false);
  std::string eval_model, eval_dataset, eval_out;
  evaluate->add_option("-m,--model", eval_model, "Model file")->required();
  evaluate->add_option("-d,--dataset", eval_dataset, "Test dataset CSV")->required();
  evaluate->add_option("-o,--out", eval_out, "Directory for eval_report.* and plot CSVs");

  auto* grid = app.add_subcommand("grid-search", "Cross-validated grid search over the config's grid");
  add_common(grid, true);
  std::string grid_dataset, grid_out;
  grid->add_option("-d,--dataset", grid_dataset, "Training dataset CSV")->required();
  grid->add_option("-o,--out", grid_out, "Write grid_search.json and grid_search.csv to this directory");

  auto* run = app.add_subcommand("run", "Full pipeline: ingest through evaluation, writing all artifacts");
  add_common(run, true);

  CLI11_PARSE(app, argc, argv);
  if (common.threads > 0) omp_set_num_threads(common.threads);

  try {
    if (synth->parsed()) {
      SynthSpec spec;
      if (!spec_path.empty()) spec = SynthSpec::from_json(nlohmann::json::parse(read_text_file(spec_path)));
      if (synth_seed) spec.seed = *synth_seed;
      if (synth_days) spec.days = *synth_days;
      const auto out = generate(spec, synth_out);
      std::cout << "wrote " << out.ismr_files.size() << " ISMR files (" << out.records << " records) to " << synth_out
                << "\nplanted windows per class: " << out.planted_windows[0] << " " << out.planted_windows[1] << " "
                << out.planted_windows[2] << "\npipeline config: " << out.pipeline_config_file.string() << "\n";
    } else if (ingest->parsed()) {
      Pipeline p(load_config(common));
      const auto r = p.ingest();
      auto j = r.report.to_json();
      j["records_after_filter"] = r.records.size();
      if (ingest_out.empty()) {
        print_json(j);
      } else {
        write_text_file_atomic(ingest_out, j.dump(1) + "\n");
      }
    } else if (preprocess->parsed()) {
      Pipeline p(load_config(common));
      auto pre = p.preprocess(p.ingest());
      const std::filesystem::path out =
          dataset_out.empty() ? p.config().resolve(p.config().output_dir) / "dataset.csv" : std::filesystem::path(dataset_out);
      if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
      pre.dataset.save(out);
      auto prov = pre.dataset.provenance().to_json();
      prov["rows"] = pre.dataset.rows();
      write_text_file_atomic(std::filesystem::path(out).replace_extension(".provenance.json"), prov.dump(1) + "\n");
      std::cout << "wrote " << pre.dataset.rows() << " rows to " << out.string() << "\n";
    } else if (train->parsed()) {
      const auto cfg = load_config(common);
      auto data = Dataset::load(train_dataset);
      if (!split_dir.empty()) {
        const auto s = holdout_split(data.labels(), data.n_classes(), cfg.train_fraction, cfg.seeds.split, cfg.stratified);
        auto [tr, te] = apply_split(data, s);
        std::filesystem::create_directories(split_dir);
        tr.save(std::filesystem::path(split_dir) / "train.csv");
        te.save(std::filesystem::path(split_dir) / "test.csv");
        std::cout << "split " << tr.rows() << " train / " << te.rows() << " test rows\n";
        data = std::move(tr);
      }
      const auto model = fit_model(data, cfg.model, cfg.parallel);
      model.save(model_out);
      std::cout << "trained " << to_string(model.kind()) << " on " << data.rows() << " rows -> " << model_out << "\n";
    } else if (evaluate->parsed()) {
      const auto cfg = load_config(common);
      const auto model = TrainedModel::load(eval_model);
      const auto data = Dataset::load(eval_dataset);
      const auto report = scint::evaluate(model, data, cfg.parallel);
      if (!eval_out.empty()) write_report(report, eval_out);
      print_summary(report);
    } else if (grid->parsed()) {
      const auto cfg = load_config(common);
      if (!cfg.grid) throw Error(ErrorKind::InvalidConfig, "config has no \"grid\" section");
      const auto data = Dataset::load(grid_dataset);
      const auto result = grid_search(data, *cfg.grid, cfg.seeds.grid, cfg.parallel);
      if (!grid_out.empty()) {
        std::filesystem::create_directories(grid_out);
        write_text_file_atomic(std::filesystem::path(grid_out) / "grid_search.json", result.to_json().dump(1) + "\n");
        write_text_file_atomic(std::filesystem::path(grid_out) / "grid_search.csv", result.to_csv());
      }
      std::cout << result.to_csv() << "best: " << result.best.params.dump() << "\n";
    } else if (run->parsed()) {
      const auto result = run_pipeline(load_config(common));
      std::cout << "config " << result.config_hash << ": " << result.dataset.rows() << " rows, " << result.train.rows()
                << " train / " << result.test.rows() << " test\n";
      print_summary(result.report);
      std::cout << "artifacts in " << result.output_dir.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "scint: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
