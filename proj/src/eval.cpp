#include "scint/eval.hpp"

#include <algorithm>
#include <cmath>

#include "scint/error.hpp"
#include "scint/rng.hpp"

namespace scint {

HoldoutSplit holdout_split(std::span<const ClassIndex> labels, int n_classes, double train_fraction,
                           std::uint64_t seed, bool stratified) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "train_fraction must lie strictly between 0 and 1");
  }
  if (labels.size() < 2) throw Error(ErrorKind::TooFewRows, "holdout split needs at least 2 rows");
  Rng rng(seed);
  HoldoutSplit split;
  auto cut = [&](std::vector<std::size_t>& members) {
    rng.shuffle(members);
    const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(members.size()) * train_fraction));
    split.train_indices.insert(split.train_indices.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test_indices.insert(split.test_indices.end(), members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
  };
  if (stratified) {
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] < 0 || labels[i] >= n_classes) throw Error(ErrorKind::LabelOutOfRange, "label " + std::to_string(labels[i]));
      by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (auto& members : by_class) cut(members);
    // Interleave classes so neither side is ordered by label.
    rng.shuffle(split.train_indices);
    rng.shuffle(split.test_indices);
  } else {
    std::vector<std::size_t> all(labels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    cut(all);
  }
  if (split.train_indices.empty() || split.test_indices.empty()) {
    throw Error(ErrorKind::TooFewRows, "split of " + std::to_string(labels.size()) + " rows leaves one side empty");
  }
  return split;
}

std::pair<Dataset, Dataset> apply_split(const Dataset& data, const HoldoutSplit& split) {
  return {data.subset(split.train_indices), data.subset(split.test_indices)};
}

ConfusionMatrix::ConfusionMatrix(int n_classes)
    : n_classes_(n_classes), counts_(static_cast<std::size_t>(n_classes) * static_cast<std::size_t>(n_classes), 0) {
  if (n_classes < 1) throw Error(ErrorKind::InvalidConfig, "n_classes must be >= 1");
}

ConfusionMatrix::ConfusionMatrix(int n_classes, std::vector<std::size_t> row_major_counts) : ConfusionMatrix(n_classes) {
  if (row_major_counts.size() != counts_.size()) throw Error(ErrorKind::LengthMismatch, "confusion count matrix size");
  counts_ = std::move(row_major_counts);
}

std::size_t ConfusionMatrix::at(int truth, int predicted) const {
  return counts_.at(static_cast<std::size_t>(truth) * static_cast<std::size_t>(n_classes_) + static_cast<std::size_t>(predicted));
}

std::size_t& ConfusionMatrix::at(int truth, int predicted) {
  return counts_.at(static_cast<std::size_t>(truth) * static_cast<std::size_t>(n_classes_) + static_cast<std::size_t>(predicted));
}

std::size_t ConfusionMatrix::total() const noexcept {
  std::size_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

std::size_t ConfusionMatrix::trace() const noexcept {
  std::size_t t = 0;
  for (int i = 0; i < n_classes_; ++i) t += at(i, i);
  return t;
}

std::size_t ConfusionMatrix::row_sum(int truth) const {
  std::size_t s = 0;
  for (int j = 0; j < n_classes_; ++j) s += at(truth, j);
  return s;
}

std::size_t ConfusionMatrix::col_sum(int predicted) const {
  std::size_t s = 0;
  for (int i = 0; i < n_classes_; ++i) s += at(i, predicted);
  return s;
}

ConfusionMatrix confusion(std::span<const ClassIndex> truth, std::span<const ClassIndex> predicted, int n_classes) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorKind::LengthMismatch,
                std::to_string(truth.size()) + " truth labels vs " + std::to_string(predicted.size()) + " predictions");
  }
  ConfusionMatrix m(n_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= n_classes || predicted[i] < 0 || predicted[i] >= n_classes) {
      throw Error(ErrorKind::LabelOutOfRange, "label out of range at position " + std::to_string(i));
    }
    ++m.at(truth[i], predicted[i]);
  }
  return m;
}

EvalReport metrics(const ConfusionMatrix& matrix) {
  const auto total = matrix.total();
  if (total == 0) throw Error(ErrorKind::EmptyMatrix, "confusion matrix has no counts");
  EvalReport r;
  r.matrix = matrix;
  r.accuracy = static_cast<double>(matrix.trace()) / static_cast<double>(total);
  for (int c = 0; c < matrix.n_classes(); ++c) {
    const auto col = matrix.col_sum(c);
    const auto row = matrix.row_sum(c);
    const auto diag = static_cast<double>(matrix.at(c, c));
    r.precision.push_back(col == 0 ? std::nullopt : std::optional(diag / static_cast<double>(col)));
    r.recall.push_back(row == 0 ? std::nullopt : std::optional(diag / static_cast<double>(row)));
  }
  return r;
}

EvalReport evaluate(const TrainedModel& model, const Dataset& test, bool parallel) {
  const auto pred = model.predict(test, parallel);
  return metrics(confusion(test.labels(), pred.classes, test.n_classes()));
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::optional<double> optional_from_json(const nlohmann::json& j) {
  return j.is_null() ? std::nullopt : std::optional(j.get<double>());
}

}  // namespace

nlohmann::json EvalReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (int t = 0; t < matrix.n_classes(); ++t) {
    std::vector<std::size_t> row;
    for (int p = 0; p < matrix.n_classes(); ++p) row.push_back(matrix.at(t, p));
    rows.push_back(row);
  }
  nlohmann::json prec = nlohmann::json::array(), rec = nlohmann::json::array();
  for (const auto& p : precision) prec.push_back(optional_json(p));
  for (const auto& r : recall) rec.push_back(optional_json(r));
  return nlohmann::json{{"orientation", "rows=ground_truth,cols=predicted"},
                        {"n_classes", matrix.n_classes()},
                        {"confusion", rows},
                        {"total", matrix.total()},
                        {"accuracy", accuracy},
                        {"precision", prec},
                        {"recall", rec}};
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  const int k = j.at("n_classes").get<int>();
  std::vector<std::size_t> counts;
  for (const auto& row : j.at("confusion")) {
    for (const auto& c : row) counts.push_back(c.get<std::size_t>());
  }
  EvalReport r;
  r.matrix = ConfusionMatrix(k, std::move(counts));
  r.accuracy = j.at("accuracy").get<double>();
  for (const auto& p : j.at("precision")) r.precision.push_back(optional_from_json(p));
  for (const auto& v : j.at("recall")) r.recall.push_back(optional_from_json(v));
  return r;
}

// ---- Grid search -----------------------------------------------------------

void GridSpec::validate() const {
  if (folds < 2) throw Error(ErrorKind::InvalidConfig, "grid search needs at least 2 folds");
  if (axes.empty()) throw Error(ErrorKind::InvalidConfig, "grid is empty");
  for (const auto& [name, values] : axes) {
    if (values.empty()) throw Error(ErrorKind::InvalidConfig, "grid axis '" + name + "' has no values");
  }
}

std::size_t GridSpec::candidate_count() const {
  std::size_t n = 1;
  for (const auto& axis : axes) n *= axis.second.size();
  return axes.empty() ? 0 : n;
}

nlohmann::json GridSpec::candidate(std::size_t i) const {
  nlohmann::json params = base_params;
  for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
    const auto& values = it->second;
    params[it->first] = values[i % values.size()];
    i /= values.size();
  }
  return params;
}

nlohmann::json GridSpec::to_json() const {
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& [name, values] : axes) grid.push_back({name, values});
  return nlohmann::json{{"kind", to_string(kind)}, {"base_params", base_params}, {"grid", grid}, {"folds", folds}};
}

GridSpec GridSpec::from_json(const nlohmann::json& j) {
  GridSpec s;
  s.kind = model_kind_from_string(j.at("kind").get<std::string>());
  s.base_params = j.value("base_params", nlohmann::json::object());
  s.folds = j.value("folds", 3);
  const auto& grid = j.at("grid");
  if (grid.is_array()) {
    for (const auto& axis : grid) {
      s.axes.emplace_back(axis.at(0).get<std::string>(), axis.at(1).get<std::vector<nlohmann::json>>());
    }
  } else {
    for (const auto& [name, values] : grid.items()) s.axes.emplace_back(name, values.get<std::vector<nlohmann::json>>());
  }
  s.validate();
  return s;
}

std::vector<int> stratified_folds(std::span<const ClassIndex> labels, int n_classes, int folds, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  Rng rng(seed);
  std::vector<int> fold(labels.size(), 0);
  std::size_t dealt = 0;
  for (auto& members : by_class) {
    rng.shuffle(members);
    // Continue the round-robin across classes so fold sizes stay within one.
    for (auto i : members) fold[i] = static_cast<int>(dealt++ % static_cast<std::size_t>(folds));
  }
  return fold;
}

GridSearchResult grid_search(const Dataset& train, const GridSpec& spec, std::uint64_t seed, bool parallel) {
  spec.validate();
  if (train.rows() < static_cast<std::size_t>(spec.folds)) {
    throw Error(ErrorKind::TooFewRows, "fewer rows than folds");
  }
  const auto fold_of = stratified_folds(train.labels(), train.n_classes(), spec.folds, seed);
  std::vector<Dataset> fold_train, fold_valid;
  for (int f = 0; f < spec.folds; ++f) {
    std::vector<std::size_t> tr, va;
    for (std::size_t i = 0; i < fold_of.size(); ++i) (fold_of[i] == f ? va : tr).push_back(i);
    fold_train.push_back(train.subset(tr));
    fold_valid.push_back(train.subset(va));
  }

  const auto n = spec.candidate_count();
  GridSearchResult result;
  result.table.resize(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t ci = 0; ci < count; ++ci) {
    auto& row = result.table[static_cast<std::size_t>(ci)];
    row.params = spec.candidate(static_cast<std::size_t>(ci));
    try {
      const ModelSpec model_spec{spec.kind, row.params};
      double sum = 0.0;
      for (int f = 0; f < spec.folds; ++f) {
        const auto& tr = fold_train[static_cast<std::size_t>(f)];
        const auto& va = fold_valid[static_cast<std::size_t>(f)];
        const auto model = fit_model(tr, model_spec, false);
        const auto report = metrics(confusion(va.labels(), model.predict(va.view(), false).classes, va.n_classes()));
        row.fold_accuracy.push_back(report.accuracy);
        sum += report.accuracy;
      }
      row.mean_accuracy = sum / static_cast<double>(spec.folds);
    } catch (const std::exception& e) {
      row.error = e.what();
      row.fold_accuracy.clear();
    }
  }

  bool found = false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = result.table[i];
    if (!row.mean_accuracy) continue;
    if (!found || *row.mean_accuracy > *result.table[result.best_index].mean_accuracy) {
      result.best_index = i;
      found = true;
    }
  }
  if (!found) {
    throw Error(ErrorKind::InvalidConfig,
                "every grid candidate failed; candidate 0 " + result.table[0].params.dump() + ": " + result.table[0].error);
  }
  result.best = ModelSpec{spec.kind, result.table[result.best_index].params};
  return result;
}

nlohmann::json GridSearchResult::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& r = table[i];
    rows.push_back({{"index", i},
                    {"params", r.params},
                    {"fold_accuracy", r.fold_accuracy},
                    {"mean_accuracy", optional_json(r.mean_accuracy)},
                    {"error", r.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.error)}});
  }
  return nlohmann::json{{"best_index", best_index}, {"best", best.to_json()}, {"candidates", rows}};
}

std::string GridSearchResult::to_csv() const {
  std::string out = "index,params,mean_accuracy,status\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& r = table[i];
    std::string params = r.params.dump();
    std::string quoted = "\"";
    for (char ch : params) {
      if (ch == '"') quoted += '"';
      quoted += ch;
    }
    quoted += '"';
    out += std::to_string(i) + "," + quoted + "," + (r.mean_accuracy ? format_double(*r.mean_accuracy) : "undefined") +
           "," + (r.error.empty() ? "ok" : "failed") + "\n";
  }
  return out;
}

}  // namespace scint
