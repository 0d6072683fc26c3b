#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "scint/dataset.hpp"
#include "scint/model.hpp"

namespace scint {

// ---- Holdout ---------------------------------------------------------------

struct HoldoutSplit {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

/// Seeded shuffle-and-cut. In stratified mode each class is cut separately
/// (round(n_c * train_fraction) rows to train). Throws TooFewRows when either
/// side would be empty.
HoldoutSplit holdout_split(std::span<const ClassIndex> labels, int n_classes, double train_fraction,
                           std::uint64_t seed, bool stratified = true);

std::pair<Dataset, Dataset> apply_split(const Dataset& data, const HoldoutSplit& split);

// ---- Confusion matrix and metrics ----------------------------------------

/// counts[t][p] = rows with ground truth t predicted as p (rows = truth).
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int n_classes);
  ConfusionMatrix(int n_classes, std::vector<std::size_t> row_major_counts);

  int n_classes() const noexcept { return n_classes_; }
  std::size_t at(int truth, int predicted) const;
  std::size_t& at(int truth, int predicted);
  std::size_t total() const noexcept;
  std::size_t trace() const noexcept;
  std::size_t row_sum(int truth) const;
  std::size_t col_sum(int predicted) const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  int n_classes_ = 0;
  std::vector<std::size_t> counts_;
};

/// Throws LengthMismatch or LabelOutOfRange.
ConfusionMatrix confusion(std::span<const ClassIndex> truth, std::span<const ClassIndex> predicted, int n_classes);

struct EvalReport {
  ConfusionMatrix matrix;
  double accuracy = 0.0;
  /// Empty optional = undefined (zero denominator).
  std::vector<std::optional<double>> precision;
  std::vector<std::optional<double>> recall;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
};

/// accuracy = trace/total; precision_j = c[j][j]/col_j; recall_i = c[i][i]/row_i.
/// Throws EmptyMatrix when the matrix has no counts.
EvalReport metrics(const ConfusionMatrix& matrix);

EvalReport evaluate(const TrainedModel& model, const Dataset& test, bool parallel = true);

// ---- Grid search -----------------------------------------------------------

struct GridSpec {
  ModelKind kind = ModelKind::Gbdt;
  /// Fixed parameters shared by every candidate.
  nlohmann::json base_params = nlohmann::json::object();
  /// Ordered axes; the last axis varies fastest.
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> axes;
  int folds = 3;

  void validate() const;
  std::size_t candidate_count() const;
  /// Parameters of candidate i in enumeration order.
  nlohmann::json candidate(std::size_t i) const;

  nlohmann::json to_json() const;
  /// {"kind": ..., "base_params": {...}, "grid": [[name, [values...]], ...] or {name: [values]}, "folds": 3}
  static GridSpec from_json(const nlohmann::json& j);
};

struct GridCandidateResult {
  nlohmann::json params;
  std::vector<double> fold_accuracy;
  std::optional<double> mean_accuracy;  // empty when the candidate failed
  std::string error;
};

struct GridSearchResult {
  std::vector<GridCandidateResult> table;
  std::size_t best_index = 0;
  ModelSpec best;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Fold id per row; each class is shuffled and dealt round-robin.
std::vector<int> stratified_folds(std::span<const ClassIndex> labels, int n_classes, int folds, std::uint64_t seed);

/// Exhaustive k-fold search scored by mean accuracy. Folds are fixed by the
/// seed and shared by all candidates; ties go to the earliest candidate.
/// Failing candidates are reported in the table; throws (tagged with the
/// first candidate's error) only when every candidate fails.
GridSearchResult grid_search(const Dataset& train, const GridSpec& spec, std::uint64_t seed, bool parallel = true);

}  // namespace scint
