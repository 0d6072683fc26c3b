#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "scint/dataset.hpp"
#include "scint/prediction.hpp"

namespace scint {

enum class SplitMode { Exact, Histogram };

struct GbdtConfig {
  int n_classes = 3;
  double learning_rate = 0.3;
  int max_depth = 9;
  int n_rounds = 100;
  double l2_leaf_reg = 1.0;
  double min_child_weight = 1.0;
  SplitMode split_mode = SplitMode::Histogram;
  int n_bins = 255;

  void validate() const;
  friend bool operator==(const GbdtConfig&, const GbdtConfig&) = default;
};

void to_json(nlohmann::json& j, const GbdtConfig& c);
void from_json(const nlohmann::json& j, GbdtConfig& c);

// ---- Multiclass log-loss pieces ------------------------------------------

void softmax(std::span<const double> logits, std::span<double> out) noexcept;
/// -log softmax(logits)[label]
double softmax_log_loss(std::span<const double> logits, int label) noexcept;
/// Gradient p_k - [k == label] and diagonal Hessian p_k (1 - p_k).
void softmax_grad_hess(std::span<const double> logits, int label, std::span<double> grad, std::span<double> hess) noexcept;

// ---- Trees ---------------------------------------------------------------

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // rows with value < threshold go left
  std::int32_t left = -1, right = -1;
  double value = 0.0;  // leaf score increment (learning rate applied)

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class RegressionTree {
 public:
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> row) const noexcept;
  int depth() const noexcept;
  std::size_t leaf_count() const noexcept;
  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

/// Per-feature quantile bins. A feature with at most n_bins distinct values
/// gets one bin per value.
class FeatureBins {
 public:
  static FeatureBins build(MatrixView data, int n_bins);

  std::size_t n_features() const noexcept { return bins_.size(); }
  std::size_t bin_count(std::size_t feature) const { return bins_[feature].lower.size(); }
  /// Smallest / largest training value that fell into a bin.
  double bin_lower(std::size_t feature, std::size_t bin) const { return bins_[feature].lower[bin]; }
  double bin_upper(std::size_t feature, std::size_t bin) const { return bins_[feature].upper[bin]; }
  std::uint32_t bin_of(std::size_t feature, double value) const;

 private:
  struct PerFeature {
    std::vector<double> lower, upper;
  };
  std::vector<PerFeature> bins_;
};

struct HistogramBin {
  double g = 0.0;
  double h = 0.0;
  std::uint32_t count = 0;
};

/// Gradient histogram of one feature over a node's rows. Rows are visited in
/// the order given, so the per-bin sums are reproducible.
void build_histogram_serial(std::span<const std::uint32_t> bin_index, std::span<const std::size_t> rows,
                            std::span<const double> grad, std::span<const double> hess,
                            std::span<HistogramBin> histogram);

/// All features' histograms (feature-major, `offsets[f]` marks feature f's
/// first bin), features processed concurrently.
void build_histograms_parallel(std::span<const std::vector<std::uint32_t>> bin_index,
                               std::span<const std::size_t> offsets, std::span<const std::size_t> rows,
                               std::span<const double> grad, std::span<const double> hess,
                               std::span<HistogramBin> histograms);

struct GbdtFitReport {
  /// Training log-loss before any round (index 0) and after each round.
  std::vector<double> train_log_loss;
  /// Every row has identical features while labels differ: no split exists.
  bool degenerate = false;
};

class GbdtModel {
 public:
  /// Throws TooFewRows (< 2 rows) or LabelOutOfRange.
  static GbdtModel fit(const Dataset& train, const GbdtConfig& config, GbdtFitReport* report = nullptr,
                       bool parallel = true);

  /// A model with base scores only.
  static GbdtModel constant(std::vector<double> base_scores, std::size_t n_features, const GbdtConfig& config);

  Prediction predict(MatrixView rows, bool parallel = true) const;
  std::vector<double> raw_scores(std::span<const double> row) const;

  /// Same model keeping only the first `rounds` boosting rounds.
  GbdtModel truncated(int rounds) const;

  const GbdtConfig& config() const noexcept { return config_; }
  std::span<const double> base_scores() const noexcept { return base_scores_; }
  int rounds() const noexcept;
  /// Tree for (round, class).
  const RegressionTree& tree(int round, int cls) const;
  std::size_t n_features() const noexcept { return n_features_; }

  nlohmann::json to_json() const;
  static GbdtModel from_json(const nlohmann::json& j);

  friend bool operator==(const GbdtModel&, const GbdtModel&) = default;

 private:
  GbdtConfig config_;
  std::size_t n_features_ = 0;
  std::vector<double> base_scores_;
  std::vector<RegressionTree> trees_;  // round-major, n_classes per round
};

}  // namespace scint
