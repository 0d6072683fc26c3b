#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "scint/dataset.hpp"
#include "scint/prediction.hpp"

namespace scint {

struct GnbConfig {
  /// Added to every per-class feature variance.
  double variance_smoothing = 1e-9;

  void validate() const;
};

void to_json(nlohmann::json& j, const GnbConfig& c);
void from_json(const nlohmann::json& j, GnbConfig& c);

/// Gaussian naive Bayes with empirical priors and per-class, per-feature
/// normal likelihoods. Posteriors are normalized in log space.
class GnbModel {
 public:
  /// Throws EmptyDataset, or EmptyClass when a class has no rows.
  static GnbModel fit(const Dataset& train, const GnbConfig& config);

  Prediction predict(MatrixView rows, bool parallel = true) const;

  /// log prior + sum of log likelihoods, per class (unnormalized).
  std::vector<double> joint_log_likelihood(std::span<const double> row) const;

  std::span<const double> log_priors() const noexcept { return log_priors_; }
  /// Returns a copy whose priors are all scaled by `factor` (log shift).
  GnbModel with_scaled_priors(double factor) const;

  int n_classes() const noexcept { return n_classes_; }
  std::size_t n_features() const noexcept { return n_features_; }
  double mean(int cls, std::size_t feature) const { return means_[static_cast<std::size_t>(cls) * n_features_ + feature]; }
  double variance(int cls, std::size_t feature) const {
    return variances_[static_cast<std::size_t>(cls) * n_features_ + feature];
  }

  nlohmann::json to_json() const;
  static GnbModel from_json(const nlohmann::json& j);

 private:
  GnbConfig config_;
  int n_classes_ = 0;
  std::size_t n_features_ = 0;
  std::vector<double> log_priors_;
  std::vector<double> means_, variances_;  // class-major
};

}  // namespace scint
