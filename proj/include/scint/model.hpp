#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "scint/dataset.hpp"
#include "scint/gbdt.hpp"
#include "scint/gnb.hpp"
#include "scint/knn.hpp"
#include "scint/prediction.hpp"

namespace scint {

enum class ModelKind { Knn, Gnb, Gbdt };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

/// Model kind plus hyperparameters, keyed as in the model file "config"
/// block (e.g. {"n_neighbors": 12, "p": 1} for KNN).
struct ModelSpec {
  ModelKind kind = ModelKind::Gbdt;
  nlohmann::json params = nlohmann::json::object();

  nlohmann::json to_json() const;
  static ModelSpec from_json(const nlohmann::json& j);
};

/// A fitted classifier of any supported kind.
///
/// Model files are JSON:
///   {"format": "scint-model", "version": 1, "kind": "knn|gnb|gbdt",
///    "schema": [feature names], "model": {kind-specific body}}
/// Doubles are written with round-trip precision, so a reloaded model
/// predicts bit-identically.
class TrainedModel {
 public:
  static constexpr int kFormatVersion = 1;

  TrainedModel() = default;
  TrainedModel(KnnModel m, std::vector<std::string> schema) : impl_(std::move(m)), schema_(std::move(schema)) {}
  TrainedModel(GnbModel m, std::vector<std::string> schema) : impl_(std::move(m)), schema_(std::move(schema)) {}
  TrainedModel(GbdtModel m, std::vector<std::string> schema) : impl_(std::move(m)), schema_(std::move(schema)) {}

  ModelKind kind() const noexcept;
  const std::vector<std::string>& schema() const noexcept { return schema_; }

  Prediction predict(MatrixView rows, bool parallel = true) const;
  /// Checks the dataset's schema before predicting.
  Prediction predict(const Dataset& data, bool parallel = true) const;

  template <typename T>
  const T& as() const {
    return std::get<T>(impl_);
  }

  nlohmann::json to_json() const;
  static TrainedModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static TrainedModel load(const std::filesystem::path& path);

 private:
  std::variant<std::monostate, KnnModel, GnbModel, GbdtModel> impl_;
  std::vector<std::string> schema_;
};

TrainedModel fit_model(const Dataset& train, const ModelSpec& spec, bool parallel = true);

}  // namespace scint
