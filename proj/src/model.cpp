#include "scint/model.hpp"

#include "scint/error.hpp"

namespace scint {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Knn: return "knn";
    case ModelKind::Gnb: return "gnb";
    case ModelKind::Gbdt: return "gbdt";
  }
  return "gbdt";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "knn") return ModelKind::Knn;
  if (name == "gnb") return ModelKind::Gnb;
  if (name == "gbdt") return ModelKind::Gbdt;
  throw Error(ErrorKind::InvalidConfig, "unknown model kind '" + std::string(name) + "' (expected knn, gnb or gbdt)");
}

nlohmann::json ModelSpec::to_json() const { return nlohmann::json{{"kind", to_string(kind)}, {"params", params}}; }

ModelSpec ModelSpec::from_json(const nlohmann::json& j) {
  ModelSpec s;
  s.kind = model_kind_from_string(j.at("kind").get<std::string>());
  s.params = j.value("params", nlohmann::json::object());
  if (!s.params.is_object()) throw Error(ErrorKind::InvalidConfig, "model params must be an object");
  return s;
}

ModelKind TrainedModel::kind() const noexcept {
  if (std::holds_alternative<KnnModel>(impl_)) return ModelKind::Knn;
  if (std::holds_alternative<GnbModel>(impl_)) return ModelKind::Gnb;
  return ModelKind::Gbdt;
}

Prediction TrainedModel::predict(MatrixView rows, bool parallel) const {
  return std::visit(
      [&](const auto& m) -> Prediction {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          throw Error(ErrorKind::InvalidConfig, "model is not fitted");
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          return m.predict(rows, KnnSearch::KdTree, parallel);
        } else {
          return m.predict(rows, parallel);
        }
      },
      impl_);
}

Prediction TrainedModel::predict(const Dataset& data, bool parallel) const {
  if (data.schema() != schema_) throw Error(ErrorKind::SchemaMismatch, "dataset columns differ from the model schema");
  return predict(data.view(), parallel);
}

nlohmann::json TrainedModel::to_json() const {
  nlohmann::json body = std::visit(
      [](const auto& m) -> nlohmann::json {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, std::monostate>) {
          throw Error(ErrorKind::InvalidConfig, "model is not fitted");
        } else {
          return m.to_json();
        }
      },
      impl_);
  return nlohmann::json{{"format", "scint-model"},
                        {"version", kFormatVersion},
                        {"kind", to_string(kind())},
                        {"schema", schema_},
                        {"model", std::move(body)}};
}

TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
  if (j.value("format", std::string{}) != "scint-model") throw Error(ErrorKind::SchemaMismatch, "not a scint model file");
  if (j.value("version", 0) != kFormatVersion) {
    throw Error(ErrorKind::SchemaMismatch, "unsupported model file version " + std::to_string(j.value("version", 0)));
  }
  auto schema = j.at("schema").get<std::vector<std::string>>();
  const auto& body = j.at("model");
  switch (model_kind_from_string(j.at("kind").get<std::string>())) {
    case ModelKind::Knn: return TrainedModel(KnnModel::from_json(body), std::move(schema));
    case ModelKind::Gnb: return TrainedModel(GnbModel::from_json(body), std::move(schema));
    case ModelKind::Gbdt: return TrainedModel(GbdtModel::from_json(body), std::move(schema));
  }
  throw Error(ErrorKind::SchemaMismatch, "unknown model kind");
}

void TrainedModel::save(const std::filesystem::path& path) const { write_text_file_atomic(path, to_json().dump(1) + "\n"); }

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
  try {
    return from_json(nlohmann::json::parse(read_text_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaMismatch, path.string() + ": " + e.what());
  }
}

TrainedModel fit_model(const Dataset& train, const ModelSpec& spec, bool parallel) {
  try {
    const auto params = spec.params.is_null() ? nlohmann::json::object() : spec.params;
    switch (spec.kind) {
      case ModelKind::Knn: return TrainedModel(KnnModel::fit(train, params.get<KnnConfig>()), train.schema());
      case ModelKind::Gnb: return TrainedModel(GnbModel::fit(train, params.get<GnbConfig>()), train.schema());
      case ModelKind::Gbdt: {
        auto gbdt_params = params;
        if (!gbdt_params.contains("n_classes")) gbdt_params["n_classes"] = train.n_classes();
        return TrainedModel(GbdtModel::fit(train, gbdt_params.get<GbdtConfig>(), nullptr, parallel), train.schema());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("model parameters: ") + e.what());
  }
  throw Error(ErrorKind::InvalidConfig, "unknown model kind");
}

}  // namespace scint
