#include "scint/gnb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scint/error.hpp"

namespace scint {

void GnbConfig::validate() const {
  if (!(variance_smoothing > 0.0) || !std::isfinite(variance_smoothing)) {
    throw Error(ErrorKind::InvalidConfig, "variance_smoothing must be > 0");
  }
}

void to_json(nlohmann::json& j, const GnbConfig& c) { j = nlohmann::json{{"var_smoothing", c.variance_smoothing}}; }

void from_json(const nlohmann::json& j, GnbConfig& c) {
  c.variance_smoothing = j.value("var_smoothing", c.variance_smoothing);
  c.validate();
}

GnbModel GnbModel::fit(const Dataset& train, const GnbConfig& config) {
  config.validate();
  if (train.empty()) throw Error(ErrorKind::EmptyDataset, "naive Bayes training set is empty");
  GnbModel m;
  m.config_ = config;
  m.n_classes_ = train.n_classes();
  m.n_features_ = train.cols();
  const auto k = static_cast<std::size_t>(m.n_classes_);
  const auto d = m.n_features_;
  const auto counts = train.class_counts();
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) throw Error(ErrorKind::EmptyClass, "Class" + std::to_string(c + 1) + " has no training rows");
  }
  m.means_.assign(k * d, 0.0);
  m.variances_.assign(k * d, 0.0);
  for (std::size_t r = 0; r < train.rows(); ++r) {
    const auto c = static_cast<std::size_t>(train.labels()[r]);
    for (std::size_t f = 0; f < d; ++f) m.means_[c * d + f] += train.at(r, f);
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t f = 0; f < d; ++f) m.means_[c * d + f] /= static_cast<double>(counts[c]);
  }
  for (std::size_t r = 0; r < train.rows(); ++r) {
    const auto c = static_cast<std::size_t>(train.labels()[r]);
    for (std::size_t f = 0; f < d; ++f) {
      const double dev = train.at(r, f) - m.means_[c * d + f];
      m.variances_[c * d + f] += dev * dev;
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t f = 0; f < d; ++f) {
      auto& v = m.variances_[c * d + f];
      v = v / static_cast<double>(counts[c]) + config.variance_smoothing;
    }
  }
  m.log_priors_.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    m.log_priors_[c] = std::log(static_cast<double>(counts[c]) / static_cast<double>(train.rows()));
  }
  return m;
}

std::vector<double> GnbModel::joint_log_likelihood(std::span<const double> row) const {
  if (row.size() != n_features_) throw Error(ErrorKind::SchemaMismatch, "feature count mismatch");
  std::vector<double> jll(log_priors_);
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  for (std::size_t c = 0; c < jll.size(); ++c) {
    double acc = 0.0;
    for (std::size_t f = 0; f < n_features_; ++f) {
      const double var = variances_[c * n_features_ + f];
      const double dev = row[f] - means_[c * n_features_ + f];
      acc += -0.5 * (log_two_pi + std::log(var)) - dev * dev / (2.0 * var);
    }
    jll[c] += acc;
  }
  return jll;
}

Prediction GnbModel::predict(MatrixView rows, bool parallel) const {
  if (rows.cols != n_features_) throw Error(ErrorKind::SchemaMismatch, "feature count mismatch");
  Prediction out;
  out.n_classes = n_classes_;
  const auto n = rows.rows();
  const auto k = static_cast<std::size_t>(n_classes_);
  out.classes.resize(n);
  out.proba.resize(n * k);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto r = static_cast<std::size_t>(i);
    const auto jll = joint_log_likelihood(rows.row(r));
    const double top = *std::max_element(jll.begin(), jll.end());
    double z = 0.0;
    for (double v : jll) z += std::exp(v - top);
    const double log_z = top + std::log(z);
    for (std::size_t c = 0; c < k; ++c) out.proba[r * k + c] = std::exp(jll[c] - log_z);
    out.classes[r] = argmax_smallest(jll);
  }
  return out;
}

GnbModel GnbModel::with_scaled_priors(double factor) const {
  if (!(factor > 0.0)) throw Error(ErrorKind::InvalidConfig, "prior scale must be positive");
  GnbModel m = *this;
  const double shift = std::log(factor);
  for (auto& lp : m.log_priors_) lp += shift;
  return m;
}

nlohmann::json GnbModel::to_json() const {
  return nlohmann::json{{"config", config_},         {"n_classes", n_classes_}, {"n_features", n_features_},
                        {"log_priors", log_priors_}, {"means", means_},         {"variances", variances_}};
}

GnbModel GnbModel::from_json(const nlohmann::json& j) {
  GnbModel m;
  m.config_ = j.at("config").get<GnbConfig>();
  m.n_classes_ = j.at("n_classes").get<int>();
  m.n_features_ = j.at("n_features").get<std::size_t>();
  m.log_priors_ = j.at("log_priors").get<std::vector<double>>();
  m.means_ = j.at("means").get<std::vector<double>>();
  m.variances_ = j.at("variances").get<std::vector<double>>();
  const auto cells = static_cast<std::size_t>(m.n_classes_) * m.n_features_;
  if (m.log_priors_.size() != static_cast<std::size_t>(m.n_classes_) || m.means_.size() != cells ||
      m.variances_.size() != cells) {
    throw Error(ErrorKind::SchemaMismatch, "inconsistent naive Bayes model file");
  }
  return m;
}

}  // namespace scint
