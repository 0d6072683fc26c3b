#include "scint/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scint/error.hpp"

namespace scint {

namespace {

// Floors keep leaf weights finite when a class is (nearly) certain.
constexpr double kMinHessian = 1e-16;
constexpr double kMinPrior = 1e-15;

std::string_view mode_name(SplitMode m) { return m == SplitMode::Exact ? "exact" : "histogram"; }

// Threshold strictly above a and at most b, so `x < threshold` sends a left
// and b right.
double split_point(double a, double b) noexcept {
  const double m = 0.5 * (a + b);
  return m > a ? m : b;
}

struct Split {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

class SplitScorer {
 public:
  SplitScorer(double g_total, double h_total, const GbdtConfig& cfg)
      : g_(g_total), h_(h_total), lambda_(cfg.l2_leaf_reg), min_child_(cfg.min_child_weight),
        parent_(g_total * g_total / (h_total + cfg.l2_leaf_reg)) {}

  // Regularized second-order gain of putting (gl, hl) left; NaN-free, and
  // -inf when a child is too light.
  double gain(double gl, double hl) const noexcept {
    const double gr = g_ - gl;
    const double hr = h_ - hl;
    if (hl < min_child_ || hr < min_child_) return -std::numeric_limits<double>::infinity();
    return 0.5 * (gl * gl / (hl + lambda_) + gr * gr / (hr + lambda_) - parent_);
  }

 private:
  double g_, h_, lambda_, min_child_, parent_;
};

struct FitData {
  explicit FitData(const GbdtConfig& c) : cfg(c) {}

  const GbdtConfig& cfg;
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  std::vector<std::vector<double>> columns;  // feature-major copy
  // Histogram mode.
  FeatureBins bins;
  std::vector<std::vector<std::uint32_t>> bin_index;
  std::vector<std::size_t> bin_offsets;
  // Exact mode: rows sorted by (value, row) per feature.
  std::vector<std::vector<std::size_t>> presorted;
  bool parallel = true;
};

class TreeBuilder {
 public:
  TreeBuilder(const FitData& data, std::span<const double> grad, std::span<const double> hess)
      : d_(data), grad_(grad), hess_(hess), go_left_(data.n_rows, 0) {}

  RegressionTree build() {
    std::vector<std::size_t> rows(d_.n_rows);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::vector<std::vector<std::size_t>> sorted;
    if (d_.cfg.split_mode == SplitMode::Exact) sorted = d_.presorted;
    grow(std::move(rows), std::move(sorted), 0);
    return std::move(tree_);
  }

 private:
  std::int32_t grow(std::vector<std::size_t> rows, std::vector<std::vector<std::size_t>> sorted, int depth) {
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double g = 0.0, h = 0.0;
    for (auto r : rows) {
      g += grad_[r];
      h += hess_[r];
    }
    Split best;
    if (depth < d_.cfg.max_depth && rows.size() >= 2) {
      const SplitScorer scorer(g, h, d_.cfg);
      best = d_.cfg.split_mode == SplitMode::Exact ? best_exact(sorted, scorer) : best_histogram(rows, scorer);
    }
    if (best.feature < 0) {
      tree_.nodes[static_cast<std::size_t>(id)].value = -g / (h + d_.cfg.l2_leaf_reg) * d_.cfg.learning_rate;
      return id;
    }

    const auto& column = d_.columns[static_cast<std::size_t>(best.feature)];
    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : rows) {
      go_left_[r] = column[r] < best.threshold ? 1 : 0;
      (go_left_[r] ? left_rows : right_rows).push_back(r);
    }
    std::vector<std::vector<std::size_t>> left_sorted, right_sorted;
    if (!sorted.empty()) {
      left_sorted.resize(sorted.size());
      right_sorted.resize(sorted.size());
      for (std::size_t f = 0; f < sorted.size(); ++f) {
        left_sorted[f].reserve(left_rows.size());
        right_sorted[f].reserve(right_rows.size());
        for (auto r : sorted[f]) (go_left_[r] ? left_sorted[f] : right_sorted[f]).push_back(r);
      }
      sorted.clear();
    }
    rows.clear();
    rows.shrink_to_fit();

    const auto left = grow(std::move(left_rows), std::move(left_sorted), depth + 1);
    const auto right = grow(std::move(right_rows), std::move(right_sorted), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  // Features are scored independently, then merged in feature order so the
  // chosen split does not depend on the thread count.
  static Split merge(const std::vector<Split>& per_feature) {
    Split best;
    for (const auto& s : per_feature) {
      if (s.feature >= 0 && s.gain > best.gain) best = s;
    }
    return best;
  }

  Split best_exact(const std::vector<std::vector<std::size_t>>& sorted, const SplitScorer& scorer) const {
    std::vector<Split> per_feature(d_.n_features);
    const auto nf = static_cast<std::ptrdiff_t>(d_.n_features);
#pragma omp parallel for schedule(dynamic) if (d_.parallel)
    for (std::ptrdiff_t fi = 0; fi < nf; ++fi) {
      const auto f = static_cast<std::size_t>(fi);
      const auto& order = sorted[f];
      const auto& column = d_.columns[f];
      Split local;
      double gl = 0.0, hl = 0.0;
      std::size_t i = 0;
      while (i < order.size()) {
        const double v = column[order[i]];
        double group_g = 0.0, group_h = 0.0;
        while (i < order.size() && column[order[i]] == v) {
          group_g += grad_[order[i]];
          group_h += hess_[order[i]];
          ++i;
        }
        gl += group_g;
        hl += group_h;
        if (i == order.size()) break;
        const double gain = scorer.gain(gl, hl);
        if (gain > local.gain) local = Split{gain, static_cast<int>(f), split_point(v, column[order[i]])};
      }
      per_feature[f] = local;
    }
    return merge(per_feature);
  }

  Split best_histogram(const std::vector<std::size_t>& rows, const SplitScorer& scorer) {
    histograms_.assign(d_.bin_offsets.back(), HistogramBin{});
    if (d_.parallel) {
      build_histograms_parallel(d_.bin_index, d_.bin_offsets, rows, grad_, hess_, histograms_);
    } else {
      for (std::size_t f = 0; f < d_.n_features; ++f) {
        const auto first = d_.bin_offsets[f];
        build_histogram_serial(d_.bin_index[f], rows, grad_, hess_,
                               std::span(histograms_).subspan(first, d_.bin_offsets[f + 1] - first));
      }
    }
    std::vector<Split> per_feature(d_.n_features);
    for (std::size_t f = 0; f < d_.n_features; ++f) {
      const auto first = d_.bin_offsets[f];
      const auto n_bins = d_.bin_offsets[f + 1] - first;
      Split local;
      double gl = 0.0, hl = 0.0;
      std::size_t prev = n_bins;  // last non-empty bin seen
      for (std::size_t b = 0; b < n_bins; ++b) {
        const auto& bin = histograms_[first + b];
        if (bin.count == 0) continue;
        if (prev != n_bins) {
          const double gain = scorer.gain(gl, hl);
          if (gain > local.gain) {
            local = Split{gain, static_cast<int>(f), split_point(d_.bins.bin_upper(f, prev), d_.bins.bin_lower(f, b))};
          }
        }
        gl += bin.g;
        hl += bin.h;
        prev = b;
      }
      per_feature[f] = local;
    }
    return merge(per_feature);
  }

  const FitData& d_;
  std::span<const double> grad_, hess_;
  std::vector<char> go_left_;
  std::vector<HistogramBin> histograms_;
  RegressionTree tree_;
};

}  // namespace

void GbdtConfig::validate() const {
  if (n_classes < 2) throw Error(ErrorKind::InvalidConfig, "n_classes must be >= 2");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw Error(ErrorKind::InvalidConfig, "learning_rate must lie in (0, 1]");
  if (max_depth < 1) throw Error(ErrorKind::InvalidConfig, "max_depth must be >= 1");
  if (n_rounds < 1) throw Error(ErrorKind::InvalidConfig, "n_rounds must be >= 1");
  if (!(l2_leaf_reg >= 0.0)) throw Error(ErrorKind::InvalidConfig, "l2_leaf_reg must be >= 0");
  if (!(min_child_weight >= 0.0)) throw Error(ErrorKind::InvalidConfig, "min_child_weight must be >= 0");
  if (split_mode == SplitMode::Histogram && n_bins < 2) throw Error(ErrorKind::InvalidConfig, "n_bins must be >= 2");
}

void to_json(nlohmann::json& j, const GbdtConfig& c) {
  j = nlohmann::json{{"n_classes", c.n_classes},
                     {"learning_rate", c.learning_rate},
                     {"max_depth", c.max_depth},
                     {"n_rounds", c.n_rounds},
                     {"l2_leaf_reg", c.l2_leaf_reg},
                     {"min_child_weight", c.min_child_weight},
                     {"split_mode", std::string(mode_name(c.split_mode))},
                     {"n_bins", c.n_bins}};
}

void from_json(const nlohmann::json& j, GbdtConfig& c) {
  c.n_classes = j.value("n_classes", c.n_classes);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.max_depth = j.value("max_depth", c.max_depth);
  c.n_rounds = j.value("n_rounds", c.n_rounds);
  c.l2_leaf_reg = j.value("l2_leaf_reg", c.l2_leaf_reg);
  c.min_child_weight = j.value("min_child_weight", c.min_child_weight);
  c.n_bins = j.value("n_bins", c.n_bins);
  if (j.contains("split_mode")) {
    const auto mode = j.at("split_mode").get<std::string>();
    if (mode == "exact") {
      c.split_mode = SplitMode::Exact;
    } else if (mode == "histogram") {
      c.split_mode = SplitMode::Histogram;
    } else {
      throw Error(ErrorKind::InvalidConfig, "split_mode must be 'exact' or 'histogram'");
    }
  }
  c.validate();
}

void softmax(std::span<const double> logits, std::span<double> out) noexcept {
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - top);
    z += out[k];
  }
  for (auto& v : out) v /= z;
}

double softmax_log_loss(std::span<const double> logits, int label) noexcept {
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - top);
  return top + std::log(z) - logits[static_cast<std::size_t>(label)];
}

void softmax_grad_hess(std::span<const double> logits, int label, std::span<double> grad, std::span<double> hess) noexcept {
  softmax(logits, grad);
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const double p = grad[k];
    hess[k] = p * (1.0 - p);
    grad[k] = p - (static_cast<int>(k) == label ? 1.0 : 0.0);
  }
}

double RegressionTree::predict(std::span<const double> row) const noexcept {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

int RegressionTree::depth() const noexcept {
  if (nodes.empty()) return 0;
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

std::size_t RegressionTree::leaf_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

FeatureBins FeatureBins::build(MatrixView data, int n_bins) {
  FeatureBins out;
  out.bins_.resize(data.cols);
  const auto n = data.rows();
  std::vector<double> values(n);
  for (std::size_t f = 0; f < data.cols; ++f) {
    for (std::size_t r = 0; r < n; ++r) values[r] = data.row(r)[f];
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, std::size_t>> distinct;  // value, count
    for (double v : values) {
      if (distinct.empty() || distinct.back().first != v) {
        distinct.emplace_back(v, 1);
      } else {
        ++distinct.back().second;
      }
    }
    auto& pf = out.bins_[f];
    if (distinct.size() <= static_cast<std::size_t>(n_bins)) {
      for (const auto& [v, c] : distinct) {
        pf.lower.push_back(v);
        pf.upper.push_back(v);
      }
      continue;
    }
    // Greedy equal-frequency bins; equal values never straddle a boundary.
    std::size_t cumulative = 0;
    bool open = false;
    for (std::size_t i = 0; i < distinct.size(); ++i) {
      const auto& [v, c] = distinct[i];
      if (!open) {
        pf.lower.push_back(v);
        pf.upper.push_back(v);
        open = true;
      }
      pf.upper.back() = v;
      cumulative += c;
      const auto boundary = (pf.lower.size() * n) / static_cast<std::size_t>(n_bins);
      if (cumulative >= boundary && pf.lower.size() < static_cast<std::size_t>(n_bins)) open = false;
    }
  }
  return out;
}

std::uint32_t FeatureBins::bin_of(std::size_t feature, double value) const {
  const auto& upper = bins_[feature].upper;
  const auto it = std::lower_bound(upper.begin(), upper.end(), value);
  if (it == upper.end()) return static_cast<std::uint32_t>(upper.size() - 1);
  return static_cast<std::uint32_t>(it - upper.begin());
}

void build_histogram_serial(std::span<const std::uint32_t> bin_index, std::span<const std::size_t> rows,
                            std::span<const double> grad, std::span<const double> hess,
                            std::span<HistogramBin> histogram) {
  for (auto r : rows) {
    auto& bin = histogram[bin_index[r]];
    bin.g += grad[r];
    bin.h += hess[r];
    ++bin.count;
  }
}

void build_histograms_parallel(std::span<const std::vector<std::uint32_t>> bin_index,
                               std::span<const std::size_t> offsets, std::span<const std::size_t> rows,
                               std::span<const double> grad, std::span<const double> hess,
                               std::span<HistogramBin> histograms) {
  const auto nf = static_cast<std::ptrdiff_t>(bin_index.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t fi = 0; fi < nf; ++fi) {
    const auto f = static_cast<std::size_t>(fi);
    build_histogram_serial(bin_index[f], rows, grad, hess, histograms.subspan(offsets[f], offsets[f + 1] - offsets[f]));
  }
}

GbdtModel GbdtModel::constant(std::vector<double> base_scores, std::size_t n_features, const GbdtConfig& config) {
  if (base_scores.size() != static_cast<std::size_t>(config.n_classes)) {
    throw Error(ErrorKind::InvalidConfig, "base score count must equal n_classes");
  }
  GbdtModel m;
  m.config_ = config;
  m.n_features_ = n_features;
  m.base_scores_ = std::move(base_scores);
  return m;
}

GbdtModel GbdtModel::fit(const Dataset& train, const GbdtConfig& config, GbdtFitReport* report, bool parallel) {
  config.validate();
  const auto n = train.rows();
  const auto k = static_cast<std::size_t>(config.n_classes);
  if (n < 2) throw Error(ErrorKind::TooFewRows, "gradient boosting needs at least 2 rows");
  std::vector<std::size_t> counts(k, 0);
  for (auto l : train.labels()) {
    if (l < 0 || static_cast<std::size_t>(l) >= k) throw Error(ErrorKind::LabelOutOfRange, "label " + std::to_string(l + 1));
    ++counts[static_cast<std::size_t>(l)];
  }

  FitData data{config};
  data.n_rows = n;
  data.n_features = train.cols();
  data.parallel = parallel;
  data.columns.assign(data.n_features, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t f = 0; f < data.n_features; ++f) data.columns[f][r] = train.at(r, f);
  }
  if (config.split_mode == SplitMode::Histogram) {
    data.bins = FeatureBins::build(train.view(), config.n_bins);
    data.bin_offsets.push_back(0);
    data.bin_index.resize(data.n_features);
    for (std::size_t f = 0; f < data.n_features; ++f) {
      data.bin_index[f].resize(n);
      for (std::size_t r = 0; r < n; ++r) data.bin_index[f][r] = data.bins.bin_of(f, data.columns[f][r]);
      data.bin_offsets.push_back(data.bin_offsets.back() + data.bins.bin_count(f));
    }
  } else {
    data.presorted.resize(data.n_features);
    for (std::size_t f = 0; f < data.n_features; ++f) {
      auto& order = data.presorted[f];
      order.resize(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      const auto& col = data.columns[f];
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return col[a] < col[b] || (col[a] == col[b] && a < b);
      });
    }
  }

  GbdtModel model;
  model.config_ = config;
  model.n_features_ = train.cols();
  model.base_scores_.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    model.base_scores_[c] = std::log(std::max(static_cast<double>(counts[c]) / static_cast<double>(n), kMinPrior));
  }

  std::vector<double> scores(n * k);
  for (std::size_t r = 0; r < n; ++r) std::copy(model.base_scores_.begin(), model.base_scores_.end(), scores.begin() + static_cast<std::ptrdiff_t>(r * k));

  const auto labels = train.labels();
  auto total_loss = [&] {
    double loss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      loss += softmax_log_loss(std::span(scores).subspan(r * k, k), labels[r]);
    }
    return loss / static_cast<double>(n);
  };
  if (report != nullptr) {
    report->train_log_loss.assign(1, total_loss());
    bool identical = true;
    for (std::size_t f = 0; f < data.n_features && identical; ++f) {
      const auto& col = data.columns[f];
      identical = std::all_of(col.begin(), col.end(), [&](double v) { return v == col[0]; });
    }
    const auto present = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
    report->degenerate = identical && present > 1;
  }

  std::vector<std::vector<double>> grad(k, std::vector<double>(n)), hess(k, std::vector<double>(n));
  const auto rows = static_cast<std::ptrdiff_t>(n);
  for (int round = 0; round < config.n_rounds; ++round) {
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t ri = 0; ri < rows; ++ri) {
      const auto r = static_cast<std::size_t>(ri);
      double g[64], h[64];
      std::vector<double> gbuf, hbuf;
      std::span<double> gs(g, k), hs(h, k);
      if (k > 64) {
        gbuf.resize(k);
        hbuf.resize(k);
        gs = gbuf;
        hs = hbuf;
      }
      softmax_grad_hess(std::span(scores).subspan(r * k, k), labels[r], gs, hs);
      for (std::size_t c = 0; c < k; ++c) {
        grad[c][r] = gs[c];
        hess[c][r] = std::max(hs[c], kMinHessian);
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      model.trees_.push_back(TreeBuilder(data, grad[c], hess[c]).build());
    }
    const auto first_tree = model.trees_.size() - k;
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t ri = 0; ri < rows; ++ri) {
      const auto r = static_cast<std::size_t>(ri);
      const auto row = train.row(r);
      for (std::size_t c = 0; c < k; ++c) scores[r * k + c] += model.trees_[first_tree + c].predict(row);
    }
    if (report != nullptr) report->train_log_loss.push_back(total_loss());
  }
  return model;
}

int GbdtModel::rounds() const noexcept { return static_cast<int>(trees_.size() / static_cast<std::size_t>(config_.n_classes)); }

const RegressionTree& GbdtModel::tree(int round, int cls) const {
  return trees_.at(static_cast<std::size_t>(round) * static_cast<std::size_t>(config_.n_classes) + static_cast<std::size_t>(cls));
}

std::vector<double> GbdtModel::raw_scores(std::span<const double> row) const {
  if (row.size() != n_features_) throw Error(ErrorKind::SchemaMismatch, "feature count mismatch");
  std::vector<double> scores(base_scores_);
  const auto k = scores.size();
  for (std::size_t t = 0; t < trees_.size(); ++t) scores[t % k] += trees_[t].predict(row);
  return scores;
}

Prediction GbdtModel::predict(MatrixView rows, bool parallel) const {
  if (rows.cols != n_features_) throw Error(ErrorKind::SchemaMismatch, "feature count mismatch");
  Prediction out;
  out.n_classes = config_.n_classes;
  const auto n = rows.rows();
  const auto k = static_cast<std::size_t>(config_.n_classes);
  out.classes.resize(n);
  out.proba.resize(n * k);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto r = static_cast<std::size_t>(i);
    const auto scores = raw_scores(rows.row(r));
    auto p = std::span(out.proba).subspan(r * k, k);
    softmax(scores, p);
    out.classes[r] = argmax_smallest(p);
  }
  return out;
}

GbdtModel GbdtModel::truncated(int rounds) const {
  GbdtModel m = *this;
  const auto keep = std::min(m.trees_.size(), static_cast<std::size_t>(std::max(rounds, 0)) * static_cast<std::size_t>(config_.n_classes));
  m.trees_.resize(keep);
  return m;
}

nlohmann::json GbdtModel::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) {
    std::vector<int> feature;
    std::vector<double> threshold, value;
    std::vector<std::int32_t> left, right;
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(n.value);
    }
    trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}});
  }
  return nlohmann::json{{"config", config_}, {"n_features", n_features_}, {"base_scores", base_scores_}, {"trees", trees}};
}

GbdtModel GbdtModel::from_json(const nlohmann::json& j) {
  GbdtModel m;
  m.config_ = j.at("config").get<GbdtConfig>();
  m.n_features_ = j.at("n_features").get<std::size_t>();
  m.base_scores_ = j.at("base_scores").get<std::vector<double>>();
  if (m.base_scores_.size() != static_cast<std::size_t>(m.config_.n_classes)) {
    throw Error(ErrorKind::SchemaMismatch, "base score count does not match n_classes");
  }
  for (const auto& jt : j.at("trees")) {
    const auto feature = jt.at("feature").get<std::vector<int>>();
    const auto threshold = jt.at("threshold").get<std::vector<double>>();
    const auto left = jt.at("left").get<std::vector<std::int32_t>>();
    const auto right = jt.at("right").get<std::vector<std::int32_t>>();
    const auto value = jt.at("value").get<std::vector<double>>();
    const auto size = feature.size();
    if (size == 0 || threshold.size() != size || left.size() != size || right.size() != size || value.size() != size) {
      throw Error(ErrorKind::SchemaMismatch, "malformed tree in model file");
    }
    RegressionTree t;
    for (std::size_t i = 0; i < size; ++i) {
      if (feature[i] >= 0) {
        const auto ok = [&](std::int32_t c) { return c > static_cast<std::int32_t>(i) && static_cast<std::size_t>(c) < size; };
        if (static_cast<std::size_t>(feature[i]) >= m.n_features_ || !ok(left[i]) || !ok(right[i])) {
          throw Error(ErrorKind::SchemaMismatch, "tree node references out of range");
        }
      }
      t.nodes.push_back(TreeNode{feature[i], threshold[i], left[i], right[i], value[i]});
    }
    m.trees_.push_back(std::move(t));
  }
  if (m.trees_.size() % static_cast<std::size_t>(m.config_.n_classes) != 0) {
    throw Error(ErrorKind::SchemaMismatch, "tree count is not a multiple of n_classes");
  }
  return m;
}

}  // namespace scint
