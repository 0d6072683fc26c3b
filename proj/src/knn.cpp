#include "scint/knn.hpp"

#include <algorithm>
#include <cmath>

#include "scint/error.hpp"

namespace scint {

namespace {

double power_term(double diff, double p) noexcept {
  const double a = std::abs(diff);
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  return std::pow(a, p);
}

}  // namespace

void KnnConfig::validate() const {
  if (n_neighbors < 1) throw Error(ErrorKind::InvalidConfig, "n_neighbors must be >= 1");
  if (!(minkowski_p >= 1.0) || !std::isfinite(minkowski_p)) throw Error(ErrorKind::InvalidConfig, "p must be >= 1");
  if (leaf_size < 1) throw Error(ErrorKind::InvalidConfig, "leaf_size must be >= 1");
}

void to_json(nlohmann::json& j, const KnnConfig& c) {
  j = nlohmann::json{{"n_neighbors", c.n_neighbors}, {"p", c.minkowski_p}, {"leaf_size", c.leaf_size}};
}

void from_json(const nlohmann::json& j, KnnConfig& c) {
  c.n_neighbors = j.value("n_neighbors", c.n_neighbors);
  c.minkowski_p = j.value("p", c.minkowski_p);
  c.leaf_size = j.value("leaf_size", c.leaf_size);
  c.validate();
}

double minkowski_power_distance(std::span<const double> a, std::span<const double> b, double p) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += power_term(a[i] - b[i], p);
  return sum;
}

KdTree::KdTree(MatrixView points, std::size_t leaf_size) : leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  order_.resize(points.rows());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!order_.empty()) build(points, 0, order_.size());
}

std::int32_t KdTree::build(MatrixView points, std::size_t begin, std::size_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_) return id;

  int best_dim = -1;
  double best_spread = 0.0;
  for (std::size_t d = 0; d < points.cols; ++d) {
    double lo = points.row(order_[begin])[d], hi = lo;
    for (std::size_t i = begin + 1; i < end; ++i) {
      const double v = points.row(order_[i])[d];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = static_cast<int>(d);
    }
  }
  if (best_dim < 0) return id;  // all points coincide

  const auto dim = static_cast<std::size_t>(best_dim);
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin), order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                     const double va = points.row(a)[dim], vb = points.row(b)[dim];
                     return va < vb || (va == vb && a < b);
                   });
  const double split = points.row(order_[mid])[dim];
  // [begin, mid) holds values <= split, [mid, end) values >= split.
  const auto left = build(points, begin, mid);
  const auto right = build(points, mid, end);
  auto& node = nodes_[static_cast<std::size_t>(id)];
  node.split_dim = best_dim;
  node.split_value = split;
  node.left = left;
  node.right = right;
  return id;
}

void KdTree::search(MatrixView points, std::int32_t node_id, std::span<const double> query, std::size_t k, double p,
                    std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[static_cast<std::size_t>(node_id)];
  if (node.split_dim < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const Neighbor cand{minkowski_power_distance(query, points.row(order_[i]), p), order_[i]};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const double diff = query[static_cast<std::size_t>(node.split_dim)] - node.split_value;
  const auto near = diff < 0.0 ? node.left : node.right;
  const auto far = diff < 0.0 ? node.right : node.left;
  search(points, near, query, k, p, heap);
  // A far-side point can tie the current worst and still win on index, so
  // equality does not prune.
  if (heap.size() < k || power_term(diff, p) <= heap.front().distance) search(points, far, query, k, p, heap);
}

std::vector<Neighbor> KdTree::nearest(MatrixView points, std::span<const double> query, std::size_t k,
                                      double p) const {
  std::vector<Neighbor> heap;
  if (nodes_.empty() || k == 0) return heap;
  heap.reserve(k + 1);
  search(points, 0, query, k, p, heap);
  std::sort_heap(heap.begin(), heap.end());
  return heap;
}

KnnModel KnnModel::fit(const Dataset& train, const KnnConfig& config) {
  config.validate();
  if (train.empty()) throw Error(ErrorKind::EmptyDataset, "KNN training set is empty");
  if (static_cast<std::size_t>(config.n_neighbors) > train.rows()) {
    throw Error(ErrorKind::TooFewRows, "n_neighbors " + std::to_string(config.n_neighbors) + " exceeds " +
                                           std::to_string(train.rows()) + " training rows");
  }
  KnnModel m;
  m.config_ = config;
  m.n_classes_ = train.n_classes();
  const auto n = train.rows();
  const auto d = train.cols();
  m.means_.assign(d, 0.0);
  m.scales_.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) m.means_[c] += train.at(r, c);
  }
  for (auto& mu : m.means_) mu /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double dev = train.at(r, c) - m.means_[c];
      m.scales_[c] += dev * dev;
    }
  }
  for (auto& s : m.scales_) {
    s = std::sqrt(s / static_cast<double>(n));
    if (!(s > 0.0)) s = 1.0;  // constant feature
  }
  m.train_.resize(n * d);
  for (std::size_t r = 0; r < n; ++r) {
    const auto z = m.standardize(train.row(r));
    std::copy(z.begin(), z.end(), m.train_.begin() + static_cast<std::ptrdiff_t>(r * d));
  }
  m.labels_.assign(train.labels().begin(), train.labels().end());
  m.index();
  return m;
}

void KnnModel::index() { tree_ = KdTree(standardized_train(), static_cast<std::size_t>(config_.leaf_size)); }

std::vector<double> KnnModel::standardize(std::span<const double> row) const {
  if (row.size() != means_.size()) {
    throw Error(ErrorKind::SchemaMismatch,
                "row has " + std::to_string(row.size()) + " features, model expects " + std::to_string(means_.size()));
  }
  std::vector<double> z(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) z[c] = (row[c] - means_[c]) / scales_[c];
  return z;
}

std::vector<Neighbor> KnnModel::neighbors(std::span<const double> row, KnnSearch search) const {
  const auto z = standardize(row);
  const auto k = static_cast<std::size_t>(config_.n_neighbors);
  if (search == KnnSearch::KdTree) return tree_.nearest(standardized_train(), z, k, config_.minkowski_p);

  const auto points = standardized_train();
  std::vector<Neighbor> all(points.rows());
  for (std::size_t i = 0; i < all.size(); ++i) {
    all[i] = Neighbor{minkowski_power_distance(z, points.row(i), config_.minkowski_p), i};
  }
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
  all.resize(k);
  return all;
}

void KnnModel::predict_row(std::span<const double> raw, KnnSearch search, ClassIndex& out_class,
                           double* out_proba) const {
  const auto nn = neighbors(raw, search);
  std::vector<double> votes(static_cast<std::size_t>(n_classes_), 0.0);
  for (const auto& n : nn) votes[static_cast<std::size_t>(labels_[n.index])] += 1.0;
  for (std::size_t c = 0; c < votes.size(); ++c) out_proba[c] = votes[c] / static_cast<double>(nn.size());
  out_class = argmax_smallest(votes);
}

Prediction KnnModel::predict(MatrixView rows, KnnSearch search, bool parallel) const {
  if (rows.cols != means_.size()) throw Error(ErrorKind::SchemaMismatch, "feature count mismatch");
  Prediction out;
  out.n_classes = n_classes_;
  const auto n = rows.rows();
  out.classes.resize(n);
  out.proba.resize(n * static_cast<std::size_t>(n_classes_));
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto r = static_cast<std::size_t>(i);
    predict_row(rows.row(r), search, out.classes[r], out.proba.data() + r * static_cast<std::size_t>(n_classes_));
  }
  return out;
}

nlohmann::json KnnModel::to_json() const {
  return nlohmann::json{{"config", config_}, {"n_classes", n_classes_}, {"means", means_},
                        {"scales", scales_}, {"train", train_},         {"labels", labels_}};
}

KnnModel KnnModel::from_json(const nlohmann::json& j) {
  KnnModel m;
  m.config_ = j.at("config").get<KnnConfig>();
  m.n_classes_ = j.at("n_classes").get<int>();
  m.means_ = j.at("means").get<std::vector<double>>();
  m.scales_ = j.at("scales").get<std::vector<double>>();
  m.train_ = j.at("train").get<std::vector<double>>();
  m.labels_ = j.at("labels").get<std::vector<ClassIndex>>();
  if (m.means_.empty() || m.scales_.size() != m.means_.size() || m.train_.size() != m.labels_.size() * m.means_.size()) {
    throw Error(ErrorKind::SchemaMismatch, "inconsistent KNN model file");
  }
  m.index();
  return m;
}

}  // namespace scint
