#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "scint/dataset.hpp"
#include "scint/prediction.hpp"

namespace scint {

struct KnnConfig {
  int n_neighbors = 12;
  double minkowski_p = 1.0;
  /// kd-tree bucket capacity; affects speed only.
  int leaf_size = 1;

  void validate() const;
};

void to_json(nlohmann::json& j, const KnnConfig& c);
void from_json(const nlohmann::json& j, KnnConfig& c);

struct Neighbor {
  double distance = 0.0;  // sum |d|^p, i.e. the p-th power of the Minkowski distance
  std::size_t index = 0;

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  }
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// p-th power Minkowski distance; p == 1 and p == 2 avoid pow().
double minkowski_power_distance(std::span<const double> a, std::span<const double> b, double p) noexcept;

/// Static kd-tree over a row-major point set. Splits on the widest
/// dimension at the median; buckets hold at most leaf_size points. The tree
/// stores indices only, so queries take the same point set it was built on.
class KdTree {
 public:
  KdTree() = default;
  KdTree(MatrixView points, std::size_t leaf_size);

  /// The k nearest points under (distance, index) order, ascending.
  std::vector<Neighbor> nearest(MatrixView points, std::span<const double> query, std::size_t k, double p) const;

  std::size_t node_count() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    std::size_t begin = 0, end = 0;  // range in order_
    int split_dim = -1;              // -1 for a bucket
    double split_value = 0.0;
    std::int32_t left = -1, right = -1;
  };

  std::int32_t build(MatrixView points, std::size_t begin, std::size_t end);
  void search(MatrixView points, std::int32_t node, std::span<const double> query, std::size_t k, double p,
              std::vector<Neighbor>& heap) const;

  std::size_t leaf_size_ = 1;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

enum class KnnSearch { KdTree, BruteForce };

class KnnModel {
 public:
  /// Standardizes features (z-score fitted on train) and indexes them.
  /// Throws EmptyDataset or TooFewRows (k > rows).
  static KnnModel fit(const Dataset& train, const KnnConfig& config);

  Prediction predict(MatrixView rows, KnnSearch search = KnnSearch::KdTree, bool parallel = true) const;

  /// Neighbors of one raw (unstandardized) row.
  std::vector<Neighbor> neighbors(std::span<const double> row, KnnSearch search = KnnSearch::KdTree) const;

  std::vector<double> standardize(std::span<const double> row) const;

  const KnnConfig& config() const noexcept { return config_; }
  int n_classes() const noexcept { return n_classes_; }
  std::size_t n_features() const noexcept { return means_.size(); }
  MatrixView standardized_train() const noexcept { return {train_, means_.size()}; }
  std::span<const ClassIndex> labels() const noexcept { return labels_; }

  nlohmann::json to_json() const;
  static KnnModel from_json(const nlohmann::json& j);

 private:
  void index();
  void predict_row(std::span<const double> raw, KnnSearch search, ClassIndex& out_class, double* out_proba) const;

  KnnConfig config_;
  int n_classes_ = 0;
  std::vector<double> means_, scales_;
  std::vector<double> train_;
  std::vector<ClassIndex> labels_;
  KdTree tree_;
};

}  // namespace scint
