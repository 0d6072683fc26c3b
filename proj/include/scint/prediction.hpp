#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "scint/dataset.hpp"

namespace scint {

/// Per-row predicted class and class probabilities (row-major, n_classes wide).
struct Prediction {
  int n_classes = 0;
  std::vector<ClassIndex> classes;
  std::vector<double> proba;

  std::size_t rows() const noexcept { return classes.size(); }
  std::span<const double> row_proba(std::size_t i) const {
    return {proba.data() + i * static_cast<std::size_t>(n_classes), static_cast<std::size_t>(n_classes)};
  }
};

/// Index of the largest value; ties go to the smallest index.
inline ClassIndex argmax_smallest(std::span<const double> values) {
  ClassIndex best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<ClassIndex>(i);
  }
  return best;
}

}  // namespace scint
