#pragma once

// Straightforward reference implementations the optimized code is checked
// against. Nothing here calls into the code under test except for accessors.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "scint/dataset.hpp"

namespace scint::oracle {

/// Majority vote over the k nearest rows of `points` by sum |d|^p, ties on
/// distance to the lower row index and ties on votes to the lower class.
inline ClassIndex knn_vote(MatrixView points, std::span<const ClassIndex> labels, std::span<const double> query,
                           std::size_t k, double p, int n_classes) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < query.size(); ++c) s += std::pow(std::abs(query[c] - points.row(i)[c]), p);
    d.emplace_back(s, i);
  }
  std::sort(d.begin(), d.end());
  std::vector<int> votes(static_cast<std::size_t>(n_classes), 0);
  for (std::size_t i = 0; i < k; ++i) ++votes[static_cast<std::size_t>(labels[d[i].second])];
  return static_cast<ClassIndex>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

/// Normal density evaluated directly, not in log space.
inline double normal_pdf(double x, double mean, double var) {
  return std::exp(-(x - mean) * (x - mean) / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

/// Softmax log-loss -log p_label computed naively in extended precision.
inline long double log_loss(std::span<const long double> z, int label) {
  long double s = 0.0L;
  for (long double v : z) s += std::exp(v);
  return -std::log(std::exp(z[static_cast<std::size_t>(label)]) / s);
}

/// Central finite differences of log_loss: first and second derivative
/// along each logit.
inline void log_loss_derivatives(std::span<const double> logits, int label, long double h, std::vector<double>& grad,
                                 std::vector<double>& hess) {
  std::vector<long double> z(logits.begin(), logits.end());
  grad.assign(z.size(), 0.0);
  hess.assign(z.size(), 0.0);
  const long double f0 = log_loss(z, label);
  for (std::size_t k = 0; k < z.size(); ++k) {
    const long double x = z[k];
    z[k] = x + h;
    const long double fp = log_loss(z, label);
    z[k] = x - h;
    const long double fm = log_loss(z, label);
    z[k] = x;
    grad[k] = static_cast<double>((fp - fm) / (2.0L * h));
    hess[k] = static_cast<double>((fp - 2.0L * f0 + fm) / (h * h));
  }
}

}  // namespace scint::oracle
