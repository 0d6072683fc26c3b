#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scint/dataset.hpp"
#include "scint/rng.hpp"

namespace scint::testing {

inline std::filesystem::path data_dir() { return SCINT_TEST_DATA_DIR; }

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng(std::hash<std::string>{}(tag) ^ static_cast<std::uint64_t>(reinterpret_cast<std::uintptr_t>(this)));
    path_ = std::filesystem::temp_directory_path() / ("scint_" + tag + "_" + std::to_string(rng.next() % 1000000007));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::vector<std::string> column_names(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

/// Isotropic Gaussian blobs; class c is centred at separation * (c, -c, c, ...).
inline Dataset make_blobs(std::size_t rows_per_class, std::size_t dims, int n_classes, double separation,
                          std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds(column_names(dims), n_classes);
  std::vector<double> row(dims);
  for (std::size_t i = 0; i < rows_per_class; ++i) {
    for (int c = 0; c < n_classes; ++c) {
      for (std::size_t d = 0; d < dims; ++d) {
        row[d] = separation * c * (d % 2 == 0 ? 1.0 : -1.0) + rng.normal();
      }
      ds.add_row(row, c);
    }
  }
  return ds;
}

/// Uniform features in [0, 1) with uniform random labels.
inline Dataset make_uniform(std::size_t rows, std::size_t dims, int n_classes, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds(column_names(dims), n_classes);
  std::vector<double> row(dims);
  for (std::size_t i = 0; i < rows; ++i) {
    for (auto& v : row) v = rng.uniform01();
    ds.add_row(row, static_cast<ClassIndex>(rng.uniform_index(static_cast<std::uint64_t>(n_classes))));
  }
  return ds;
}

}  // namespace scint::testing
