#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace scint {

/// Severity class index: 0 = Class 1 (S4 < 0.2), 1 = Class 2, 2 = Class 3.
/// Files and reports use the 1-based names.
using ClassIndex = int;

struct DatasetProvenance {
  std::uint64_t seed = 0;
  std::string prng;
  std::vector<std::size_t> available_counts;
  std::vector<std::size_t> balance_counts;
  std::vector<std::string> source_files;
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const;
  static DatasetProvenance from_json(const nlohmann::json& j);
};

/// Non-owning row-major matrix view.
struct MatrixView {
  std::span<const double> values;
  std::size_t cols = 0;

  std::size_t rows() const noexcept { return cols == 0 ? 0 : values.size() / cols; }
  std::span<const double> row(std::size_t i) const { return values.subspan(i * cols, cols); }
};

/// Dense row-major feature matrix with integer class labels.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> schema, int n_classes = 3);

  std::size_t rows() const noexcept { return labels_.size(); }
  std::size_t cols() const noexcept { return schema_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  int n_classes() const noexcept { return n_classes_; }

  const std::vector<std::string>& schema() const noexcept { return schema_; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols(), cols()}; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const ClassIndex> labels() const noexcept { return labels_; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
  MatrixView view() const noexcept { return {values_, cols()}; }

  /// Throws SchemaMismatch on width mismatch, LabelOutOfRange on a bad
  /// label, RangeViolation on a non-finite value.
  void add_row(std::span<const double> features, ClassIndex label);

  Dataset subset(std::span<const std::size_t> indices) const;
  std::vector<std::size_t> class_counts() const;

  DatasetProvenance& provenance() noexcept { return provenance_; }
  const DatasetProvenance& provenance() const noexcept { return provenance_; }

  /// Header = schema + "label"; labels written 1-based; values with
  /// round-trip precision.
  std::string to_csv() const;
  /// Lines starting with '#' are ignored.
  static Dataset from_csv(const std::string& text, int n_classes = 3);

  void save(const std::filesystem::path& csv_path) const;
  static Dataset load(const std::filesystem::path& csv_path, int n_classes = 3);

 private:
  std::vector<std::string> schema_;
  std::vector<double> values_;
  std::vector<ClassIndex> labels_;
  int n_classes_ = 3;
  DatasetProvenance provenance_;
};

/// Shortest text that parses back to the same double.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary file and rename so readers never see partial output.
void write_text_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace scint
