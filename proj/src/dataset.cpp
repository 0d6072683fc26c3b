#include "scint/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "scint/error.hpp"

namespace scint {

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error(ErrorKind::RangeViolation, "cannot format double");
  return {buf, ptr};
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorKind::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::IoError, "rename to " + path.string() + " failed: " + ec.message());
}

nlohmann::json DatasetProvenance::to_json() const {
  return nlohmann::json{{"seed", seed},
                        {"prng", prng},
                        {"available_counts", available_counts},
                        {"balance_counts", balance_counts},
                        {"source_files", source_files},
                        {"extra", extra}};
}

DatasetProvenance DatasetProvenance::from_json(const nlohmann::json& j) {
  DatasetProvenance p;
  p.seed = j.value("seed", std::uint64_t{0});
  p.prng = j.value("prng", std::string{});
  p.available_counts = j.value("available_counts", std::vector<std::size_t>{});
  p.balance_counts = j.value("balance_counts", std::vector<std::size_t>{});
  p.source_files = j.value("source_files", std::vector<std::string>{});
  p.extra = j.value("extra", nlohmann::json::object());
  return p;
}

Dataset::Dataset(std::vector<std::string> schema, int n_classes) : schema_(std::move(schema)), n_classes_(n_classes) {
  if (n_classes_ < 1) throw Error(ErrorKind::InvalidConfig, "n_classes must be >= 1");
}

void Dataset::add_row(std::span<const double> features, ClassIndex label) {
  if (features.size() != cols()) {
    throw Error(ErrorKind::SchemaMismatch,
                "row has " + std::to_string(features.size()) + " values, schema has " + std::to_string(cols()));
  }
  if (label < 0 || label >= n_classes_) throw Error(ErrorKind::LabelOutOfRange, "label " + std::to_string(label));
  for (double v : features) {
    if (!std::isfinite(v)) throw Error(ErrorKind::RangeViolation, "non-finite feature value");
  }
  values_.insert(values_.end(), features.begin(), features.end());
  labels_.push_back(label);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out(schema_, n_classes_);
  out.provenance_ = provenance_;
  out.values_.reserve(indices.size() * cols());
  out.labels_.reserve(indices.size());
  for (auto i : indices) {
    const auto r = row(i);
    out.values_.insert(out.values_.end(), r.begin(), r.end());
    out.labels_.push_back(labels_[i]);
  }
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes_), 0);
  for (auto l : labels_) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

std::string Dataset::to_csv() const {
  std::string out;
  for (const auto& name : schema_) {
    out += name;
    out += ',';
  }
  out += "label\n";
  for (std::size_t r = 0; r < rows(); ++r) {
    for (double v : row(r)) {
      out += format_double(v);
      out += ',';
    }
    out += std::to_string(labels_[r] + 1);
    out += '\n';
  }
  return out;
}

Dataset Dataset::from_csv(const std::string& text, int n_classes) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  do {
    if (!std::getline(in, line)) throw Error(ErrorKind::EmptyDataset, "CSV has no header");
    ++line_no;
  } while (line.starts_with('#'));
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header.back() != "label") {
    throw Error(ErrorKind::SchemaMismatch, "final CSV column must be 'label'");
  }
  header.pop_back();
  Dataset ds(header, n_classes);
  std::vector<double> values(ds.cols());
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.starts_with('#')) continue;
    std::size_t col = 0;
    std::size_t start = 0;
    int label = 0;
    while (true) {
      const auto pos = line.find(',', start);
      const auto cell = std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start);
      if (col < ds.cols()) {
        const auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), values[col]);
        if (ec != std::errc{} || p != cell.data() + cell.size()) {
          throw Error(ErrorKind::MalformedField, "line " + std::to_string(line_no) + " column " + header[col]);
        }
      } else if (col == ds.cols()) {
        const auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
        if (ec != std::errc{} || p != cell.data() + cell.size()) {
          throw Error(ErrorKind::MalformedField, "line " + std::to_string(line_no) + " label");
        }
      }
      ++col;
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (col != ds.cols() + 1) {
      throw Error(ErrorKind::SchemaMismatch, "line " + std::to_string(line_no) + " has " + std::to_string(col) + " cells");
    }
    ds.add_row(values, label - 1);
  }
  return ds;
}

void Dataset::save(const std::filesystem::path& csv_path) const { write_text_file_atomic(csv_path, to_csv()); }

Dataset Dataset::load(const std::filesystem::path& csv_path, int n_classes) {
  return from_csv(read_text_file(csv_path), n_classes);
}

}  // namespace scint
