#include "scint/ismr.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <set>

namespace scint {

namespace {

constexpr std::size_t kMaxErrorSamples = 20;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return fields;
}

struct FieldReader {
  const std::vector<std::string_view>& fields;
  std::size_t line_number;
  std::optional<LineError> error;

  // Returns nullopt for an empty field; records an error for anything else
  // that is not a finite number.
  std::optional<double> number(int column, const char* name) {
    if (error) return std::nullopt;
    if (column < 1 || static_cast<std::size_t>(column) > fields.size()) {
      error = LineError{ErrorKind::MissingColumn, line_number, name,
                        "column " + std::to_string(column) + " absent (line has " + std::to_string(fields.size()) +
                            " fields)"};
      return std::nullopt;
    }
    const auto text = fields[static_cast<std::size_t>(column - 1)];
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
      error = LineError{ErrorKind::MalformedField, line_number, name, "not a finite number: '" + std::string(text) + "'"};
      return std::nullopt;
    }
    return value;
  }

  std::optional<double> required(int column, const char* name) {
    auto v = number(column, name);
    if (!v && !error) error = LineError{ErrorKind::MissingColumn, line_number, name, "required field is empty"};
    return v;
  }

  std::optional<std::int64_t> integer(int column, const char* name) {
    auto v = required(column, name);
    if (!v) return std::nullopt;
    if (std::abs(*v - std::round(*v)) > 1e-6 || std::abs(*v) > 9.0e15) {
      error = LineError{ErrorKind::MalformedField, line_number, name, "expected an integer value"};
      return std::nullopt;
    }
    return static_cast<std::int64_t>(std::llround(*v));
  }

  void range_violation(const char* name, const std::string& message) {
    if (!error) error = LineError{ErrorKind::RangeViolation, line_number, name, message};
  }
};

}  // namespace

std::string_view to_string(Constellation c) {
  switch (c) {
    case Constellation::GPS: return "GPS";
    case Constellation::GLONASS: return "GLONASS";
    case Constellation::GALILEO: return "GALILEO";
    case Constellation::BEIDOU: return "BEIDOU";
    case Constellation::OTHER: return "OTHER";
  }
  return "OTHER";
}

Constellation constellation_from_string(std::string_view name) {
  for (auto c : {Constellation::GPS, Constellation::GLONASS, Constellation::GALILEO, Constellation::BEIDOU,
                 Constellation::OTHER}) {
    if (to_string(c) == name) return c;
  }
  throw Error(ErrorKind::InvalidConfig, "unknown constellation '" + std::string(name) + "'");
}

Constellation svid_to_constellation(SvId svid) noexcept {
  const int v = svid.value;
  if (v >= 1 && v <= 37) return Constellation::GPS;
  if (v >= 38 && v <= 68) return Constellation::GLONASS;
  if (v >= 71 && v <= 106) return Constellation::GALILEO;
  if ((v >= 141 && v <= 180) || (v >= 223 && v <= 245)) return Constellation::BEIDOU;
  return Constellation::OTHER;
}

void ColumnMap::validate() const {
  const int cols[] = {week_number, time_of_week, svid, azimuth, elevation, s4_total, s4_noise};
  std::set<int> seen;
  for (int c : cols) {
    if (c < 1) throw Error(ErrorKind::InvalidConfig, "column indices are 1-based; got " + std::to_string(c));
    if (!seen.insert(c).second) throw Error(ErrorKind::InvalidConfig, "column index " + std::to_string(c) + " used twice");
  }
}

void to_json(nlohmann::json& j, const ColumnMap& m) {
  j = nlohmann::json{{"week_number", m.week_number}, {"time_of_week", m.time_of_week},
                     {"svid", m.svid},               {"azimuth", m.azimuth},
                     {"elevation", m.elevation},     {"s4_total", m.s4_total},
                     {"s4_noise", m.s4_noise},       {"delimiter", std::string(1, m.delimiter)}};
}

void from_json(const nlohmann::json& j, ColumnMap& m) {
  m.week_number = j.value("week_number", m.week_number);
  m.time_of_week = j.value("time_of_week", m.time_of_week);
  m.svid = j.value("svid", m.svid);
  m.azimuth = j.value("azimuth", m.azimuth);
  m.elevation = j.value("elevation", m.elevation);
  m.s4_total = j.value("s4_total", m.s4_total);
  m.s4_noise = j.value("s4_noise", m.s4_noise);
  if (j.contains("delimiter")) {
    const auto d = j.at("delimiter").get<std::string>();
    if (d.size() != 1) throw Error(ErrorKind::InvalidConfig, "delimiter must be a single character");
    m.delimiter = d[0];
  }
  m.validate();
}

std::string_view to_string(SkipReason reason) {
  switch (reason) {
    case SkipReason::Blank: return "blank";
    case SkipReason::Comment: return "comment";
    case SkipReason::MissingS4: return "missing_s4";
  }
  return "blank";
}

double wrap_degrees(double deg) noexcept {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  if (w >= 360.0) w -= 360.0;
  return w;
}

LineOutcome parse_ismr_line(std::string_view line, const ColumnMap& map, std::size_t line_number) {
  const auto content = trim(line);
  if (content.empty()) return SkipMarker{SkipReason::Blank};
  if (content.front() == '#') return SkipMarker{SkipReason::Comment};

  const auto fields = split(content, map.delimiter);
  FieldReader rd{fields, line_number, std::nullopt};

  const auto week = rd.integer(map.week_number, "week_number");
  const auto tow = rd.integer(map.time_of_week, "time_of_week");
  const auto svid = rd.integer(map.svid, "svid");
  const auto az = rd.required(map.azimuth, "azimuth");
  const auto el = rd.required(map.elevation, "elevation");
  const auto s4_total = rd.number(map.s4_total, "s4_total");
  const auto s4_noise = rd.number(map.s4_noise, "s4_noise");
  if (rd.error) return *rd.error;

  if (*week < 0) rd.range_violation("week_number", "negative week number");
  if (*tow < 0 || *tow >= kSecondsPerWeek) rd.range_violation("time_of_week", "outside [0, 604800)");
  if (*svid < 0 || *svid > 100000) rd.range_violation("svid", "outside receiver SVID range");
  if (*el < -90.0 || *el > 90.0) rd.range_violation("elevation", "outside [-90, 90]");
  if (s4_total && *s4_total < 0.0) rd.range_violation("s4_total", "negative S4");
  if (s4_noise && *s4_noise < 0.0) rd.range_violation("s4_noise", "negative S4 noise");
  if (rd.error) return *rd.error;

  if (!s4_total || !s4_noise) return SkipMarker{SkipReason::MissingS4};

  RawIsmrRecord rec;
  rec.time = GnssTime{*week, *tow};
  rec.svid = SvId{static_cast<int>(*svid)};
  rec.azimuth_deg = wrap_degrees(*az);
  rec.elevation_deg = *el;
  rec.s4_total = *s4_total;
  rec.s4_noise = *s4_noise;
  return rec;
}

std::size_t IngestReport::error_count() const {
  std::size_t n = 0;
  for (const auto& [kind, count] : errors_by_kind) n += count;
  return n;
}

void IngestReport::record(const LineOutcome& outcome) {
  ++lines_read;
  if (std::holds_alternative<RawIsmrRecord>(outcome)) {
    ++records_ok;
  } else if (const auto* skip = std::get_if<SkipMarker>(&outcome)) {
    ++skipped;
    ++skipped_by_reason[std::string(to_string(skip->reason))];
  } else {
    const auto& err = std::get<LineError>(outcome);
    ++errors_by_kind[std::string(to_string(err.kind))];
    if (error_samples.size() < kMaxErrorSamples) {
      error_samples.push_back("line " + std::to_string(err.line_number) + " [" + err.column + "] " +
                              std::string(to_string(err.kind)) + ": " + err.message);
    }
  }
}

void IngestReport::merge(const IngestReport& other) {
  lines_read += other.lines_read;
  records_ok += other.records_ok;
  skipped += other.skipped;
  for (const auto& [k, v] : other.skipped_by_reason) skipped_by_reason[k] += v;
  for (const auto& [k, v] : other.errors_by_kind) errors_by_kind[k] += v;
  for (const auto& s : other.error_samples) {
    if (error_samples.size() >= kMaxErrorSamples) break;
    error_samples.push_back(s);
  }
}

nlohmann::json IngestReport::to_json() const {
  return nlohmann::json{{"lines_read", lines_read},
                        {"records_ok", records_ok},
                        {"skipped", skipped},
                        {"skipped_by_reason", skipped_by_reason},
                        {"errors_by_kind", errors_by_kind},
                        {"error_samples", error_samples}};
}

IngestResult parse_ismr_text(std::string_view text, const IngestOptions& options, const std::string& source) {
  options.columns.validate();
  IngestResult result;
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto outcome = parse_ismr_line(text.substr(start, end - start), options.columns, ++line_number);
    if (auto* rec = std::get_if<RawIsmrRecord>(&outcome)) {
      if (options.repair_week_rollover) {
        rec->time.week_number = repair_week_rollover(rec->time.week_number, options.rollover_reference_week);
      }
      result.records.push_back(*rec);
    } else if (auto* err = std::get_if<LineError>(&outcome); err && !source.empty()) {
      err->column = source + ":" + err->column;
    }
    result.report.record(outcome);
    start = end + 1;
  }
  return result;
}

IngestResult read_ismr_file(const std::filesystem::path& path, const IngestOptions& options) {
  // gzread passes uncompressed input through unchanged.
  gzFile file = gzopen(path.string().c_str(), "rb");
  if (file == nullptr) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::string content;
  char buffer[1 << 16];
  int n = 0;
  while ((n = gzread(file, buffer, sizeof buffer)) > 0) content.append(buffer, static_cast<std::size_t>(n));
  const bool failed = n < 0;
  gzclose(file);
  if (failed) throw Error(ErrorKind::IoError, "read failed for " + path.string());
  return parse_ismr_text(content, options, path.filename().string());
}

IngestResult read_ismr_files(std::span<const std::filesystem::path> paths, const IngestOptions& options,
                             bool parallel) {
  std::vector<IngestResult> per_file(paths.size());
  std::vector<std::string> failures(paths.size());
  const auto count = static_cast<std::ptrdiff_t>(paths.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      per_file[static_cast<std::size_t>(i)] = read_ismr_file(paths[static_cast<std::size_t>(i)], options);
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (const auto& f : failures) {
    if (!f.empty()) throw Error(ErrorKind::IoError, f);
  }
  IngestResult merged;
  for (auto& r : per_file) {
    merged.records.insert(merged.records.end(), r.records.begin(), r.records.end());
    merged.report.merge(r.report);
  }
  return merged;
}

std::vector<RawIsmrRecord> filter_constellations(std::span<const RawIsmrRecord> records,
                                                 std::span<const Constellation> allowed) {
  std::vector<RawIsmrRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const auto c = svid_to_constellation(r.svid);
    if (std::find(allowed.begin(), allowed.end(), c) != allowed.end()) out.push_back(r);
  }
  return out;
}

std::vector<RawIsmrRecord> apply_elevation_mask(std::span<const RawIsmrRecord> records, double threshold_deg) {
  if (!(threshold_deg >= 0.0 && threshold_deg <= 90.0)) {
    throw Error(ErrorKind::InvalidConfig, "elevation threshold must lie in [0, 90]");
  }
  // A zero threshold disables the mask, including below-horizon records.
  if (threshold_deg == 0.0) return {records.begin(), records.end()};
  std::vector<RawIsmrRecord> out;
  out.reserve(records.size());
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [threshold_deg](const RawIsmrRecord& r) { return r.elevation_deg >= threshold_deg; });
  return out;
}

}  // namespace scint
