#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "scint/error.hpp"
#include "scint/gnss_time.hpp"

namespace scint {

enum class Constellation { GPS, GLONASS, GALILEO, BEIDOU, OTHER };

std::string_view to_string(Constellation c);
Constellation constellation_from_string(std::string_view name);

struct SvId {
  int value = 0;
  friend auto operator<=>(const SvId&, const SvId&) = default;
};

/// Receiver SVID convention (Septentrio PolaRx ISMR numbering):
///   1-37 GPS, 38-68 GLONASS, 71-106 Galileo, 141-180 and 223-245 BeiDou.
/// Everything else (SBAS, QZSS, NavIC, L-band) is OTHER.
Constellation svid_to_constellation(SvId svid) noexcept;

struct RawIsmrRecord {
  GnssTime time;
  SvId svid;
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  double s4_total = 0.0;
  double s4_noise = 0.0;
};

/// 1-based column positions of the fields the pipeline consumes.
struct ColumnMap {
  int week_number = 1;
  int time_of_week = 2;
  int svid = 3;
  int azimuth = 5;
  int elevation = 6;
  int s4_total = 8;
  int s4_noise = 9;
  char delimiter = ',';

  /// Throws InvalidConfig unless all indices are >= 1 and distinct.
  void validate() const;
};

void to_json(nlohmann::json& j, const ColumnMap& m);
void from_json(const nlohmann::json& j, ColumnMap& m);

enum class SkipReason { Blank, Comment, MissingS4 };
std::string_view to_string(SkipReason reason);

struct SkipMarker {
  SkipReason reason = SkipReason::Blank;
};

struct LineError {
  ErrorKind kind = ErrorKind::MalformedField;
  std::size_t line_number = 0;
  std::string column;
  std::string message;
};

using LineOutcome = std::variant<RawIsmrRecord, SkipMarker, LineError>;

/// Parses one ISMR line. Never throws: every line maps to exactly one of
/// record, skip marker or located error.
LineOutcome parse_ismr_line(std::string_view line, const ColumnMap& map, std::size_t line_number = 0);

struct IngestReport {
  std::size_t lines_read = 0;
  std::size_t records_ok = 0;
  std::size_t skipped = 0;
  std::map<std::string, std::size_t> skipped_by_reason;
  std::map<std::string, std::size_t> errors_by_kind;
  /// First few errors with location, for diagnostics.
  std::vector<std::string> error_samples;

  std::size_t error_count() const;
  void record(const LineOutcome& outcome);
  void merge(const IngestReport& other);
  nlohmann::json to_json() const;
};

struct IngestOptions {
  ColumnMap columns;
  bool repair_week_rollover = false;
  std::int64_t rollover_reference_week = 2048;
};

struct IngestResult {
  std::vector<RawIsmrRecord> records;
  IngestReport report;
};

/// Parses a whole text buffer line by line.
IngestResult parse_ismr_text(std::string_view text, const IngestOptions& options, const std::string& source = {});

/// Reads a plain or gzip-compressed ISMR file.
IngestResult read_ismr_file(const std::filesystem::path& path, const IngestOptions& options);

/// Parses several files, concurrently when `parallel` is set. Records are
/// concatenated in input-file order with per-file line order preserved.
IngestResult read_ismr_files(std::span<const std::filesystem::path> paths, const IngestOptions& options,
                             bool parallel = true);

std::vector<RawIsmrRecord> filter_constellations(std::span<const RawIsmrRecord> records,
                                                 std::span<const Constellation> allowed);

/// Keeps records with elevation >= threshold_deg (inclusive), order preserved.
/// A threshold of 0 disables the mask.
std::vector<RawIsmrRecord> apply_elevation_mask(std::span<const RawIsmrRecord> records, double threshold_deg);

/// Wraps any finite angle into [0, 360).
double wrap_degrees(double deg) noexcept;

}  // namespace scint
