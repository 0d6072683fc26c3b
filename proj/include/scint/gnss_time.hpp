#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace scint {

inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kSecondsPerWeek = 604800;
/// 1980-01-06T00:00:00Z expressed in Unix seconds.
inline constexpr std::int64_t kGpsEpochUnix = 315964800;

/// Continuous GPS week number plus integer seconds into the week.
struct GnssTime {
  std::int64_t week_number = 0;
  std::int64_t time_of_week = 0;

  friend auto operator<=>(const GnssTime&, const GnssTime&) = default;
};

struct UtcTimestamp {
  std::int64_t seconds_since_unix_epoch = 0;

  friend auto operator<=>(const UtcTimestamp&, const UtcTimestamp&) = default;
};

/// Proleptic Gregorian calendar date.
struct CivilDate {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;

  friend auto operator<=>(const CivilDate&, const CivilDate&) = default;
};

// Calendar arithmetic (days relative to 1970-01-01).
std::int64_t days_from_civil(CivilDate date) noexcept;
CivilDate civil_from_days(std::int64_t days) noexcept;
CivilDate utc_date(UtcTimestamp t) noexcept;
std::int64_t seconds_of_day(UtcTimestamp t) noexcept;
/// 1-based ordinal day within the year.
int day_of_year(CivilDate date) noexcept;
int days_in_year(int year) noexcept;
CivilDate date_from_year_doy(int year, int doy);

std::string format_date(CivilDate date);
std::string format_iso8601(UtcTimestamp t);
/// Parses "YYYY-MM-DD".
CivilDate parse_date(std::string_view text);

bool is_valid(const GnssTime& t) noexcept;

/// UTC = epoch + week * 604800 + tow - leap. Throws InvalidTime when the
/// result would predate the GPS epoch or the inputs are out of range.
UtcTimestamp gps_to_utc(const GnssTime& t, std::int64_t leap_seconds);

/// Same conversion with the leap-second count taken from the embedded table.
UtcTimestamp gps_to_utc(const GnssTime& t);

/// Inverse of gps_to_utc for a known offset.
GnssTime utc_to_gps(UtcTimestamp t, std::int64_t leap_seconds);

/// Maps a truncated 10-bit week (0..1023) to the full week closest to
/// reference_week. Full week numbers (>= 1024) pass through unchanged.
std::int64_t repair_week_rollover(std::int64_t week, std::int64_t reference_week);

/// GPS-UTC offset table, loaded from the versioned data file compiled into
/// the library. Rows are (first UTC date the offset applies, offset).
class LeapSecondTable {
 public:
  struct Entry {
    CivilDate effective;
    std::int64_t offset = 0;
  };

  static const LeapSecondTable& embedded();
  static LeapSecondTable parse(std::string_view text);

  /// Offset in effect on the given UTC date; 0 before the first entry.
  std::int64_t offset_on(CivilDate utc_date) const noexcept;
  /// Offset in effect at a GPS instant (seconds since the GPS epoch).
  std::int64_t offset_at_gps(std::int64_t gps_seconds) const noexcept;

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  const std::string& version() const noexcept { return version_; }

 private:
  std::vector<Entry> entries_;
  std::string version_;
};

std::int64_t leap_seconds_for(CivilDate utc_date);

}  // namespace scint
