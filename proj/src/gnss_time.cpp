#include "scint/gnss_time.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstdio>
#include <sstream>

#include "leap_table.hpp"
#include "scint/error.hpp"

namespace scint {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

// Howard Hinnant's civil calendar algorithms.
std::int64_t days_from_civil(CivilDate date) noexcept {
  std::int64_t y = date.year;
  const unsigned m = date.month;
  const unsigned d = date.day;
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) noexcept {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return CivilDate{static_cast<int>(y + (m <= 2)), m, d};
}

CivilDate utc_date(UtcTimestamp t) noexcept {
  return civil_from_days(floor_div(t.seconds_since_unix_epoch, kSecondsPerDay));
}

std::int64_t seconds_of_day(UtcTimestamp t) noexcept {
  return t.seconds_since_unix_epoch - floor_div(t.seconds_since_unix_epoch, kSecondsPerDay) * kSecondsPerDay;
}

int days_in_year(int year) noexcept {
  const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  return leap ? 366 : 365;
}

int day_of_year(CivilDate date) noexcept {
  return static_cast<int>(days_from_civil(date) - days_from_civil(CivilDate{date.year, 1, 1})) + 1;
}

CivilDate date_from_year_doy(int year, int doy) {
  if (doy < 1 || doy > days_in_year(year)) {
    throw Error(ErrorKind::RangeViolation, "day of year " + std::to_string(doy) + " outside year " + std::to_string(year));
  }
  return civil_from_days(days_from_civil(CivilDate{year, 1, 1}) + doy - 1);
}

std::string format_date(CivilDate date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", date.year, date.month, date.day);
  return buf;
}

std::string format_iso8601(UtcTimestamp t) {
  const auto sod = seconds_of_day(t);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02lld:%02lld:%02lldZ", format_date(utc_date(t)).c_str(),
                static_cast<long long>(sod / 3600), static_cast<long long>(sod / 60 % 60),
                static_cast<long long>(sod % 60));
  return buf;
}

CivilDate parse_date(std::string_view text) {
  int y = 0;
  unsigned m = 0, d = 0;
  auto bad = [&] { return Error(ErrorKind::MalformedField, "expected YYYY-MM-DD, got '" + std::string(text) + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  const char* p = text.data();
  if (std::from_chars(p, p + 4, y).ec != std::errc{} || std::from_chars(p + 5, p + 7, m).ec != std::errc{} ||
      std::from_chars(p + 8, p + 10, d).ec != std::errc{}) {
    throw bad();
  }
  const CivilDate date{y, m, d};
  if (m < 1 || m > 12 || d < 1 || civil_from_days(days_from_civil(date)) != date) throw bad();
  return date;
}

bool is_valid(const GnssTime& t) noexcept {
  return t.week_number >= 0 && t.time_of_week >= 0 && t.time_of_week < kSecondsPerWeek;
}

UtcTimestamp gps_to_utc(const GnssTime& t, std::int64_t leap_seconds) {
  if (!is_valid(t)) {
    throw Error(ErrorKind::InvalidTime, "GNSS time out of range (week " + std::to_string(t.week_number) + ", tow " +
                                            std::to_string(t.time_of_week) + ")");
  }
  if (leap_seconds < 0) throw Error(ErrorKind::InvalidTime, "negative leap-second count");
  const std::int64_t elapsed = t.week_number * kSecondsPerWeek + t.time_of_week;
  if (leap_seconds > elapsed) {
    throw Error(ErrorKind::InvalidTime, "leap-second offset exceeds time since the GPS epoch");
  }
  return UtcTimestamp{kGpsEpochUnix + elapsed - leap_seconds};
}

UtcTimestamp gps_to_utc(const GnssTime& t) {
  if (!is_valid(t)) return gps_to_utc(t, 0);  // throws
  const std::int64_t elapsed = t.week_number * kSecondsPerWeek + t.time_of_week;
  return gps_to_utc(t, LeapSecondTable::embedded().offset_at_gps(elapsed));
}

GnssTime utc_to_gps(UtcTimestamp t, std::int64_t leap_seconds) {
  const std::int64_t elapsed = t.seconds_since_unix_epoch - kGpsEpochUnix + leap_seconds;
  if (elapsed < 0) throw Error(ErrorKind::InvalidTime, "timestamp predates the GPS epoch");
  return GnssTime{elapsed / kSecondsPerWeek, elapsed % kSecondsPerWeek};
}

std::int64_t repair_week_rollover(std::int64_t week, std::int64_t reference_week) {
  if (week >= 1024 || week < 0) return week;
  std::int64_t best = week;
  for (std::int64_t candidate = week; candidate <= reference_week + 1024; candidate += 1024) {
    if (std::abs(candidate - reference_week) < std::abs(best - reference_week)) best = candidate;
  }
  return best;
}

LeapSecondTable LeapSecondTable::parse(std::string_view text) {
  LeapSecondTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto pos = line.find("version:"); pos != std::string::npos && line.starts_with("#")) {
      auto v = line.substr(pos + 8);
      v.erase(0, v.find_first_not_of(' '));
      table.version_ = v;
      continue;
    }
    if (line.empty() || line.starts_with("#")) continue;
    std::istringstream row(line);
    std::string date;
    std::int64_t offset = 0;
    if (!(row >> date >> offset)) {
      throw Error(ErrorKind::MalformedPayload, "leap-second table line " + std::to_string(line_no));
    }
    Entry e{parse_date(date), offset};
    if (!table.entries_.empty() &&
        (e.effective <= table.entries_.back().effective || e.offset == table.entries_.back().offset)) {
      throw Error(ErrorKind::MalformedPayload, "leap-second table rows must have increasing dates and a changed offset (line " +
                                                   std::to_string(line_no) + ")");
    }
    table.entries_.push_back(e);
  }
  return table;
}

const LeapSecondTable& LeapSecondTable::embedded() {
  static const LeapSecondTable table = parse(detail::kEmbeddedLeapTable);
  return table;
}

std::int64_t LeapSecondTable::offset_on(CivilDate date) const noexcept {
  std::int64_t offset = 0;
  for (const auto& e : entries_) {
    if (e.effective <= date) offset = e.offset;
  }
  return offset;
}

std::int64_t LeapSecondTable::offset_at_gps(std::int64_t gps_seconds) const noexcept {
  // An offset N taking effect at UTC midnight D applies from GPS instant
  // (D - epoch) + N onwards. The inserted leap second itself maps onto the
  // following UTC midnight under the previous offset.
  std::int64_t offset = 0;
  for (const auto& e : entries_) {
    const std::int64_t start = days_from_civil(e.effective) * kSecondsPerDay - kGpsEpochUnix + e.offset;
    if (gps_seconds >= start) offset = e.offset;
  }
  return offset;
}

std::int64_t leap_seconds_for(CivilDate date) { return LeapSecondTable::embedded().offset_on(date); }

}  // namespace scint
