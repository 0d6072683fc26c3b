#include "scint/solar.hpp"

#include <curl/curl.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "scint/dataset.hpp"
#include "scint/error.hpp"

namespace scint {

namespace {

constexpr double kKpFillScaled = 99.0;
constexpr double kSsnFill = 999.0;
constexpr double kF107Fill = 999.9;

bool parse_number(std::string_view token, double& out) {
  const auto* end = token.data() + token.size();
  const auto [p, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc{} && p == end && std::isfinite(out);
}

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == ',' || line[i] == '\r')) ++i;
    const auto start = i;
    while (i < line.size() && !(line[i] == ' ' || line[i] == '\t' || line[i] == ',' || line[i] == '\r')) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

bool looks_like_year(std::string_view token) {
  if (token.size() != 4) return false;
  int y = 0;
  const auto [p, ec] = std::from_chars(token.data(), token.data() + 4, y);
  return ec == std::errc{} && p == token.data() + 4 && y >= 1900 && y <= 2200;
}

struct DayAccumulator {
  double kp_sum = 0.0, ssn_sum = 0.0, f107_sum = 0.0;
  int rows = 0;
  bool has_fill = false;
};

std::string yyyymmdd(CivilDate d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d%02u%02u", d.year, d.month, d.day);
  return buf;
}

}  // namespace

nlohmann::json SolarParseReport::to_json() const {
  return nlohmann::json{{"data_rows", data_rows},
                        {"days", days},
                        {"sentinel_omitted", sentinel_omitted},
                        {"gap_days", gap_days},
                        {"days_averaged", days_averaged}};
}

SolarTableResult parse_omni_payload(std::string_view payload, const OmniParseOptions& options) {
  if (!(options.kp_scale > 0.0)) throw Error(ErrorKind::InvalidConfig, "kp_scale must be positive");
  std::map<CivilDate, DayAccumulator> days;
  SolarTableResult result;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= payload.size()) {
    auto end = payload.find('\n', start);
    if (end == std::string_view::npos) end = payload.size();
    const auto line = payload.substr(start, end - start);
    start = end + 1;
    ++line_no;
    const auto tokens = tokenize(line);
    if (tokens.empty() || !looks_like_year(tokens[0])) continue;
    if (tokens.size() != 5 && tokens.size() != 6) {
      throw Error(ErrorKind::MalformedPayload,
                  "line " + std::to_string(line_no) + ": expected 5 or 6 fields, got " + std::to_string(tokens.size()));
    }
    double v[6];
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (!parse_number(tokens[i], v[i])) {
        throw Error(ErrorKind::MalformedPayload, "line " + std::to_string(line_no) + ": bad number '" +
                                                     std::string(tokens[i]) + "'");
      }
    }
    const std::size_t off = tokens.size() - 5 + 2;  // skip the hour column when present
    const int year = static_cast<int>(v[0]);
    const int doy = static_cast<int>(v[1]);
    CivilDate date;
    try {
      date = date_from_year_doy(year, doy);
    } catch (const Error&) {
      throw Error(ErrorKind::MalformedPayload, "line " + std::to_string(line_no) + ": invalid day of year");
    }
    const double kp_raw = v[off], ssn = v[off + 1], f107 = v[off + 2];
    auto& acc = days[date];
    ++result.report.data_rows;
    ++acc.rows;
    if (kp_raw >= kKpFillScaled || ssn >= kSsnFill || f107 >= kF107Fill) {
      acc.has_fill = true;
      continue;
    }
    const double kp = kp_raw / options.kp_scale;
    if (kp < 0.0 || kp > 9.0 || ssn < 0.0 || f107 <= 0.0) {
      throw Error(ErrorKind::MalformedPayload, "line " + std::to_string(line_no) + ": index outside physical range");
    }
    acc.kp_sum += kp;
    acc.ssn_sum += ssn;
    acc.f107_sum += f107;
  }

  for (const auto& [date, acc] : days) {
    if (acc.has_fill) {
      ++result.report.sentinel_omitted;
      continue;
    }
    const double n = acc.rows;
    if (acc.rows > 1) ++result.report.days_averaged;
    result.table.emplace(date, SolarIndices{date, acc.kp_sum / n, acc.ssn_sum / n, acc.f107_sum / n});
  }
  result.report.days = result.table.size();
  if (!days.empty()) {
    const auto span = days_from_civil(days.rbegin()->first) - days_from_civil(days.begin()->first) + 1;
    result.report.gap_days = static_cast<std::size_t>(span) - days.size();
  }
  return result;
}

std::string format_solar_table(const SolarTable& table, double kp_scale) {
  std::string out = "# YEAR DOY KP*" + format_double(kp_scale) + " SSN F10.7\n";
  for (const auto& [date, s] : table) {
    char head[32];
    std::snprintf(head, sizeof head, "%04d %03d ", date.year, day_of_year(date));
    out += head;
    out += format_double(s.kp_daily_avg * kp_scale) + " " + format_double(s.ssn) + " " + format_double(s.f10_7) + "\n";
  }
  return out;
}

std::string IndexQuery::cache_key() const { return "omni_" + yyyymmdd(start_date) + "_" + yyyymmdd(end_date); }

std::filesystem::path cache_dir_from_env() {
  const char* env = std::getenv("SCINT_CACHE_DIR");
  return env != nullptr ? std::filesystem::path(env) : std::filesystem::path{};
}

namespace {

std::size_t write_body(char* data, std::size_t size, std::size_t nmemb, void* user) {
  static_cast<std::string*>(user)->append(data, size * nmemb);
  return size * nmemb;
}

}  // namespace

CurlTransport::CurlTransport(std::chrono::seconds timeout) : timeout_(timeout) {
  static const auto init = curl_global_init(CURL_GLOBAL_DEFAULT);
  (void)init;
}

HttpResponse CurlTransport::get(const std::string& url) {
  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> handle(curl_easy_init(), &curl_easy_cleanup);
  if (!handle) throw Error(ErrorKind::NetworkError, "curl_easy_init failed");
  HttpResponse response;
  curl_easy_setopt(handle.get(), CURLOPT_URL, url.c_str());
  curl_easy_setopt(handle.get(), CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(handle.get(), CURLOPT_TIMEOUT, static_cast<long>(timeout_.count()));
  curl_easy_setopt(handle.get(), CURLOPT_WRITEFUNCTION, &write_body);
  curl_easy_setopt(handle.get(), CURLOPT_WRITEDATA, &response.body);
  const auto rc = curl_easy_perform(handle.get());
  if (rc != CURLE_OK) throw Error(ErrorKind::NetworkError, curl_easy_strerror(rc));
  curl_easy_getinfo(handle.get(), CURLINFO_RESPONSE_CODE, &response.status);
  return response;
}

SolarClient::SolarClient(SolarClientOptions options, std::shared_ptr<HttpTransport> transport)
    : options_(std::move(options)), transport_(std::move(transport)) {
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
  if (options_.max_attempts < 1) throw Error(ErrorKind::InvalidConfig, "max_attempts must be >= 1");
}

std::string SolarClient::request_url(const IndexQuery& query) const {
  std::string url = options_.endpoint + "?activity=retrieve&res=daily&spacecraft=omni2_daily&start_date=" +
                    yyyymmdd(query.start_date) + "&end_date=" + yyyymmdd(query.end_date);
  for (int v : options_.variables) url += "&vars=" + std::to_string(v);
  return url;
}

std::shared_ptr<std::mutex> SolarClient::lock_for(const std::string& key) {
  std::lock_guard guard(locks_mutex_);
  auto& slot = in_flight_[key];
  if (!slot) slot = std::make_shared<std::mutex>();
  return slot;
}

std::string SolarClient::fetch_remote(const IndexQuery& query) {
  if (query.start_date > query.end_date) {
    throw Error(ErrorKind::EmptyRange, format_date(query.start_date) + " is after " + format_date(query.end_date));
  }
  const auto key = query.cache_key();
  const auto lock = lock_for(key);
  std::lock_guard single_flight(*lock);

  const auto cache_file = options_.cache_dir.empty() ? std::filesystem::path{} : options_.cache_dir / (key + ".txt");
  if (!cache_file.empty() && std::filesystem::exists(cache_file)) return read_text_file(cache_file);

  if (!transport_) throw Error(ErrorKind::NetworkError, "no HTTP transport configured");
  const auto url = request_url(query);
  auto backoff = options_.initial_backoff;
  std::string last_failure;
  ErrorKind last_kind = ErrorKind::NetworkError;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    try {
      auto response = transport_->get(url);
      if (response.status >= 200 && response.status < 300) {
        if (!cache_file.empty()) write_text_file_atomic(cache_file, response.body);
        return std::move(response.body);
      }
      last_kind = ErrorKind::ServiceError;
      last_failure = "HTTP status " + std::to_string(response.status);
      // Client errors will not improve on retry.
      if (response.status >= 400 && response.status < 500) break;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NetworkError) throw;
      last_kind = ErrorKind::NetworkError;
      last_failure = e.what();
    }
    if (attempt < options_.max_attempts) {
      options_.sleep(backoff);
      backoff *= 2;
    }
  }
  throw Error(last_kind, last_failure + " (" + url + ")");
}

SolarTableResult SolarClient::load(const IndexQuery& query) {
  if (query.start_date > query.end_date) {
    throw Error(ErrorKind::EmptyRange, format_date(query.start_date) + " is after " + format_date(query.end_date));
  }
  SolarTableResult result = query.source == SolarSource::Remote
                                ? parse_omni_payload(fetch_remote(query), options_.parse)
                                : parse_omni_payload(read_text_file(query.local_path), options_.parse);
  std::erase_if(result.table, [&](const auto& kv) { return kv.first < query.start_date || kv.first > query.end_date; });
  result.report.days = result.table.size();
  return result;
}

}  // namespace scint
