#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "scint/gnss_time.hpp"

namespace scint {

struct SolarIndices {
  CivilDate date;
  double kp_daily_avg = 0.0;  // [0, 9]
  double ssn = 0.0;
  double f10_7 = 0.0;  // solar flux units

  friend bool operator==(const SolarIndices&, const SolarIndices&) = default;
};

using SolarTable = std::map<CivilDate, SolarIndices>;

struct SolarParseReport {
  std::size_t data_rows = 0;
  std::size_t days = 0;
  /// Days dropped because a field carried the service's fill value.
  std::size_t sentinel_omitted = 0;
  /// Calendar days missing between the first and last date.
  std::size_t gap_days = 0;
  /// Days assembled from several sub-daily rows.
  std::size_t days_averaged = 0;

  nlohmann::json to_json() const;
};

struct SolarTableResult {
  SolarTable table;
  SolarParseReport report;
};

struct OmniParseOptions {
  /// OMNI exports Kp as Kp*10.
  double kp_scale = 10.0;
};

/// Parses an OMNIWeb plaintext/HTML response or an equivalent local file.
/// Data rows are "YEAR DOY [HR] KP SSN F10.7" (whitespace or comma
/// separated); any line not starting with a 4-digit year is ignored. Fill
/// values (Kp*10 >= 99, SSN >= 999, F10.7 >= 999.9) drop the day. Several
/// rows for one day (hourly or 3-hourly Kp) are averaged.
SolarTableResult parse_omni_payload(std::string_view payload, const OmniParseOptions& options = {});

enum class SolarSource { Remote, LocalFile };

struct IndexQuery {
  CivilDate start_date;
  CivilDate end_date;
  SolarSource source = SolarSource::LocalFile;
  std::filesystem::path local_path;

  std::string cache_key() const;
};

struct HttpResponse {
  long status = 0;
  std::string body;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  /// Throws Error(NetworkError) when no response is obtained.
  virtual HttpResponse get(const std::string& url) = 0;
};

/// libcurl-backed transport.
class CurlTransport final : public HttpTransport {
 public:
  explicit CurlTransport(std::chrono::seconds timeout = std::chrono::seconds(60));
  HttpResponse get(const std::string& url) override;

 private:
  std::chrono::seconds timeout_;
};

struct SolarClientOptions {
  std::string endpoint = "https://omniweb.gsfc.nasa.gov/cgi/nx1.cgi";
  /// OMNI2 daily variable codes: Kp*10, sunspot number R, F10.7.
  std::vector<int> variables = {38, 39, 50};
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  /// Empty disables caching.
  std::filesystem::path cache_dir;
  std::function<void(std::chrono::milliseconds)> sleep;
  OmniParseOptions parse;
};

/// Directory named by SCINT_CACHE_DIR, or empty when unset.
std::filesystem::path cache_dir_from_env();

class SolarClient {
 public:
  SolarClient(SolarClientOptions options, std::shared_ptr<HttpTransport> transport);

  std::string request_url(const IndexQuery& query) const;

  /// Raw service payload for the query, from cache when present. Retries
  /// with exponential backoff; throws EmptyRange, NetworkError or
  /// ServiceError(status).
  std::string fetch_remote(const IndexQuery& query);

  /// Table for the query from either source, restricted to its date range.
  SolarTableResult load(const IndexQuery& query);

 private:
  std::shared_ptr<std::mutex> lock_for(const std::string& key);

  SolarClientOptions options_;
  std::shared_ptr<HttpTransport> transport_;
  std::mutex locks_mutex_;
  std::map<std::string, std::shared_ptr<std::mutex>> in_flight_;
};

/// Serializes a table in the local-file grammar accepted by parse_omni_payload.
std::string format_solar_table(const SolarTable& table, double kp_scale = 10.0);

}  // namespace scint
