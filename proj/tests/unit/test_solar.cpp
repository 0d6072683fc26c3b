#include <doctest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include "scint/dataset.hpp"
#include "scint/error.hpp"
#include "scint/solar.hpp"
#include "test_support.hpp"

using namespace scint;

namespace {

const char* kPayload =
    "<pre>\nYEAR DOY HR 1 2 3\n"
    "2019 10 0 20 5 70.1\n"
    "2019 11 0 30 6 70.2\n"
    "</pre>\n";

class FakeTransport : public HttpTransport {
 public:
  std::vector<HttpResponse> script;
  std::vector<std::string> urls;
  std::atomic<int> calls{0};
  int throw_first = 0;

  HttpResponse get(const std::string& url) override {
    const int n = calls++;
    urls.push_back(url);
    if (n < throw_first) throw Error(ErrorKind::NetworkError, "connection refused");
    const auto i = static_cast<std::size_t>(n - throw_first);
    return i < script.size() ? script[i] : script.back();
  }
};

struct Recorder {
  std::vector<std::chrono::milliseconds> sleeps;
  SolarClientOptions options() {
    SolarClientOptions o;
    o.sleep = [this](std::chrono::milliseconds d) { sleeps.push_back(d); };
    return o;
  }
};

IndexQuery remote(CivilDate a, CivilDate b) { return IndexQuery{a, b, SolarSource::Remote, {}}; }

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidConfig;
}

}  // namespace

TEST_CASE("OMNIWeb listing fixture parses with fill values dropped") {
  const auto r = parse_omni_payload(read_text_file(testing::data_dir() / "omni_2019_01_01_07.txt"));
  CHECK(r.report.data_rows == 7);
  CHECK(r.report.days == 6);
  CHECK(r.report.sentinel_omitted == 1);
  CHECK(r.report.gap_days == 0);
  CHECK(r.report.days_averaged == 0);
  CHECK_FALSE(r.table.contains({2019, 1, 4}));
  const auto& d1 = r.table.at({2019, 1, 1});
  CHECK(d1.kp_daily_avg == doctest::Approx(1.3));
  CHECK(d1.ssn == 0.0);
  CHECK(d1.f10_7 == doctest::Approx(70.6));
  const auto& d5 = r.table.at({2019, 1, 5});
  CHECK(d5.kp_daily_avg == doctest::Approx(2.3));
  CHECK(d5.ssn == 12.0);
  CHECK(d5.f10_7 == doctest::Approx(71.7));
}

TEST_CASE("sub-daily Kp rows are averaged per day") {
  const auto r = parse_omni_payload(read_text_file(testing::data_dir() / "omni_hourly_kp.txt"));
  CHECK(r.report.days == 2);
  CHECK(r.report.days_averaged == 1);
  CHECK(r.table.at({2019, 2, 1}).kp_daily_avg == doctest::Approx(4.5));
  CHECK(r.table.at({2019, 2, 1}).f10_7 == doctest::Approx(72.0));
  CHECK(r.table.at({2019, 2, 2}).kp_daily_avg == doctest::Approx(0.5));
}

TEST_CASE("gaps are counted and comma-separated rows accepted") {
  const auto r = parse_omni_payload("2019,1,10,1,70\n2019,4,10,1,70\n");
  CHECK(r.report.days == 2);
  CHECK(r.report.gap_days == 2);
}

TEST_CASE("malformed payloads are rejected") {
  CHECK(kind_of([] { parse_omni_payload("2019 1 10 1\n"); }) == ErrorKind::MalformedPayload);
  CHECK(kind_of([] { parse_omni_payload("2019 1 1x 1 70\n"); }) == ErrorKind::MalformedPayload);
  CHECK(kind_of([] { parse_omni_payload("2019 366 10 1 70\n"); }) == ErrorKind::MalformedPayload);
  CHECK(kind_of([] { parse_omni_payload("2019 1 95 1 70\n"); }) == ErrorKind::MalformedPayload);
  CHECK(parse_omni_payload("<html>no data here</html>").table.empty());
}

TEST_CASE("local table format round-trips") {
  const auto a = parse_omni_payload(read_text_file(testing::data_dir() / "omni_2019_01_01_07.txt"));
  const auto b = parse_omni_payload(format_solar_table(a.table));
  REQUIRE(b.table.size() == a.table.size());
  for (const auto& [date, s] : a.table) {
    CHECK(b.table.at(date).kp_daily_avg == doctest::Approx(s.kp_daily_avg).epsilon(1e-12));
    CHECK(b.table.at(date).f10_7 == s.f10_7);
  }
}

TEST_CASE("request URL names the daily OMNI variables") {
  SolarClient client({}, nullptr);
  const auto url = client.request_url(remote({2019, 1, 1}, {2019, 1, 31}));
  CHECK(url.find("start_date=20190101") != std::string::npos);
  CHECK(url.find("end_date=20190131") != std::string::npos);
  CHECK(url.find("res=daily") != std::string::npos);
  CHECK(url.find("&vars=38&vars=39&vars=50") != std::string::npos);
  CHECK(remote({2019, 1, 1}, {2019, 1, 31}).cache_key() == "omni_20190101_20190131");
}

TEST_CASE("network errors and 5xx are retried with exponential backoff") {
  auto t = std::make_shared<FakeTransport>();
  t->throw_first = 1;
  t->script = {{503, "busy"}, {200, kPayload}};
  Recorder rec;
  SolarClient client(rec.options(), t);
  const auto r = client.load(remote({2019, 1, 10}, {2019, 1, 11}));
  CHECK(r.table.size() == 2);
  CHECK(t->calls == 3);
  REQUIRE(rec.sleeps.size() == 2);
  CHECK(rec.sleeps[0].count() == 500);
  CHECK(rec.sleeps[1].count() == 1000);
}

TEST_CASE("retries give up after max_attempts") {
  auto t = std::make_shared<FakeTransport>();
  t->script = {{500, "down"}};
  Recorder rec;
  SolarClient client(rec.options(), t);
  CHECK(kind_of([&] { client.fetch_remote(remote({2019, 1, 1}, {2019, 1, 2})); }) == ErrorKind::ServiceError);
  CHECK(t->calls == 3);
  CHECK(rec.sleeps.size() == 2);

  auto dead = std::make_shared<FakeTransport>();
  dead->throw_first = 100;
  SolarClient c2(rec.options(), dead);
  CHECK(kind_of([&] { c2.fetch_remote(remote({2019, 1, 1}, {2019, 1, 2})); }) == ErrorKind::NetworkError);
}

TEST_CASE("4xx responses are not retried") {
  auto t = std::make_shared<FakeTransport>();
  t->script = {{404, "not found"}};
  Recorder rec;
  SolarClient client(rec.options(), t);
  CHECK(kind_of([&] { client.fetch_remote(remote({2019, 1, 1}, {2019, 1, 2})); }) == ErrorKind::ServiceError);
  CHECK(t->calls == 1);
  CHECK(rec.sleeps.empty());
}

TEST_CASE("empty ranges fail before any request") {
  auto t = std::make_shared<FakeTransport>();
  t->script = {{200, kPayload}};
  SolarClient client({}, t);
  CHECK(kind_of([&] { client.load(remote({2019, 2, 1}, {2019, 1, 1})); }) == ErrorKind::EmptyRange);
  CHECK(t->calls == 0);
}

TEST_CASE("cache hit skips the transport") {
  testing::TempDir dir("solar_cache");
  auto t = std::make_shared<FakeTransport>();
  t->script = {{200, kPayload}};
  Recorder rec;
  auto opt = rec.options();
  opt.cache_dir = dir.path();
  SolarClient client(opt, t);
  const auto q = remote({2019, 1, 10}, {2019, 1, 11});
  const auto first = client.fetch_remote(q);
  CHECK(std::filesystem::exists(dir.path() / "omni_20190110_20190111.txt"));
  SolarClient again(opt, t);
  CHECK(again.fetch_remote(q) == first);
  CHECK(t->calls == 1);
}

TEST_CASE("concurrent requests for one key fetch once") {
  testing::TempDir dir("solar_flight");
  auto t = std::make_shared<FakeTransport>();
  t->script = {{200, kPayload}};
  auto opt = Recorder{}.options();
  opt.cache_dir = dir.path();
  SolarClient client(opt, t);
  const auto q = remote({2019, 1, 10}, {2019, 1, 11});
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      if (client.fetch_remote(q) == kPayload) ++ok;
    });
  }
  for (auto& th : threads) th.join();
  CHECK(ok == 8);
  CHECK(t->calls == 1);
}

TEST_CASE("local source is restricted to the query range") {
  SolarClient client({}, nullptr);
  IndexQuery q{{2019, 1, 2}, {2019, 1, 3}, SolarSource::LocalFile, testing::data_dir() / "omni_2019_01_01_07.txt"};
  const auto r = client.load(q);
  CHECK(r.table.size() == 2);
  CHECK(r.report.days == 2);
  q.local_path = testing::data_dir() / "no_such_file.txt";
  CHECK(kind_of([&] { client.load(q); }) == ErrorKind::IoError);
}
