#include <doctest.h>
#include <zlib.h>

#include <fstream>

#include "scint/error.hpp"
#include "scint/ismr.hpp"
#include "test_support.hpp"

using namespace scint;

namespace {

const ColumnMap kDefault{};

RawIsmrRecord parse_ok(std::string_view line) {
  const auto out = parse_ismr_line(line, kDefault, 1);
  REQUIRE(std::holds_alternative<RawIsmrRecord>(out));
  return std::get<RawIsmrRecord>(out);
}

LineError parse_err(std::string_view line) {
  const auto out = parse_ismr_line(line, kDefault, 7);
  REQUIRE(std::holds_alternative<LineError>(out));
  return std::get<LineError>(out);
}

RawIsmrRecord record(int svid, double el) {
  RawIsmrRecord r;
  r.time = {2034, 0};
  r.svid = SvId{svid};
  r.elevation_deg = el;
  return r;
}

}  // namespace

TEST_CASE("SVID to constellation table") {
  CHECK(svid_to_constellation(SvId{1}) == Constellation::GPS);
  CHECK(svid_to_constellation(SvId{37}) == Constellation::GPS);
  CHECK(svid_to_constellation(SvId{38}) == Constellation::GLONASS);
  CHECK(svid_to_constellation(SvId{68}) == Constellation::GLONASS);
  CHECK(svid_to_constellation(SvId{69}) == Constellation::OTHER);
  CHECK(svid_to_constellation(SvId{71}) == Constellation::GALILEO);
  CHECK(svid_to_constellation(SvId{106}) == Constellation::GALILEO);
  CHECK(svid_to_constellation(SvId{120}) == Constellation::OTHER);
  CHECK(svid_to_constellation(SvId{141}) == Constellation::BEIDOU);
  CHECK(svid_to_constellation(SvId{180}) == Constellation::BEIDOU);
  CHECK(svid_to_constellation(SvId{223}) == Constellation::BEIDOU);
  CHECK(svid_to_constellation(SvId{245}) == Constellation::BEIDOU);
  CHECK(svid_to_constellation(SvId{0}) == Constellation::OTHER);
}

TEST_CASE("well-formed line parses with default columns") {
  const auto r = parse_ok("2034,172818,5,1,123.5,42.25,45.0,0.3000,0.0400");
  CHECK(r.time == GnssTime{2034, 172818});
  CHECK(r.svid == SvId{5});
  CHECK(r.azimuth_deg == 123.5);
  CHECK(r.elevation_deg == 42.25);
  CHECK(r.s4_total == 0.3);
  CHECK(r.s4_noise == 0.04);
}

TEST_CASE("azimuth is wrapped into [0, 360)") {
  CHECK(parse_ok("2034,0,5,1,-10,42,45,0.3,0.04").azimuth_deg == doctest::Approx(350.0));
  CHECK(parse_ok("2034,0,5,1,360,42,45,0.3,0.04").azimuth_deg == 0.0);
}

TEST_CASE("blank, comment and missing-S4 lines are skipped, not errors") {
  CHECK(std::get<SkipMarker>(parse_ismr_line("   ", kDefault)).reason == SkipReason::Blank);
  CHECK(std::get<SkipMarker>(parse_ismr_line("# header", kDefault)).reason == SkipReason::Comment);
  CHECK(std::get<SkipMarker>(parse_ismr_line("2034,0,5,1,10,42,45,,0.04", kDefault)).reason == SkipReason::MissingS4);
  CHECK(std::get<SkipMarker>(parse_ismr_line("2034,0,5,1,10,42,45,0.2,", kDefault)).reason == SkipReason::MissingS4);
}

TEST_CASE("malformed and out-of-range fields are reported per line") {
  auto e = parse_err("2034,abc,5,1,10,42,45,0.2,0.04");
  CHECK(e.kind == ErrorKind::MalformedField);
  CHECK(e.column == "time_of_week");
  CHECK(e.line_number == 7);
  CHECK(parse_err("2034,0,5,1,10,95,45,0.2,0.04").kind == ErrorKind::RangeViolation);
  CHECK(parse_err("2034,604800,5,1,10,45,45,0.2,0.04").kind == ErrorKind::RangeViolation);
  CHECK(parse_err("2034,0,5,1,10,45,45,-0.2,0.04").kind == ErrorKind::RangeViolation);
  CHECK(parse_err("2034,0.5,5,1,10,45,45,0.2,0.04").kind == ErrorKind::MalformedField);
  CHECK(parse_err("2034,0,5,1,10").kind == ErrorKind::MissingColumn);
  CHECK(parse_err("2034,0,5,1,,45,45,0.2,0.04").kind == ErrorKind::MissingColumn);
}

TEST_CASE("custom column map and delimiter") {
  ColumnMap m;
  m.delimiter = ';';
  m.week_number = 2;
  m.time_of_week = 1;
  m.svid = 3;
  m.azimuth = 4;
  m.elevation = 5;
  m.s4_total = 6;
  m.s4_noise = 7;
  const auto out = parse_ismr_line("100;2034;12;200;30;0.5;0.1", m);
  REQUIRE(std::holds_alternative<RawIsmrRecord>(out));
  CHECK(std::get<RawIsmrRecord>(out).time == GnssTime{2034, 100});

  nlohmann::json j = m;
  CHECK(j.get<ColumnMap>().delimiter == ';');
  CHECK(j.get<ColumnMap>().s4_noise == 7);

  ColumnMap bad;
  bad.svid = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.svid = bad.week_number;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("ingest report tallies outcomes") {
  const std::string text =
      "# receiver header\n"
      "2034,0,5,1,10,42,45,0.2,0.04\n"
      "\n"
      "2034,60,5,1,10,42,45,,0.04\n"
      "2034,x,5,1,10,42,45,0.2,0.04\n"
      "2034,120,5,1,10,42,45,0.3,0.04\n";
  const auto r = parse_ismr_text(text, IngestOptions{});
  CHECK(r.records.size() == 2);
  CHECK(r.report.lines_read == 6);
  CHECK(r.report.records_ok == 2);
  CHECK(r.report.skipped == 3);
  CHECK(r.report.skipped_by_reason.at("missing_s4") == 1);
  CHECK(r.report.error_count() == 1);
  CHECK(r.report.errors_by_kind.at("MalformedField") == 1);
  CHECK(r.report.error_samples.size() == 1);
}

TEST_CASE("week rollover repair during ingest is opt-in") {
  IngestOptions opt;
  CHECK(parse_ismr_text("1010,0,5,1,10,42,45,0.2,0.04\n", opt).records.at(0).time.week_number == 1010);
  opt.repair_week_rollover = true;
  CHECK(parse_ismr_text("1010,0,5,1,10,42,45,0.2,0.04\n", opt).records.at(0).time.week_number == 2034);
}

TEST_CASE("gzip and plain files read identically, in input order") {
  testing::TempDir dir("ismr_gz");
  const std::string text = "2034,0,5,1,10,42,45,0.2,0.04\n2034,60,7,1,11,43,45,0.25,0.03\n";
  const auto plain = dir.path() / "a.csv";
  std::ofstream(plain) << text;
  const auto gz = dir.path() / "b.csv.gz";
  gzFile f = gzopen(gz.string().c_str(), "wb");
  REQUIRE(f != nullptr);
  gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
  gzclose(f);

  const auto a = read_ismr_file(plain, {});
  const auto b = read_ismr_file(gz, {});
  REQUIRE(a.records.size() == 2);
  REQUIRE(b.records.size() == 2);
  CHECK(a.records[1].svid == b.records[1].svid);
  CHECK(a.records[1].s4_total == b.records[1].s4_total);

  const std::vector<std::filesystem::path> paths{gz, plain, gz};
  const auto serial = read_ismr_files(paths, {}, false);
  const auto parallel = read_ismr_files(paths, {}, true);
  REQUIRE(serial.records.size() == 6);
  REQUIRE(parallel.records.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(serial.records[i].time == parallel.records[i].time);
    CHECK(serial.records[i].svid == parallel.records[i].svid);
  }
  CHECK_THROWS_AS(read_ismr_file(dir.path() / "missing.csv", {}), Error);
}

TEST_CASE("elevation mask is inclusive and order preserving") {
  const std::vector<RawIsmrRecord> recs{record(1, 19.999), record(2, 20.0), record(3, 55.0), record(4, -3.0)};
  const auto kept = apply_elevation_mask(recs, 20.0);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].svid == SvId{2});
  CHECK(kept[1].svid == SvId{3});
  CHECK(apply_elevation_mask(recs, 0.0).size() == recs.size());
  CHECK_THROWS_AS(apply_elevation_mask(recs, 91.0), Error);
  CHECK_THROWS_AS(apply_elevation_mask(recs, -1.0), Error);
}

TEST_CASE("constellation filter keeps only allowed systems") {
  const std::vector<RawIsmrRecord> recs{record(3, 30), record(40, 30), record(120, 30), record(75, 30), record(150, 30)};
  const std::vector<Constellation> gps_gal{Constellation::GPS, Constellation::GALILEO};
  const auto kept = filter_constellations(recs, gps_gal);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].svid == SvId{3});
  CHECK(kept[1].svid == SvId{75});
}

TEST_CASE("constellation names") {
  CHECK(constellation_from_string("GALILEO") == Constellation::GALILEO);
  CHECK(constellation_from_string("BEIDOU") == Constellation::BEIDOU);
  CHECK_THROWS_AS(constellation_from_string("QZSS"), Error);
}
