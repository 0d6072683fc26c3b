#include "scint/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "scint/dataset.hpp"
#include "scint/error.hpp"
#include "scint/rng.hpp"
#include "scint/solar.hpp"

namespace scint {

namespace {

std::size_t band_of(const std::vector<double>& edges, double v) {
  const auto n = edges.size() - 1;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (v < edges[i + 1]) return i;
  }
  return n - 1;
}

void check_edges(const std::vector<double>& edges, const char* name) {
  if (edges.size() < 2) throw Error(ErrorKind::InvalidConfig, std::string(name) + " needs at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw Error(ErrorKind::InvalidConfig, std::string(name) + " must be ascending");
  }
}

void check_range(const std::array<double, 2>& r, const char* name) {
  if (!(r[0] <= r[1])) throw Error(ErrorKind::InvalidConfig, std::string(name) + " range is reversed");
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int first_svid(Constellation c) {
  switch (c) {
    case Constellation::GPS: return 1;
    case Constellation::GLONASS: return 38;
    case Constellation::GALILEO: return 71;
    case Constellation::BEIDOU: return 141;
    case Constellation::OTHER: return 120;
  }
  return 120;
}

int capacity(Constellation c) {
  switch (c) {
    case Constellation::GPS: return 37;
    case Constellation::GLONASS: return 31;
    case Constellation::GALILEO: return 36;
    case Constellation::BEIDOU: return 40;
    case Constellation::OTHER: return 20;
  }
  return 0;
}

struct Orbit {
  SvId svid;
  double period_s = 0.0;
  double phase = 0.0;
  double peak_deg = 0.0;
  double az0_deg = 0.0;
  double az_period_s = 0.0;

  double elevation(double t) const { return peak_deg * std::sin(2.0 * std::numbers::pi * t / period_s + phase); }
  double azimuth(double t) const { return wrap_degrees(az0_deg + 360.0 * t / az_period_s); }
};

struct DayResult {
  std::string text;
  std::size_t records = 0;
  std::array<std::size_t, 3> planted{};
};

DayResult generate_day(const SynthSpec& spec, const std::vector<Orbit>& orbits, CivilDate date, double kp,
                       std::uint64_t day_seed) {
  Rng rng(day_seed);
  DayResult out;
  out.text = "# synthetic ISMR " + format_date(date) + "\n";
  const std::int64_t day_start = days_from_civil(date) * kSecondsPerDay;
  const std::int64_t leap = leap_seconds_for(date);
  const double t0 = static_cast<double>(day_start - days_from_civil(spec.start_date) * kSecondsPerDay);

  struct Regime {
    int cls = 0;
    double level = 0.0;
    bool seen = false;
  };
  std::vector<Regime> regimes(orbits.size());
  char buf[160];
  for (std::int64_t sod = 0; sod < kSecondsPerDay; sod += spec.cadence_seconds) {
    if (sod % spec.window_seconds == 0) {
      const std::int64_t w0 = sod - sod % spec.window_seconds;
      const double mid = static_cast<double>(w0) + 0.5 * static_cast<double>(spec.window_seconds);
      for (std::size_t s = 0; s < orbits.size(); ++s) {
        if (regimes[s].seen) ++out.planted[static_cast<std::size_t>(regimes[s].cls)];
        const double el = std::clamp(orbits[s].elevation(t0 + mid), 0.0, 90.0);
        const auto& p = spec.regime.at(mid / 3600.0, el, kp);
        const int cls = draw_class(p, rng.uniform01());
        const auto& band = spec.s4_bands[static_cast<std::size_t>(cls)];
        regimes[s] = Regime{cls, rng.uniform(band[0], band[1]), false};
      }
    }
    const GnssTime gps = utc_to_gps(UtcTimestamp{day_start + sod}, leap);
    const double t = t0 + static_cast<double>(sod);
    for (std::size_t s = 0; s < orbits.size(); ++s) {
      const double el = orbits[s].elevation(t);
      if (el < spec.trajectory.min_elevation_deg) continue;
      auto& r = regimes[s];
      r.seen = true;
      const auto& band = spec.s4_bands[static_cast<std::size_t>(r.cls)];
      const double s4 = std::clamp(r.level + rng.uniform(-spec.s4_jitter, spec.s4_jitter), band[0], band[1]);
      const double noise = rng.uniform(spec.s4_noise[0], spec.s4_noise[1]);
      const double total = std::sqrt(s4 * s4 + noise * noise);
      std::snprintf(buf, sizeof buf, "%lld,%lld,%d,1,%.2f,%.2f,45.0,%.4f,%.4f\n", static_cast<long long>(gps.week_number),
                    static_cast<long long>(gps.time_of_week), orbits[s].svid.value, orbits[s].azimuth(t), el, total,
                    noise);
      out.text += buf;
      ++out.records;
    }
  }
  for (const auto& r : regimes) {
    if (r.seen) ++out.planted[static_cast<std::size_t>(r.cls)];
  }
  return out;
}

std::string yyyymmdd(CivilDate d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d%02d%02d", d.year, d.month, d.day);
  return buf;
}

nlohmann::json range_json(const std::array<double, 2>& r) { return nlohmann::json::array({r[0], r[1]}); }

std::array<double, 2> range_from(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

std::size_t RegimeTable::hour_band(double hour) const { return band_of(hour_edges, hour); }
std::size_t RegimeTable::elevation_band(double elevation_deg) const { return band_of(elevation_edges, elevation_deg); }
std::size_t RegimeTable::kp_band(double kp) const { return band_of(kp_edges, kp); }

const ClassProbabilities& RegimeTable::at(double hour, double elevation_deg, double kp) const {
  return probabilities[hour_band(hour)][elevation_band(elevation_deg)][kp_band(kp)];
}

RegimeTable RegimeTable::interaction(double dominant_probability) {
  RegimeTable t;
  const double rest = 0.5 * (1.0 - dominant_probability);
  const auto nh = t.hour_edges.size() - 1, ne = t.elevation_edges.size() - 1, nk = t.kp_edges.size() - 1;
  t.probabilities.assign(nh, std::vector<std::vector<ClassProbabilities>>(ne, std::vector<ClassProbabilities>(nk)));
  for (std::size_t h = 0; h < nh; ++h) {
    for (std::size_t e = 0; e < ne; ++e) {
      for (std::size_t k = 0; k < nk; ++k) {
        ClassProbabilities p{rest, rest, rest};
        p[(h + e + 2 * k) % 3] = dominant_probability;
        t.probabilities[h][e][k] = p;
      }
    }
  }
  return t;
}

RegimeTable RegimeTable::constant(ClassProbabilities p) {
  RegimeTable t;
  t.hour_edges = {0, 24};
  t.elevation_edges = {0, 90};
  t.kp_edges = {0, 9};
  t.probabilities = {{{p}}};
  return t;
}

int draw_class(const ClassProbabilities& p, double u) {
  double acc = 0.0;
  for (int c = 0; c < 2; ++c) {
    acc += p[static_cast<std::size_t>(c)];
    if (u < acc) return c;
  }
  return 2;
}

void SynthSpec::validate() const {
  if (days <= 0) throw Error(ErrorKind::InvalidConfig, "synth duration must be at least one day");
  if (civil_from_days(days_from_civil(start_date)) != start_date) throw Error(ErrorKind::InvalidConfig, "synth start_date is not a calendar date");
  if (cadence_seconds <= 0 || window_seconds <= 0 || window_seconds % cadence_seconds != 0 ||
      kSecondsPerDay % window_seconds != 0) {
    throw Error(ErrorKind::InvalidConfig, "cadence must divide the window and the window must divide a day");
  }
  for (const auto& [c, n] : satellites) {
    if (n < 0 || n > capacity(c)) {
      throw Error(ErrorKind::InvalidConfig, "satellite count for " + std::string(to_string(c)) + " out of range");
    }
  }
  check_edges(regime.hour_edges, "hour_edges");
  check_edges(regime.elevation_edges, "elevation_edges");
  check_edges(regime.kp_edges, "kp_edges");
  const auto nh = regime.hour_edges.size() - 1, ne = regime.elevation_edges.size() - 1, nk = regime.kp_edges.size() - 1;
  if (regime.probabilities.size() != nh) throw Error(ErrorKind::InvalidConfig, "regime table hour dimension");
  for (const auto& by_el : regime.probabilities) {
    if (by_el.size() != ne) throw Error(ErrorKind::InvalidConfig, "regime table elevation dimension");
    for (const auto& by_kp : by_el) {
      if (by_kp.size() != nk) throw Error(ErrorKind::InvalidConfig, "regime table Kp dimension");
      for (const auto& p : by_kp) {
        double sum = 0.0;
        for (double v : p) {
          if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::InvalidConfig, "regime probability outside [0,1]");
          sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorKind::InvalidConfig, "regime probabilities must sum to 1");
      }
    }
  }
  for (const auto& b : s4_bands) {
    check_range(b, "s4_bands");
    if (b[0] < 0.0) throw Error(ErrorKind::InvalidConfig, "s4 band below zero");
  }
  check_range(s4_noise, "s4_noise");
  check_range(trajectory.period_hours, "period_hours");
  check_range(trajectory.peak_elevation_deg, "peak_elevation_deg");
  check_range(trajectory.azimuth_period_hours, "azimuth_period_hours");
  check_range(solar.kp_range, "kp_range");
  if (trajectory.period_hours[0] <= 0.0 || trajectory.azimuth_period_hours[0] <= 0.0) {
    throw Error(ErrorKind::InvalidConfig, "trajectory periods must be positive");
  }
  if (trajectory.peak_elevation_deg[0] < 0.0 || trajectory.peak_elevation_deg[1] > 90.0) {
    throw Error(ErrorKind::InvalidConfig, "peak elevation must lie in [0, 90]");
  }
  if (solar.kp_range[0] < 0.0 || solar.kp_range[1] > 9.0) throw Error(ErrorKind::InvalidConfig, "kp_range outside [0, 9]");
}

nlohmann::json SynthSpec::to_json() const {
  nlohmann::json sats = nlohmann::json::object();
  for (const auto& [c, n] : satellites) sats[std::string(to_string(c))] = n;
  nlohmann::json bands = nlohmann::json::array();
  for (const auto& b : s4_bands) bands.push_back(range_json(b));
  return nlohmann::json{
      {"seed", seed},
      {"start_date", format_date(start_date)},
      {"days", days},
      {"cadence_seconds", cadence_seconds},
      {"window_seconds", window_seconds},
      {"satellites", sats},
      {"trajectory",
       {{"period_hours", range_json(trajectory.period_hours)},
        {"peak_elevation_deg", range_json(trajectory.peak_elevation_deg)},
        {"azimuth_period_hours", range_json(trajectory.azimuth_period_hours)},
        {"min_elevation_deg", trajectory.min_elevation_deg}}},
      {"regime",
       {{"hour_edges", regime.hour_edges},
        {"elevation_edges", regime.elevation_edges},
        {"kp_edges", regime.kp_edges},
        {"probabilities", regime.probabilities}}},
      {"s4_bands", bands},
      {"s4_jitter", s4_jitter},
      {"s4_noise", range_json(s4_noise)},
      {"solar",
       {{"kp_range", range_json(solar.kp_range)},
        {"ssn_mean", solar.ssn_mean},
        {"ssn_amplitude", solar.ssn_amplitude},
        {"ssn_period_days", solar.ssn_period_days},
        {"f107_base", solar.f107_base},
        {"f107_per_ssn", solar.f107_per_ssn},
        {"noise_sd", solar.noise_sd}}},
  };
}

SynthSpec SynthSpec::from_json(const nlohmann::json& j) {
  SynthSpec s;
  try {
    s.seed = j.value("seed", s.seed);
    if (j.contains("start_date")) s.start_date = parse_date(j.at("start_date").get<std::string>());
    s.days = j.value("days", s.days);
    s.cadence_seconds = j.value("cadence_seconds", s.cadence_seconds);
    s.window_seconds = j.value("window_seconds", s.window_seconds);
    if (j.contains("satellites")) {
      s.satellites.clear();
      for (const auto& [name, n] : j.at("satellites").items()) s.satellites[constellation_from_string(name)] = n.get<int>();
    }
    if (j.contains("trajectory")) {
      const auto& t = j.at("trajectory");
      if (t.contains("period_hours")) s.trajectory.period_hours = range_from(t.at("period_hours"));
      if (t.contains("peak_elevation_deg")) s.trajectory.peak_elevation_deg = range_from(t.at("peak_elevation_deg"));
      if (t.contains("azimuth_period_hours")) s.trajectory.azimuth_period_hours = range_from(t.at("azimuth_period_hours"));
      s.trajectory.min_elevation_deg = t.value("min_elevation_deg", s.trajectory.min_elevation_deg);
    }
    if (j.contains("regime")) {
      const auto& r = j.at("regime");
      if (r.contains("dominant_probability")) {
        s.regime = RegimeTable::interaction(r.at("dominant_probability").get<double>());
      } else {
        s.regime.hour_edges = r.at("hour_edges").get<std::vector<double>>();
        s.regime.elevation_edges = r.at("elevation_edges").get<std::vector<double>>();
        s.regime.kp_edges = r.at("kp_edges").get<std::vector<double>>();
        s.regime.probabilities = r.at("probabilities").get<std::vector<std::vector<std::vector<ClassProbabilities>>>>();
      }
    }
    if (j.contains("s4_bands")) {
      const auto& b = j.at("s4_bands");
      if (b.size() != 3) throw Error(ErrorKind::InvalidConfig, "s4_bands needs one range per class");
      for (std::size_t c = 0; c < 3; ++c) s.s4_bands[c] = range_from(b.at(c));
    }
    s.s4_jitter = j.value("s4_jitter", s.s4_jitter);
    if (j.contains("s4_noise")) s.s4_noise = range_from(j.at("s4_noise"));
    if (j.contains("solar")) {
      const auto& o = j.at("solar");
      if (o.contains("kp_range")) s.solar.kp_range = range_from(o.at("kp_range"));
      s.solar.ssn_mean = o.value("ssn_mean", s.solar.ssn_mean);
      s.solar.ssn_amplitude = o.value("ssn_amplitude", s.solar.ssn_amplitude);
      s.solar.ssn_period_days = o.value("ssn_period_days", s.solar.ssn_period_days);
      s.solar.f107_base = o.value("f107_base", s.solar.f107_base);
      s.solar.f107_per_ssn = o.value("f107_per_ssn", s.solar.f107_per_ssn);
      s.solar.noise_sd = o.value("noise_sd", s.solar.noise_sd);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("synth spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::vector<SvId> synth_satellites(const SynthSpec& spec) {
  std::vector<SvId> out;
  for (const auto& [c, n] : spec.satellites) {
    for (int i = 0; i < n; ++i) out.push_back(SvId{first_svid(c) + i});
  }
  return out;
}

SynthOutput generate(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  spec.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  Rng rng(mix_seed(spec.seed, 0));
  std::vector<Orbit> orbits;
  const auto& tr = spec.trajectory;
  for (const auto svid : synth_satellites(spec)) {
    Orbit o;
    o.svid = svid;
    o.period_s = 3600.0 * rng.uniform(tr.period_hours[0], tr.period_hours[1]);
    o.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    o.peak_deg = rng.uniform(tr.peak_elevation_deg[0], tr.peak_elevation_deg[1]);
    o.az0_deg = rng.uniform(0.0, 360.0);
    o.az_period_s = 3600.0 * rng.uniform(tr.azimuth_period_hours[0], tr.azimuth_period_hours[1]);
    orbits.push_back(o);
  }

  SolarTable solar;
  const auto first_day = days_from_civil(spec.start_date);
  for (int d = 0; d < spec.days; ++d) {
    SolarIndices s;
    s.date = civil_from_days(first_day + d);
    // Quantized the way the index file stores them, so the generator and
    // the pipeline see the same values.
    s.kp_daily_avg = std::round(10.0 * rng.uniform(spec.solar.kp_range[0], spec.solar.kp_range[1])) / 10.0;
    const double cycle = std::sin(2.0 * std::numbers::pi * d / spec.solar.ssn_period_days);
    s.ssn = std::max(0.0, std::round(spec.solar.ssn_mean + spec.solar.ssn_amplitude * cycle +
                                     spec.solar.noise_sd * rng.normal()));
    s.f10_7 = std::round(10.0 * (spec.solar.f107_base + spec.solar.f107_per_ssn * s.ssn +
                                 spec.solar.noise_sd * rng.normal())) / 10.0;
    solar[s.date] = s;
  }

  std::vector<DayResult> days(static_cast<std::size_t>(spec.days));
#pragma omp parallel for schedule(dynamic)
  for (int d = 0; d < spec.days; ++d) {
    const auto date = civil_from_days(first_day + d);
    days[static_cast<std::size_t>(d)] =
        generate_day(spec, orbits, date, solar.at(date).kp_daily_avg, mix_seed(spec.seed, static_cast<std::uint64_t>(d) + 1));
  }

  SynthOutput out;
  nlohmann::json file_names = nlohmann::json::array();
  for (int d = 0; d < spec.days; ++d) {
    const auto name = "ismr_" + yyyymmdd(civil_from_days(first_day + d)) + ".csv";
    auto& day = days[static_cast<std::size_t>(d)];
    write_text_file_atomic(out_dir / name, day.text);
    out.ismr_files.push_back(out_dir / name);
    file_names.push_back(name);
    out.records += day.records;
    for (std::size_t c = 0; c < 3; ++c) out.planted_windows[c] += day.planted[c];
    day.text.clear();
  }
  out.solar_file = out_dir / "solar_indices.txt";
  write_text_file_atomic(out.solar_file, format_solar_table(solar));

  nlohmann::json daily = nlohmann::json::array();
  for (const auto& [date, s] : solar) {
    daily.push_back({{"date", format_date(date)}, {"kp_daily_avg", s.kp_daily_avg}, {"ssn", s.ssn}, {"f10_7", s.f10_7}});
  }
  std::vector<int> svids;
  for (const auto& o : orbits) svids.push_back(o.svid.value);
  const nlohmann::json manifest{{"format", "scint-synth-manifest"},
                                {"spec", spec.to_json()},
                                {"ismr_files", file_names},
                                {"solar_file", "solar_indices.txt"},
                                {"svids", svids},
                                {"records", out.records},
                                {"planted_windows", out.planted_windows},
                                {"solar_series", daily}};
  out.manifest_file = out_dir / "manifest.json";
  write_text_file_atomic(out.manifest_file, manifest.dump(1) + "\n");

  // Keep 60% of the expected samples per window, as the 1 Hz default does.
  const auto per_window = spec.window_seconds / spec.cadence_seconds;
  const auto min_samples = std::max<std::int64_t>(1, (per_window * 6 + 9) / 10);
  const nlohmann::json config{
      {"inputs", nlohmann::json::array({"ismr_*.csv"})},
      {"solar", {{"source", "local"}, {"path", "solar_indices.txt"}}},
      {"min_window_samples", min_samples},
      {"output_dir", "out"},
      {"model", {{"kind", "gbdt"}, {"params", {{"learning_rate", 0.3}, {"max_depth", 9}, {"split_mode", "histogram"}}}}}};
  out.pipeline_config_file = out_dir / "pipeline.json";
  write_text_file_atomic(out.pipeline_config_file, config.dump(1) + "\n");
  return out;
}

}  // namespace scint
