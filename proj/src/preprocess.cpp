#include "scint/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scint/error.hpp"
#include "scint/rng.hpp"

namespace scint {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Per-window running sums; means are formed once the window closes.
struct WindowAccumulator {
  UtcTimestamp start;
  SvId svid;
  Constellation constellation = Constellation::OTHER;
  double sum_el = 0.0, sum_s4 = 0.0, sum_sin = 0.0, sum_cos = 0.0;
  std::size_t count = 0;

  void add(const CorrectedObservation& o) {
    sum_el += o.elevation_deg;
    sum_s4 += o.s4_corrected;
    sum_sin += std::sin(o.azimuth_deg * kDegToRad);
    sum_cos += std::cos(o.azimuth_deg * kDegToRad);
    ++count;
  }

  SmoothedSample finish() const {
    const double n = static_cast<double>(count);
    double az = std::atan2(sum_sin / n, sum_cos / n) / kDegToRad;
    return SmoothedSample{start, svid, constellation, sum_el / n, wrap_degrees(az), sum_s4 / n, count};
  }
};

bool in_order(const CorrectedObservation& a, const CorrectedObservation& b) {
  return a.svid < b.svid || (a.svid == b.svid && a.utc <= b.utc);
}

void check_sorted(std::span<const CorrectedObservation> obs) {
  for (std::size_t i = 1; i < obs.size(); ++i) {
    if (!in_order(obs[i - 1], obs[i])) {
      throw Error(ErrorKind::UnsortedInput, "observation " + std::to_string(i) + " breaks (svid, utc) order");
    }
  }
}

void check_options(const SmoothingOptions& options) {
  if (options.window_seconds <= 0) throw Error(ErrorKind::InvalidConfig, "window_seconds must be positive");
}

// Smooths one contiguous, sorted run of observations.
void smooth_run(std::span<const CorrectedObservation> run, const SmoothingOptions& options, SmoothingResult& out) {
  std::size_t i = 0;
  while (i < run.size()) {
    WindowAccumulator acc;
    acc.start = window_start(run[i].utc, options.window_seconds);
    acc.svid = run[i].svid;
    acc.constellation = run[i].constellation;
    std::size_t j = i;
    while (j < run.size() && run[j].svid == acc.svid &&
           window_start(run[j].utc, options.window_seconds) == acc.start) {
      acc.add(run[j]);
      ++j;
    }
    if (acc.count >= options.min_window_samples && acc.count > 0) {
      out.samples.push_back(acc.finish());
    } else {
      ++out.dropped_windows;
    }
    i = j;
  }
}

}  // namespace

double compute_s4_total(const IntensitySeries& series) {
  if (series.samples.empty()) throw Error(ErrorKind::RangeViolation, "intensity series is empty");
  if (!(series.snr > 0.0)) throw Error(ErrorKind::RangeViolation, "SNR must be positive");
  double sum = 0.0, sum_sq = 0.0;
  for (double si : series.samples) {
    if (!std::isfinite(si) || si <= 0.0) throw Error(ErrorKind::RangeViolation, "intensity samples must be finite and > 0");
    sum += si;
    sum_sq += si * si;
  }
  const double n = static_cast<double>(series.samples.size());
  const double mean = sum / n;
  const double normalized_variance = (sum_sq / n - mean * mean) / (mean * mean);
  const double noise = (100.0 / series.snr) * (1.0 + 500.0 / (19.0 * series.snr));
  const double radicand = normalized_variance - noise;
  return radicand > 0.0 ? std::sqrt(radicand) : 0.0;
}

double correct_s4(double s4_total, double s4_noise) {
  const double x = s4_total * s4_total - s4_noise * s4_noise;
  return x > 0.0 ? std::sqrt(x) : 0.0;
}

CorrectedObservation correct_record(const RawIsmrRecord& record) {
  return CorrectedObservation{gps_to_utc(record.time),
                              record.svid,
                              svid_to_constellation(record.svid),
                              record.azimuth_deg,
                              record.elevation_deg,
                              correct_s4(record.s4_total, record.s4_noise)};
}

std::vector<CorrectedObservation> correct_records(std::span<const RawIsmrRecord> records) {
  std::vector<CorrectedObservation> out(records.size());
  const auto n = static_cast<std::ptrdiff_t>(records.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = correct_record(records[static_cast<std::size_t>(i)]);
  }
  return out;
}

void sort_for_smoothing(std::vector<CorrectedObservation>& obs) {
  std::stable_sort(obs.begin(), obs.end(), [](const auto& a, const auto& b) {
    return a.svid < b.svid || (a.svid == b.svid && a.utc < b.utc);
  });
}

UtcTimestamp window_start(UtcTimestamp t, std::int64_t window_seconds) noexcept {
  const std::int64_t sod = seconds_of_day(t);
  const std::int64_t day_start = t.seconds_since_unix_epoch - sod;
  return UtcTimestamp{day_start + (sod / window_seconds) * window_seconds};
}

double circular_mean_deg(std::span<const double> angles_deg) {
  double s = 0.0, c = 0.0;
  for (double a : angles_deg) {
    s += std::sin(a * kDegToRad);
    c += std::cos(a * kDegToRad);
  }
  const double n = static_cast<double>(angles_deg.size());
  return wrap_degrees(std::atan2(s / n, c / n) / kDegToRad);
}

SmoothingResult smooth_windows_serial(std::span<const CorrectedObservation> obs, const SmoothingOptions& options) {
  check_options(options);
  check_sorted(obs);
  SmoothingResult out;
  smooth_run(obs, options, out);
  return out;
}

SmoothingResult smooth_windows_parallel(std::span<const CorrectedObservation> obs, const SmoothingOptions& options) {
  check_options(options);
  check_sorted(obs);
  std::vector<std::size_t> bounds{0};
  for (std::size_t i = 1; i < obs.size(); ++i) {
    if (obs[i].svid != obs[i - 1].svid) bounds.push_back(i);
  }
  bounds.push_back(obs.size());
  const auto runs = static_cast<std::ptrdiff_t>(bounds.size() - 1);
  std::vector<SmoothingResult> partial(static_cast<std::size_t>(runs));
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t r = 0; r < runs; ++r) {
    const auto b = bounds[static_cast<std::size_t>(r)];
    const auto e = bounds[static_cast<std::size_t>(r) + 1];
    smooth_run(obs.subspan(b, e - b), options, partial[static_cast<std::size_t>(r)]);
  }
  SmoothingResult out;
  for (auto& p : partial) {
    out.samples.insert(out.samples.end(), p.samples.begin(), p.samples.end());
    out.dropped_windows += p.dropped_windows;
  }
  return out;
}

SmoothingResult smooth_windows(std::span<const CorrectedObservation> obs, const SmoothingOptions& options) {
  return smooth_windows_parallel(obs, options);
}

JoinResult join_solar(std::span<const SmoothedSample> samples, const SolarTable& indices) {
  JoinResult out;
  out.joined.reserve(samples.size());
  for (const auto& s : samples) {
    const auto it = indices.find(utc_date(s.window_start_utc));
    if (it == indices.end()) {
      ++out.dropped;
      continue;
    }
    out.joined.push_back(JoinedSample{s, it->second});
  }
  return out;
}

SeverityClass label_severity(double mean_s4, const SeverityThresholds& thresholds) {
  if (mean_s4 < thresholds.low) return SeverityClass::Class1;
  if (mean_s4 < thresholds.high) return SeverityClass::Class2;
  return SeverityClass::Class3;
}

const std::vector<std::string>& feature_schema() {
  static const std::vector<std::string> schema = {
      "hour_sin",  "hour_cos",   "doy_sin",    "doy_cos",   "elevation_deg", "azimuth_sin", "azimuth_cos", "is_gps",
      "is_glonass", "is_galileo", "is_beidou", "svid",      "kp_daily_avg",  "ssn",         "f10_7"};
  return schema;
}

FeatureVector build_features(const JoinedSample& joined) {
  const auto& s = joined.sample;
  if (s.constellation == Constellation::OTHER) {
    throw Error(ErrorKind::RangeViolation, "SVID " + std::to_string(s.svid.value) + " has no constellation encoding");
  }
  const auto date = utc_date(s.window_start_utc);
  const double hour_phase = 2.0 * std::numbers::pi * static_cast<double>(seconds_of_day(s.window_start_utc)) /
                            static_cast<double>(kSecondsPerDay);
  const double doy_phase = 2.0 * std::numbers::pi * static_cast<double>(day_of_year(date) - 1) /
                           static_cast<double>(days_in_year(date.year));
  const double az = s.mean_azimuth_deg * kDegToRad;
  FeatureVector f{};
  f[0] = std::sin(hour_phase);
  f[1] = std::cos(hour_phase);
  f[2] = std::sin(doy_phase);
  f[3] = std::cos(doy_phase);
  f[4] = s.mean_elevation_deg;
  f[5] = std::sin(az);
  f[6] = std::cos(az);
  f[7] = s.constellation == Constellation::GPS ? 1.0 : 0.0;
  f[8] = s.constellation == Constellation::GLONASS ? 1.0 : 0.0;
  f[9] = s.constellation == Constellation::GALILEO ? 1.0 : 0.0;
  f[10] = s.constellation == Constellation::BEIDOU ? 1.0 : 0.0;
  f[11] = static_cast<double>(s.svid.value);
  f[12] = joined.indices.kp_daily_avg;
  f[13] = joined.indices.ssn;
  f[14] = joined.indices.f10_7;
  return f;
}

std::vector<LabeledSample> label_samples(std::span<const JoinedSample> joined, const SeverityThresholds& thresholds) {
  std::vector<LabeledSample> out;
  out.reserve(joined.size());
  for (const auto& j : joined) out.push_back(LabeledSample{build_features(j), label_severity(j.sample.mean_s4, thresholds)});
  return out;
}

std::vector<std::vector<std::size_t>> balance_indices(std::span<const ClassIndex> labels, int n_classes,
                                                      std::size_t per_class, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto l = labels[i];
    if (l < 0 || l >= n_classes) throw Error(ErrorKind::LabelOutOfRange, "label " + std::to_string(l));
    members[static_cast<std::size_t>(l)].push_back(i);
  }
  for (int c = 0; c < n_classes; ++c) {
    const auto have = members[static_cast<std::size_t>(c)].size();
    if (have < per_class) {
      throw Error(ErrorKind::InsufficientClass, "Class" + std::to_string(c + 1) + " has " + std::to_string(have) +
                                                    " samples, need " + std::to_string(per_class));
    }
  }
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> chosen;
  chosen.reserve(members.size());
  for (auto& m : members) chosen.push_back(rng.sample_prefix(m, per_class));
  return chosen;
}

Dataset balance_classes(std::span<const LabeledSample> samples, std::size_t per_class, std::uint64_t seed) {
  std::vector<ClassIndex> labels(samples.size());
  std::transform(samples.begin(), samples.end(), labels.begin(),
                 [](const LabeledSample& s) { return static_cast<ClassIndex>(s.label); });
  const auto chosen = balance_indices(labels, 3, per_class, seed);

  Dataset ds(feature_schema(), 3);
  for (std::size_t c = 0; c < chosen.size(); ++c) {
    for (auto i : chosen[c]) ds.add_row(samples[i].features, static_cast<ClassIndex>(c));
  }
  auto& prov = ds.provenance();
  prov.seed = seed;
  prov.prng = Rng::kAlgorithm;
  prov.balance_counts.assign(3, per_class);
  prov.available_counts.assign(3, 0);
  for (auto l : labels) ++prov.available_counts[static_cast<std::size_t>(l)];
  return ds;
}

}  // namespace scint
