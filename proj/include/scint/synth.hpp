#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "scint/gnss_time.hpp"
#include "scint/ismr.hpp"

namespace scint {

/// Probability of each severity class, indexed Class1..Class3.
using ClassProbabilities = std::array<double, 3>;

/// Conditional regime table: probabilities[hour band][elevation band][Kp band].
/// Band edges are ascending; a value v falls in band i when
/// edges[i] <= v < edges[i+1] (the last band also takes its upper edge).
struct RegimeTable {
  std::vector<double> hour_edges = {0, 6, 12, 18, 24};
  std::vector<double> elevation_edges = {0, 45, 90};
  std::vector<double> kp_edges = {0, 3, 9};
  std::vector<std::vector<std::vector<ClassProbabilities>>> probabilities;

  std::size_t hour_band(double hour) const;
  std::size_t elevation_band(double elevation_deg) const;
  std::size_t kp_band(double kp) const;
  const ClassProbabilities& at(double hour, double elevation_deg, double kp) const;

  /// Every (h, e, k) cell gets one dominant class: (h + e + 2k) mod 3, with
  /// the given probability; the rest is split evenly.
  static RegimeTable interaction(double dominant_probability);
  /// Every cell is the same distribution.
  static RegimeTable constant(ClassProbabilities p);
};

struct TrajectoryParams {
  std::array<double, 2> period_hours = {8.0, 14.0};
  std::array<double, 2> peak_elevation_deg = {40.0, 88.0};
  std::array<double, 2> azimuth_period_hours = {6.0, 18.0};
  /// Records below this elevation are not written (satellite not tracked).
  double min_elevation_deg = 5.0;
};

struct SolarSeriesParams {
  std::array<double, 2> kp_range = {0.0, 6.0};
  double ssn_mean = 30.0;
  double ssn_amplitude = 20.0;
  double ssn_period_days = 27.0;
  double f107_base = 65.0;
  double f107_per_ssn = 0.6;
  double noise_sd = 3.0;
};

struct SynthSpec {
  std::uint64_t seed = 1;
  CivilDate start_date{2019, 1, 1};
  int days = 30;
  std::int64_t cadence_seconds = 60;
  /// Regimes are drawn once per satellite per window of this length.
  std::int64_t window_seconds = 300;
  std::map<Constellation, int> satellites = {
      {Constellation::GPS, 8}, {Constellation::GLONASS, 6}, {Constellation::GALILEO, 6},
      {Constellation::BEIDOU, 6}, {Constellation::OTHER, 1}};
  TrajectoryParams trajectory;
  RegimeTable regime = RegimeTable::interaction(0.98);
  /// Corrected-S4 range drawn for each class.
  std::array<std::array<double, 2>, 3> s4_bands = {{{0.03, 0.17}, {0.22, 0.28}, {0.35, 0.80}}};
  /// Per-record variation around the window level (kept inside the band).
  double s4_jitter = 0.01;
  std::array<double, 2> s4_noise = {0.02, 0.04};
  SolarSeriesParams solar;

  /// Throws InvalidConfig.
  void validate() const;
  nlohmann::json to_json() const;
  static SynthSpec from_json(const nlohmann::json& j);
};

/// Satellites in generation order: per constellation, SVIDs from the start
/// of that constellation's range (OTHER uses SBAS-style 120+).
std::vector<SvId> synth_satellites(const SynthSpec& spec);

/// Draws a class index from p using one uniform draw.
int draw_class(const ClassProbabilities& p, double u);

struct SynthOutput {
  std::vector<std::filesystem::path> ismr_files;
  std::filesystem::path solar_file;
  std::filesystem::path manifest_file;
  std::filesystem::path pipeline_config_file;
  std::size_t records = 0;
  /// Planted regimes per class, one per (satellite, window) with records.
  std::array<std::size_t, 3> planted_windows{};
};

/// Writes one ISMR file per day (default ColumnMap layout), a local solar
/// index file, manifest.json and a pipeline config tuned for the corpus.
/// Output is byte-identical for a given spec.
SynthOutput generate(const SynthSpec& spec, const std::filesystem::path& out_dir);

}  // namespace scint
