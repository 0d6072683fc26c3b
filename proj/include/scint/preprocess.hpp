#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scint/dataset.hpp"
#include "scint/gnss_time.hpp"
#include "scint/ismr.hpp"
#include "scint/solar.hpp"

namespace scint {

// ---- S4 ----------------------------------------------------------------

/// 50 Hz signal intensity over one minute plus the linear SNR. An infinite
/// SNR switches the noise term off.
struct IntensitySeries {
  std::vector<double> samples;
  double snr = 0.0;
};

/// Total S4 from raw intensity: sqrt(var(SI)/mean(SI)^2 - noise), where
/// noise = (100/SNR)(1 + 500/(19 SNR)). The radicand is clamped at 0.
double compute_s4_total(const IntensitySeries& series);

/// Noise-corrected S4: sqrt(s4_total^2 - s4_noise^2) when positive, else 0.
double correct_s4(double s4_total, double s4_noise);

// ---- Observations and smoothing ------------------------------------------

struct CorrectedObservation {
  UtcTimestamp utc;
  SvId svid;
  Constellation constellation = Constellation::OTHER;
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  double s4_corrected = 0.0;
};

/// Applies S4 correction and GPS->UTC conversion (leap seconds from the
/// embedded table).
CorrectedObservation correct_record(const RawIsmrRecord& record);
std::vector<CorrectedObservation> correct_records(std::span<const RawIsmrRecord> records);

/// Stable sort by (svid, utc), the order smooth_windows requires.
void sort_for_smoothing(std::vector<CorrectedObservation>& obs);

struct SmoothedSample {
  UtcTimestamp window_start_utc;
  SvId svid;
  Constellation constellation = Constellation::OTHER;
  double mean_elevation_deg = 0.0;
  double mean_azimuth_deg = 0.0;  // circular mean in [0, 360)
  double mean_s4 = 0.0;
  std::size_t sample_count = 0;

  friend bool operator==(const SmoothedSample&, const SmoothedSample&) = default;
};

struct SmoothingOptions {
  std::int64_t window_seconds = 300;
  std::size_t min_window_samples = 180;
};

struct SmoothingResult {
  std::vector<SmoothedSample> samples;
  std::size_t dropped_windows = 0;
};

/// Start of the tumbling window containing t. Windows restart at each UTC
/// midnight.
UtcTimestamp window_start(UtcTimestamp t, std::int64_t window_seconds) noexcept;

/// Circular mean of angles in degrees, mapped to [0, 360).
double circular_mean_deg(std::span<const double> angles_deg);

/// Tumbling per-SVID window means. Input must be sorted by (svid, utc);
/// throws UnsortedInput otherwise. Output is ordered by (svid, window).
SmoothingResult smooth_windows(std::span<const CorrectedObservation> obs, const SmoothingOptions& options = {});

/// Reference single-threaded kernel behind smooth_windows.
SmoothingResult smooth_windows_serial(std::span<const CorrectedObservation> obs, const SmoothingOptions& options = {});
/// OpenMP kernel: SVID runs are smoothed concurrently, then concatenated.
SmoothingResult smooth_windows_parallel(std::span<const CorrectedObservation> obs,
                                        const SmoothingOptions& options = {});

// ---- Solar join ----------------------------------------------------------

struct JoinedSample {
  SmoothedSample sample;
  SolarIndices indices;
};

struct JoinResult {
  std::vector<JoinedSample> joined;
  std::size_t dropped = 0;
};

/// Inner join on the UTC calendar date of each window start.
JoinResult join_solar(std::span<const SmoothedSample> samples, const SolarTable& indices);

// ---- Labels, features, balancing -----------------------------------------

enum class SeverityClass : int { Class1 = 0, Class2 = 1, Class3 = 2 };

struct SeverityThresholds {
  double low = 0.2;
  double high = 0.3;
};

/// Half-open bands: [0, low) -> Class1, [low, high) -> Class2, [high, inf) -> Class3.
SeverityClass label_severity(double mean_s4, const SeverityThresholds& thresholds = {});

inline constexpr std::size_t kFeatureCount = 15;
using FeatureVector = std::array<double, kFeatureCount>;

/// Column names in the order build_features emits them.
const std::vector<std::string>& feature_schema();

FeatureVector build_features(const JoinedSample& joined);

struct LabeledSample {
  FeatureVector features{};
  SeverityClass label = SeverityClass::Class1;
};

std::vector<LabeledSample> label_samples(std::span<const JoinedSample> joined,
                                         const SeverityThresholds& thresholds = {});

/// Chooses per_class indices of each class uniformly without replacement.
/// Result[c] lists the chosen positions in draw order. Throws
/// InsufficientClass when a class has fewer than per_class members.
std::vector<std::vector<std::size_t>> balance_indices(std::span<const ClassIndex> labels, int n_classes,
                                                      std::size_t per_class, std::uint64_t seed);

/// Balanced dataset with rows grouped by class (Class1 block first), each
/// block in draw order.
Dataset balance_classes(std::span<const LabeledSample> samples, std::size_t per_class, std::uint64_t seed);

}  // namespace scint
