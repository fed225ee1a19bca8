#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cpsense/coprime.hpp"
#include "cpsense/estimator.hpp"

namespace cpsense {

struct Peak {
  std::size_t bin = 0;
  double frequency = 0.0;
  double magnitude = 0.0;
};

struct PeakSet {
  std::vector<Peak> peaks;   // descending magnitude, ties toward lower bin
  double threshold = 0.0;
};

/// Strict (circular) local maxima above median + 6 * MAD of the bin magnitudes.
/// With `expected_count` only the that many largest are kept; without it every
/// qualifying maximum is returned.
PeakSet detect_peaks(const PowerSpectrum& spectrum,
                     std::optional<std::size_t> expected_count = std::nullopt);

/// Distance on the circle of circumference fs.
double circular_distance(double a, double b, double fs);

/// Sum over truths of the squared distance to the nearest estimate. A truth with
/// no estimate at all costs (fs / 2)^2.
double matched_squared_error(std::span<const double> truths, std::span<const double> estimates,
                             double fs);

struct TrialResult {
  std::size_t index = 0;
  std::vector<double> truth;
  std::vector<double> estimated;
  double squared_error = 0.0;
  double wall_time_s = 0.0;
  bool failed = false;
  std::string failure;
};

/// (1 / fs) sqrt(sum_j sum_i (f_hat - f)^2 / sum_j I_j) over the non-failed
/// trials. Throws Error(EmptyTrials) when there are none.
double relative_rmse(std::span<const TrialResult> trials, double fs);

enum class SweepAxis { SnrDb, P, DelaySamples };

const char* to_string(SweepAxis axis) noexcept;
std::optional<SweepAxis> parse_sweep_axis(const std::string& name);

enum class SignalKind { Mp, Bpsk };

struct SweepConfig {
  SweepAxis axis = SweepAxis::SnrDb;
  std::vector<double> grid;
  std::size_t trials = 100;
  CoprimeScheme scheme = CoprimeScheme::make(3, 4, 300, 1, 32e9);
  SignalKind signal = SignalKind::Mp;
  std::size_t components = 18;
  double band_lo = 2e9;
  double band_hi = 18e9;
  double symbol_rate = 1e6;
  std::optional<double> snr_db = 0.0;   // used when the axis is not SNR
  std::int64_t delay_samples = 0;       // used when the axis is not delay
  std::optional<double> delta_f;        // default window when unset
  std::uint64_t base_seed = 1;
  bool known_count = true;              // fixed-count peak picking
  unsigned threads = 0;                 // 0: hardware concurrency
};

struct SweepRow {
  double axis_value = 0.0;
  double rmse = 0.0;
  double mean_time_s = 0.0;
  std::size_t trials = 0;
  std::size_t failed = 0;
};

/// Runs `trials` independent trials at one grid value. Trial j uses seed
/// base_seed + j at every grid point, so points share signal draws.
std::vector<TrialResult> run_trials(const SweepConfig& config, double axis_value);

std::vector<SweepRow> monte_carlo_sweep(const SweepConfig& config);

struct TimingRow {
  std::int64_t p = 0;
  std::int64_t N = 0;
  std::int64_t M = 0;
  double fast_s = 0.0;
  double oracle_s = 0.0;   // 0 when skipped
};

struct TimingConfig {
  CoprimeScheme scheme = CoprimeScheme::make(3, 4, 1000, 1, 32e9);
  std::vector<std::int64_t> p_grid;
  double lag_fraction = 0.1;   // M = max(1, floor(N * lag_fraction))
  std::size_t repeats = 5;
  bool run_oracle = true;
  std::uint64_t seed = 1;
};

/// Median-of-`repeats` wall times of the fast path (sensing autocorrelation
/// precomputed) and of the direct oracle on the same capture. Sequential.
std::vector<TimingRow> time_benchmark(const TimingConfig& config);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

/// Edges (Hz) of the widest circular run of bins whose smoothed magnitude
/// exceeds floor + fraction * (top - floor), floor and top being the 10th and
/// 90th percentiles.
std::pair<double, double> occupied_band(const PowerSpectrum& spectrum, double fraction = 0.25);

}  // namespace cpsense
