#include "cpsense/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "cpsense/error.hpp"
#include "cpsense/siggen.hpp"

namespace cpsense {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(v.size() - 1)));
  return v[idx];
}

}  // namespace

PeakSet detect_peaks(const PowerSpectrum& spectrum, std::optional<std::size_t> expected_count) {
  const auto& s = spectrum.magnitudes;
  PeakSet out;
  if (s.empty()) return out;
  const double med = median_of(s);
  std::vector<double> dev(s.size());
  std::transform(s.begin(), s.end(), dev.begin(), [med](double v) { return std::abs(v - med); });
  out.threshold = med + 6.0 * median_of(std::move(dev));

  const std::size_t L = s.size();
  for (std::size_t i = 0; i < L; ++i) {
    if (!(s[i] > out.threshold)) continue;
    if (L > 1) {
      const double left = s[(i + L - 1) % L];
      const double right = s[(i + 1) % L];
      if (!(s[i] > left && s[i] > right)) continue;
    }
    out.peaks.push_back({i, spectrum.frequency(i), s[i]});
  }
  std::stable_sort(out.peaks.begin(), out.peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.magnitude > b.magnitude; });
  if (expected_count && out.peaks.size() > *expected_count) out.peaks.resize(*expected_count);
  return out;
}

double circular_distance(double a, double b, double fs) {
  double d = std::fmod(std::abs(a - b), fs);
  return std::min(d, fs - d);
}

double matched_squared_error(std::span<const double> truths, std::span<const double> estimates,
                             double fs) {
  double total = 0.0;
  for (double f : truths) {
    double best = fs / 2.0;
    for (double g : estimates) best = std::min(best, circular_distance(f, g, fs));
    total += best * best;
  }
  return total;
}

double relative_rmse(std::span<const TrialResult> trials, double fs) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& t : trials) {
    if (t.failed) continue;
    sum += t.squared_error;
    count += t.truth.size();
  }
  if (count == 0) throw Error(ErrorCode::EmptyTrials, "no completed trial to score");
  return std::sqrt(sum / static_cast<double>(count)) / fs;
}

const char* to_string(SweepAxis axis) noexcept {
  switch (axis) {
    case SweepAxis::SnrDb: return "snr_db";
    case SweepAxis::P: return "p";
    case SweepAxis::DelaySamples: return "delay_samples";
  }
  return "unknown";
}

std::optional<SweepAxis> parse_sweep_axis(const std::string& name) {
  for (auto axis : {SweepAxis::SnrDb, SweepAxis::P, SweepAxis::DelaySamples})
    if (name == to_string(axis)) return axis;
  return std::nullopt;
}

std::vector<TrialResult> run_trials(const SweepConfig& config, double axis_value) {
  if (config.trials == 0) throw Error(ErrorCode::InvalidConfig, "trials must be >= 1");

  CoprimeScheme scheme = config.scheme;
  std::optional<double> snr_db = config.snr_db;
  std::int64_t delay = config.delay_samples;
  switch (config.axis) {
    case SweepAxis::SnrDb: snr_db = axis_value; break;
    case SweepAxis::P: scheme = scheme.with_p(std::llround(axis_value)); break;
    case SweepAxis::DelaySamples: delay = std::llround(axis_value); break;
  }
  const LagWindow window = config.delta_f
                               ? LagWindow::from_resolution(scheme.fs(), *config.delta_f)
                               : LagWindow::default_for(scheme);
  EstimateOptions options;
  options.sensing = std::make_shared<const AutocorrSeq>(sensing_autocorr(scheme, window));
  const SensingVector sv = sensing_vector(scheme);

  std::vector<TrialResult> results(config.trials);
  auto run_one = [&](std::size_t j) {
    TrialResult& r = results[j];
    r.index = j;
    try {
      const std::uint64_t seed = config.base_seed + j;
      std::mt19937_64 rng(derive_seed(seed, 0));
      NyquistFrame clean;
      if (config.signal == SignalKind::Mp) {
        const auto tones = random_tones(config.components, config.band_lo, config.band_hi, rng);
        for (const auto& t : tones) r.truth.push_back(t.frequency);
        clean = apply_delay([&](std::int64_t d) { return gen_mp(tones, scheme, d); }, delay);
      } else {
        const auto emitters =
            random_bpsk(config.components, config.band_lo, config.band_hi, config.symbol_rate,
                        scheme.fs(), scheme.frame_length() + delay, rng);
        std::vector<ComponentSpec> parts(emitters.begin(), emitters.end());
        for (const auto& e : emitters) r.truth.push_back(e.carrier);
        clean = apply_delay([&](std::int64_t d) { return synthesize(parts, scheme, d); }, delay);
      }
      const NyquistFrame noisy = add_awgn(clean, {snr_db, derive_seed(seed, 1)});

      const auto t0 = Clock::now();
      const Estimate est = estimate(apply_sampling(noisy, sv), scheme, window, options);
      const PeakSet peaks =
          detect_peaks(est.spectrum, config.known_count
                                         ? std::optional<std::size_t>(config.components)
                                         : std::nullopt);
      r.wall_time_s = seconds_since(t0);
      for (const auto& pk : peaks.peaks) r.estimated.push_back(pk.frequency);
      r.squared_error = matched_squared_error(r.truth, r.estimated, scheme.fs());
    } catch (const Error& e) {
      r.failed = true;
      r.failure = e.what();
    }
  };

  unsigned n_threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(config.trials)));
  if (n_threads == 1) {
    for (std::size_t j = 0; j < config.trials; ++j) run_one(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < n_threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t j = next++; j < config.trials; j = next++) run_one(j);
      });
    }
  }
  return results;
}

std::vector<SweepRow> monte_carlo_sweep(const SweepConfig& config) {
  if (config.grid.empty()) throw Error(ErrorCode::InvalidConfig, "sweep grid is empty");
  std::vector<SweepRow> rows;
  rows.reserve(config.grid.size());
  for (double value : config.grid) {
    const auto trials = run_trials(config, value);
    SweepRow row;
    row.axis_value = value;
    row.trials = trials.size();
    double time_sum = 0.0;
    for (const auto& t : trials) {
      if (t.failed) {
        ++row.failed;
      } else {
        time_sum += t.wall_time_s;
      }
    }
    if (row.failed == row.trials) {
      throw Error(ErrorCode::EmptyTrials,
                  fmt::format("all {} trials failed at {}={}: {}", row.trials,
                              to_string(config.axis), value, trials.front().failure));
    }
    row.rmse = relative_rmse(trials, config.scheme.fs());
    row.mean_time_s = time_sum / static_cast<double>(row.trials - row.failed);
    rows.push_back(row);
  }
  return rows;
}

std::vector<TimingRow> time_benchmark(const TimingConfig& config) {
  std::vector<TimingRow> rows;
  const std::size_t repeats = std::max<std::size_t>(1, config.repeats);
  for (std::int64_t p : config.p_grid) {
    const CoprimeScheme scheme = config.scheme.with_p(p);
    const std::int64_t N = scheme.frame_length();
    const auto M = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::floor(static_cast<double>(N) * config.lag_fraction)));
    const LagWindow window = LagWindow::from_lag_count(scheme.fs(), M);

    std::mt19937_64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(p)));
    const auto tones = random_tones(10, 2e9 / 32e9 * scheme.fs(), 18e9 / 32e9 * scheme.fs(), rng);
    const NyquistFrame frame =
        add_awgn(gen_mp(tones, scheme), {0.0, derive_seed(config.seed, 1000 + p)});
    const SparseCapture capture = apply_sampling(frame, sensing_vector(scheme));

    EstimateOptions options;
    options.sensing = std::make_shared<const AutocorrSeq>(sensing_autocorr(scheme, window));
    // Warm-up so FFT planning is not charged to the first repeat.
    (void)estimate(capture, scheme, window, options);

    TimingRow row{p, N, M, 0.0, 0.0};
    std::vector<double> fast, oracle;
    for (std::size_t k = 0; k < repeats; ++k) {
      const auto t0 = Clock::now();
      const Estimate est = estimate(capture, scheme, window, options);
      fast.push_back(seconds_since(t0));
      if (est.spectrum.bins() == 0) throw Error(ErrorCode::InvalidConfig, "empty spectrum");
    }
    row.fast_s = median_of(fast);
    if (config.run_oracle) {
      for (std::size_t k = 0; k < repeats; ++k) {
        const auto t0 = Clock::now();
        const AutocorrSeq r = direct_autocorr_oracle(capture.y, window);
        oracle.push_back(seconds_since(t0));
        if (r.values.empty()) throw Error(ErrorCode::InvalidConfig, "empty oracle output");
      }
      row.oracle_s = median_of(oracle);
    }
    rows.push_back(row);
  }
  return rows;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

std::pair<double, double> occupied_band(const PowerSpectrum& spectrum, double fraction) {
  const auto& s = spectrum.magnitudes;
  const std::size_t L = s.size();
  if (L == 0) return {0.0, 0.0};
  const std::size_t half = std::max<std::size_t>(1, L / 512);
  std::vector<double> smooth(L);
  for (std::size_t i = 0; i < L; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k <= 2 * half; ++k) acc += s[(i + L + k - half) % L];
    smooth[i] = acc / static_cast<double>(2 * half + 1);
  }
  const double floor = percentile(smooth, 0.10);
  const double top = percentile(smooth, 0.90);
  const double level = floor + fraction * (top - floor);

  std::size_t best_len = 0, best_start = 0, run = 0;
  for (std::size_t i = 0; i < 2 * L; ++i) {
    if (smooth[i % L] > level) {
      ++run;
      if (run > best_len && run <= L) {
        best_len = run;
        best_start = i + 1 - run;
      }
    } else {
      run = 0;
    }
  }
  if (best_len == 0) return {0.0, 0.0};
  if (best_len == L) return {0.0, spectrum.fs};
  return {spectrum.frequency(best_start % L),
          spectrum.frequency((best_start + best_len - 1) % L)};
}

}  // namespace cpsense
