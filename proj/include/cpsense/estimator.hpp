#pragma once

// Fast power-spectrum reconstruction from a coprime capture.
//
// Pipeline: zero-pad the sensing vector a and the capture y to 2N, take their
// linear autocorrelations through |FFT|^2 -> IFFT (scaled by 1/N), keep lags
// -M+1..M-1, divide r_y by r_a lag by lag and take the magnitude of the
// (2M-1)-point FFT of the quotient. r_a depends only on the scheme and can be
// computed once (see SensingCache).

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "cpsense/coprime.hpp"

namespace cpsense {

/// Lags -M+1..M-1 retained from the full-length correlation.
struct LagWindow {
  std::int64_t M = 1;
  double delta_f = 0.0;   // nominal frequency resolution, Hz
  double fs = 1.0;

  /// M = ceil(fs / 2 / delta_f) + 1.
  static LagWindow from_resolution(double fs, double delta_f);
  /// Window with an explicit lag count; delta_f = fs / (2 (M - 1)).
  static LagWindow from_lag_count(double fs, std::int64_t M);
  /// Default used by the CLI and sweeps: M = min(N / 4, 4097), at least 1.
  static LagWindow default_for(const CoprimeScheme& scheme);

  std::int64_t lag_count() const noexcept { return 2 * M - 1; }

  friend bool operator==(const LagWindow& a, const LagWindow& b) {
    return a.M == b.M && a.fs == b.fs;
  }
};

enum class AutocorrKind { Sensing, Capture, Input };

const char* to_string(AutocorrKind kind) noexcept;

/// Autocorrelation values on lags -M+1..M-1, ascending.
struct AutocorrSeq {
  CVector values;
  LagWindow window;
  AutocorrKind kind = AutocorrKind::Capture;
  std::int64_t frame_length = 0;   // N used in the 1/N normalization

  std::int64_t min_lag() const noexcept { return 1 - window.M; }
  cplx at(std::int64_t lag) const { return values.at(static_cast<std::size_t>(lag - min_lag())); }
};

struct PowerSpectrum {
  std::vector<double> magnitudes;   // 2M-1 bins
  double fs = 1.0;

  std::size_t bins() const noexcept { return magnitudes.size(); }
  double bin_width() const noexcept { return fs / static_cast<double>(magnitudes.size()); }
  /// Bin i sits at i * fs / (2M-1), read modulo fs.
  double frequency(std::size_t bin) const noexcept {
    return static_cast<double>(bin) * bin_width();
  }
};

/// FFT length used for the correlation stage.
enum class FftLength {
  Exact,      // exactly 2N
  FastPadded  // smallest 7-smooth length >= 2N; truncated lags are unchanged
};

enum class CoverageMode {
  ZeroFill,   // uncovered lags become 0 and are flagged in the mask
  Strict      // any uncovered lag inside the window raises UncoveredLag
};

CVector zero_pad_double(std::span<const cplx> v);
CVector zero_pad_double(std::span<const std::uint8_t> mask);

/// r'[k] = IFFT(|FFT(v)|^2)[k] / N over the padded length L = v.size().
/// Positive lags sit at k = m, negative lags at k = L + m.
CVector fft_autocorr(std::span<const cplx> padded, std::int64_t N);

/// Extracts lags -M+1..M-1 from a full-length circular sequence. Throws
/// Error(WindowTooWide) when M > N.
AutocorrSeq truncate_lags(std::span<const cplx> rfull, const LagWindow& window, std::int64_t N,
                          AutocorrKind kind);

/// Autocorrelation of the sensing vector. Values are snapped to k / N, k the
/// number of sample pairs at that lag, so N * r_a is integral.
AutocorrSeq sensing_autocorr(const CoprimeScheme& scheme, const LagWindow& window,
                             FftLength length = FftLength::Exact);

/// Autocorrelation of an arbitrary length-N sequence through the FFT path.
AutocorrSeq fast_autocorr(std::span<const cplx> v, const LagWindow& window,
                          AutocorrKind kind = AutocorrKind::Capture,
                          FftLength length = FftLength::Exact);

/// Per-lag pair counts N * r_a[m] of a sensing autocorrelation.
std::vector<std::int64_t> pair_counts(const AutocorrSeq& ra);

struct Reconstruction {
  AutocorrSeq rx;
  std::vector<std::uint8_t> covered;   // 1 where at least one sample pair exists
};

/// r_x[m] = r_y[m] / r_a[m] on covered lags. Throws LagWindowMismatch,
/// AllLagsUncovered, or (strict mode) UncoveredLag.
Reconstruction reconstruct_autocorr(const AutocorrSeq& ry, const AutocorrSeq& ra,
                                    CoverageMode mode = CoverageMode::ZeroFill);

/// |FFT_{2M-1}(r_x)|. The lag vector's circular ordering only changes phases.
PowerSpectrum power_spectrum(const AutocorrSeq& rx);

struct EstimateOptions {
  CoverageMode coverage = CoverageMode::ZeroFill;
  FftLength fft_length = FftLength::Exact;
  /// Precomputed sensing autocorrelation for the same scheme and window.
  std::shared_ptr<const AutocorrSeq> sensing;
};

struct Estimate {
  AutocorrSeq ry;
  Reconstruction reconstruction;
  PowerSpectrum spectrum;
};

Estimate estimate(const SparseCapture& capture, const CoprimeScheme& scheme,
                  const LagWindow& window, const EstimateOptions& options = {});

/// Masks the frame with the scheme's sensing vector, then estimates.
Estimate estimate(const NyquistFrame& frame, const CoprimeScheme& scheme,
                  const LagWindow& window, const EstimateOptions& options = {});

/// Brute-force r[m] = (1/N) sum_n v[n] conj(v[n-m]), O(N M).
AutocorrSeq direct_autocorr_oracle(std::span<const cplx> v, const LagWindow& window,
                                   AutocorrKind kind = AutocorrKind::Capture);

}  // namespace cpsense
