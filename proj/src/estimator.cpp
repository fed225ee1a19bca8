#include "cpsense/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cpsense/error.hpp"
#include "cpsense/fft.hpp"

namespace cpsense {

LagWindow LagWindow::from_resolution(double fs, double delta_f) {
  if (!(fs > 0.0) || !(delta_f > 0.0)) {
    throw Error(ErrorCode::NonPositiveParameter,
                fmt::format("fs={} and delta_f={} must be positive", fs, delta_f));
  }
  double ratio = fs / 2.0 / delta_f;
  // fs / 2 / (fs / (2k)) may land a few ulps above k; ceil must not bump it to k + 1.
  if (const double nearest = std::round(ratio); std::abs(ratio - nearest) <= 1e-9 * nearest) {
    ratio = nearest;
  }
  if (ratio > 1e15) throw Error(ErrorCode::WindowTooWide, "delta_f too small");
  LagWindow w;
  w.M = static_cast<std::int64_t>(std::ceil(ratio)) + 1;
  w.delta_f = delta_f;
  w.fs = fs;
  return w;
}

LagWindow LagWindow::from_lag_count(double fs, std::int64_t M) {
  if (M < 1 || !(fs > 0.0)) {
    throw Error(ErrorCode::NonPositiveParameter, fmt::format("M={} fs={}", M, fs));
  }
  LagWindow w;
  w.M = M;
  w.fs = fs;
  w.delta_f = M > 1 ? fs / (2.0 * static_cast<double>(M - 1))
                    : std::numeric_limits<double>::infinity();
  return w;
}

LagWindow LagWindow::default_for(const CoprimeScheme& scheme) {
  const std::int64_t M = std::max<std::int64_t>(1, std::min<std::int64_t>(
                                                       scheme.frame_length() / 4, 4097));
  return from_lag_count(scheme.fs(), M);
}

const char* to_string(AutocorrKind kind) noexcept {
  switch (kind) {
    case AutocorrKind::Sensing: return "sensing";
    case AutocorrKind::Capture: return "capture";
    case AutocorrKind::Input: return "input";
  }
  return "unknown";
}

CVector zero_pad_double(std::span<const cplx> v) {
  CVector out(2 * v.size());
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

CVector zero_pad_double(std::span<const std::uint8_t> mask) {
  CVector out(2 * mask.size());
  for (std::size_t n = 0; n < mask.size(); ++n) out[n] = mask[n] ? 1.0 : 0.0;
  return out;
}

CVector fft_autocorr(std::span<const cplx> padded, std::int64_t N) {
  CVector spec = fft::forward(padded);
  for (auto& c : spec) c = std::norm(c);
  CVector r = fft::backward(spec);
  const double scale = 1.0 / (static_cast<double>(padded.size()) * static_cast<double>(N));
  for (auto& c : r) c *= scale;
  return r;
}

AutocorrSeq truncate_lags(std::span<const cplx> rfull, const LagWindow& window, std::int64_t N,
                          AutocorrKind kind) {
  if (window.M > N) {
    throw Error(ErrorCode::WindowTooWide, fmt::format("M={} exceeds N={}", window.M, N));
  }
  const auto L = static_cast<std::int64_t>(rfull.size());
  if (L < 2 * N - 1) {
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("correlation length {} is shorter than 2N-1={}", L, 2 * N - 1));
  }
  AutocorrSeq out;
  out.window = window;
  out.kind = kind;
  out.frame_length = N;
  out.values.resize(static_cast<std::size_t>(window.lag_count()));
  for (std::int64_t m = 1 - window.M; m < window.M; ++m) {
    const std::int64_t k = m >= 0 ? m : L + m;
    out.values[static_cast<std::size_t>(m - out.min_lag())] = rfull[static_cast<std::size_t>(k)];
  }
  return out;
}

namespace {

std::size_t correlation_length(std::int64_t N, FftLength length) {
  const auto exact = static_cast<std::size_t>(2 * N);
  return length == FftLength::Exact ? exact : fft::next_fast_length(exact);
}

CVector padded_copy(std::span<const cplx> v, std::size_t L) {
  CVector out(L);
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

}  // namespace

AutocorrSeq fast_autocorr(std::span<const cplx> v, const LagWindow& window, AutocorrKind kind,
                          FftLength length) {
  const auto N = static_cast<std::int64_t>(v.size());
  if (window.M > N) {
    throw Error(ErrorCode::WindowTooWide, fmt::format("M={} exceeds N={}", window.M, N));
  }
  const CVector padded = length == FftLength::Exact
                             ? zero_pad_double(v)
                             : padded_copy(v, correlation_length(N, length));
  return truncate_lags(fft_autocorr(padded, N), window, N, kind);
}

AutocorrSeq sensing_autocorr(const CoprimeScheme& scheme, const LagWindow& window,
                             FftLength length) {
  const SensingVector sv = sensing_vector(scheme);
  CVector a(sv.mask.size());
  for (std::size_t n = 0; n < a.size(); ++n) a[n] = sv.mask[n] ? 1.0 : 0.0;
  AutocorrSeq ra = fast_autocorr(a, window, AutocorrKind::Sensing, length);
  const auto N = static_cast<double>(scheme.frame_length());
  for (auto& v : ra.values) v = std::round(v.real() * N) / N;
  return ra;
}

std::vector<std::int64_t> pair_counts(const AutocorrSeq& ra) {
  std::vector<std::int64_t> counts(ra.values.size());
  const auto N = static_cast<double>(ra.frame_length);
  for (std::size_t i = 0; i < counts.size(); ++i)
    counts[i] = std::llround(ra.values[i].real() * N);
  return counts;
}

Reconstruction reconstruct_autocorr(const AutocorrSeq& ry, const AutocorrSeq& ra,
                                    CoverageMode mode) {
  if (!(ry.window == ra.window) || ry.frame_length != ra.frame_length ||
      ry.values.size() != ra.values.size()) {
    throw Error(ErrorCode::LagWindowMismatch,
                fmt::format("r_y has M={} N={}, r_a has M={} N={}", ry.window.M, ry.frame_length,
                            ra.window.M, ra.frame_length));
  }
  Reconstruction out;
  out.rx.window = ry.window;
  out.rx.kind = AutocorrKind::Input;
  out.rx.frame_length = ry.frame_length;
  out.rx.values.assign(ry.values.size(), cplx{});
  out.covered.assign(ry.values.size(), 0);

  // r_a is a multiple of 1/N; anything under half a pair is an empty lag.
  const auto N = static_cast<double>(ra.frame_length);
  std::size_t n_covered = 0;
  for (std::size_t i = 0; i < ry.values.size(); ++i) {
    const double pairs = ra.values[i].real() * N;
    if (pairs < 0.5) {
      if (mode == CoverageMode::Strict) {
        throw Error(ErrorCode::UncoveredLag,
                    fmt::format("lag {} has no sample pairs", ra.min_lag() +
                                                                  static_cast<std::int64_t>(i)));
      }
      continue;
    }
    out.covered[i] = 1;
    ++n_covered;
    out.rx.values[i] = ry.values[i] * (N / std::round(pairs));
  }
  if (n_covered == 0) throw Error(ErrorCode::AllLagsUncovered, "no lag in the window is covered");
  return out;
}

PowerSpectrum power_spectrum(const AutocorrSeq& rx) {
  const CVector spec = fft::forward(rx.values);
  PowerSpectrum out;
  out.fs = rx.window.fs;
  out.magnitudes.resize(spec.size());
  std::transform(spec.begin(), spec.end(), out.magnitudes.begin(),
                 [](cplx c) { return std::abs(c); });
  return out;
}

Estimate estimate(const SparseCapture& capture, const CoprimeScheme& scheme,
                  const LagWindow& window, const EstimateOptions& options) {
  if (static_cast<std::int64_t>(capture.y.size()) != scheme.frame_length()) {
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("capture has {} samples, scheme expects N={}", capture.y.size(),
                            scheme.frame_length()));
  }
  std::shared_ptr<const AutocorrSeq> ra = options.sensing;
  if (!ra) {
    ra = std::make_shared<const AutocorrSeq>(
        sensing_autocorr(scheme, window, options.fft_length));
  }
  Estimate est{fast_autocorr(capture.y, window, AutocorrKind::Capture, options.fft_length), {},
               {}};
  est.reconstruction = reconstruct_autocorr(est.ry, *ra, options.coverage);
  est.spectrum = power_spectrum(est.reconstruction.rx);
  return est;
}

Estimate estimate(const NyquistFrame& frame, const CoprimeScheme& scheme,
                  const LagWindow& window, const EstimateOptions& options) {
  return estimate(apply_sampling(frame, sensing_vector(scheme)), scheme, window, options);
}

AutocorrSeq direct_autocorr_oracle(std::span<const cplx> v, const LagWindow& window,
                                   AutocorrKind kind) {
  const auto N = static_cast<std::int64_t>(v.size());
  if (window.M > N) {
    throw Error(ErrorCode::WindowTooWide, fmt::format("M={} exceeds N={}", window.M, N));
  }
  AutocorrSeq out;
  out.window = window;
  out.kind = kind;
  out.frame_length = N;
  out.values.resize(static_cast<std::size_t>(window.lag_count()));
  const std::int64_t zero = window.M - 1;
  for (std::int64_t m = 0; m < window.M; ++m) {
    cplx acc{};
    for (std::int64_t n = m; n < N; ++n) acc += v[n] * std::conj(v[n - m]);
    acc /= static_cast<double>(N);
    out.values[static_cast<std::size_t>(zero + m)] = acc;
    out.values[static_cast<std::size_t>(zero - m)] = std::conj(acc);
  }
  return out;
}

}  // namespace cpsense
