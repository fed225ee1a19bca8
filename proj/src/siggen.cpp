#include "cpsense/siggen.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace cpsense {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_frequency(double f, double fs) {
  if (!(f >= 0.0 && f < fs)) {
    throw Error(ErrorCode::FrequencyOutOfBand,
                fmt::format("frequency {} Hz outside [0, {})", f, fs));
  }
}

// exp(j 2 pi cycles) with cycles reduced to [0, 1) first, so large sample
// indices do not eat into the phase precision.
cplx unit_phasor(double cycles, double phase) {
  const double frac = cycles - std::floor(cycles);
  return std::polar(1.0, kTwoPi * frac + phase);
}

std::size_t frame_size(const CoprimeScheme& scheme) {
  return static_cast<std::size_t>(scheme.frame_length());
}

}  // namespace

NyquistFrame gen_mp(std::span<const ToneSpec> tones, const CoprimeScheme& scheme,
                    std::int64_t first_sample) {
  NyquistFrame frame{CVector(frame_size(scheme)), scheme.fs()};
  for (const auto& tone : tones) {
    check_frequency(tone.frequency, scheme.fs());
    const double norm_f = tone.frequency / scheme.fs();
    for (std::size_t n = 0; n < frame.x.size(); ++n) {
      // f n / fs is reduced mod 1 exactly enough for n up to ~1e9.
      const double t = static_cast<double>(first_sample + static_cast<std::int64_t>(n));
      frame.x[n] += tone.amplitude * unit_phasor(std::fmod(norm_f * t, 1.0), tone.phase);
    }
  }
  return frame;
}

NyquistFrame gen_bpsk(const BpskSpec& spec, const CoprimeScheme& scheme,
                      std::int64_t first_sample) {
  const double fs = scheme.fs();
  check_frequency(spec.carrier, fs);
  if (!(spec.symbol_rate > 0.0)) {
    throw Error(ErrorCode::NonPositiveParameter, "symbol rate must be positive");
  }
  if (spec.symbol_rate >= fs) {
    throw Error(ErrorCode::SymbolRateTooHigh,
                fmt::format("symbol rate {} >= fs {}", spec.symbol_rate, fs));
  }
  if (spec.code.empty()) throw Error(ErrorCode::InvalidConfig, "BPSK code is empty");

  const double samples_per_symbol = fs / spec.symbol_rate;
  // Symbol k covers samples [round(k T), round((k + 1) T)).
  auto boundary = [&](std::int64_t k) {
    return std::llround(static_cast<double>(k) * samples_per_symbol);
  };
  NyquistFrame frame{CVector(frame_size(scheme)), fs};
  const double norm_f = spec.carrier / fs;
  const std::int64_t t0 = first_sample;
  std::int64_t k = static_cast<std::int64_t>(std::floor(static_cast<double>(t0) /
                                                        samples_per_symbol));
  while (k > 0 && boundary(k) > t0) --k;
  while (boundary(k + 1) <= t0) ++k;
  for (std::size_t n = 0; n < frame.x.size(); ++n) {
    const std::int64_t t = t0 + static_cast<std::int64_t>(n);
    while (boundary(k + 1) <= t) ++k;
    const auto bit = spec.code[static_cast<std::size_t>(k) % spec.code.size()];
    const double sign = bit ? -1.0 : 1.0;
    frame.x[n] = sign * spec.amplitude *
                 unit_phasor(std::fmod(norm_f * static_cast<double>(t), 1.0), spec.phase);
  }
  return frame;
}

NyquistFrame gen_lfm(const LfmSpec& spec, const CoprimeScheme& scheme,
                     std::int64_t first_sample) {
  const double fs = scheme.fs();
  if (!(spec.duration > 0.0)) {
    throw Error(ErrorCode::NonPositiveParameter, "LFM duration must be positive");
  }
  const std::size_t n_samples = frame_size(scheme);
  const double rate = spec.bandwidth / spec.duration;   // Hz / s
  auto inst_freq = [&](std::int64_t t) {
    return spec.start_frequency + rate * static_cast<double>(t) / fs;
  };
  const double f_first = inst_freq(first_sample);
  const double f_last = inst_freq(first_sample + static_cast<std::int64_t>(n_samples) - 1);
  for (double f : {f_first, f_last}) {
    if (!(f >= 0.0 && f < fs)) {
      throw Error(ErrorCode::SweepOutOfBand,
                  fmt::format("sweep reaches {} Hz, outside [0, {})", f, fs));
    }
  }

  NyquistFrame frame{CVector(n_samples), fs};
  const double lin = spec.start_frequency / fs;        // cycles per sample
  const double quad = rate / (2.0 * fs * fs);          // cycles per sample^2
  for (std::size_t n = 0; n < n_samples; ++n) {
    const double t = static_cast<double>(first_sample + static_cast<std::int64_t>(n));
    const double cycles = std::fmod(lin * t, 1.0) + std::fmod(quad * t * t, 1.0);
    frame.x[n] = spec.amplitude * unit_phasor(cycles, spec.phase);
  }
  return frame;
}

NyquistFrame synthesize(std::span<const ComponentSpec> components, const CoprimeScheme& scheme,
                        std::int64_t first_sample) {
  NyquistFrame out{CVector(frame_size(scheme)), scheme.fs()};
  for (const auto& component : components) {
    const NyquistFrame part = std::visit(
        [&](const auto& spec) -> NyquistFrame {
          using T = std::decay_t<decltype(spec)>;
          if constexpr (std::is_same_v<T, ToneSpec>) {
            return gen_mp(std::span<const ToneSpec>(&spec, 1), scheme, first_sample);
          } else if constexpr (std::is_same_v<T, BpskSpec>) {
            return gen_bpsk(spec, scheme, first_sample);
          } else {
            return gen_lfm(spec, scheme, first_sample);
          }
        },
        component);
    for (std::size_t n = 0; n < out.x.size(); ++n) out.x[n] += part.x[n];
  }
  return out;
}

double mean_power(std::span<const cplx> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& v : x) acc += std::norm(v);
  return acc / static_cast<double>(x.size());
}

NyquistFrame add_awgn(const NyquistFrame& frame, const NoiseSpec& noise) {
  if (!noise.snr_db || std::isinf(*noise.snr_db)) return frame;
  const double signal_power = mean_power(frame.x);
  if (!(signal_power > 0.0)) {
    throw Error(ErrorCode::ZeroSignalPower, "cannot calibrate SNR against a zero frame");
  }
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  CVector w(frame.x.size());
  for (auto& v : w) v = cplx(gauss(rng), gauss(rng));
  const double raw_power = mean_power(w);
  const double target = signal_power / std::pow(10.0, *noise.snr_db / 10.0);
  const double scale = raw_power > 0.0 ? std::sqrt(target / raw_power) : 0.0;

  NyquistFrame out = frame;
  for (std::size_t n = 0; n < out.x.size(); ++n) out.x[n] += scale * w[n];
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<ToneSpec> random_tones(std::size_t count, double lo, double hi,
                                   std::mt19937_64& rng) {
  std::uniform_real_distribution<double> freq(lo, hi);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::vector<ToneSpec> tones(count);
  for (auto& t : tones) {
    t.frequency = freq(rng);
    t.phase = phase(rng);
  }
  return tones;
}

std::vector<BpskSpec> random_bpsk(std::size_t count, double lo, double hi, double symbol_rate,
                                  double fs, std::int64_t samples, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> freq(lo, hi);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::bernoulli_distribution bit(0.5);
  const auto n_symbols =
      static_cast<std::size_t>(std::ceil(static_cast<double>(samples) * symbol_rate / fs)) + 1;
  std::vector<BpskSpec> out(count);
  for (auto& b : out) {
    b.carrier = freq(rng);
    b.symbol_rate = symbol_rate;
    b.phase = phase(rng);
    b.code.resize(n_symbols);
    for (auto& c : b.code) c = bit(rng) ? 1 : 0;
  }
  return out;
}

double fold_to_real_band(double f, double fs) {
  double r = std::fmod(f, fs);
  if (r < 0) r += fs;
  return r > fs / 2.0 ? fs - r : r;
}

NyquistFrame to_real(const NyquistFrame& frame) {
  NyquistFrame out = frame;
  for (auto& v : out.x) v = cplx(2.0 * v.real(), 0.0);
  return out;
}

}  // namespace cpsense
