#pragma once

// Nyquist-rate test signals: complex tones (MP), rectangular BPSK and linear
// FM chirps, plus calibrated complex white noise.
//
// Signals are analytic (complex): a component at f in [0, fs) occupies a single
// spectral line, so a [2, 18] GHz scene at fs = 32 GHz is representable. A real
// signal at f shows up at both f and fs - f; see fold_to_real_band / to_real.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "cpsense/coprime.hpp"
#include "cpsense/error.hpp"

namespace cpsense {

struct ToneSpec {
  double frequency = 0.0;   // Hz
  double amplitude = 1.0;
  double phase = 0.0;       // rad
};

struct BpskSpec {
  double carrier = 0.0;                // Hz
  double symbol_rate = 1.0;            // symbols / s
  std::vector<std::uint8_t> code;      // bit k flips symbol k; repeats when exhausted
  double amplitude = 1.0;
  double phase = 0.0;
};

struct LfmSpec {
  double start_frequency = 0.0;   // Hz
  double bandwidth = 0.0;         // Hz swept over `duration`; negative for a down-chirp
  double duration = 1.0;          // s
  double amplitude = 1.0;
  double phase = 0.0;
};

using ComponentSpec = std::variant<ToneSpec, BpskSpec, LfmSpec>;

struct NoiseSpec {
  std::optional<double> snr_db;   // nullopt: noiseless
  std::uint64_t seed = 0;
};

/// x[n] = sum_i A_i exp(j (2 pi f_i (n + first_sample) / fs + phi_i)), n in [0, N).
NyquistFrame gen_mp(std::span<const ToneSpec> tones, const CoprimeScheme& scheme,
                    std::int64_t first_sample = 0);

NyquistFrame gen_bpsk(const BpskSpec& spec, const CoprimeScheme& scheme,
                      std::int64_t first_sample = 0);

NyquistFrame gen_lfm(const LfmSpec& spec, const CoprimeScheme& scheme,
                     std::int64_t first_sample = 0);

/// Sum of arbitrary components.
NyquistFrame synthesize(std::span<const ComponentSpec> components, const CoprimeScheme& scheme,
                        std::int64_t first_sample = 0);

/// Adds circular complex Gaussian noise scaled so that mean|x|^2 / mean|w|^2
/// equals the requested SNR on this frame.
NyquistFrame add_awgn(const NyquistFrame& frame, const NoiseSpec& noise);

/// Frame starting `delay` samples later, x[n + d], for a generator taking the
/// first sample index. The sensing vector is not shifted.
template <typename Generator>
NyquistFrame apply_delay(Generator&& generator, std::int64_t delay) {
  if (delay < 0) throw Error(ErrorCode::NonPositiveParameter, "delay must be >= 0");
  return generator(delay);
}

/// Mean |x|^2.
double mean_power(std::span<const cplx> x);

/// Independent 64-bit stream seed from a base seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// I tones, frequencies uniform in [lo, hi), unit amplitude, phases uniform in [0, 2 pi).
std::vector<ToneSpec> random_tones(std::size_t count, double lo, double hi, std::mt19937_64& rng);

/// BPSK emitters with uniform carriers in [lo, hi) and random codes long enough
/// to cover `samples` Nyquist samples.
std::vector<BpskSpec> random_bpsk(std::size_t count, double lo, double hi, double symbol_rate,
                                  double fs, std::int64_t samples, std::mt19937_64& rng);

/// Where a real-valued component at f lands inside [0, fs / 2].
double fold_to_real_band(double f, double fs);

/// Real part of the frame, scaled by 2 so each of the two mirrored lines keeps
/// the original amplitude.
NyquistFrame to_real(const NyquistFrame& frame);

}  // namespace cpsense
