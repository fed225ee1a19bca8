#pragma once

// Generalized coprime sampling geometry: two uniform sub-Nyquist channels with
// undersampling factors r0 < r1 (coprime), repeated p times, with the second
// channel offset by q periods of r0*r1 Nyquist samples.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace cpsense {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

class CoprimeScheme {
 public:
  /// Validates and builds a scheme. Throws Error(NotCoprime | OrderViolation |
  /// NonPositiveParameter).
  static CoprimeScheme make(std::int64_t r0, std::int64_t r1, std::int64_t p, std::int64_t q,
                            double fs_hz);

  std::int64_t r0() const noexcept { return r0_; }
  std::int64_t r1() const noexcept { return r1_; }
  std::int64_t p() const noexcept { return p_; }
  std::int64_t q() const noexcept { return q_; }
  double fs() const noexcept { return fs_; }
  double ts() const noexcept { return 1.0 / fs_; }

  /// Frame length (p + q) * r0 * r1.
  std::int64_t frame_length() const noexcept { return (p_ + q_) * r0_ * r1_; }

  /// Same geometry with a different repetition count.
  CoprimeScheme with_p(std::int64_t p) const { return make(r0_, r1_, p, q_, fs_); }

  friend bool operator==(const CoprimeScheme&, const CoprimeScheme&) = default;

 private:
  CoprimeScheme(std::int64_t r0, std::int64_t r1, std::int64_t p, std::int64_t q, double fs)
      : r0_(r0), r1_(r1), p_(p), q_(q), fs_(fs) {}

  std::int64_t r0_;
  std::int64_t r1_;
  std::int64_t p_;
  std::int64_t q_;
  double fs_;
};

inline CoprimeScheme validate_scheme(std::int64_t r0, std::int64_t r1, std::int64_t p,
                                     std::int64_t q, double fs_hz) {
  return CoprimeScheme::make(r0, r1, p, q, fs_hz);
}

/// Sorted, duplicate-free Nyquist-grid indices at which either channel samples.
std::vector<std::int64_t> sample_positions(const CoprimeScheme& scheme);

/// Positions of one channel alone (0 or 1), ascending.
std::vector<std::int64_t> channel_positions(const CoprimeScheme& scheme, int channel);

struct SensingVector {
  std::vector<std::uint8_t> mask;        // length N, 1 on sampled instants
  std::vector<std::int64_t> positions;   // support of mask, ascending

  std::size_t size() const noexcept { return mask.size(); }
};

SensingVector sensing_vector(const CoprimeScheme& scheme);

struct NyquistFrame {
  CVector x;
  double fs = 1.0;
};

struct SparseCapture {
  CVector y;                             // zero off the position set
  std::vector<std::int64_t> positions;
  double fs = 1.0;
};

/// y = a .* x. Throws Error(LengthMismatch) when the frame and mask lengths differ.
SparseCapture apply_sampling(const NyquistFrame& frame, const SensingVector& sv);

}  // namespace cpsense
