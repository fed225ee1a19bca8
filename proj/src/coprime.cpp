#include "cpsense/coprime.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "cpsense/error.hpp"

namespace cpsense {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotCoprime: return "NotCoprime";
    case ErrorCode::OrderViolation: return "OrderViolation";
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::WindowTooWide: return "WindowTooWide";
    case ErrorCode::LagWindowMismatch: return "LagWindowMismatch";
    case ErrorCode::AllLagsUncovered: return "AllLagsUncovered";
    case ErrorCode::UncoveredLag: return "UncoveredLag";
    case ErrorCode::FrequencyOutOfBand: return "FrequencyOutOfBand";
    case ErrorCode::SymbolRateTooHigh: return "SymbolRateTooHigh";
    case ErrorCode::SweepOutOfBand: return "SweepOutOfBand";
    case ErrorCode::ZeroSignalPower: return "ZeroSignalPower";
    case ErrorCode::EmptyTrials: return "EmptyTrials";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

CoprimeScheme CoprimeScheme::make(std::int64_t r0, std::int64_t r1, std::int64_t p,
                                  std::int64_t q, double fs_hz) {
  if (r0 <= 0 || r1 <= 0 || p <= 0 || q <= 0) {
    throw Error(ErrorCode::NonPositiveParameter,
                fmt::format("r0={} r1={} p={} q={} must all be positive", r0, r1, p, q));
  }
  if (!(fs_hz > 0.0) || !std::isfinite(fs_hz)) {
    throw Error(ErrorCode::NonPositiveParameter, fmt::format("fs={} must be positive", fs_hz));
  }
  if (r0 >= r1) {
    throw Error(ErrorCode::OrderViolation, fmt::format("need r0 < r1, got {} >= {}", r0, r1));
  }
  if (std::gcd(r0, r1) != 1) {
    throw Error(ErrorCode::NotCoprime,
                fmt::format("gcd({}, {}) = {}", r0, r1, std::gcd(r0, r1)));
  }
  return CoprimeScheme(r0, r1, p, q, fs_hz);
}

std::vector<std::int64_t> channel_positions(const CoprimeScheme& s, int channel) {
  const std::int64_t period = s.r0() * s.r1();
  std::vector<std::int64_t> out;
  if (channel == 0) {
    out.reserve(static_cast<std::size_t>(s.p() * s.r1()));
    for (std::int64_t k = 0; k < s.p(); ++k)
      for (std::int64_t l0 = 0; l0 < s.r1(); ++l0) out.push_back(s.r0() * l0 + k * period);
  } else {
    out.reserve(static_cast<std::size_t>(s.p() * s.r0()));
    for (std::int64_t k = 0; k < s.p(); ++k)
      for (std::int64_t l1 = 0; l1 < s.r0(); ++l1)
        out.push_back(s.r1() * l1 + (k + s.q()) * period);
  }
  // Both loops already emit ascending indices within a channel.
  return out;
}

std::vector<std::int64_t> sample_positions(const CoprimeScheme& scheme) {
  const auto c0 = channel_positions(scheme, 0);
  const auto c1 = channel_positions(scheme, 1);
  std::vector<std::int64_t> merged;
  merged.reserve(c0.size() + c1.size());
  std::set_union(c0.begin(), c0.end(), c1.begin(), c1.end(), std::back_inserter(merged));
  return merged;
}

SensingVector sensing_vector(const CoprimeScheme& scheme) {
  SensingVector sv;
  sv.positions = sample_positions(scheme);
  sv.mask.assign(static_cast<std::size_t>(scheme.frame_length()), 0);
  for (auto n : sv.positions) sv.mask[static_cast<std::size_t>(n)] = 1;
  return sv;
}

SparseCapture apply_sampling(const NyquistFrame& frame, const SensingVector& sv) {
  if (frame.x.size() != sv.mask.size()) {
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("frame has {} samples, sensing vector {}", frame.x.size(),
                            sv.mask.size()));
  }
  SparseCapture cap;
  cap.fs = frame.fs;
  cap.positions = sv.positions;
  cap.y.resize(frame.x.size());
  for (std::size_t n = 0; n < frame.x.size(); ++n)
    cap.y[n] = sv.mask[n] ? frame.x[n] : cplx{};
  return cap;
}

}  // namespace cpsense
