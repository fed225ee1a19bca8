#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library's FFT path or its position-set construction.

#include <complex>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

/// OR together the supports of both channel sensing vectors by scanning every
/// Nyquist index and testing membership arithmetically.
inline std::vector<std::int64_t> positions_by_scan(std::int64_t r0, std::int64_t r1,
                                                   std::int64_t p, std::int64_t q) {
  const std::int64_t period = r0 * r1;
  const std::int64_t N = (p + q) * period;
  std::vector<std::int64_t> out;
  for (std::int64_t i = 0; i < N; ++i) {
    bool hit = false;
    // channel 0: i = r0 l0 + k r0 r1, 0 <= l0 < r1, 0 <= k < p
    for (std::int64_t k = 0; k < p && !hit; ++k) {
      const std::int64_t rest = i - k * period;
      hit = rest >= 0 && rest % r0 == 0 && rest / r0 < r1;
    }
    // channel 1: i = r1 l1 + (k + q) r0 r1, 0 <= l1 < r0, 0 <= k < p
    for (std::int64_t k = 0; k < p && !hit; ++k) {
      const std::int64_t rest = i - (k + q) * period;
      hit = rest >= 0 && rest % r1 == 0 && rest / r1 < r0;
    }
    if (hit) out.push_back(i);
  }
  return out;
}

/// |{n in P : n - m in P}| by a double loop over the position set.
inline std::int64_t pair_count(const std::vector<std::int64_t>& P, std::int64_t m) {
  std::int64_t count = 0;
  for (auto a : P)
    for (auto b : P)
      if (a - b == m) ++count;
  return count;
}

/// (1/N) sum over all (n, n') with n - n' = m of v[n] conj(v[n']), for any sign of m.
inline cplx lag_sum(const std::vector<cplx>& v, std::int64_t m) {
  const auto N = static_cast<std::int64_t>(v.size());
  cplx acc{};
  for (std::int64_t n = 0; n < N; ++n) {
    const std::int64_t k = n - m;
    if (k >= 0 && k < N) acc += v[n] * std::conj(v[k]);
  }
  return acc / static_cast<double>(N);
}

/// Average of x[n] conj(x[n - m]) over pairs with both indices in P; 0 if none.
inline cplx masked_pair_average(const std::vector<cplx>& x, const std::vector<std::int64_t>& P,
                                std::int64_t m) {
  const std::set<std::int64_t> in(P.begin(), P.end());
  cplx acc{};
  std::int64_t count = 0;
  for (auto n : P) {
    if (in.count(n - m)) {
      acc += x[n] * std::conj(x[n - m]);
      ++count;
    }
  }
  return count ? acc / static_cast<double>(count) : cplx{};
}

inline std::vector<cplx> random_complex(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<cplx> v(n);
  for (auto& c : v) c = cplx(g(rng), g(rng));
  return v;
}

/// Plain O(L^2) DFT magnitude.
inline std::vector<double> dft_magnitude(const std::vector<cplx>& v) {
  const auto L = v.size();
  std::vector<double> out(L);
  for (std::size_t k = 0; k < L; ++k) {
    cplx acc{};
    for (std::size_t n = 0; n < L; ++n)
      acc += v[n] * std::polar(1.0, -2.0 * M_PI * double(k) * double(n) / double(L));
    out[k] = std::abs(acc);
  }
  return out;
}

/// Coprime (r0 < r1) pairs with r0 * r1 <= limit.
inline std::vector<std::pair<std::int64_t, std::int64_t>> coprime_pairs(std::int64_t limit) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (std::int64_t r0 = 1; r0 * (r0 + 1) <= limit; ++r0)
    for (std::int64_t r1 = r0 + 1; r0 * r1 <= limit; ++r1) {
      std::int64_t a = r0, b = r1;
      while (b) { const auto t = a % b; a = b; b = t; }
      if (a == 1) out.emplace_back(r0, r1);
    }
  return out;
}

}  // namespace oracle
