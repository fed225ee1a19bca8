#include "cpsense/fft.hpp"

#include <map>
#include <mutex>
#include <utility>

#include <fftw3.h>

namespace cpsense::fft {
namespace {

// FFTW planning is not thread-safe, execution with the new-array interface is.
// Plans are created once per (length, direction) and live for the process.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* in = fftw_alloc_complex(n);
    auto* out = fftw_alloc_complex(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), in, out, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

CVector execute(std::span<const cplx> in, int sign) {
  CVector out(in.size());
  if (in.empty()) return out;
  fftw_plan plan = plan_cache().get(in.size(), sign);
  // FFTW never writes to the input of an out-of-place complex DFT.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  fftw_execute_dft(plan, src, reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

CVector forward(std::span<const cplx> in) { return execute(in, FFTW_FORWARD); }

CVector backward(std::span<const cplx> in) { return execute(in, FFTW_BACKWARD); }

std::size_t next_fast_length(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t f : {2u, 3u, 5u, 7u})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

}  // namespace cpsense::fft
