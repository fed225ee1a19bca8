#pragma once

#include <cstddef>
#include <span>

#include "cpsense/coprime.hpp"

namespace cpsense::fft {

/// Unnormalized DFT, X[k] = sum_n x[n] exp(-j 2 pi k n / L).
CVector forward(std::span<const cplx> in);

/// Unnormalized inverse DFT, x[n] = sum_k X[k] exp(+j 2 pi k n / L). Callers divide by L.
CVector backward(std::span<const cplx> in);

/// Smallest 7-smooth integer >= n.
std::size_t next_fast_length(std::size_t n);

}  // namespace cpsense::fft
