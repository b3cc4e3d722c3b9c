#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace byhe::fft {

using cplx = std::complex<double>;

/// Unnormalized forward DFT (sign -1). Any length.
std::vector<cplx> forward(std::span<const cplx> x);

/// Inverse DFT including the 1/n factor.
std::vector<cplx> inverse(std::span<const cplx> x);

/// Forward DFT of a real sequence, zero padded to `n` (n >= x.size()).
std::vector<cplx> forward_real(std::span<const double> x, std::size_t n);

std::size_t next_pow2(std::size_t n);

}  // namespace byhe::fft
