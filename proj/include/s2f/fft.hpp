#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace s2f {

// In-place iterative radix-2 FFT (decimation in time). Length must be a
// power of two. Unnormalized forward transform, exp(-i 2 pi j k / n) kernel.
void fft_pow2(std::vector<std::complex<double>>& a);

// Forward DFT of a real signal zero-padded to `padded_len` (rounded up to the
// next power of two if needed); returns the first padded_len/2 bins
// (non-negative frequencies).
std::vector<std::complex<double>> real_dft_halfspectrum(const std::vector<double>& signal,
                                                        std::size_t padded_len);

std::size_t next_pow2(std::size_t n);

}  // namespace s2f
