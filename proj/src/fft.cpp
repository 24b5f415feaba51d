#include "s2f/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace s2f {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft_pow2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft_pow2: length must be a power of two");

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

std::vector<std::complex<double>> real_dft_halfspectrum(const std::vector<double>& signal,
                                                        std::size_t padded_len) {
    const std::size_t n = next_pow2(padded_len < signal.size() ? signal.size() : padded_len);
    std::vector<std::complex<double>> a(n, {0.0, 0.0});
    for (std::size_t i = 0; i < signal.size(); ++i) a[i] = {signal[i], 0.0};
    fft_pow2(a);
    a.resize(n / 2);
    return a;
}

}  // namespace s2f
