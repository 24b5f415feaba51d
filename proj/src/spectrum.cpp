#include "s2f/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace s2f {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kFourLn2 = 2.7725887222397812376689284858327;  // 4 ln 2
}  // namespace

SourceSpectrum make_source_spectrum(double lambda_min_nm, double lambda_max_nm, double fwhm_nm,
                                    std::size_t n_k) {
    if (!(lambda_min_nm > 0.0) || !(lambda_max_nm > lambda_min_nm))
        throw std::invalid_argument("make_source_spectrum: need 0 < lambda_min < lambda_max");
    if (!(fwhm_nm > 0.0) || fwhm_nm > (lambda_max_nm - lambda_min_nm))
        throw std::invalid_argument("make_source_spectrum: fwhm must be in (0, lambda_max - lambda_min]");
    if (n_k < 64) throw std::invalid_argument("make_source_spectrum: n_k must be >= 64");

    const double lambda_min_um = lambda_min_nm * 1e-3;
    const double lambda_max_um = lambda_max_nm * 1e-3;
    const double k_min = kTwoPi / lambda_max_um;
    const double k_max = kTwoPi / lambda_min_um;

    // k-space image of the wavelength FWHM interval around the grid midpoint
    const double lambda_c_um = 0.5 * (lambda_min_um + lambda_max_um);
    const double half_fwhm_um = 0.5 * fwhm_nm * 1e-3;
    const double k_fwhm = kTwoPi / (lambda_c_um - half_fwhm_um) - kTwoPi / (lambda_c_um + half_fwhm_um);

    SourceSpectrum s;
    s.lambda_min_nm = lambda_min_nm;
    s.lambda_max_nm = lambda_max_nm;
    s.fwhm_nm = fwhm_nm;
    s.k_fwhm = k_fwhm;
    s.k.resize(n_k);
    s.envelope.resize(n_k);
    const double dk = (k_max - k_min) / static_cast<double>(n_k - 1);
    const double k_c = 0.5 * (k_min + k_max);
    double peak = 0.0;
    for (std::size_t i = 0; i < n_k; ++i) {
        const double k = k_min + dk * static_cast<double>(i);
        s.k[i] = k;
        const double d = k - k_c;
        s.envelope[i] = std::exp(-kFourLn2 * d * d / (k_fwhm * k_fwhm));
        peak = std::max(peak, s.envelope[i]);
    }
    // renormalize so the sampled peak is exactly 1 (the analytic peak can fall
    // between samples on even grids)
    for (auto& e : s.envelope) e /= peak;
    return s;
}

}  // namespace s2f
