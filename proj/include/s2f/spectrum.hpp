#pragma once

#include <cstddef>
#include <vector>

namespace s2f {

// Source spectrum sampled on a linear wavenumber grid (rad/um). The spectral
// envelope is Gaussian with unit peak; its k-space FWHM is the image of the
// configured wavelength FWHM centered on the grid's wavelength midpoint.
struct SourceSpectrum {
    std::vector<double> k;         // strictly increasing, rad/um
    std::vector<double> envelope;  // in [0,1], max == 1
    double k_fwhm = 0.0;           // envelope FWHM in k
    double lambda_min_nm = 0.0;
    double lambda_max_nm = 0.0;
    double fwhm_nm = 0.0;

    std::size_t n_k() const { return k.size(); }
    double k_min() const { return k.front(); }
    double k_max() const { return k.back(); }
    double k_span() const { return k.back() - k.front(); }
    double dk() const { return (k.back() - k.front()) / static_cast<double>(k.size() - 1); }
};

SourceSpectrum make_source_spectrum(double lambda_min_nm, double lambda_max_nm, double fwhm_nm,
                                    std::size_t n_k);

}  // namespace s2f
