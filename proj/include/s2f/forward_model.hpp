#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "s2f/phantom.hpp"
#include "s2f/spectrum.hpp"

namespace s2f {

enum class NoiseMode {
    physical_speckle,           // speckle from scatterer interference + detector noise on fringes
    additive_gaussian_on_image  // repeats share one realization; i.i.d. Gaussian noise is
                                // added to the reconstructed images instead
};

struct NoiseConfig {
    double detector_noise_std = 0.0;  // relative to the DC (unit envelope) level
    NoiseMode mode = NoiseMode::physical_speckle;
};

// Raw acquisition unit: real fringes, (repeat, a-line, k) with k fastest.
struct Interferogram {
    int n_k = 0;
    int n_alines = 0;
    int n_repeats = 0;
    std::vector<float> data;

    float* fringe(int repeat, int aline) {
        return data.data() + (static_cast<std::size_t>(repeat) * n_alines + aline) * n_k;
    }
    const float* fringe(int repeat, int aline) const {
        return data.data() + (static_cast<std::size_t>(repeat) * n_alines + aline) * n_k;
    }
};

// A stack of B-scans plus the acquisition context needed to reconstruct them.
struct Volume {
    int n_k = 0;
    int n_alines = 0;
    int n_bscans = 0;
    int n_repeats = 0;
    double k_min = 0.0;
    double k_max = 0.0;
    std::vector<float> data;  // (bscan, repeat, aline, k), k fastest

    std::uint64_t master_seed = 0;
    NoiseConfig noise;
    std::string phantom_id;

    std::size_t fringe_offset(int bscan, int repeat, int aline) const {
        return ((static_cast<std::size_t>(bscan) * n_repeats + repeat) * n_alines + aline) * n_k;
    }
    const float* fringe(int bscan, int repeat, int aline) const {
        return data.data() + fringe_offset(bscan, repeat, aline);
    }
    double dk() const { return (k_max - k_min) / static_cast<double>(n_k - 1); }
    // Deepest depth a cos(2kz) fringe can encode without aliasing.
    double unambiguous_depth_um() const { return M_PI / (2.0 * dk()); }
};

// Single-repeat fringe formation: S(k) * sum_m a_m cos(2 k z_m + phi_m) plus
// detector noise; DC and autocorrelation terms are omitted
// (background-subtracted acquisition).
Interferogram simulate_fringes(const ScattererField& field, const SourceSpectrum& spectrum,
                               const NoiseConfig& noise, std::uint64_t seed);

// Full volume: each b-scan position gets n_repeats independent realizations of
// the same phantom cross-section. In additive_gaussian_on_image mode all
// repeats of a b-scan share one realization and fringes carry no noise.
Volume simulate_volume(const PhantomSpec& spec, const SourceSpectrum& spectrum,
                       const NoiseConfig& noise, int n_bscans, int n_repeats,
                       std::uint64_t master_seed);

}  // namespace s2f
