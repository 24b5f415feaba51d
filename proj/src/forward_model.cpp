#include "s2f/forward_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "s2f/rng.hpp"

namespace s2f {

namespace {

// Accumulate a * cos(2 k_i z + phi) over the k grid using an incremental
// phase rotation (one cos/sin pair per scatterer instead of one per sample).
void add_scatterer_fringe(double* acc, std::size_t n_k, double k0, double dk, const Scatterer& s) {
    const double theta0 = 2.0 * s.z_um * k0 + s.phase;
    const double dtheta = 2.0 * s.z_um * dk;
    double c = std::cos(theta0);
    double si = std::sin(theta0);
    const double cd = std::cos(dtheta);
    const double sd = std::sin(dtheta);
    for (std::size_t i = 0; i < n_k; ++i) {
        acc[i] += s.amplitude * c;
        const double cn = c * cd - si * sd;
        si = si * cd + c * sd;
        c = cn;
    }
}

void simulate_aline(float* out, const std::vector<Scatterer>& scatterers,
                    const SourceSpectrum& spectrum, double noise_std, std::uint64_t noise_seed) {
    const std::size_t n_k = spectrum.n_k();
    const double k0 = spectrum.k_min();
    const double dk = spectrum.dk();

    std::vector<double> acc(n_k, 0.0);
    for (const Scatterer& s : scatterers) add_scatterer_fringe(acc.data(), n_k, k0, dk, s);

    if (noise_std > 0.0) {
        Rng rng(noise_seed);
        for (std::size_t i = 0; i < n_k; ++i)
            out[i] = static_cast<float>(spectrum.envelope[i] * acc[i] + noise_std * rng.normal());
    } else {
        for (std::size_t i = 0; i < n_k; ++i) out[i] = static_cast<float>(spectrum.envelope[i] * acc[i]);
    }
}

}  // namespace

Interferogram simulate_fringes(const ScattererField& field, const SourceSpectrum& spectrum,
                               const NoiseConfig& noise, std::uint64_t seed) {
    if (noise.detector_noise_std < 0.0)
        throw std::invalid_argument("simulate_fringes: detector_noise_std must be >= 0");
    Interferogram ig;
    ig.n_k = static_cast<int>(spectrum.n_k());
    ig.n_alines = static_cast<int>(field.alines.size());
    ig.n_repeats = 1;
    ig.data.resize(static_cast<std::size_t>(ig.n_k) * ig.n_alines);

    // depth validation up front; the parallel region below must not throw
    const double z_limit = M_PI / (2.0 * spectrum.dk());
    for (const auto& aline : field.alines)
        for (const Scatterer& s : aline)
            if (s.z_um >= z_limit)
                throw std::invalid_argument("simulate_fringes: scatterer at depth " + std::to_string(s.z_um) +
                                            " um exceeds the unambiguous range " + std::to_string(z_limit) +
                                            " um");

    const double std_fringe = noise.mode == NoiseMode::physical_speckle ? noise.detector_noise_std : 0.0;

#pragma omp parallel for schedule(static)
    for (int a = 0; a < ig.n_alines; ++a) {
        simulate_aline(ig.fringe(0, a), field.alines[static_cast<std::size_t>(a)], spectrum, std_fringe,
                       derive_seed(seed, {0xDE7ull, static_cast<std::uint64_t>(a)}));
    }
    return ig;
}

Volume simulate_volume(const PhantomSpec& spec, const SourceSpectrum& spectrum,
                       const NoiseConfig& noise, int n_bscans, int n_repeats,
                       std::uint64_t master_seed) {
    if (n_bscans < 1) throw std::invalid_argument("simulate_volume: n_bscans must be >= 1");
    if (n_repeats < 1) throw std::invalid_argument("simulate_volume: n_repeats must be >= 1");

    const PhantomModel model = build_phantom(spec);

    Volume vol;
    vol.n_k = static_cast<int>(spectrum.n_k());
    vol.n_alines = spec.lateral_alines;
    vol.n_bscans = n_bscans;
    vol.n_repeats = n_repeats;
    vol.k_min = spectrum.k_min();
    vol.k_max = spectrum.k_max();
    vol.master_seed = master_seed;
    vol.noise = noise;
    vol.phantom_id = model.id();
    vol.data.resize(static_cast<std::size_t>(vol.n_k) * vol.n_alines * n_bscans * n_repeats);

    const bool shared_realization = noise.mode == NoiseMode::additive_gaussian_on_image;
    for (int b = 0; b < n_bscans; ++b) {
        for (int r = 0; r < n_repeats; ++r) {
            const std::uint64_t realization_seed =
                shared_realization
                    ? derive_seed(master_seed, {0xF1E1Dull, static_cast<std::uint64_t>(b)})
                    : derive_seed(master_seed, {0xF1E1Dull, static_cast<std::uint64_t>(b),
                                                static_cast<std::uint64_t>(r)});
            const ScattererField field = realize_scatterers(model, realization_seed);
            const Interferogram ig = simulate_fringes(
                field, spectrum, noise,
                derive_seed(master_seed, {0x015Eull, static_cast<std::uint64_t>(b),
                                          static_cast<std::uint64_t>(r)}));
            std::copy(ig.data.begin(), ig.data.end(), vol.data.begin() + vol.fringe_offset(b, r, 0));
        }
    }
    return vol;
}

}  // namespace s2f
