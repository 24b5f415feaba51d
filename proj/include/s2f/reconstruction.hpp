#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "s2f/forward_model.hpp"
#include "s2f/image.hpp"
#include "s2f/phantom.hpp"
#include "s2f/spectrum.hpp"

namespace s2f {

// Gaussian sub-band window over the wavenumber grid. bandwidth_fraction is
// relative to the source envelope's k-space FWHM, not the grid span.
struct SpectralWindow {
    double center_fraction = 0.5;
    double bandwidth_fraction = 1.0;
    std::vector<double> weights;
    double k_min = 0.0;  // grid the window was built for
    double k_max = 0.0;
    std::string description;
};

// Window support (+-2 sigma) must lie inside the grid; a truncated sub-band
// would not be Gaussian anymore.
SpectralWindow make_gaussian_window(double center_fraction, double bandwidth_fraction,
                                    const SourceSpectrum& spectrum);

// Plain inner product of the weight vectors (recorded in dataset manifests).
double window_overlap(const SpectralWindow& a, const SpectralWindow& b);

// Shared log-compression constants of a volume, derived from its
// full-spectrum reconstruction so sub-band and full images live on one scale.
struct NormConstants {
    double floor_log = 0.0;
    double ceil_log = 1.0;
    double eps = 0.0;
};

struct ReconConfig {
    int zero_padding = 1;  // DFT length = next_pow2(n_k * zero_padding)
    int keep_depth_pixels = 0;
    double log_floor_percentile = 1.0;
    double log_ceil_percentile = 99.9;
    ImageScale output_scale = ImageScale::log_normalized;
    std::optional<SpectralWindow> window;  // absent = full spectrum
};

NormConstants compute_norm_constants(const Volume& volume, const ReconConfig& recon);

// One b-scan, one repeat: window (if any), zero-pad, DFT, magnitude of the
// positive-depth half, crop; log compression uses the provided constants.
BScanImage reconstruct_bscan(const Volume& volume, int bscan, int repeat, const ReconConfig& recon,
                             const NormConstants& norm);

// Depth pixel pitch (um) of the reconstruction.
double depth_pixel_um(const Volume& volume, const ReconConfig& recon);

// Cubic interpolation of fringes sampled on a (strictly monotonic) wavelength
// grid onto a linear wavenumber grid; endpoints clamped.
std::vector<double> resample_lambda_to_k(const std::vector<double>& lambda_um,
                                         const std::vector<double>& fringe,
                                         const std::vector<double>& k_target);

// Linear-interpolated half-maximum width (pixels) around the dominant peak of
// one a-line of a linear-scale image.
double measure_axial_fwhm(const BScanImage& image, int aline_index);

// Ensemble average of n independently realized and reconstructed images of
// the same phantom; the simulator's ground truth.
BScanImage clean_reference(const PhantomModel& model, const SourceSpectrum& spectrum,
                           const ReconConfig& recon, const NormConstants& norm, int n_realizations,
                           std::uint64_t seed);

}  // namespace s2f
