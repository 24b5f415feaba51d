#include "s2f/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "s2f/fft.hpp"
#include "s2f/rng.hpp"

namespace s2f {

namespace {

constexpr double kFourLn2 = 2.7725887222397812376689284858327;
constexpr double kTwoSigmaOverFwhm = 0.84932180028801904272150283410289;  // 2 / (2 sqrt(2 ln 2))

std::size_t padded_length(int n_k, int zero_padding) {
    return next_pow2(static_cast<std::size_t>(n_k) * static_cast<std::size_t>(zero_padding));
}

void validate_recon(const Volume& volume, const ReconConfig& recon) {
    if (recon.zero_padding < 1) throw std::invalid_argument("recon: zero_padding must be >= 1");
    const std::size_t padded = padded_length(volume.n_k, recon.zero_padding);
    if (recon.keep_depth_pixels < 1 || static_cast<std::size_t>(recon.keep_depth_pixels) > padded / 2)
        throw std::invalid_argument("recon: keep_depth_pixels must be in [1, padded_len/2]");
    if (!(recon.log_floor_percentile >= 0.0 && recon.log_floor_percentile < recon.log_ceil_percentile &&
          recon.log_ceil_percentile <= 100.0))
        throw std::invalid_argument("recon: need 0 <= floor percentile < ceil percentile <= 100");
    if (recon.window) {
        const SpectralWindow& w = *recon.window;
        if (static_cast<int>(w.weights.size()) != volume.n_k ||
            std::abs(w.k_min - volume.k_min) > 1e-9 || std::abs(w.k_max - volume.k_max) > 1e-9)
            throw std::invalid_argument("recon: window was built for a different wavenumber grid");
    }
}

// magnitude of the positive-depth half for one a-line
void recon_aline_magnitude(const float* fringe, int n_k, const double* weights, std::size_t padded,
                           int keep, double* out) {
    std::vector<double> sig(static_cast<std::size_t>(n_k));
    if (weights) {
        for (int i = 0; i < n_k; ++i) sig[static_cast<std::size_t>(i)] = fringe[i] * weights[i];
    } else {
        for (int i = 0; i < n_k; ++i) sig[static_cast<std::size_t>(i)] = fringe[i];
    }
    const auto half = real_dft_halfspectrum(sig, padded);
    for (int d = 0; d < keep; ++d) out[d] = std::abs(half[static_cast<std::size_t>(d)]);
}

double percentile(std::vector<float>& values, double pct) {
    if (values.empty()) throw std::invalid_argument("percentile of empty range");
    const double rank = pct / 100.0 * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(rank));
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
    const double v_lo = values[lo];
    if (hi == lo) return v_lo;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(hi), values.end());
    const double v_hi = values[hi];
    return v_lo + (v_hi - v_lo) * (rank - static_cast<double>(lo));
}

}  // namespace

SpectralWindow make_gaussian_window(double center_fraction, double bandwidth_fraction,
                                    const SourceSpectrum& spectrum) {
    if (!(center_fraction > 0.0 && center_fraction < 1.0))
        throw std::invalid_argument("make_gaussian_window: center_fraction must be in (0,1)");
    if (!(bandwidth_fraction > 0.0 && bandwidth_fraction <= 1.0))
        throw std::invalid_argument("make_gaussian_window: bandwidth_fraction must be in (0,1]");

    const double span = spectrum.k_span();
    const double k_c = spectrum.k_min() + center_fraction * span;
    const double fwhm = bandwidth_fraction * spectrum.k_fwhm;
    const double two_sigma = kTwoSigmaOverFwhm * fwhm;
    if (k_c - two_sigma < spectrum.k_min() || k_c + two_sigma > spectrum.k_max()) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "make_gaussian_window: window c=%.4f beta=%.4f escapes the grid "
                      "(support +-2sigma = %.4f rad/um)",
                      center_fraction, bandwidth_fraction, two_sigma);
        throw std::invalid_argument(buf);
    }

    SpectralWindow w;
    w.center_fraction = center_fraction;
    w.bandwidth_fraction = bandwidth_fraction;
    w.k_min = spectrum.k_min();
    w.k_max = spectrum.k_max();
    w.weights.resize(spectrum.n_k());
    for (std::size_t i = 0; i < spectrum.n_k(); ++i) {
        const double d = spectrum.k[i] - k_c;
        w.weights[i] = std::exp(-kFourLn2 * d * d / (fwhm * fwhm));
    }
    char desc[64];
    std::snprintf(desc, sizeof(desc), "c=%.4f,b=%.4f", center_fraction, bandwidth_fraction);
    w.description = desc;
    return w;
}

double window_overlap(const SpectralWindow& a, const SpectralWindow& b) {
    if (a.weights.size() != b.weights.size())
        throw std::invalid_argument("window_overlap: mismatched grids");
    double s = 0.0;
    for (std::size_t i = 0; i < a.weights.size(); ++i) s += a.weights[i] * b.weights[i];
    return s;
}

NormConstants compute_norm_constants(const Volume& volume, const ReconConfig& recon) {
    validate_recon(volume, recon);
    const std::size_t padded = padded_length(volume.n_k, recon.zero_padding);
    const int keep = recon.keep_depth_pixels;

    std::vector<float> mags;
    mags.resize(static_cast<std::size_t>(volume.n_bscans) * volume.n_repeats * volume.n_alines *
                static_cast<std::size_t>(keep));
    double vmax = 0.0;

#pragma omp parallel for collapse(2) schedule(static) reduction(max : vmax)
    for (int b = 0; b < volume.n_bscans; ++b) {
        for (int r = 0; r < volume.n_repeats; ++r) {
            std::vector<double> col(static_cast<std::size_t>(keep));
            for (int a = 0; a < volume.n_alines; ++a) {
                recon_aline_magnitude(volume.fringe(b, r, a), volume.n_k, nullptr, padded, keep,
                                      col.data());
                float* dst = mags.data() + (((static_cast<std::size_t>(b) * volume.n_repeats + r) *
                                                 volume.n_alines +
                                             a) *
                                            static_cast<std::size_t>(keep));
                for (int d = 0; d < keep; ++d) {
                    dst[d] = static_cast<float>(col[static_cast<std::size_t>(d)]);
                    vmax = std::max(vmax, col[static_cast<std::size_t>(d)]);
                }
            }
        }
    }

    NormConstants norm;
    if (vmax <= 0.0) {
        // all-zero volume: degenerate scale, log image collapses to the floor
        norm.eps = 1.0;
        norm.floor_log = 0.0;
        norm.ceil_log = 1.0;
        return norm;
    }
    norm.eps = 1e-8 * vmax;
    for (auto& m : mags) m = static_cast<float>(std::log10(static_cast<double>(m) + norm.eps));
    norm.floor_log = percentile(mags, recon.log_floor_percentile);
    norm.ceil_log = percentile(mags, recon.log_ceil_percentile);
    if (norm.ceil_log <= norm.floor_log) norm.ceil_log = norm.floor_log + 1.0;
    return norm;
}

BScanImage reconstruct_bscan(const Volume& volume, int bscan, int repeat, const ReconConfig& recon,
                             const NormConstants& norm) {
    validate_recon(volume, recon);
    if (bscan < 0 || bscan >= volume.n_bscans) throw std::invalid_argument("recon: bscan out of range");
    if (repeat < 0 || repeat >= volume.n_repeats) throw std::invalid_argument("recon: repeat out of range");

    const std::size_t padded = padded_length(volume.n_k, recon.zero_padding);
    const int keep = recon.keep_depth_pixels;
    const double* weights = recon.window ? recon.window->weights.data() : nullptr;

    BScanImage img;
    img.rows = keep;
    img.cols = volume.n_alines;
    img.scale = recon.output_scale;
    img.px.resize(static_cast<std::size_t>(keep) * volume.n_alines);
    img.prov.window = recon.window ? recon.window->description : "full";
    img.prov.bscan = bscan;
    img.prov.repeat = repeat;
    img.prov.notes = "log10-amplitude";

    const bool log_mode = recon.output_scale == ImageScale::log_normalized;
    const double inv_range = 1.0 / (norm.ceil_log - norm.floor_log);

#pragma omp parallel for schedule(static)
    for (int a = 0; a < volume.n_alines; ++a) {
        std::vector<double> col(static_cast<std::size_t>(keep));
        recon_aline_magnitude(volume.fringe(bscan, repeat, a), volume.n_k, weights, padded, keep,
                              col.data());
        for (int d = 0; d < keep; ++d) {
            double v = col[static_cast<std::size_t>(d)];
            if (log_mode) {
                v = (std::log10(v + norm.eps) - norm.floor_log) * inv_range;
                v = std::clamp(v, 0.0, 1.0);
            }
            img.at(d, a) = static_cast<float>(v);
        }
    }
    return img;
}

double depth_pixel_um(const Volume& volume, const ReconConfig& recon) {
    const std::size_t padded = padded_length(volume.n_k, recon.zero_padding);
    return M_PI / (static_cast<double>(padded) * volume.dk());
}

std::vector<double> resample_lambda_to_k(const std::vector<double>& lambda_um,
                                         const std::vector<double>& fringe,
                                         const std::vector<double>& k_target) {
    if (lambda_um.size() != fringe.size() || lambda_um.size() < 4)
        throw std::invalid_argument("resample: need matching lambda/fringe arrays of length >= 4");
    const std::size_t n = lambda_um.size();
    bool increasing = lambda_um[1] > lambda_um[0];
    for (std::size_t i = 1; i < n; ++i) {
        const bool step_up = lambda_um[i] > lambda_um[i - 1];
        if (lambda_um[i] == lambda_um[i - 1] || step_up != increasing)
            throw std::invalid_argument("resample: lambda grid must be strictly monotonic");
    }

    // map to k and order ascending in k
    std::vector<double> xs(n), ys(n);
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = increasing ? n - 1 - i : i;  // lambda ascending -> k descending
        xs[i] = kTwoPi / lambda_um[j];
        ys[i] = fringe[j];
    }

    // cubic Hermite with centered finite-difference slopes, one-sided at ends
    std::vector<double> slope(n);
    slope[0] = (ys[1] - ys[0]) / (xs[1] - xs[0]);
    slope[n - 1] = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i) slope[i] = (ys[i + 1] - ys[i - 1]) / (xs[i + 1] - xs[i - 1]);

    std::vector<double> out(k_target.size());
    for (std::size_t q = 0; q < k_target.size(); ++q) {
        double x = k_target[q];
        if (x <= xs[0]) {
            out[q] = ys[0];
            continue;
        }
        if (x >= xs[n - 1]) {
            out[q] = ys[n - 1];
            continue;
        }
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
        const double h = xs[i + 1] - xs[i];
        const double t = (x - xs[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        out[q] = (2 * t3 - 3 * t2 + 1) * ys[i] + (t3 - 2 * t2 + t) * h * slope[i] +
                 (-2 * t3 + 3 * t2) * ys[i + 1] + (t3 - t2) * h * slope[i + 1];
    }
    return out;
}

double measure_axial_fwhm(const BScanImage& image, int aline_index) {
    if (image.scale != ImageScale::linear)
        throw std::invalid_argument("measure_axial_fwhm: image must be linear scale");
    if (aline_index < 0 || aline_index >= image.cols)
        throw std::invalid_argument("measure_axial_fwhm: a-line index out of range");

    const int n = image.rows;
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) v[static_cast<std::size_t>(d)] = image.at(d, aline_index);

    int peak = 0;
    for (int d = 1; d < n; ++d)
        if (v[static_cast<std::size_t>(d)] > v[static_cast<std::size_t>(peak)]) peak = d;
    if (peak == 0 || peak == n - 1)
        throw std::invalid_argument("measure_axial_fwhm: peak at image boundary");

    // dominance: global max must be at least 2x the second-highest local max
    double second = 0.0;
    for (int d = 1; d + 1 < n; ++d) {
        if (d == peak) continue;
        const double x = v[static_cast<std::size_t>(d)];
        if (x >= v[static_cast<std::size_t>(d - 1)] && x >= v[static_cast<std::size_t>(d + 1)])
            second = std::max(second, x);
    }
    const double vmax = v[static_cast<std::size_t>(peak)];
    if (!(vmax >= 2.0 * second))
        throw std::invalid_argument("measure_axial_fwhm: no dominant peak (max < 2x runner-up)");

    const double half = 0.5 * vmax;
    int lo = peak;
    while (lo > 0 && v[static_cast<std::size_t>(lo)] > half) --lo;
    if (v[static_cast<std::size_t>(lo)] > half)
        throw std::invalid_argument("measure_axial_fwhm: half-maximum crossing runs off the image");
    const double left = lo + (half - v[static_cast<std::size_t>(lo)]) /
                                 (v[static_cast<std::size_t>(lo + 1)] - v[static_cast<std::size_t>(lo)]);

    int hi = peak;
    while (hi < n - 1 && v[static_cast<std::size_t>(hi)] > half) ++hi;
    if (v[static_cast<std::size_t>(hi)] > half)
        throw std::invalid_argument("measure_axial_fwhm: half-maximum crossing runs off the image");
    const double right = hi - (half - v[static_cast<std::size_t>(hi)]) /
                                  (v[static_cast<std::size_t>(hi - 1)] - v[static_cast<std::size_t>(hi)]);

    return right - left;
}

BScanImage clean_reference(const PhantomModel& model, const SourceSpectrum& spectrum,
                           const ReconConfig& recon, const NormConstants& norm, int n_realizations,
                           std::uint64_t seed) {
    if (n_realizations < 1) throw std::invalid_argument("clean_reference: n_realizations must be >= 1");

    const NoiseConfig no_noise{0.0, NoiseMode::physical_speckle};
    BScanImage mean;
    std::vector<double> acc;
    for (int i = 0; i < n_realizations; ++i) {
        const std::uint64_t rs = derive_seed(seed, {0xC1EA7ull, static_cast<std::uint64_t>(i)});
        const ScattererField field = realize_scatterers(model, rs);
        Interferogram ig = simulate_fringes(field, spectrum, no_noise, rs);

        Volume v;
        v.n_k = ig.n_k;
        v.n_alines = ig.n_alines;
        v.n_bscans = 1;
        v.n_repeats = 1;
        v.k_min = spectrum.k_min();
        v.k_max = spectrum.k_max();
        v.data = std::move(ig.data);
        const BScanImage img = reconstruct_bscan(v, 0, 0, recon, norm);

        if (i == 0) {
            mean = img;
            acc.assign(img.px.begin(), img.px.end());
        } else {
            for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += img.px[p];
        }
    }
    const double inv = 1.0 / static_cast<double>(n_realizations);
    for (std::size_t p = 0; p < acc.size(); ++p) mean.px[p] = static_cast<float>(acc[p] * inv);
    mean.prov.notes = "ensemble-mean of " + std::to_string(n_realizations) + " realizations";
    mean.prov.bscan = -1;
    mean.prov.repeat = -1;
    return mean;
}

}  // namespace s2f
