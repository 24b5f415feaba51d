#pragma once

#include <optional>
#include <string>
#include <vector>

#include "s2f/image.hpp"

namespace s2f {

enum class RoiLabel { structure, background };

// Pixel rectangle, [r0, r1) x [c0, c1).
struct Roi {
    int r0 = 0, r1 = 0, c0 = 0, c1 = 0;
    RoiLabel label = RoiLabel::structure;
    std::string name;
};

struct RoiStats {
    std::string name;
    double mean = 0.0;
    double variance = 0.0;  // population variance
};

struct MetricsReport {
    std::string image_id;
    std::string model_id;
    std::string scheme;
    double snr_db = 0.0;
    double cnr_db = 0.0;
    double var_value = 0.0;
    std::optional<double> psnr_db;
    std::vector<RoiStats> roi_stats;
    std::vector<std::string> clamp_flags;

    std::string csv_row() const;
    static std::string csv_header();
};

// 20 log10(I_max / sigma_B); I_max over the whole image, sigma_B the std of
// the background ROI.
double snr_db(const BScanImage& image, const Roi& background);

// mean over structure ROIs of 10 log10(|mu_i - mu_B| / sqrt(sigma_i^2 - sigma_B^2));
// a non-positive variance difference is clamped at eps_var and flagged.
double cnr_db(const BScanImage& image, const std::vector<Roi>& structures, const Roi& background,
              std::vector<std::string>* clamp_flags = nullptr);

// robust variant with sigma_i^2 + sigma_B^2 in the denominator (off by
// default everywhere; provided for cross-literature comparison).
double cnr_db_sum_variance(const BScanImage& image, const std::vector<Roi>& structures,
                           const Roi& background);

// sum of |I - mu_I| over all pixels (L1 deviation, named VAR by convention).
double var_metric(const BScanImage& image);

// 10 log10(1 / MSE) for [0,1] images; +inf when identical.
double psnr_db(const BScanImage& image, const BScanImage& clean);

MetricsReport metrics_report(const BScanImage& image, const std::vector<Roi>& structures,
                             const Roi& background, const BScanImage* clean = nullptr);

}  // namespace s2f
