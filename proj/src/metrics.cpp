#include "s2f/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace s2f {

namespace {

constexpr double kEpsVar = 1e-12;

void validate_roi(const BScanImage& image, const Roi& roi) {
    if (roi.r0 < 0 || roi.c0 < 0 || roi.r1 > image.rows || roi.c1 > image.cols || roi.r0 >= roi.r1 ||
        roi.c0 >= roi.c1)
        throw std::invalid_argument("roi '" + roi.name + "' is empty or outside the image");
}

// population mean/variance over a rectangle
void roi_moments(const BScanImage& image, const Roi& roi, double& mean, double& var) {
    validate_roi(image, roi);
    double s = 0.0;
    long n = 0;
    for (int r = roi.r0; r < roi.r1; ++r)
        for (int c = roi.c0; c < roi.c1; ++c) {
            s += image.at(r, c);
            ++n;
        }
    mean = s / static_cast<double>(n);
    double sq = 0.0;
    for (int r = roi.r0; r < roi.r1; ++r)
        for (int c = roi.c0; c < roi.c1; ++c) {
            const double d = image.at(r, c) - mean;
            sq += d * d;
        }
    var = sq / static_cast<double>(n);
}

}  // namespace

double snr_db(const BScanImage& image, const Roi& background) {
    if (background.label != RoiLabel::background)
        throw std::invalid_argument("snr: background ROI must carry the background label");
    double mu, var;
    roi_moments(image, background, mu, var);
    if (var <= 0.0) throw std::invalid_argument("snr: background ROI has zero variance");
    double imax = -std::numeric_limits<double>::infinity();
    for (const float v : image.px) imax = std::max(imax, static_cast<double>(v));
    return 20.0 * std::log10(imax / std::sqrt(var));
}

double cnr_db(const BScanImage& image, const std::vector<Roi>& structures, const Roi& background,
              std::vector<std::string>* clamp_flags) {
    if (structures.empty()) throw std::invalid_argument("cnr: need at least one structure ROI");
    double mu_b, var_b;
    roi_moments(image, background, mu_b, var_b);

    double acc = 0.0;
    for (std::size_t i = 0; i < structures.size(); ++i) {
        double mu_i, var_i;
        roi_moments(image, structures[i], mu_i, var_i);
        const double num = std::abs(mu_i - mu_b);
        if (num == 0.0)
            throw std::invalid_argument("cnr: structure ROI '" + structures[i].name +
                                        "' has the same mean as background");
        double dv = var_i - var_b;
        if (dv < kEpsVar) {
            dv = kEpsVar;
            if (clamp_flags)
                clamp_flags->push_back("cnr_var_clamp:" +
                                       (structures[i].name.empty() ? std::to_string(i) : structures[i].name));
        }
        acc += 10.0 * std::log10(num / std::sqrt(dv));
    }
    return acc / static_cast<double>(structures.size());
}

double cnr_db_sum_variance(const BScanImage& image, const std::vector<Roi>& structures,
                           const Roi& background) {
    if (structures.empty()) throw std::invalid_argument("cnr: need at least one structure ROI");
    double mu_b, var_b;
    roi_moments(image, background, mu_b, var_b);
    double acc = 0.0;
    for (const Roi& roi : structures) {
        double mu_i, var_i;
        roi_moments(image, roi, mu_i, var_i);
        const double num = std::abs(mu_i - mu_b);
        if (num == 0.0)
            throw std::invalid_argument("cnr: structure ROI '" + roi.name +
                                        "' has the same mean as background");
        acc += 10.0 * std::log10(num / std::sqrt(std::max(var_i + var_b, kEpsVar)));
    }
    return acc / static_cast<double>(structures.size());
}

double var_metric(const BScanImage& image) {
    if (image.px.empty()) throw std::invalid_argument("var_metric: empty image");
    double s = 0.0;
    for (const float v : image.px) s += v;
    const double mu = s / static_cast<double>(image.px.size());
    double acc = 0.0;
    for (const float v : image.px) acc += std::abs(v - mu);
    return acc;
}

double psnr_db(const BScanImage& image, const BScanImage& clean) {
    if (image.rows != clean.rows || image.cols != clean.cols)
        throw std::invalid_argument("psnr: image shapes differ");
    double mse = 0.0;
    for (std::size_t i = 0; i < image.px.size(); ++i) {
        const double d = static_cast<double>(image.px[i]) - clean.px[i];
        mse += d * d;
    }
    mse /= static_cast<double>(image.px.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

MetricsReport metrics_report(const BScanImage& image, const std::vector<Roi>& structures,
                             const Roi& background, const BScanImage* clean) {
    MetricsReport rep;
    rep.snr_db = snr_db(image, background);
    rep.cnr_db = cnr_db(image, structures, background, &rep.clamp_flags);
    rep.var_value = var_metric(image);
    if (clean) rep.psnr_db = psnr_db(image, *clean);

    double mu, var;
    roi_moments(image, background, mu, var);
    rep.roi_stats.push_back({background.name.empty() ? "background" : background.name, mu, var});
    for (std::size_t i = 0; i < structures.size(); ++i) {
        roi_moments(image, structures[i], mu, var);
        rep.roi_stats.push_back(
            {structures[i].name.empty() ? "structure" + std::to_string(i) : structures[i].name, mu, var});
    }
    return rep;
}

std::string MetricsReport::csv_header() {
    return "image_id,model_id,scheme,snr_db,cnr_db,var_value,psnr_db,clamp_flags";
}

std::string MetricsReport::csv_row() const {
    char buf[256];
    std::string psnr_str = "";
    if (psnr_db) {
        if (std::isinf(*psnr_db))
            psnr_str = "inf";
        else {
            std::snprintf(buf, sizeof(buf), "%.9g", *psnr_db);
            psnr_str = buf;
        }
    }
    std::string flags;
    for (std::size_t i = 0; i < clamp_flags.size(); ++i) {
        if (i) flags += ';';
        flags += clamp_flags[i];
    }
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%.9g,%.9g,%.9g,%s,%s", image_id.c_str(), model_id.c_str(),
                  scheme.c_str(), snr_db, cnr_db, var_value, psnr_str.c_str(), flags.c_str());
    return buf;
}

}  // namespace s2f
