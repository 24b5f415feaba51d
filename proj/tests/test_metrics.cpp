#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>

#include "s2f/metrics.hpp"
#include "s2f/rng.hpp"

using namespace s2f;

namespace {

BScanImage make_image(int rows, int cols, float fill = 0.0f) {
    BScanImage img;
    img.rows = rows;
    img.cols = cols;
    img.scale = ImageScale::log_normalized;
    img.px.assign(static_cast<std::size_t>(rows) * cols, fill);
    return img;
}

Roi make_roi(int r0, int r1, int c0, int c1, RoiLabel label, const char* name) {
    Roi roi;
    roi.r0 = r0;
    roi.r1 = r1;
    roi.c0 = c0;
    roi.c1 = c1;
    roi.label = label;
    roi.name = name;
    return roi;
}

// background patch {1,-1,1,-1,...}: mean 0, population std exactly 1
void fill_unit_std_background(BScanImage& img, const Roi& roi) {
    int s = 1;
    for (int r = roi.r0; r < roi.r1; ++r)
        for (int c = roi.c0; c < roi.c1; ++c) {
            img.at(r, c) = static_cast<float>(s);
            s = -s;
        }
}

}  // namespace

TEST_CASE("snr matches the formula exactly") {
    BScanImage img = make_image(8, 8);
    const Roi bg = make_roi(0, 2, 0, 8, RoiLabel::background, "bg");
    fill_unit_std_background(img, bg);
    img.at(5, 5) = 100.0f;  // I_max

    CHECK(snr_db(img, bg) == doctest::Approx(40.0).epsilon(1e-9));

    SUBCASE("scale invariance") {
        BScanImage scaled = img;
        for (auto& p : scaled.px) p *= 3.7f;
        CHECK(snr_db(scaled, bg) == doctest::Approx(snr_db(img, bg)).epsilon(1e-6));
    }

    SUBCASE("unit ratio gives 0 dB") {
        BScanImage unit = make_image(8, 8, -5.0f);
        fill_unit_std_background(unit, bg);  // I_max = 1 = sigma_B
        CHECK(snr_db(unit, bg) == doctest::Approx(0.0).epsilon(1e-9));
    }

    SUBCASE("zero background variance raises") {
        BScanImage flat = make_image(8, 8, 0.5f);
        CHECK_THROWS_AS(snr_db(flat, bg), std::invalid_argument);
    }
}

TEST_CASE("cnr matches the formula and guards the variance difference") {
    BScanImage img = make_image(16, 16);
    const Roi bg = make_roi(0, 4, 0, 16, RoiLabel::background, "bg");
    fill_unit_std_background(img, bg);  // mu_B = 0, var_B = 1

    // structure: mean 10, population variance 101 -> var_i - var_B = 100
    const Roi st = make_roi(8, 10, 0, 2, RoiLabel::structure, "st");
    // four values: 10 +- sqrt(101) in alternation
    const double dev = std::sqrt(101.0);
    img.at(8, 0) = static_cast<float>(10.0 + dev);
    img.at(8, 1) = static_cast<float>(10.0 - dev);
    img.at(9, 0) = static_cast<float>(10.0 + dev);
    img.at(9, 1) = static_cast<float>(10.0 - dev);

    // |mu_i - mu_B| / sqrt(var_i - var_B) = 10/10 = 1 -> 0 dB
    CHECK(cnr_db(img, {st}, bg) == doctest::Approx(0.0).epsilon(1e-6));

    SUBCASE("scale invariance") {
        BScanImage scaled = img;
        for (auto& p : scaled.px) p *= 0.125f;
        CHECK(cnr_db(scaled, {st}, bg) == doctest::Approx(cnr_db(img, {st}, bg)).epsilon(1e-5));
    }

    SUBCASE("smoother-than-background structure clamps and flags") {
        BScanImage smooth = make_image(16, 16);
        fill_unit_std_background(smooth, bg);
        // constant structure: var_i = 0 < var_B
        for (int r = 8; r < 10; ++r)
            for (int c = 0; c < 2; ++c) smooth.at(r, c) = 5.0f;
        std::vector<std::string> flags;
        (void)cnr_db(smooth, {st}, bg, &flags);
        REQUIRE(flags.size() == 1);
        CHECK(flags[0].find("cnr_var_clamp") != std::string::npos);
    }

    SUBCASE("structure mean equal to background mean raises, naming the ROI") {
        BScanImage same = make_image(16, 16);
        fill_unit_std_background(same, bg);
        try {
            (void)cnr_db(same, {st}, bg);
            FAIL("expected an error");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("st") != std::string::npos);
        }
    }
}

TEST_CASE("var metric is the L1 deviation") {
    SUBCASE("constant image gives zero") {
        const BScanImage img = make_image(4, 4, 0.77f);
        CHECK(var_metric(img) == doctest::Approx(0.0).epsilon(1e-9));
    }

    SUBCASE("hand-evaluated 2x1 case") {
        BScanImage img = make_image(2, 1);
        img.at(0, 0) = 0.0f;
        img.at(1, 0) = 2.0f;
        CHECK(var_metric(img) == doctest::Approx(2.0).epsilon(1e-9));
    }

    SUBCASE("degree-1 homogeneity") {
        Rng rng(3);
        BScanImage img = make_image(8, 8);
        for (auto& p : img.px) p = static_cast<float>(rng.uniform());
        BScanImage scaled = img;
        for (auto& p : scaled.px) p *= 4.0f;
        CHECK(var_metric(scaled) == doctest::Approx(4.0 * var_metric(img)).epsilon(1e-5));
    }
}

TEST_CASE("psnr") {
    SUBCASE("identical images report the +inf sentinel") {
        const BScanImage img = make_image(8, 8, 0.25f);
        CHECK(std::isinf(psnr_db(img, img)));
    }

    SUBCASE("uniform error of 0.1 gives 20 dB") {
        const BScanImage clean = make_image(8, 8, 0.5f);
        const BScanImage noisy = make_image(8, 8, 0.6f);
        CHECK(psnr_db(noisy, clean) == doctest::Approx(20.0).epsilon(1e-5));
    }

    SUBCASE("zero-mean noise of std 0.05 lands near 26 dB") {
        const int n = 256;
        BScanImage clean = make_image(n, n, 0.5f);
        BScanImage noisy = clean;
        Rng rng(11);
        for (auto& p : noisy.px) p = static_cast<float>(p + 0.05 * rng.normal());
        CHECK(psnr_db(noisy, clean) == doctest::Approx(26.02).epsilon(0.01));
    }
}

TEST_CASE("metrics report aggregates and serializes") {
    BScanImage img = make_image(32, 32);
    const Roi bg = make_roi(0, 4, 0, 32, RoiLabel::background, "bg");
    fill_unit_std_background(img, bg);
    img.at(16, 16) = 50.0f;
    std::vector<Roi> structures = {make_roi(10, 14, 0, 8, RoiLabel::structure, "s0"),
                                   make_roi(18, 22, 0, 8, RoiLabel::structure, "s1"),
                                   make_roi(24, 28, 0, 8, RoiLabel::structure, "s2")};
    Rng rng(9);
    for (const Roi& r : structures)
        for (int y = r.r0; y < r.r1; ++y)
            for (int x = r.c0; x < r.c1; ++x)
                img.at(y, x) = static_cast<float>(8.0 + 3.0 * rng.normal());

    SUBCASE("clean present: psnr included") {
        const BScanImage clean = make_image(32, 32, 0.1f);
        const MetricsReport rep = metrics_report(img, structures, bg, &clean);
        CHECK(rep.psnr_db.has_value());
        CHECK(rep.roi_stats.size() == 4);
        const std::string row = rep.csv_row();
        CHECK(row.find(',') != std::string::npos);
    }

    SUBCASE("clean absent: psnr field empty in the CSV row") {
        MetricsReport rep = metrics_report(img, structures, bg, nullptr);
        CHECK(!rep.psnr_db.has_value());
        rep.image_id = "img0";
        const std::string row = rep.csv_row();
        // psnr column (7th) is empty
        int commas = 0;
        std::size_t pos = 0, psnr_start = 0, psnr_end = 0;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (row[i] == ',') {
                ++commas;
                if (commas == 6) psnr_start = i + 1;
                if (commas == 7) psnr_end = i;
            }
        }
        (void)pos;
        CHECK(psnr_end == psnr_start);
    }
}
