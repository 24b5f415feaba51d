#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <set>

#include "s2f/pipeline.hpp"
#include "s2f/schemes.hpp"

using namespace s2f;

namespace {

// geometry-only volume: dataset construction never touches fringe data
Volume shell_volume(int n_bscans, int n_repeats, const SourceSpectrum& s, int n_alines = 8) {
    Volume v;
    v.n_k = static_cast<int>(s.n_k());
    v.n_alines = n_alines;
    v.n_bscans = n_bscans;
    v.n_repeats = n_repeats;
    v.k_min = s.k_min();
    v.k_max = s.k_max();
    v.data.assign(static_cast<std::size_t>(v.n_k) * n_alines * n_bscans * n_repeats, 0.0f);
    return v;
}

SourceSpectrum test_spectrum() { return make_source_spectrum(460.0, 660.0, 90.0, 64); }

BScanImage ramp_image(int rows, int cols) {
    BScanImage img;
    img.rows = rows;
    img.cols = cols;
    img.scale = ImageScale::log_normalized;
    img.px.resize(static_cast<std::size_t>(rows) * cols);
    for (std::size_t i = 0; i < img.px.size(); ++i)
        img.px[i] = static_cast<float>(i) / static_cast<float>(img.px.size());
    return img;
}

}  // namespace

TEST_CASE("s2f dataset counts and provenance") {
    const SourceSpectrum s = test_spectrum();

    SUBCASE("400 b-scans x 3 centers give 1200 pairs") {
        const Volume v = shell_volume(400, 2, s);
        const SchemeDataset ds = make_s2f_dataset(v, s, {0.35, 0.5, 0.65}, 0.5);
        CHECK(ds.pairs.size() == 1200);
        CHECK(ds.windows.size() == 3);
        for (const TrainingPair& p : ds.pairs) {
            CHECK(p.input.repeat == 0);
            CHECK(p.target.repeat == 1);
            CHECK(p.input.window_index >= 0);
            CHECK(p.target.window_index == -1);
            CHECK(p.input.repeat != p.target.repeat);  // never paired with itself
        }
    }

    SUBCASE("1 b-scan x 1 center gives 1 pair with correct tags") {
        const Volume v = shell_volume(1, 2, s);
        const SchemeDataset ds = make_s2f_dataset(v, s, {0.5}, 0.5);
        REQUIRE(ds.pairs.size() == 1);
        CHECK(ds.pairs[0].bscan == 0);
        CHECK(ds.pairs[0].input.window_index == 0);
        CHECK(ds.windows[0].description.find("c=0.5") != std::string::npos);
    }

    SUBCASE("empty centers list is rejected") {
        const Volume v = shell_volume(4, 2, s);
        CHECK_THROWS_AS(make_s2f_dataset(v, s, {}, 0.5), std::invalid_argument);
    }

    SUBCASE("single-repeat volume is rejected") {
        const Volume v = shell_volume(4, 1, s);
        CHECK_THROWS_AS(make_s2f_dataset(v, s, {0.5}, 0.5), std::invalid_argument);
    }

    SUBCASE("manifest lists one record per pair and window overlaps") {
        const Volume v = shell_volume(3, 2, s);
        const SchemeDataset ds = make_s2f_dataset(v, s, {0.35, 0.5, 0.65}, 0.5);
        const std::string m = ds.manifest("vol.octi");
        CHECK(std::count(m.begin(), m.end(), '\n') >= 9 + 3);
        CHECK(m.find("window-overlap") != std::string::npos);
        CHECK(m.find("scheme=s2f") != std::string::npos);
    }
}

TEST_CASE("n2n dataset") {
    const SourceSpectrum s = test_spectrum();

    SUBCASE("one pair per b-scan, R1 -> R2") {
        const Volume v = shell_volume(400, 2, s);
        const SchemeDataset ds = make_n2n_dataset(v);
        CHECK(ds.pairs.size() == 400);
        for (const TrainingPair& p : ds.pairs) {
            CHECK(p.input.repeat == 0);
            CHECK(p.target.repeat == 1);
            CHECK(p.input.window_index == -1);
        }
    }

    SUBCASE("swap flag reverses the direction") {
        const Volume v = shell_volume(4, 2, s);
        const SchemeDataset ds = make_n2n_dataset(v, true);
        for (const TrainingPair& p : ds.pairs) {
            CHECK(p.input.repeat == 1);
            CHECK(p.target.repeat == 0);
        }
    }

    SUBCASE("single repeat is rejected") {
        const Volume v = shell_volume(4, 1, s);
        CHECK_THROWS_AS(make_n2n_dataset(v), std::invalid_argument);
    }
}

TEST_CASE("n2n pair images are decorrelated but structurally aligned") {
    PhantomSpec spec;
    spec.depth_extent_um = 95.0;
    spec.lateral_alines = 64;
    spec.seed = 3;
    spec.layers.push_back({25.0, 50.0, 1.0, 6.0, 0.0});
    spec.layers.push_back({60.0, 90.0, 0.6, 6.0, 0.0});

    ExperimentConfig cfg;  // only the pieces the bundle needs
    cfg.phantom = spec;
    cfg.lambda_min_nm = 460;
    cfg.lambda_max_nm = 660;
    cfg.fwhm_nm = 90;
    cfg.n_k = 256;
    cfg.noise = {0.02, NoiseMode::physical_speckle};
    cfg.n_repeats = 2;
    cfg.recon.zero_padding = 1;
    cfg.recon.keep_depth_pixels = 128;

    VolumeBundle bundle = simulate_bundle(cfg, 99, 1);
    ReconCache cache(&bundle, cfg.recon, {});
    const BScanImage& a = cache.image({0, 0, -1});
    const BScanImage& b = cache.image({0, 1, -1});

    // normalized cross-correlation of the two repeats
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.px.size(); ++i) {
        ma += a.px[i];
        mb += b.px[i];
    }
    ma /= static_cast<double>(a.px.size());
    mb /= static_cast<double>(b.px.size());
    double sab = 0, saa = 0, sbb = 0;
    bool identical = true;
    for (std::size_t i = 0; i < a.px.size(); ++i) {
        sab += (a.px[i] - ma) * (b.px[i] - mb);
        saa += (a.px[i] - ma) * (a.px[i] - ma);
        sbb += (b.px[i] - mb) * (b.px[i] - mb);
        identical = identical && a.px[i] == b.px[i];
    }
    CHECK(!identical);  // speckle differs
    CHECK(sab / std::sqrt(saa * sbb) > 0.5);  // structure shared
}

TEST_CASE("n2v masking") {
    const BScanImage img = ramp_image(128, 128);

    SUBCASE("exact site count and replacement provenance") {
        const MaskedImage m = apply_n2v_mask(img, 64, 2, 42);
        int count = 0;
        for (const auto v : m.mask) count += v;
        CHECK(count == 64);
        for (int r = 0; r < img.rows; ++r) {
            for (int c = 0; c < img.cols; ++c) {
                const std::size_t i = static_cast<std::size_t>(r) * img.cols + c;
                if (!m.mask[i]) {
                    CHECK(m.image.at(r, c) == img.at(r, c));
                    continue;
                }
                // replaced value must come from the neighborhood (and not be the site)
                bool found = false;
                for (int dr = -2; dr <= 2 && !found; ++dr)
                    for (int dc = -2; dc <= 2 && !found; ++dc) {
                        const int rr = r + dr, cc = c + dc;
                        if (rr < 0 || cc < 0 || rr >= img.rows || cc >= img.cols) continue;
                        if (rr == r && cc == c) continue;
                        if (m.image.at(r, c) == img.at(rr, cc)) found = true;
                    }
                CHECK(found);
            }
        }
    }

    SUBCASE("deterministic for a fixed seed") {
        const MaskedImage m1 = apply_n2v_mask(img, 64, 2, 42);
        const MaskedImage m2 = apply_n2v_mask(img, 64, 2, 42);
        CHECK(m1.mask == m2.mask);
        CHECK(m1.image.px == m2.image.px);
    }

    SUBCASE("mask_count above the pixel count is rejected") {
        CHECK_THROWS_AS(apply_n2v_mask(img, 128 * 128 + 1, 2, 0), std::invalid_argument);
    }
}

TEST_CASE("train/val split") {
    const SourceSpectrum s = test_spectrum();

    SUBCASE("1200 pairs split 960/240 grouped by b-scan") {
        const Volume v = shell_volume(400, 2, s);
        const SchemeDataset ds = make_s2f_dataset(v, s, {0.35, 0.5, 0.65}, 0.5);
        const DatasetSplit split = split_train_val(ds.pairs, 4.0, 17);
        CHECK(split.train.size() == 960);
        CHECK(split.val.size() == 240);
        std::set<int> train_groups, val_groups;
        for (const auto& p : split.train) train_groups.insert(p.bscan);
        for (const auto& p : split.val) val_groups.insert(p.bscan);
        for (const int g : val_groups) CHECK(train_groups.count(g) == 0);
    }

    SUBCASE("five singleton groups split 4/1") {
        const Volume v = shell_volume(5, 2, s);
        const SchemeDataset ds = make_n2n_dataset(v);
        const DatasetSplit split = split_train_val(ds.pairs, 4.0, 5);
        CHECK(split.train.size() == 4);
        CHECK(split.val.size() == 1);
    }

    SUBCASE("same seed, same split") {
        const Volume v = shell_volume(40, 2, s);
        const SchemeDataset ds = make_n2n_dataset(v);
        const DatasetSplit s1 = split_train_val(ds.pairs, 4.0, 123);
        const DatasetSplit s2 = split_train_val(ds.pairs, 4.0, 123);
        REQUIRE(s1.train.size() == s2.train.size());
        for (std::size_t i = 0; i < s1.train.size(); ++i) CHECK(s1.train[i].bscan == s2.train[i].bscan);
    }

    SUBCASE("too few pairs are rejected") {
        const Volume v = shell_volume(4, 2, s);
        const SchemeDataset ds = make_n2n_dataset(v);
        CHECK_THROWS_AS(split_train_val(ds.pairs, 4.0, 1), std::invalid_argument);
    }
}
