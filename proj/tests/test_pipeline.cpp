#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "s2f/config.hpp"
#include "s2f/io.hpp"
#include "s2f/net.hpp"
#include "s2f/pipeline.hpp"
#include "s2f/rng.hpp"

using namespace s2f;
namespace fs = std::filesystem;

#ifndef S2F_SOURCE_DIR
#define S2F_SOURCE_DIR "."
#endif
#ifndef S2F_CLI_PATH
#define S2F_CLI_PATH ""
#endif

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

ExperimentConfig tiny_config(const fs::path& out_dir) {
    ExperimentConfig cfg = load_config(fs::path(S2F_SOURCE_DIR) / "configs" / "tiny.json");
    apply_overrides(cfg, std::nullopt, out_dir);
    return cfg;
}

fs::path scratch_dir(const char* name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("config validation fails fast") {
    const std::string base = read_file(fs::path(S2F_SOURCE_DIR) / "configs" / "tiny.json");
    CHECK_NOTHROW((void)parse_config(base));

    SUBCASE("off-grid window is rejected before any work") {
        std::string bad = base;
        const auto pos = bad.find("\"centers\": [0.35, 0.5, 0.65]");
        REQUIRE(pos != std::string::npos);
        bad.replace(pos, std::string("\"centers\": [0.35, 0.5, 0.65]").size(),
                    "\"centers\": [0.02, 0.5, 0.65]");
        CHECK_THROWS_AS((void)parse_config(bad), std::invalid_argument);
    }

    SUBCASE("indivisible image dims are rejected") {
        std::string bad = base;
        const auto pos = bad.find("\"levels\": 2");
        REQUIRE(pos != std::string::npos);
        bad.replace(pos, std::string("\"levels\": 2").size(), "\"levels\": 7");
        CHECK_THROWS_AS((void)parse_config(bad), std::invalid_argument);
    }

    SUBCASE("roi outside the image is rejected") {
        std::string bad = base;
        const auto pos = bad.find("\"r0\": 1, \"r1\": 9");
        REQUIRE(pos != std::string::npos);
        bad.replace(pos, std::string("\"r0\": 1, \"r1\": 9").size(), "\"r0\": 1, \"r1\": 900");
        CHECK_THROWS_AS((void)parse_config(bad), std::invalid_argument);
    }

    SUBCASE("garbage json is rejected") {
        CHECK_THROWS_AS((void)parse_config("{ not json"), std::invalid_argument);
    }
}

TEST_CASE("simulate: header round-trip and byte-identical reruns") {
    const ExperimentConfig cfg = tiny_config(scratch_dir("s2f_pl_sim"));
    const fs::path octi = cmd_simulate(cfg);
    REQUIRE(fs::exists(octi));

    const Volume v = read_octi(octi);
    CHECK(v.n_k == cfg.n_k);
    CHECK(v.n_alines == cfg.phantom.lateral_alines);
    CHECK(v.n_bscans == cfg.n_bscans);
    CHECK(v.n_repeats == cfg.n_repeats);

    const std::string bytes1 = read_file(octi);
    (void)cmd_simulate(cfg);
    CHECK(read_file(octi) == bytes1);

    CHECK(fs::exists(cfg.output_dir / "volume.manifest.json"));
    const std::string manifest = read_file(cfg.output_dir / "volume.manifest.json");
    CHECK(manifest.find(cfg.config_hash) != std::string::npos);
}

TEST_CASE("train/denoise/evaluate round trip at tiny scale") {
    const ExperimentConfig cfg = tiny_config(scratch_dir("s2f_pl_train"));
    (void)cmd_simulate(cfg);

    const TrainResult r1 = cmd_train(cfg, Scheme::s2f);
    REQUIRE(fs::exists(checkpoint_path(cfg, Scheme::s2f)));
    REQUIRE(fs::exists(history_path(cfg, Scheme::s2f)));
    CHECK(r1.history.epochs.size() == 2);

    SUBCASE("history csv has the pinned columns") {
        const std::string csv = read_file(history_path(cfg, Scheme::s2f));
        CHECK(csv.rfind("epoch,train_loss,val_loss,seconds\n", 0) == 0);
    }

    SUBCASE("resume continues the optimizer step counter") {
        const long t_first = r1.opt.t;
        const TrainResult r2 = cmd_train(cfg, Scheme::s2f, /*resume=*/true);
        CHECK(r2.opt.t > t_first);
    }

    SUBCASE("denoise writes octb and pgm") {
        const fs::path out = cmd_denoise(cfg, checkpoint_path(cfg, Scheme::s2f), 0);
        CHECK(fs::exists(out));
        const BScanImage img = read_octb(out);
        CHECK(img.rows == cfg.recon.keep_depth_pixels);
        CHECK(img.cols == cfg.phantom.lateral_alines);
        for (const float p : img.px) {
            CHECK(p >= 0.0f);
            CHECK(p <= 1.0f);
        }
    }

    SUBCASE("evaluate emits a metrics csv") {
        const MethodEval ev = cmd_evaluate(cfg, checkpoint_path(cfg, Scheme::s2f));
        CHECK(ev.per_image.size() == 2);
        CHECK(fs::exists(cfg.output_dir / "metrics.csv"));
    }
}

TEST_CASE("compare requires every checkpoint and mirrors the protocol rows") {
    const ExperimentConfig cfg = tiny_config(scratch_dir("s2f_pl_cmp"));
    (void)cmd_simulate(cfg);

    SUBCASE("missing checkpoint is named") {
        try {
            (void)cmd_compare(cfg);
            FAIL("expected an error");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("s2f") != std::string::npos);
        }
    }

    SUBCASE("full protocol") {
        for (const Scheme s : {Scheme::s2f, Scheme::n2n, Scheme::n2v}) (void)cmd_train(cfg, s);
        const CompareResult r = cmd_compare(cfg);
        REQUIRE(r.methods.size() == 5);
        CHECK(r.methods[0].method == "R1");
        CHECK(r.methods[1].method == "Merged");
        CHECK(r.methods[2].method == "S2F");
        CHECK(r.methods[3].method == "N2N");
        CHECK(r.methods[4].method == "N2V");
        for (const auto& m : r.methods) CHECK(m.per_image.size() == 2);
        CHECK(fs::exists(r.csv_path));
        CHECK(fs::exists(cfg.output_dir / "preview_s2f_img0.pgm"));
    }
}

TEST_CASE("bandwidth sweep") {
    const ExperimentConfig cfg = tiny_config(scratch_dir("s2f_pl_sweep"));
    (void)cmd_simulate(cfg);

    SUBCASE("rows mirror the beta list and the fwhm column decreases") {
        const SweepResult r = cmd_sweep_bandwidth(cfg, {0.25, 0.5, 0.9});
        REQUIRE(r.rows.size() == 3);
        CHECK(r.rows[0].input_fwhm_px > r.rows[1].input_fwhm_px);
        CHECK(r.rows[1].input_fwhm_px > r.rows[2].input_fwhm_px);
        CHECK(fs::exists(r.csv_path));
    }

    SUBCASE("single beta is a valid degenerate sweep") {
        const SweepResult r = cmd_sweep_bandwidth(cfg, {0.5});
        CHECK(r.rows.size() == 1);
    }

    SUBCASE("betas outside (0,1] are rejected") {
        CHECK_THROWS_AS(cmd_sweep_bandwidth(cfg, {0.5, 1.5}), std::invalid_argument);
        CHECK_THROWS_AS(cmd_sweep_bandwidth(cfg, {}), std::invalid_argument);
    }
}

TEST_CASE("finetune") {
    const ExperimentConfig cfg = tiny_config(scratch_dir("s2f_pl_ft"));
    (void)cmd_simulate(cfg);

    SUBCASE("fraction selects ceil(f*n) frames") {
        const FinetuneResult r = cmd_finetune_volume(cfg, 0.5);
        CHECK(r.frames_used == 4);
        CHECK(fs::exists(r.csv_path));
        CHECK(fs::exists(cfg.output_dir / "ckpt_finetune.s2fw"));
        CHECK(r.wall_seconds > 0.0);
    }

    SUBCASE("fraction 1.0 reproduces cmd_train exactly") {
        const TrainResult full = cmd_train(cfg, Scheme::s2f);
        const FinetuneResult r = cmd_finetune_volume(cfg, 1.0);
        CHECK(r.frames_used == cfg.n_bscans);
        const Params<float> a = load_checkpoint(checkpoint_path(cfg, Scheme::s2f));
        const Params<float> b = load_checkpoint(cfg.output_dir / "ckpt_finetune.s2fw");
        REQUIRE(a.blocks.size() == b.blocks.size());
        for (std::size_t i = 0; i < a.blocks.size(); ++i) CHECK(a.blocks[i].data == b.blocks[i].data);
        (void)full;
    }

    SUBCASE("fraction outside (0,1] is rejected") {
        CHECK_THROWS_AS(cmd_finetune_volume(cfg, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(cmd_finetune_volume(cfg, 1.5), std::invalid_argument);
    }
}

TEST_CASE("additive-image-noise mode realizes exact zero-mean pairs") {
    ExperimentConfig cfg = tiny_config(scratch_dir("s2f_pl_add"));
    cfg.noise.mode = NoiseMode::additive_gaussian_on_image;
    cfg.noise.detector_noise_std = 0.1;

    VolumeBundle bundle = simulate_bundle(cfg, cfg.seed, 4);
    ReconCache cache(&bundle, cfg.recon, {});

    // the shared-realization images differ only by the additive noise fields
    const BScanImage& y1 = cache.image({0, 0, -1});
    const BScanImage& y2 = cache.image({0, 1, -1});
    REQUIRE(y1.px.size() == y2.px.size());
    double mean_diff = 0.0, var_diff = 0.0;
    for (std::size_t i = 0; i < y1.px.size(); ++i) mean_diff += y1.px[i] - y2.px[i];
    mean_diff /= static_cast<double>(y1.px.size());
    for (std::size_t i = 0; i < y1.px.size(); ++i) {
        const double d = static_cast<double>(y1.px[i]) - y2.px[i] - mean_diff;
        var_diff += d * d;
    }
    var_diff /= static_cast<double>(y1.px.size());
    const double n = static_cast<double>(y1.px.size());
    // difference of two independent N(0, 0.1^2) fields
    CHECK(std::abs(mean_diff) < 4.0 * 0.1 * std::sqrt(2.0 / n));
    CHECK(std::sqrt(var_diff) == doctest::Approx(0.1 * std::sqrt(2.0)).epsilon(0.05));
}

#if defined(S2F_CLI_PATH)
TEST_CASE("cli exit codes") {
    const std::string cli = S2F_CLI_PATH;
    if (cli.empty()) return;
    const fs::path dir = scratch_dir("s2f_pl_cli");
    const fs::path cfg_path = fs::path(S2F_SOURCE_DIR) / "configs" / "tiny.json";

    auto run = [&](const std::string& args) {
        const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        return WEXITSTATUS(rc);
    };

    CHECK(run("simulate --config " + cfg_path.string() + " --out " + (dir / "a").string()) == 0);
    CHECK(run("train --scheme s2f --config " + cfg_path.string() + " --out " + (dir / "a").string()) == 0);
    // unknown scheme -> config error
    CHECK(run("train --scheme foo --config " + cfg_path.string() + " --out " + (dir / "a").string()) == 2);
    // missing volume  -> config error (simulate not run in this directory)
    CHECK(run("train --scheme s2f --config " + cfg_path.string() + " --out " + (dir / "b").string()) == 2);
    // nonexistent config file -> CLI validation error
    CHECK(run("simulate --config /nonexistent.json") != 0);
}
#endif
