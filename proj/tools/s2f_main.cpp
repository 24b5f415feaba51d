// Config-driven experiment runner: simulate, reconstruct, train, denoise,
// evaluate, compare, sweep-bandwidth, finetune.
//
// Exit codes: 0 success, 2 config/validation error, 3 runtime abort.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "s2f/config.hpp"
#include "s2f/pipeline.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "override the master seed");
    cmd->add_option("--out", opts.out_dir, "override the output directory");
}

s2f::ExperimentConfig load(const CommonOpts& opts) {
    s2f::ExperimentConfig config = s2f::load_config(opts.config_path);
    if (opts.seed || opts.out_dir) {
        s2f::apply_overrides(config, opts.seed,
                             opts.out_dir ? std::optional<std::filesystem::path>(*opts.out_dir)
                                          : std::nullopt);
    }
    return config;
}

void print_method(const s2f::MethodEval& m) {
    std::printf("%-12s snr=%8.3f dB  cnr=%7.3f dB  var=%12.5g  psnr=%8.3f dB\n", m.method.c_str(),
                m.mean_snr, m.mean_cnr, m.mean_var, m.mean_psnr);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic OCT despeckling laboratory (sub2full / noise2noise / noise2void)"};
    app.require_subcommand(1);

    CommonOpts opts;

    auto* c_sim = app.add_subcommand("simulate", "simulate the interferogram volume");
    add_common(c_sim, opts);

    auto* c_rec = app.add_subcommand("reconstruct", "reconstruct one b-scan to OCTB + PGM");
    add_common(c_rec, opts);
    int bscan = 0, repeat = 0;
    std::optional<double> w_center, w_beta;
    c_rec->add_option("--bscan", bscan, "b-scan index");
    c_rec->add_option("--repeat", repeat, "repeat index");
    c_rec->add_option("--window-center", w_center, "sub-band center fraction");
    c_rec->add_option("--window-beta", w_beta, "sub-band bandwidth fraction");

    auto* c_train = app.add_subcommand("train", "train a denoiser with one scheme");
    add_common(c_train, opts);
    std::string scheme_str = "s2f";
    bool resume = false;
    c_train->add_option("--scheme", scheme_str, "s2f | n2n | n2v")->required();
    c_train->add_flag("--resume", resume, "resume from the existing checkpoint");

    auto* c_den = app.add_subcommand("denoise", "denoise one b-scan with a checkpoint");
    add_common(c_den, opts);
    std::string ckpt_path;
    c_den->add_option("--checkpoint", ckpt_path, "checkpoint file (default: ckpt_s2f.s2fw)");
    c_den->add_option("--bscan", bscan, "b-scan index");

    auto* c_eval = app.add_subcommand("evaluate", "metrics on the held-out volume");
    add_common(c_eval, opts);
    std::string eval_ckpt;
    c_eval->add_option("--checkpoint", eval_ckpt, "optional checkpoint to denoise with");

    auto* c_cmp = app.add_subcommand("compare", "R1 / Merged / S2F / N2N / N2V protocol");
    add_common(c_cmp, opts);

    auto* c_sweep = app.add_subcommand("sweep-bandwidth", "train and evaluate one model per bandwidth");
    add_common(c_sweep, opts);
    std::vector<double> betas{0.10, 0.25, 0.50, 0.75, 0.90};
    c_sweep->add_option("--betas", betas, "bandwidth fractions")->delimiter(',');

    auto* c_fine = app.add_subcommand("finetune", "per-volume fine-tuning on a frame subset");
    add_common(c_fine, opts);
    double fraction = 0.10;
    c_fine->add_option("--fraction", fraction, "fraction of frames to train on");

    CLI11_PARSE(app, argc, argv);

    try {
        const s2f::ExperimentConfig config = load(opts);

        if (c_sim->parsed()) {
            const auto path = s2f::cmd_simulate(config);
            std::printf("wrote %s\n", path.string().c_str());
        } else if (c_rec->parsed()) {
            const auto path = s2f::cmd_reconstruct(config, bscan, repeat, w_center, w_beta);
            std::printf("wrote %s (+ .pgm)\n", path.string().c_str());
        } else if (c_train->parsed()) {
            const s2f::Scheme scheme = s2f::scheme_from_name(scheme_str);
            const s2f::TrainResult r = s2f::cmd_train(config, scheme, resume);
            std::printf("trained %s: %zu epochs, best val loss %.6g, convergence epoch %d\n",
                        scheme_str.c_str(), r.history.epochs.size(),
                        r.history.epochs.empty()
                            ? 0.0
                            : std::min_element(r.history.epochs.begin(), r.history.epochs.end(),
                                               [](const auto& a, const auto& b) {
                                                   return a.val_loss < b.val_loss;
                                               })
                                  ->val_loss,
                        r.history.convergence_epoch);
            std::printf("wrote %s and %s\n", s2f::checkpoint_path(config, scheme).string().c_str(),
                        s2f::history_path(config, scheme).string().c_str());
        } else if (c_den->parsed()) {
            const std::filesystem::path ckpt =
                ckpt_path.empty() ? s2f::checkpoint_path(config, s2f::Scheme::s2f)
                                  : std::filesystem::path(ckpt_path);
            const auto path = s2f::cmd_denoise(config, ckpt, bscan);
            std::printf("wrote %s (+ .pgm)\n", path.string().c_str());
        } else if (c_eval->parsed()) {
            const auto ckpt = eval_ckpt.empty()
                                  ? std::nullopt
                                  : std::optional<std::filesystem::path>(eval_ckpt);
            const s2f::MethodEval ev = s2f::cmd_evaluate(config, ckpt);
            print_method(ev);
        } else if (c_cmp->parsed()) {
            const s2f::CompareResult r = s2f::cmd_compare(config);
            for (const auto& m : r.methods) print_method(m);
            std::printf("wrote %s\n", r.csv_path.string().c_str());
        } else if (c_sweep->parsed()) {
            const s2f::SweepResult r = s2f::cmd_sweep_bandwidth(config, betas);
            for (const auto& row : r.rows)
                std::printf("beta=%.2f  input_fwhm=%6.2f px  snr=%8.3f dB  psnr=%8.3f dB  (%.1f s)\n",
                            row.beta, row.input_fwhm_px, row.mean_snr, row.mean_psnr,
                            row.train_seconds);
            std::printf("wrote %s\n", r.csv_path.string().c_str());
        } else if (c_fine->parsed()) {
            const s2f::FinetuneResult r = s2f::cmd_finetune_volume(config, fraction);
            std::printf("finetune: %d frames, %.1f s wall\n", r.frames_used, r.wall_seconds);
            print_method(r.raw);
            print_method(r.denoised);
            std::printf("wrote %s\n", r.csv_path.string().c_str());
        }
        return 0;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 3;
    }
}
