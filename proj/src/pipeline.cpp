#include "s2f/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "s2f/io.hpp"
#include "s2f/net.hpp"
#include "s2f/rng.hpp"

namespace s2f {

namespace {

using nlohmann::json;

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f << text;
    if (!f) throw std::runtime_error("short write: " + path.string());
}

void write_manifest(const ExperimentConfig& config, const std::string& name, json extra) {
    extra["config_hash"] = config.config_hash;
    extra["master_seed"] = config.seed;
    write_text(config.output_dir / (name + ".manifest.json"), extra.dump(2) + "\n");
}

void ensure_output_dir(const ExperimentConfig& config) {
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec || !std::filesystem::is_directory(config.output_dir))
        throw std::invalid_argument("output_dir is not writable: " + config.output_dir.string());
}

Volume load_volume_with_context(const ExperimentConfig& config) {
    const auto path = volume_path(config);
    if (!std::filesystem::exists(path))
        throw std::invalid_argument("volume file missing (run `simulate` first): " + path.string());
    Volume v = read_octi(path);
    const SourceSpectrum spectrum = config.make_spectrum();
    if (v.n_k != config.n_k || std::abs(v.k_min - spectrum.k_min()) > 1e-9 ||
        std::abs(v.k_max - spectrum.k_max()) > 1e-9)
        throw std::invalid_argument("volume file does not match the configured spectrum: " + path.string());
    v.master_seed = config.seed;
    v.noise = config.noise;
    return v;
}

SchemeDataset build_dataset(const ExperimentConfig& config, const VolumeBundle& bundle, Scheme scheme) {
    switch (scheme) {
        case Scheme::s2f:
            return make_s2f_dataset(bundle.volume, bundle.spectrum, config.centers,
                                    config.bandwidth_fraction);
        case Scheme::n2n: return make_n2n_dataset(bundle.volume, config.n2n_swap_repeats);
        case Scheme::n2v: return make_n2v_dataset(bundle.volume);
    }
    throw std::logic_error("unknown scheme");
}

BScanImage merge_repeats(const BScanImage& a, const BScanImage& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw std::logic_error("merge: shape mismatch");
    BScanImage m = a;
    for (std::size_t i = 0; i < m.px.size(); ++i) m.px[i] = 0.5f * (a.px[i] + b.px[i]);
    m.prov.repeat = -1;
    m.prov.notes = "mean of repeats 0 and 1";
    return m;
}

MethodEval summarize(const std::string& method, std::vector<MetricsReport> reports) {
    MethodEval ev;
    ev.method = method;
    double snr = 0, cnr = 0, var = 0, psnr = 0;
    int n_psnr = 0;
    for (const auto& r : reports) {
        snr += r.snr_db;
        cnr += r.cnr_db;
        var += r.var_value;
        if (r.psnr_db && std::isfinite(*r.psnr_db)) {
            psnr += *r.psnr_db;
            ++n_psnr;
        }
    }
    const double n = static_cast<double>(reports.size());
    ev.mean_snr = snr / n;
    ev.mean_cnr = cnr / n;
    ev.mean_var = var / n;
    ev.mean_psnr = n_psnr ? psnr / n_psnr : std::numeric_limits<double>::quiet_NaN();
    ev.per_image = std::move(reports);
    return ev;
}

std::string method_csv(const std::vector<MethodEval>& methods) {
    std::string csv = MetricsReport::csv_header() + "\n";
    char buf[256];
    for (const MethodEval& m : methods) {
        for (const auto& r : m.per_image) csv += r.csv_row() + "\n";
        std::snprintf(buf, sizeof(buf), "mean_%s,,%s,%.9g,%.9g,%.9g,%.9g,\n", m.method.c_str(),
                      m.method.c_str(), m.mean_snr, m.mean_cnr, m.mean_var, m.mean_psnr);
        csv += buf;
    }
    return csv;
}

}  // namespace

VolumeBundle simulate_bundle(const ExperimentConfig& config, std::uint64_t master_seed, int n_bscans) {
    VolumeBundle b;
    b.spectrum = config.make_spectrum();
    b.volume = simulate_volume(config.phantom, b.spectrum, config.noise, n_bscans, config.n_repeats,
                               master_seed);
    b.norm = compute_norm_constants(b.volume, config.recon);
    return b;
}

ReconCache::ReconCache(const VolumeBundle* bundle, ReconConfig recon,
                       std::vector<SpectralWindow> windows)
    : bundle_(bundle), recon_(std::move(recon)), windows_(std::move(windows)) {
    recon_.output_scale = ImageScale::log_normalized;
    recon_.window.reset();
}

const BScanImage& ReconCache::image(const PairImageRef& ref) {
    const auto key = std::make_tuple(ref.bscan, ref.repeat, ref.window_index);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    ReconConfig rc = recon_;
    if (ref.window_index >= 0) {
        if (ref.window_index >= static_cast<int>(windows_.size()))
            throw std::invalid_argument("recon cache: window index out of range");
        rc.window = windows_[static_cast<std::size_t>(ref.window_index)];
    }
    BScanImage img = reconstruct_bscan(bundle_->volume, ref.bscan, ref.repeat, rc, bundle_->norm);

    if (bundle_->volume.noise.mode == NoiseMode::additive_gaussian_on_image &&
        bundle_->volume.noise.detector_noise_std > 0.0) {
        Rng rng(derive_seed(bundle_->volume.master_seed,
                            {0xADDull, static_cast<std::uint64_t>(ref.bscan),
                             static_cast<std::uint64_t>(ref.repeat),
                             static_cast<std::uint64_t>(ref.window_index + 1)}));
        const double std = bundle_->volume.noise.detector_noise_std;
        // no clipping: the noise must stay exactly zero-mean
        for (auto& p : img.px) p = static_cast<float>(p + std * rng.normal());
    }
    return cache_.emplace(key, std::move(img)).first->second;
}

PairMaterializer ReconCache::materializer() {
    return [this](const TrainingPair& pair) {
        PairImages pi;
        pi.input = &image(pair.input);
        pi.target = &image(pair.target);
        return pi;
    };
}

namespace {

VolumeBundle single_reflector_bundle(const SourceSpectrum& spectrum, double z_um) {
    ScattererField field;
    field.alines.resize(1);
    field.alines[0].push_back({z_um, 1.0, 0.0});
    Interferogram ig = simulate_fringes(field, spectrum, {0.0, NoiseMode::physical_speckle}, 0);
    VolumeBundle b;
    b.spectrum = spectrum;
    b.volume.n_k = ig.n_k;
    b.volume.n_alines = 1;
    b.volume.n_bscans = 1;
    b.volume.n_repeats = 1;
    b.volume.k_min = spectrum.k_min();
    b.volume.k_max = spectrum.k_max();
    b.volume.data = std::move(ig.data);
    return b;
}

}  // namespace

double psf_fwhm_px(const SourceSpectrum& spectrum, const ReconConfig& base, double z_um,
                   std::optional<double> center, std::optional<double> beta) {
    VolumeBundle b = single_reflector_bundle(spectrum, z_um);
    ReconConfig rc = base;
    rc.output_scale = ImageScale::linear;
    if (beta) rc.window = make_gaussian_window(center.value_or(0.5), *beta, spectrum);
    const BScanImage img = reconstruct_bscan(b.volume, 0, 0, rc, NormConstants{});
    return measure_axial_fwhm(img, 0);
}

int psf_peak_pixel(const SourceSpectrum& spectrum, const ReconConfig& base, double z_um,
                   std::optional<double> center, std::optional<double> beta) {
    VolumeBundle b = single_reflector_bundle(spectrum, z_um);
    ReconConfig rc = base;
    rc.output_scale = ImageScale::linear;
    if (beta) rc.window = make_gaussian_window(center.value_or(0.5), *beta, spectrum);
    const BScanImage img = reconstruct_bscan(b.volume, 0, 0, rc, NormConstants{});
    int peak = 0;
    for (int d = 1; d < img.rows; ++d)
        if (img.at(d, 0) > img.at(peak, 0)) peak = d;
    return peak;
}

std::filesystem::path volume_path(const ExperimentConfig& config) {
    return config.output_dir / "volume.octi";
}
std::filesystem::path checkpoint_path(const ExperimentConfig& config, Scheme scheme) {
    return config.output_dir / ("ckpt_" + scheme_name(scheme) + ".s2fw");
}
std::filesystem::path history_path(const ExperimentConfig& config, Scheme scheme) {
    return config.output_dir / ("history_" + scheme_name(scheme) + ".csv");
}

std::filesystem::path cmd_simulate(const ExperimentConfig& config) {
    ensure_output_dir(config);
    const SourceSpectrum spectrum = config.make_spectrum();
    const Volume vol = simulate_volume(config.phantom, spectrum, config.noise, config.n_bscans,
                                       config.n_repeats, config.seed);
    const auto path = volume_path(config);
    write_octi(path, vol);
    write_manifest(config, "volume",
                   json{{"command", "simulate"},
                        {"octi", path.filename().string()},
                        {"phantom_id", vol.phantom_id},
                        {"n_bscans", vol.n_bscans},
                        {"n_repeats", vol.n_repeats},
                        {"n_alines", vol.n_alines},
                        {"n_k", vol.n_k}});
    return path;
}

std::filesystem::path cmd_reconstruct(const ExperimentConfig& config, int bscan, int repeat,
                                      std::optional<double> center, std::optional<double> beta) {
    ensure_output_dir(config);
    VolumeBundle b;
    b.spectrum = config.make_spectrum();
    b.volume = load_volume_with_context(config);
    b.norm = compute_norm_constants(b.volume, config.recon);

    ReconConfig rc = config.recon;
    rc.output_scale = ImageScale::log_normalized;
    std::string tag = "full";
    if (beta) {
        rc.window = make_gaussian_window(center.value_or(0.5), *beta, b.spectrum);
        tag = rc.window->description;
    }
    const BScanImage img = reconstruct_bscan(b.volume, bscan, repeat, rc, b.norm);

    char name[96];
    std::snprintf(name, sizeof(name), "recon_b%d_r%d_%s", bscan, repeat, tag.c_str());
    const auto base = config.output_dir / name;
    write_octb(base.string() + ".octb", img);
    write_pgm(base.string() + ".pgm", img);
    return base.string() + ".octb";
}

TrainResult cmd_train(const ExperimentConfig& config, Scheme scheme, bool resume) {
    ensure_output_dir(config);
    VolumeBundle bundle;
    bundle.spectrum = config.make_spectrum();
    bundle.volume = load_volume_with_context(config);
    bundle.norm = compute_norm_constants(bundle.volume, config.recon);

    SchemeDataset ds = build_dataset(config, bundle, scheme);
    const DatasetSplit split =
        split_train_val(ds.pairs, config.split_ratio, derive_seed(config.seed, {0x5B117ull}));

    ReconCache cache(&bundle, config.recon, ds.windows);

    TrainConfig tc = config.train;
    tc.scheme = scheme;
    tc.seed = derive_seed(config.seed, {0x712A11ull, static_cast<std::uint64_t>(scheme)});

    Params<float> resume_params;
    AdamState<float> resume_state;
    const Params<float>* rp = nullptr;
    const AdamState<float>* rs = nullptr;
    if (resume) {
        resume_state.learning_rate = tc.learning_rate;
        resume_params = load_checkpoint(checkpoint_path(config, scheme), &resume_state);
        rp = &resume_params;
        rs = &resume_state;
    }

    const TrainResult result = train(split, tc, cache.materializer(), rp, rs);

    // write the (best) checkpoint and history even on abort, then fail loudly
    save_checkpoint(checkpoint_path(config, scheme), result.params, &result.opt);
    write_text(history_path(config, scheme), result.history.to_csv());
    if (result.history.aborted)
        throw std::runtime_error("training aborted: " + result.history.abort_reason +
                                 " (best checkpoint kept at " +
                                 checkpoint_path(config, scheme).string() + ")");
    write_text(config.output_dir / ("dataset_" + scheme_name(scheme) + ".manifest"),
               ds.manifest(volume_path(config).filename().string()));
    write_manifest(config, "train_" + scheme_name(scheme),
                   json{{"command", "train"},
                        {"scheme", scheme_name(scheme)},
                        {"model_id", result.params.id()},
                        {"train_pairs", split.train.size()},
                        {"val_pairs", split.val.size()},
                        {"epochs_run", result.history.epochs.size()},
                        {"initial_val_loss", result.history.initial_val_loss},
                        {"convergence_epoch", result.history.convergence_epoch},
                        {"optimizer_steps", result.opt.t}});
    return result;
}

std::filesystem::path cmd_denoise(const ExperimentConfig& config,
                                  const std::filesystem::path& checkpoint, int bscan) {
    ensure_output_dir(config);
    if (!std::filesystem::exists(checkpoint))
        throw std::invalid_argument("checkpoint missing: " + checkpoint.string());
    const Params<float> params = load_checkpoint(checkpoint);

    VolumeBundle bundle;
    bundle.spectrum = config.make_spectrum();
    bundle.volume = load_volume_with_context(config);
    bundle.norm = compute_norm_constants(bundle.volume, config.recon);

    ReconConfig rc = config.recon;
    rc.output_scale = ImageScale::log_normalized;
    if (config.denoise_subband_input)
        rc.window = make_gaussian_window(config.centers.front(), config.bandwidth_fraction,
                                         bundle.spectrum);
    const BScanImage input = reconstruct_bscan(bundle.volume, bscan, 0, rc, bundle.norm);
    const BScanImage out = denoise(params, input);

    char name[64];
    std::snprintf(name, sizeof(name), "denoised_b%d", bscan);
    const auto base = config.output_dir / name;
    write_octb(base.string() + ".octb", out);
    write_pgm(base.string() + ".pgm", out);
    return base.string() + ".octb";
}

namespace {

// Held-out evaluation context: fresh volume (unseen seed), its normalization,
// clean reference, R1/merged images.
struct EvalContext {
    VolumeBundle bundle;
    BScanImage clean;
    std::vector<BScanImage> r1;      // full-spectrum repeat 0
    std::vector<BScanImage> merged;  // mean of both repeats
};

EvalContext make_eval_context(const ExperimentConfig& config) {
    if (config.n_repeats < 2)
        throw std::invalid_argument("evaluation requires n_repeats >= 2 (merged row)");
    EvalContext ctx;
    ctx.bundle = simulate_bundle(config, config.seed + config.eval_seed_offset, config.eval_images);

    ReconConfig rc = config.recon;
    rc.output_scale = ImageScale::log_normalized;
    const PhantomModel model = build_phantom(config.phantom);
    ctx.clean = clean_reference(model, ctx.bundle.spectrum, rc, ctx.bundle.norm,
                                config.clean_realizations,
                                derive_seed(config.seed, {0xC1EAFull}));

    for (int b = 0; b < ctx.bundle.volume.n_bscans; ++b) {
        ctx.r1.push_back(reconstruct_bscan(ctx.bundle.volume, b, 0, rc, ctx.bundle.norm));
        if (ctx.bundle.volume.n_repeats > 1) {
            const BScanImage r2 = reconstruct_bscan(ctx.bundle.volume, b, 1, rc, ctx.bundle.norm);
            ctx.merged.push_back(merge_repeats(ctx.r1.back(), r2));
        }
    }
    return ctx;
}

std::vector<MetricsReport> eval_images(const ExperimentConfig& config,
                                       const std::vector<BScanImage>& images,
                                       const BScanImage& clean, const std::string& method,
                                       const std::string& model_id) {
    std::vector<MetricsReport> reports;
    for (std::size_t i = 0; i < images.size(); ++i) {
        MetricsReport r = metrics_report(images[i], config.structure_rois, config.background_roi, &clean);
        r.image_id = method + "_img" + std::to_string(i);
        r.model_id = model_id;
        r.scheme = method;
        reports.push_back(std::move(r));
    }
    return reports;
}

}  // namespace

MethodEval cmd_evaluate(const ExperimentConfig& config,
                        std::optional<std::filesystem::path> checkpoint) {
    ensure_output_dir(config);
    EvalContext ctx = make_eval_context(config);

    std::string method = "R1";
    std::string model_id;
    std::vector<BScanImage> images = ctx.r1;
    if (checkpoint) {
        if (!std::filesystem::exists(*checkpoint))
            throw std::invalid_argument("checkpoint missing: " + checkpoint->string());
        const Params<float> params = load_checkpoint(*checkpoint);
        model_id = params.id();
        method = "denoised";
        for (auto& img : images) img = denoise(params, img);
    }

    MethodEval ev = summarize(method, eval_images(config, images, ctx.clean, method, model_id));
    write_text(config.output_dir / "metrics.csv", method_csv({ev}));
    return ev;
}

CompareResult cmd_compare(const ExperimentConfig& config) {
    ensure_output_dir(config);

    // all three checkpoints must exist before any compute
    std::map<Scheme, Params<float>> models;
    for (const Scheme s : {Scheme::s2f, Scheme::n2n, Scheme::n2v}) {
        const auto path = checkpoint_path(config, s);
        if (!std::filesystem::exists(path))
            throw std::invalid_argument("checkpoint missing for scheme " + scheme_name(s) + ": " +
                                        path.string());
        models.emplace(s, load_checkpoint(path));
    }

    EvalContext ctx = make_eval_context(config);

    CompareResult result;
    result.methods.push_back(summarize("R1", eval_images(config, ctx.r1, ctx.clean, "R1", "")));
    result.methods.push_back(
        summarize("Merged", eval_images(config, ctx.merged, ctx.clean, "Merged", "")));

    for (const Scheme s : {Scheme::s2f, Scheme::n2n, Scheme::n2v}) {
        const Params<float>& params = models.at(s);
        std::vector<BScanImage> denoised;
        denoised.reserve(ctx.r1.size());
        for (const BScanImage& img : ctx.r1) denoised.push_back(denoise(params, img));
        std::string label = scheme_name(s);
        std::transform(label.begin(), label.end(), label.begin(), ::toupper);
        result.methods.push_back(
            summarize(label, eval_images(config, denoised, ctx.clean, label, params.id())));

        write_pgm(config.output_dir / ("preview_" + scheme_name(s) + "_img0.pgm"), denoised.front());
    }
    write_pgm(config.output_dir / "preview_r1_img0.pgm", ctx.r1.front());
    write_pgm(config.output_dir / "preview_merged_img0.pgm", ctx.merged.front());
    write_pgm(config.output_dir / "preview_clean.pgm", ctx.clean);

    result.csv_path = config.output_dir / "compare.csv";
    write_text(result.csv_path, method_csv(result.methods));
    write_manifest(config, "compare",
                   json{{"command", "compare"}, {"n_images", config.eval_images}});
    return result;
}

SweepResult cmd_sweep_bandwidth(const ExperimentConfig& config, const std::vector<double>& betas) {
    ensure_output_dir(config);
    if (betas.empty()) throw std::invalid_argument("sweep: betas list is empty");
    for (const double b : betas)
        if (!(b > 0.0 && b <= 1.0)) throw std::invalid_argument("sweep: betas must lie in (0,1]");

    const SourceSpectrum spectrum = config.make_spectrum();
    // validate all windows (train centers x betas) before any compute
    for (const double beta : betas)
        for (const double c : config.centers) (void)make_gaussian_window(c, beta, spectrum);

    const double z_probe = 0.43 * M_PI / (2.0 * spectrum.dk());
    const double full_fwhm = psf_fwhm_px(spectrum, config.recon, z_probe, std::nullopt, std::nullopt);

    VolumeBundle bundle;
    bundle.spectrum = spectrum;
    bundle.volume = load_volume_with_context(config);
    bundle.norm = compute_norm_constants(bundle.volume, config.recon);
    EvalContext ctx = make_eval_context(config);

    SweepResult result;
    for (const double beta : betas) {
        const auto t0 = std::chrono::steady_clock::now();
        SchemeDataset ds = make_s2f_dataset(bundle.volume, bundle.spectrum, config.centers, beta);
        const DatasetSplit split =
            split_train_val(ds.pairs, config.split_ratio, derive_seed(config.seed, {0x5B117ull}));
        ReconCache cache(&bundle, config.recon, ds.windows);
        TrainConfig tc = config.train;
        tc.scheme = Scheme::s2f;
        tc.seed = derive_seed(config.seed, {0x712A11ull, static_cast<std::uint64_t>(Scheme::s2f)});
        const TrainResult tr = train(split, tc, cache.materializer(), nullptr, nullptr);
        if (tr.history.aborted)
            throw std::runtime_error("sweep training aborted at beta " + std::to_string(beta) + ": " +
                                     tr.history.abort_reason);
        const auto t1 = std::chrono::steady_clock::now();

        char ckpt_name[64];
        std::snprintf(ckpt_name, sizeof(ckpt_name), "ckpt_sweep_beta%.2f.s2fw", beta);
        save_checkpoint(config.output_dir / ckpt_name, tr.params, nullptr);

        std::vector<BScanImage> denoised;
        for (const BScanImage& img : ctx.r1) denoised.push_back(denoise(tr.params, img));
        const MethodEval ev =
            summarize("s2f", eval_images(config, denoised, ctx.clean, "s2f", tr.params.id()));

        SweepRow row;
        row.beta = beta;
        row.input_fwhm_px = psf_fwhm_px(spectrum, config.recon, z_probe, 0.5, beta);
        row.full_fwhm_px = full_fwhm;
        row.mean_snr = ev.mean_snr;
        row.mean_cnr = ev.mean_cnr;
        row.mean_var = ev.mean_var;
        row.mean_psnr = ev.mean_psnr;
        row.convergence_epoch = tr.history.convergence_epoch;
        row.train_seconds = std::chrono::duration<double>(t1 - t0).count();
        result.rows.push_back(row);

        char name[64];
        std::snprintf(name, sizeof(name), "sweep_beta%.2f_img0.pgm", beta);
        write_pgm(config.output_dir / name, denoised.front());
    }

    std::string csv =
        "beta,input_fwhm_px,full_fwhm_px,snr_db,cnr_db,var_value,psnr_db,convergence_epoch,"
        "train_seconds\n";
    char buf[256];
    for (const SweepRow& r : result.rows) {
        std::snprintf(buf, sizeof(buf), "%.4g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d,%.3f\n", r.beta,
                      r.input_fwhm_px, r.full_fwhm_px, r.mean_snr, r.mean_cnr, r.mean_var, r.mean_psnr,
                      r.convergence_epoch, r.train_seconds);
        csv += buf;
    }
    result.csv_path = config.output_dir / "sweep.csv";
    write_text(result.csv_path, csv);
    return result;
}

FinetuneResult cmd_finetune_volume(const ExperimentConfig& config, double frame_fraction) {
    ensure_output_dir(config);
    if (!(frame_fraction > 0.0 && frame_fraction <= 1.0))
        throw std::invalid_argument("finetune: fraction must lie in (0,1]");

    VolumeBundle bundle;
    bundle.spectrum = config.make_spectrum();
    bundle.volume = load_volume_with_context(config);
    bundle.norm = compute_norm_constants(bundle.volume, config.recon);

    const int n_frames = static_cast<int>(
        std::ceil(frame_fraction * static_cast<double>(bundle.volume.n_bscans) - 1e-12));

    // seeded frame subset
    std::vector<int> frames(static_cast<std::size_t>(bundle.volume.n_bscans));
    for (std::size_t i = 0; i < frames.size(); ++i) frames[i] = static_cast<int>(i);
    Rng rng(derive_seed(config.seed, {0xF7A3ull}));
    for (std::size_t i = frames.size() - 1; i > 0; --i) {
        const std::size_t j = rng.uniform_index(i + 1);
        std::swap(frames[i], frames[j]);
    }
    frames.resize(static_cast<std::size_t>(n_frames));
    std::sort(frames.begin(), frames.end());

    const auto t0 = std::chrono::steady_clock::now();

    SchemeDataset full_ds =
        make_s2f_dataset(bundle.volume, bundle.spectrum, config.centers, config.bandwidth_fraction);
    SchemeDataset ds;
    ds.scheme = full_ds.scheme;
    ds.windows = full_ds.windows;
    for (const TrainingPair& p : full_ds.pairs)
        if (std::binary_search(frames.begin(), frames.end(), p.bscan)) ds.pairs.push_back(p);

    // same split/train seeds as cmd_train, so fraction 1.0 reproduces it exactly
    const DatasetSplit split =
        split_train_val(ds.pairs, config.split_ratio, derive_seed(config.seed, {0x5B117ull}));
    ReconCache cache(&bundle, config.recon, ds.windows);

    TrainConfig tc = config.train;
    tc.scheme = Scheme::s2f;
    tc.seed = derive_seed(config.seed, {0x712A11ull, static_cast<std::uint64_t>(Scheme::s2f)});
    const TrainResult tr = train(split, tc, cache.materializer(), nullptr, nullptr);
    if (tr.history.aborted) throw std::runtime_error("finetune training aborted: " + tr.history.abort_reason);

    // denoise every frame of the volume
    ReconConfig rc = config.recon;
    rc.output_scale = ImageScale::log_normalized;
    std::vector<BScanImage> raw, denoised;
    for (int b = 0; b < bundle.volume.n_bscans; ++b) {
        raw.push_back(reconstruct_bscan(bundle.volume, b, 0, rc, bundle.norm));
        denoised.push_back(denoise(tr.params, raw.back()));
    }
    const auto t1 = std::chrono::steady_clock::now();

    const PhantomModel model = build_phantom(config.phantom);
    const BScanImage clean = clean_reference(model, bundle.spectrum, rc, bundle.norm,
                                             config.clean_realizations,
                                             derive_seed(config.seed, {0xC1EAFull}));

    FinetuneResult result;
    result.frames_used = n_frames;
    result.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    result.raw = summarize("R1", eval_images(config, raw, clean, "R1", ""));
    result.denoised =
        summarize("finetune_s2f", eval_images(config, denoised, clean, "finetune_s2f", tr.params.id()));

    save_checkpoint(config.output_dir / "ckpt_finetune.s2fw", tr.params, &tr.opt);
    std::string csv = "# finetune fraction=" + std::to_string(frame_fraction) +
                      " frames=" + std::to_string(n_frames) +
                      " wall_seconds=" + std::to_string(result.wall_seconds) + "\n";
    csv += method_csv({result.raw, result.denoised});
    result.csv_path = config.output_dir / "finetune.csv";
    write_text(result.csv_path, csv);
    write_manifest(config, "finetune",
                   json{{"command", "finetune"},
                        {"fraction", frame_fraction},
                        {"frames_used", n_frames},
                        {"wall_seconds", result.wall_seconds},
                        {"model_id", tr.params.id()}});
    return result;
}

}  // namespace s2f
