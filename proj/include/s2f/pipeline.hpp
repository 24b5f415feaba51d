#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "s2f/config.hpp"
#include "s2f/forward_model.hpp"
#include "s2f/metrics.hpp"
#include "s2f/reconstruction.hpp"
#include "s2f/schemes.hpp"
#include "s2f/train.hpp"

namespace s2f {

// Simulated volume plus everything needed to reconstruct it consistently.
struct VolumeBundle {
    Volume volume;
    SourceSpectrum spectrum;
    NormConstants norm;
};

VolumeBundle simulate_bundle(const ExperimentConfig& config, std::uint64_t master_seed, int n_bscans);

// Lazily reconstructed, cached images of one volume (log-normalized). In
// additive_gaussian_on_image mode, seeded Gaussian noise is added to each
// materialized image.
class ReconCache {
public:
    ReconCache(const VolumeBundle* bundle, ReconConfig recon, std::vector<SpectralWindow> windows);

    const BScanImage& image(const PairImageRef& ref);
    const std::vector<SpectralWindow>& windows() const { return windows_; }
    PairMaterializer materializer();

private:
    const VolumeBundle* bundle_;
    ReconConfig recon_;
    std::vector<SpectralWindow> windows_;
    std::map<std::tuple<int, int, int>, BScanImage> cache_;
};

// Axial PSF width of a single unit reflector at depth z, reconstructed with
// an optional sub-band window; used for the resolution-law measurements.
double psf_fwhm_px(const SourceSpectrum& spectrum, const ReconConfig& base, double z_um,
                   std::optional<double> center, std::optional<double> beta);

// Depth pixel of the same reflector's peak.
int psf_peak_pixel(const SourceSpectrum& spectrum, const ReconConfig& base, double z_um,
                   std::optional<double> center, std::optional<double> beta);

// --- command implementations (shared by the CLI and the test suites) ---

std::filesystem::path volume_path(const ExperimentConfig& config);
std::filesystem::path checkpoint_path(const ExperimentConfig& config, Scheme scheme);
std::filesystem::path history_path(const ExperimentConfig& config, Scheme scheme);

// simulate the training volume, write OCTI + provenance manifest
std::filesystem::path cmd_simulate(const ExperimentConfig& config);

// reconstruct one image from the simulated volume, write OCTB + PGM
std::filesystem::path cmd_reconstruct(const ExperimentConfig& config, int bscan, int repeat,
                                      std::optional<double> center, std::optional<double> beta);

// build the scheme dataset, train, write checkpoint + history CSV + manifest
TrainResult cmd_train(const ExperimentConfig& config, Scheme scheme, bool resume = false);

// denoise one b-scan of the training volume with a checkpoint
std::filesystem::path cmd_denoise(const ExperimentConfig& config,
                                  const std::filesystem::path& checkpoint, int bscan);

struct MethodEval {
    std::string method;
    std::vector<MetricsReport> per_image;
    double mean_snr = 0.0;
    double mean_cnr = 0.0;
    double mean_var = 0.0;
    double mean_psnr = 0.0;
};

// metrics on the held-out test volume; optionally after denoising
MethodEval cmd_evaluate(const ExperimentConfig& config,
                        std::optional<std::filesystem::path> checkpoint);

struct CompareResult {
    std::vector<MethodEval> methods;  // R1, Merged, S2F, N2N, N2V
    std::filesystem::path csv_path;
};

// the five-row protocol on the same held-out images and ROIs
CompareResult cmd_compare(const ExperimentConfig& config);

struct SweepRow {
    double beta = 0.0;
    double input_fwhm_px = 0.0;
    double full_fwhm_px = 0.0;
    double mean_snr = 0.0;
    double mean_cnr = 0.0;
    double mean_var = 0.0;
    double mean_psnr = 0.0;
    int convergence_epoch = 0;
    double train_seconds = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::filesystem::path csv_path;
};

// one S2F model per bandwidth, each evaluated on the held-out volume
SweepResult cmd_sweep_bandwidth(const ExperimentConfig& config, const std::vector<double>& betas);

struct FinetuneResult {
    int frames_used = 0;
    double wall_seconds = 0.0;
    MethodEval denoised;
    MethodEval raw;
    std::filesystem::path csv_path;
};

// train a dedicated model on a seeded fraction of the volume's frames, then
// denoise the whole volume with it
FinetuneResult cmd_finetune_volume(const ExperimentConfig& config, double frame_fraction);

}  // namespace s2f
