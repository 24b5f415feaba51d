#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "s2f/forward_model.hpp"
#include "s2f/metrics.hpp"
#include "s2f/phantom.hpp"
#include "s2f/reconstruction.hpp"
#include "s2f/train.hpp"

namespace s2f {

// One config file drives a full experiment. Validated as a whole before any
// command does work (windows on-grid, divisibility, ROI bounds).
struct ExperimentConfig {
    int version = 1;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;

    PhantomSpec phantom;

    double lambda_min_nm = 460.0;
    double lambda_max_nm = 660.0;
    double fwhm_nm = 90.0;
    int n_k = 512;

    NoiseConfig noise;
    int n_bscans = 64;
    int n_repeats = 2;

    ReconConfig recon;  // window left empty; sub-bands come from `centers`

    std::vector<double> centers = {0.35, 0.5, 0.65};
    double bandwidth_fraction = 0.5;
    bool n2n_swap_repeats = false;

    TrainConfig train;
    double split_ratio = 4.0;

    // evaluation
    int eval_images = 30;
    std::uint64_t eval_seed_offset = 9001;  // test volume seed = seed + offset
    int clean_realizations = 128;
    Roi background_roi;
    std::vector<Roi> structure_rois;
    bool denoise_subband_input = false;  // inference on sub-band instead of full spectrum

    std::string config_hash;  // FNV-1a of the canonical serialized form

    SourceSpectrum make_spectrum() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& json_text);

// CLI overrides; re-derives dependent seeds and the config hash.
void apply_overrides(ExperimentConfig& config, std::optional<std::uint64_t> seed,
                     std::optional<std::filesystem::path> output_dir);

// Re-serialize in canonical (sorted-key) form; basis of config_hash.
std::string canonical_json(const ExperimentConfig& config);

}  // namespace s2f
