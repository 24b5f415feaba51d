#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "s2f/forward_model.hpp"
#include "s2f/image.hpp"
#include "s2f/reconstruction.hpp"

namespace s2f {

enum class Scheme { s2f, n2n, n2v };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

// Lightweight reference to one reconstructed image of a volume.
// window_index: -1 = full spectrum, otherwise index into the dataset windows.
struct PairImageRef {
    int bscan = 0;
    int repeat = 0;
    int window_index = -1;
};

struct TrainingPair {
    Scheme scheme = Scheme::s2f;
    int bscan = 0;  // group key for the train/val split
    PairImageRef input;
    PairImageRef target;
};

// Pairs plus the sub-band windows they reference; images are reconstructed
// lazily so window variants cost no storage.
struct SchemeDataset {
    Scheme scheme = Scheme::s2f;
    std::vector<SpectralWindow> windows;
    std::vector<TrainingPair> pairs;

    // one text record per pair
    std::string manifest(const std::string& volume_name) const;
};

// Input: sub-band of repeat 1 (index 0); target: full spectrum of repeat 2
// (index 1). One pair per (b-scan, window center).
SchemeDataset make_s2f_dataset(const Volume& volume, const SourceSpectrum& spectrum,
                               const std::vector<double>& centers, double bandwidth_fraction);

// Input: full spectrum repeat 1; target: full spectrum repeat 2 (or swapped).
SchemeDataset make_n2n_dataset(const Volume& volume, bool swap_repeats = false);

// Blind-spot pairs: input and target reference the same image; masking is
// applied per training batch.
SchemeDataset make_n2v_dataset(const Volume& volume);

struct MaskedImage {
    BScanImage image;          // values replaced at the masked sites
    std::vector<std::uint8_t> mask;  // 1 at replaced sites
};

// Stratified site selection; each masked pixel is replaced with a uniformly
// chosen *different* pixel of its (2r+1)^2 neighborhood.
MaskedImage apply_n2v_mask(const BScanImage& image, int mask_count, int neighborhood_radius,
                           std::uint64_t seed);

struct DatasetSplit {
    std::vector<TrainingPair> train;
    std::vector<TrainingPair> val;
    double split_ratio = 4.0;
    std::uint64_t seed = 0;
};

// Seeded permutation of b-scan groups; all pairs of one b-scan land on the
// same side (no repeat leakage across the split).
DatasetSplit split_train_val(const std::vector<TrainingPair>& pairs, double split_ratio,
                             std::uint64_t seed);

}  // namespace s2f
