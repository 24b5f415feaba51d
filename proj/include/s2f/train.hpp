#pragma once

#include <functional>
#include <string>
#include <vector>

#include "s2f/net.hpp"
#include "s2f/schemes.hpp"

namespace s2f {

struct TrainConfig {
    Scheme scheme = Scheme::s2f;
    int batch_size = 2;
    int epochs = 60;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    int patience = 15;         // epochs without val improvement before early stop; 0 disables
    int report_interval = 10;  // stderr progress every k epochs; 0 silences
    ArchDescriptor arch;
    int n2v_mask_count = 256;
    int n2v_radius = 2;
};

struct EpochStats {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double seconds = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    double initial_val_loss = 0.0;  // validation loss of the untrained net
    int convergence_epoch = 0;      // first epoch within 1% of the minimum val loss
    bool aborted = false;
    std::string abort_reason;

    std::string to_csv() const;
    static int convergence_from(const std::vector<EpochStats>& epochs);
};

struct PairImages {
    const BScanImage* input = nullptr;
    const BScanImage* target = nullptr;
};

// Materializes the images a pair refers to; pointers must stay valid until
// the next call batch completes.
using PairMaterializer = std::function<PairImages(const TrainingPair&)>;

struct TrainResult {
    Params<float> params;  // best-validation checkpoint
    AdamState<float> opt;  // optimizer state at the last completed step
    TrainHistory history;
};

// Deterministic training loop: seeded shuffling, per-batch N2V masking with
// derived seeds, best-val checkpointing, early stopping, loud abort on
// non-finite losses (returns the last good checkpoint).
TrainResult train(const DatasetSplit& split, const TrainConfig& config,
                  const PairMaterializer& images, const Params<float>* resume_params = nullptr,
                  const AdamState<float>* resume_state = nullptr);

}  // namespace s2f
