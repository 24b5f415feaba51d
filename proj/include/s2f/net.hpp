#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "s2f/image.hpp"
#include "s2f/tensor.hpp"

namespace s2f {

enum class Activation : std::uint32_t { leaky_relu_01 = 0, linear = 1 };

// Encoder-decoder denoiser with additive skip connections and a residual
// output head. Per level: one 3x3 conv, 2x avg-pool down / nearest up,
// channels double per encoder level. Predicts a correction added to the
// input, so zero parameters give the identity map.
struct ArchDescriptor {
    int levels = 3;         // number of 2x down/up steps
    int base_channels = 16;
    Activation activation = Activation::leaky_relu_01;

    int divisor() const { return 1 << levels; }
    bool operator==(const ArchDescriptor&) const = default;
};

template <typename T>
struct ParamBlock {
    std::string name;
    std::vector<int> shape;  // (co,ci,3,3) for weights, (co) for biases
    std::vector<T> data;
};

template <typename T>
struct Params {
    ArchDescriptor arch;
    std::vector<ParamBlock<T>> blocks;

    std::size_t count() const {
        std::size_t s = 0;
        for (const auto& b : blocks) s += b.data.size();
        return s;
    }
    std::string id() const;  // content hash, used as provenance model id
};

template <typename T>
using Grads = std::vector<std::vector<T>>;  // one vector per param block

// Saved intermediates of one forward pass.
template <typename T>
struct ForwardCache {
    Tensor<T> x;
    std::vector<Tensor<T>> enc_in;  // conv input per encoder level (enc_in[0] unused, == x)
    std::vector<Tensor<T>> z_enc;   // pre-activations
    std::vector<Tensor<T>> e;       // post-activations (skip sources)
    Tensor<T> pb, z_bott, b;
    std::vector<Tensor<T>> u;      // decoder conv inputs per level (index 0 = top)
    std::vector<Tensor<T>> z_dec;  // decoder pre-activations
    std::vector<Tensor<T>> d;      // decoder post-activations
    Tensor<T> corr;
    bool valid = false;
};

template <typename T>
Params<T> net_init(const ArchDescriptor& arch, std::uint64_t seed);

// output = input + correction; input spatial dims must divide 2^levels.
template <typename T>
Tensor<T> net_forward(const Params<T>& params, const Tensor<T>& input, ForwardCache<T>* cache);

template <typename T>
Tensor<T> net_forward(const Params<T>& params, const Tensor<T>& input) {
    return net_forward(params, input, static_cast<ForwardCache<T>*>(nullptr));
}

// loss = sum(mask * (pred - target)^2) / sum(mask); gradient w.r.t. pred.
// mask == nullptr means all ones.
template <typename T>
double l2_loss(const Tensor<T>& pred, const Tensor<T>& target, const Tensor<T>* mask,
               Tensor<T>& dpred);

template <typename T>
double l2_loss(const Tensor<T>& pred, const Tensor<T>& target, Tensor<T>& dpred) {
    return l2_loss(pred, target, static_cast<const Tensor<T>*>(nullptr), dpred);
}

// Reusable intermediate buffers for net_backward; a persistent instance
// avoids reallocating tens of MB per training step.
template <typename T>
struct BackwardWorkspace {
    Tensor<T> dz, daux, dprev, dpb, dchain;
    std::vector<Tensor<T>> de;
};

template <typename T>
Grads<T> net_backward(const Params<T>& params, const ForwardCache<T>& cache, const Tensor<T>& dout,
                      BackwardWorkspace<T>* workspace);

template <typename T>
Grads<T> net_backward(const Params<T>& params, const ForwardCache<T>& cache, const Tensor<T>& dout) {
    return net_backward(params, cache, dout, static_cast<BackwardWorkspace<T>*>(nullptr));
}

template <typename T>
struct AdamState {
    Grads<T> m, v;
    long t = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <typename T>
AdamState<T> make_adam_state(const Params<T>& params, double learning_rate);

// Standard Adam with bias correction; throws on non-finite gradients.
template <typename T>
void adam_step(Params<T>& params, const Grads<T>& grads, AdamState<T>& state);

// Max relative error between analytic and central-difference gradients over
// up to max_samples parameters (all parameters when max_samples == 0).
double grad_check(const Params<double>& params, const Tensor<double>& input,
                  const Tensor<double>& target, const Tensor<double>* mask, double eps,
                  std::size_t max_samples, std::uint64_t seed);

// Forward pass on a [0,1] image; reflect-pads to a multiple of 2^levels and
// crops back; output clipped to [0,1].
BScanImage denoise(const Params<float>& params, const BScanImage& image);

// Checkpoint: magic "S2FW", version, architecture descriptor, block manifest
// (names + shapes), float32 data; optionally Adam state for resume.
void save_checkpoint(const std::filesystem::path& path, const Params<float>& params,
                     const AdamState<float>* opt_state);
Params<float> load_checkpoint(const std::filesystem::path& path,
                              AdamState<float>* opt_state = nullptr);

}  // namespace s2f
