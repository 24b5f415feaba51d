#include "s2f/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "s2f/rng.hpp"

namespace s2f {

namespace {

void image_to_plane(const BScanImage& img, Tensor<float>& t, int batch_index) {
    if (t.h != img.rows || t.w != img.cols)
        throw std::invalid_argument("train: image size differs within the dataset");
    float* dst = t.plane(batch_index, 0);
    std::copy(img.px.begin(), img.px.end(), dst);
}

double validation_loss(const Params<float>& params, const DatasetSplit& split,
                       const TrainConfig& config, const PairMaterializer& images,
                       ForwardCache<float>& cache) {
    double acc = 0.0;
    Tensor<float> dpred;
    for (std::size_t i = 0; i < split.val.size(); ++i) {
        const TrainingPair& pair = split.val[i];
        const PairImages pi = images(pair);
        Tensor<float> in(1, 1, pi.input->rows, pi.input->cols);
        Tensor<float> tg(1, 1, pi.target->rows, pi.target->cols);
        image_to_plane(*pi.input, in, 0);
        image_to_plane(*pi.target, tg, 0);

        if (config.scheme == Scheme::n2v) {
            // fixed per-pair mask so the val curve is comparable across epochs
            const MaskedImage mi = apply_n2v_mask(
                *pi.input, config.n2v_mask_count, config.n2v_radius,
                derive_seed(config.seed, {0x7A1Dull, static_cast<std::uint64_t>(i)}));
            image_to_plane(mi.image, in, 0);
            Tensor<float> mask(1, 1, pi.input->rows, pi.input->cols);
            for (std::size_t j = 0; j < mi.mask.size(); ++j) mask.v[j] = static_cast<float>(mi.mask[j]);
            const Tensor<float> pred = net_forward(params, in, &cache);
            acc += l2_loss(pred, tg, &mask, dpred);
        } else {
            const Tensor<float> pred = net_forward(params, in, &cache);
            acc += l2_loss(pred, tg, dpred);
        }
    }
    return acc / static_cast<double>(split.val.size());
}

}  // namespace

std::string TrainHistory::to_csv() const {
    std::string out = "epoch,train_loss,val_loss,seconds\n";
    char buf[128];
    for (const EpochStats& e : epochs) {
        std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.3f\n", e.epoch, e.train_loss, e.val_loss,
                      e.seconds);
        out += buf;
    }
    return out;
}

int TrainHistory::convergence_from(const std::vector<EpochStats>& epochs) {
    if (epochs.empty()) return 0;
    double vmin = epochs.front().val_loss;
    for (const EpochStats& e : epochs) vmin = std::min(vmin, e.val_loss);
    for (const EpochStats& e : epochs)
        if (e.val_loss <= 1.01 * vmin) return e.epoch;
    return epochs.back().epoch;
}

TrainResult train(const DatasetSplit& split, const TrainConfig& config,
                  const PairMaterializer& images, const Params<float>* resume_params,
                  const AdamState<float>* resume_state) {
    if (split.train.empty() || split.val.empty())
        throw std::invalid_argument("train: split must have train and val pairs");
    if (config.batch_size < 1 || config.epochs < 1)
        throw std::invalid_argument("train: batch_size and epochs must be >= 1");
    for (const TrainingPair& p : split.train)
        if (p.scheme != config.scheme)
            throw std::invalid_argument("train: pair scheme does not match the configured scheme");

    Params<float> params = resume_params
                               ? *resume_params
                               : net_init<float>(config.arch, derive_seed(config.seed, {0x1417ull}));
    AdamState<float> adam = resume_state ? *resume_state : make_adam_state(params, config.learning_rate);
    adam.learning_rate = config.learning_rate;

    TrainResult result;
    result.params = params;  // last good checkpoint starts as the initial net
    result.history.convergence_epoch = 0;

    ForwardCache<float> val_cache_init;
    result.history.initial_val_loss = validation_loss(params, split, config, images, val_cache_init);

    double best_val = std::numeric_limits<double>::infinity();
    int epochs_since_best = 0;

    std::vector<std::size_t> order(split.train.size());
    ForwardCache<float> cache;
    ForwardCache<float> val_cache;
    BackwardWorkspace<float> bws;
    Tensor<float> dpred;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();

        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng shuffle_rng(derive_seed(config.seed, {0x5FF1ull, static_cast<std::uint64_t>(epoch)}));
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            const std::size_t j = shuffle_rng.uniform_index(i + 1);
            std::swap(order[i], order[j]);
        }

        double epoch_loss = 0.0;
        std::size_t epoch_px_batches = 0;
        bool aborted = false;

        for (std::size_t start = 0; start < order.size() && !aborted; start += static_cast<std::size_t>(config.batch_size)) {
            const int nb = static_cast<int>(
                std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), order.size() - start));
            const std::size_t batch_index = start / static_cast<std::size_t>(config.batch_size);

            // assemble the batch
            const PairImages first = images(split.train[order[start]]);
            Tensor<float> in(nb, 1, first.input->rows, first.input->cols);
            Tensor<float> tg(nb, 1, first.target->rows, first.target->cols);
            Tensor<float> mask;
            const bool use_mask = config.scheme == Scheme::n2v;
            if (use_mask) mask.resize(nb, 1, first.input->rows, first.input->cols);

            for (int e = 0; e < nb; ++e) {
                const TrainingPair& pair = split.train[order[start + static_cast<std::size_t>(e)]];
                const PairImages pi = e == 0 ? first : images(pair);
                image_to_plane(*pi.target, tg, e);
                if (use_mask) {
                    const MaskedImage mi = apply_n2v_mask(
                        *pi.input, config.n2v_mask_count, config.n2v_radius,
                        derive_seed(config.seed, {0xAA5Cull, static_cast<std::uint64_t>(epoch),
                                                  static_cast<std::uint64_t>(batch_index),
                                                  static_cast<std::uint64_t>(e)}));
                    image_to_plane(mi.image, in, e);
                    float* mp = mask.plane(e, 0);
                    for (std::size_t j = 0; j < mi.mask.size(); ++j) mp[j] = static_cast<float>(mi.mask[j]);
                } else {
                    image_to_plane(*pi.input, in, e);
                }
            }

            const Tensor<float> pred = net_forward(params, in, &cache);
            const double loss = l2_loss(pred, tg, use_mask ? &mask : static_cast<const Tensor<float>*>(nullptr), dpred);
            if (!std::isfinite(loss)) {
                result.history.aborted = true;
                result.history.abort_reason =
                    "non-finite training loss at epoch " + std::to_string(epoch);
                aborted = true;
                break;
            }
            epoch_loss += loss;
            ++epoch_px_batches;

            try {
                const Grads<float> grads = net_backward(params, cache, dpred, &bws);
                adam_step(params, grads, adam);
            } catch (const std::runtime_error& err) {
                result.history.aborted = true;
                result.history.abort_reason = err.what();
                aborted = true;
            }
        }

        if (aborted) break;

        const double val = validation_loss(params, split, config, images, val_cache);
        const auto t1 = std::chrono::steady_clock::now();
        EpochStats st;
        st.epoch = epoch;
        st.train_loss = epoch_px_batches ? epoch_loss / static_cast<double>(epoch_px_batches) : 0.0;
        st.val_loss = val;
        st.seconds = std::chrono::duration<double>(t1 - t0).count();
        result.history.epochs.push_back(st);

        if (config.report_interval > 0 && epoch % config.report_interval == 0)
            std::fprintf(stderr, "[train %s] epoch %3d  train %.5g  val %.5g  (%.1f s)\n",
                         scheme_name(config.scheme).c_str(), epoch, st.train_loss, st.val_loss,
                         st.seconds);

        if (!std::isfinite(val)) {
            result.history.aborted = true;
            result.history.abort_reason = "non-finite validation loss at epoch " + std::to_string(epoch);
            break;
        }

        if (val < best_val) {
            best_val = val;
            result.params = params;
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
        }
        if (config.patience > 0 && epochs_since_best >= config.patience) break;
    }

    result.opt = adam;
    result.history.convergence_epoch = TrainHistory::convergence_from(result.history.epochs);
    return result;
}

}  // namespace s2f
