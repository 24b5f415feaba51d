#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <filesystem>
#include <vector>

#include "s2f/net.hpp"
#include "s2f/rng.hpp"
#include "s2f/train.hpp"

using namespace s2f;

namespace {

// architecture algebra: expected parameter count for the descriptor
std::size_t expected_param_count(int L, int C) {
    auto ch = [C](int l) { return static_cast<std::size_t>(C) << l; };
    std::size_t total = 1 * ch(0) * 9 + ch(0);                       // enc0
    for (int l = 1; l < L; ++l) total += ch(l - 1) * ch(l) * 9 + ch(l);  // enc chain
    total += ch(L - 1) * ch(L - 1) * 9 + ch(L - 1);                  // bottleneck
    for (int l = L - 1; l >= 1; --l) total += ch(l) * ch(l - 1) * 9 + ch(l - 1);  // dec chain
    total += ch(0) * ch(0) * 9 + ch(0);                              // dec0
    total += ch(0) * 1 * 9 + 1;                                      // out
    return total;
}

template <typename T>
Tensor<T> random_tensor(int n, int c, int h, int w, std::uint64_t seed, double lo = 0.0,
                        double hi = 1.0) {
    Tensor<T> t(n, c, h, w);
    Rng rng(seed);
    for (auto& v : t.v) v = static_cast<T>(rng.uniform(lo, hi));
    return t;
}

ArchDescriptor tiny_arch(int L = 1, int C = 2) {
    ArchDescriptor a;
    a.levels = L;
    a.base_channels = C;
    return a;
}

}  // namespace

TEST_CASE("net_init") {
    SUBCASE("parameter count matches the descriptor algebra") {
        for (const auto& [L, C] : std::vector<std::pair<int, int>>{{3, 16}, {1, 2}, {2, 4}}) {
            ArchDescriptor a = tiny_arch(L, C);
            const Params<float> p = net_init<float>(a, 7);
            CHECK(p.count() == expected_param_count(L, C));
        }
    }

    SUBCASE("same seed, identical parameters") {
        const Params<float> a = net_init<float>(tiny_arch(2, 4), 99);
        const Params<float> b = net_init<float>(tiny_arch(2, 4), 99);
        REQUIRE(a.blocks.size() == b.blocks.size());
        for (std::size_t i = 0; i < a.blocks.size(); ++i) CHECK(a.blocks[i].data == b.blocks[i].data);
        CHECK(a.id() == b.id());
    }

    SUBCASE("minimal net preserves an 8x8 shape") {
        const Params<float> p = net_init<float>(tiny_arch(1, 1), 1);
        const Tensor<float> in = random_tensor<float>(1, 1, 8, 8, 5);
        const Tensor<float> out = net_forward(p, in);
        CHECK(out.h == 8);
        CHECK(out.w == 8);
    }

    SUBCASE("indivisible spatial dims are rejected") {
        const Params<float> p = net_init<float>(tiny_arch(3, 2), 1);
        const Tensor<float> in = random_tensor<float>(1, 1, 12, 12, 5);
        CHECK_THROWS_AS(net_forward(p, in), std::invalid_argument);
    }
}

TEST_CASE("net_forward") {
    SUBCASE("zero parameters give the identity (residual form)") {
        Params<float> p = net_init<float>(tiny_arch(2, 4), 3);
        for (auto& b : p.blocks) std::fill(b.data.begin(), b.data.end(), 0.0f);
        const Tensor<float> in = random_tensor<float>(1, 1, 16, 16, 8);
        const Tensor<float> out = net_forward(p, in);
        CHECK(out.v == in.v);
    }

    SUBCASE("shape contract for batched inputs") {
        const Params<float> p = net_init<float>(tiny_arch(3, 4), 3);
        for (const auto& [n, hw] : std::vector<std::pair<int, int>>{{1, 64}, {2, 128}}) {
            const Tensor<float> in = random_tensor<float>(n, 1, hw, hw, 4);
            const Tensor<float> out = net_forward(p, in);
            CHECK(out.n == n);
            CHECK(out.c == 1);
            CHECK(out.h == hw);
            CHECK(out.w == hw);
        }
    }

    SUBCASE("no dead wiring: every kernel weight influences the output") {
        Params<float> p = net_init<float>(tiny_arch(2, 2), 17);
        const Tensor<float> in = random_tensor<float>(1, 1, 16, 16, 21);
        const Tensor<float> base = net_forward(p, in);
        for (std::size_t bi = 0; bi < p.blocks.size(); ++bi) {
            if (p.blocks[bi].shape.size() != 4) continue;  // probe one weight per conv block
            const float orig = p.blocks[bi].data[0];
            p.blocks[bi].data[0] = orig == 0.0f ? 0.5f : orig * 2.0f;
            const Tensor<float> probed = net_forward(p, in);
            p.blocks[bi].data[0] = orig;
            double max_delta = 0.0;
            for (std::size_t i = 0; i < base.v.size(); ++i)
                max_delta = std::max(max_delta, std::abs(static_cast<double>(probed.v[i]) - base.v[i]));
            CHECK(max_delta > 0.0);
        }
    }
}

TEST_CASE("l2 loss") {
    SUBCASE("identical tensors: zero loss, zero gradient") {
        const Tensor<float> a = random_tensor<float>(1, 1, 8, 8, 2);
        Tensor<float> g;
        CHECK(l2_loss(a, a, g) == 0.0);
        for (const float v : g.v) CHECK(v == 0.0f);
    }

    SUBCASE("constant unit difference gives loss 1") {
        Tensor<float> a(1, 1, 8, 8), b(1, 1, 8, 8);
        a.fill(1.5f);
        b.fill(0.5f);
        Tensor<float> g;
        CHECK(l2_loss(a, b, g) == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("masked loss ignores unmasked entries exactly") {
        Tensor<float> pred = random_tensor<float>(1, 1, 8, 8, 4);
        const Tensor<float> target = random_tensor<float>(1, 1, 8, 8, 5);
        Tensor<float> mask(1, 1, 8, 8);
        for (std::size_t i = 0; i < mask.size(); ++i) mask.v[i] = i % 2 == 0 ? 1.0f : 0.0f;
        Tensor<float> g;
        const double base = l2_loss(pred, target, &mask, g);
        pred.v[1] += 100.0f;  // unmasked entry
        const double changed = l2_loss(pred, target, &mask, g);
        CHECK(base == changed);
    }

    SUBCASE("all-zero mask raises") {
        const Tensor<float> a = random_tensor<float>(1, 1, 4, 4, 2);
        Tensor<float> mask(1, 1, 4, 4);
        Tensor<float> g;
        CHECK_THROWS_AS(l2_loss(a, a, &mask, g), std::invalid_argument);
    }
}

TEST_CASE("net_backward basics") {
    const Params<float> p = net_init<float>(tiny_arch(2, 2), 5);
    const Tensor<float> in = random_tensor<float>(1, 1, 16, 16, 6);
    ForwardCache<float> cache;
    (void)net_forward(p, in, &cache);

    SUBCASE("zero upstream gradient gives all-zero parameter gradients") {
        Tensor<float> zero(1, 1, 16, 16);
        const Grads<float> g = net_backward(p, cache, zero);
        for (const auto& blk : g)
            for (const float v : blk) CHECK(v == 0.0f);
    }

    SUBCASE("stale cache is rejected") {
        ForwardCache<float> empty;
        Tensor<float> dout(1, 1, 16, 16);
        CHECK_THROWS_AS(net_backward(p, empty, dout), std::invalid_argument);
    }

    SUBCASE("gradients stay finite at activation kinks") {
        Params<float> pz = net_init<float>(tiny_arch(1, 2), 5);
        // zero biases and a zero input put pre-activations exactly at the kink
        Tensor<float> zin(1, 1, 8, 8);
        ForwardCache<float> c2;
        const Tensor<float> out = net_forward(pz, zin, &c2);
        Tensor<float> target(1, 1, 8, 8);
        target.fill(1.0f);
        Tensor<float> dpred;
        (void)l2_loss(out, target, dpred);
        const Grads<float> g = net_backward(pz, c2, dpred);
        for (const auto& blk : g)
            for (const float v : blk) CHECK(std::isfinite(v));
    }
}

TEST_CASE("gradient check against central differences") {
    const Tensor<double> in = random_tensor<double>(1, 1, 16, 16, 31);
    const Tensor<double> target = random_tensor<double>(1, 1, 16, 16, 32);

    SUBCASE("tiny leaky-relu net: max rel err < 1e-4 over >= 500 parameters") {
        const Params<double> p = net_init<double>(tiny_arch(2, 4), 11);
        REQUIRE(p.count() >= 500);
        const double err = grad_check(p, in, target, nullptr, 1e-5, 0, 0);
        CHECK(err < 1e-4);
    }

    SUBCASE("linear net agrees to 1e-7 (quadratic loss is exact for central differences)") {
        ArchDescriptor a = tiny_arch(2, 4);
        a.activation = Activation::linear;
        const Params<double> p = net_init<double>(a, 11);
        const double err = grad_check(p, in, target, nullptr, 1e-2, 0, 0);
        CHECK(err < 1e-7);
    }

    SUBCASE("masked loss gradients also check out") {
        const Params<double> p = net_init<double>(tiny_arch(1, 2), 13);
        Tensor<double> mask(1, 1, 16, 16);
        Rng rng(77);
        for (auto& m : mask.v) m = rng.uniform() < 0.25 ? 1.0 : 0.0;
        const double err = grad_check(p, in, target, &mask, 1e-5, 0, 0);
        CHECK(err < 1e-4);
    }

    SUBCASE("coarse eps degrades monotonically") {
        const Params<double> p = net_init<double>(tiny_arch(2, 4), 11);
        const double e_fine = grad_check(p, in, target, nullptr, 1e-5, 400, 3);
        const double e_mid = grad_check(p, in, target, nullptr, 3e-2, 400, 3);
        const double e_coarse = grad_check(p, in, target, nullptr, 1e-1, 400, 3);
        CHECK(e_mid > e_fine);
        CHECK(e_coarse > e_mid);
    }
}

TEST_CASE("adam optimizer") {
    Params<float> p = net_init<float>(tiny_arch(1, 2), 21);
    AdamState<float> st = make_adam_state(p, 1e-3);

    SUBCASE("zero gradient leaves parameters unchanged") {
        Grads<float> g(p.blocks.size());
        for (std::size_t i = 0; i < g.size(); ++i) g[i].assign(p.blocks[i].data.size(), 0.0f);
        const Params<float> before = p;
        adam_step(p, g, st);
        for (std::size_t i = 0; i < p.blocks.size(); ++i) CHECK(p.blocks[i].data == before.blocks[i].data);
        CHECK(st.t == 1);
    }

    SUBCASE("first step has magnitude ~ lr per element") {
        Grads<float> g(p.blocks.size());
        for (std::size_t i = 0; i < g.size(); ++i) g[i].assign(p.blocks[i].data.size(), 0.25f);
        const Params<float> before = p;
        adam_step(p, g, st);
        for (std::size_t i = 0; i < p.blocks.size(); ++i)
            for (std::size_t j = 0; j < p.blocks[i].data.size(); ++j) {
                const double delta = static_cast<double>(p.blocks[i].data[j]) - before.blocks[i].data[j];
                CHECK(delta == doctest::Approx(-1e-3).epsilon(1e-4));
            }
    }

    SUBCASE("identical calls from identical state match bitwise") {
        Grads<float> g(p.blocks.size());
        Rng rng(5);
        for (std::size_t i = 0; i < g.size(); ++i) {
            g[i].resize(p.blocks[i].data.size());
            for (auto& v : g[i]) v = static_cast<float>(rng.uniform(-1, 1));
        }
        Params<float> p2 = p;
        AdamState<float> st2 = st;
        adam_step(p, g, st);
        adam_step(p2, g, st2);
        for (std::size_t i = 0; i < p.blocks.size(); ++i) CHECK(p.blocks[i].data == p2.blocks[i].data);
    }

    SUBCASE("non-finite gradients abort loudly") {
        Grads<float> g(p.blocks.size());
        for (std::size_t i = 0; i < g.size(); ++i) g[i].assign(p.blocks[i].data.size(), 0.0f);
        g[0][0] = std::numeric_limits<float>::quiet_NaN();
        CHECK_THROWS_AS(adam_step(p, g, st), std::runtime_error);
    }
}

TEST_CASE("noise2noise expectation property") {
    // the parameter gradient against noisy targets averages to the gradient
    // against the clean target when the noise is zero-mean
    const ArchDescriptor arch = tiny_arch(1, 2);
    const Params<double> p = net_init<double>(arch, 41);
    const Tensor<double> input = random_tensor<double>(1, 1, 16, 16, 42);
    const Tensor<double> clean = random_tensor<double>(1, 1, 16, 16, 43);

    ForwardCache<double> cache;
    const Tensor<double> pred = net_forward(p, input, &cache);
    Tensor<double> dpred;
    (void)l2_loss(pred, clean, dpred);
    const Grads<double> g_clean = net_backward(p, cache, dpred);

    Grads<double> g_mean(g_clean.size());
    for (std::size_t i = 0; i < g_mean.size(); ++i) g_mean[i].assign(g_clean[i].size(), 0.0);

    const int n_samples = 10'000;
    Rng rng(4242);
    Tensor<double> noisy = clean;
    for (int s = 0; s < n_samples; ++s) {
        for (std::size_t i = 0; i < noisy.size(); ++i) noisy.v[i] = clean.v[i] + 0.1 * rng.normal();
        (void)l2_loss(pred, noisy, dpred);
        const Grads<double> g = net_backward(p, cache, dpred);
        for (std::size_t i = 0; i < g.size(); ++i)
            for (std::size_t j = 0; j < g[i].size(); ++j) g_mean[i][j] += g[i][j];
    }
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < g_mean.size(); ++i)
        for (std::size_t j = 0; j < g_mean[i].size(); ++j) {
            const double a = g_mean[i][j] / n_samples, b = g_clean[i][j];
            dot += a * b;
            na += a * a;
            nb += b * b;
        }
    CHECK(dot / std::sqrt(na * nb) > 0.99);
}

TEST_CASE("noise2void blind-spot exactness") {
    const Params<float> p = net_init<float>(tiny_arch(1, 2), 51);
    const Tensor<float> input = random_tensor<float>(1, 1, 16, 16, 52);
    Tensor<float> target = random_tensor<float>(1, 1, 16, 16, 53);
    Tensor<float> mask(1, 1, 16, 16);
    Rng rng(54);
    for (auto& m : mask.v) m = rng.uniform() < 0.1 ? 1.0f : 0.0f;
    mask.v[0] = 1.0f;  // ensure non-empty

    ForwardCache<float> cache;
    const Tensor<float> pred = net_forward(p, input, &cache);
    Tensor<float> dpred;
    const double loss = l2_loss(pred, target, &mask, dpred);
    const Grads<float> grads = net_backward(p, cache, dpred);

    // perturb every unmasked target pixel
    for (std::size_t i = 0; i < target.size(); ++i)
        if (mask.v[i] == 0.0f) target.v[i] += 7.5f;
    const double loss2 = l2_loss(pred, target, &mask, dpred);
    const Grads<float> grads2 = net_backward(p, cache, dpred);

    CHECK(loss == loss2);  // exactly
    for (std::size_t i = 0; i < grads.size(); ++i) CHECK(grads[i] == grads2[i]);
}

TEST_CASE("denoise") {
    SUBCASE("zero-initialized residual net is the identity") {
        Params<float> p = net_init<float>(tiny_arch(2, 2), 61);
        for (auto& b : p.blocks) std::fill(b.data.begin(), b.data.end(), 0.0f);
        BScanImage img;
        img.rows = 16;
        img.cols = 16;
        img.scale = ImageScale::log_normalized;
        img.px.resize(256);
        Rng rng(8);
        for (auto& v : img.px) v = static_cast<float>(rng.uniform());
        const BScanImage out = denoise(p, img);
        CHECK(out.px == img.px);
    }

    SUBCASE("odd-sized input is padded and cropped back") {
        const Params<float> p = net_init<float>(tiny_arch(2, 2), 62);
        BScanImage img;
        img.rows = 21;
        img.cols = 19;
        img.scale = ImageScale::log_normalized;
        img.px.assign(21 * 19, 0.5f);
        const BScanImage out = denoise(p, img);
        CHECK(out.rows == 21);
        CHECK(out.cols == 19);
        for (const float v : out.px) {
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
        }
    }
}

TEST_CASE("checkpoint round-trip") {
    const auto tmp = std::filesystem::temp_directory_path() / "s2f_ckpt_test.s2fw";
    Params<float> p = net_init<float>(tiny_arch(2, 4), 71);
    AdamState<float> st = make_adam_state(p, 5e-4);
    Grads<float> g(p.blocks.size());
    Rng rng(72);
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i].resize(p.blocks[i].data.size());
        for (auto& v : g[i]) v = static_cast<float>(rng.uniform(-1, 1));
    }
    adam_step(p, g, st);
    adam_step(p, g, st);

    save_checkpoint(tmp, p, &st);
    AdamState<float> st2;
    st2.learning_rate = 5e-4;
    const Params<float> p2 = load_checkpoint(tmp, &st2);

    CHECK(p2.arch == p.arch);
    REQUIRE(p2.blocks.size() == p.blocks.size());
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
        CHECK(p2.blocks[i].name == p.blocks[i].name);
        CHECK(p2.blocks[i].data == p.blocks[i].data);
    }
    CHECK(st2.t == 2);  // step counter continues across a resume
    for (std::size_t i = 0; i < st.m.size(); ++i) {
        CHECK(st2.m[i] == st.m[i]);
        CHECK(st2.v[i] == st.v[i]);
    }
    std::filesystem::remove(tmp);
}

namespace {

// a small in-memory dataset for training-loop tests
struct ToyData {
    std::vector<BScanImage> inputs, targets;
    std::vector<TrainingPair> pairs;

    explicit ToyData(int n_pairs, Scheme scheme, int hw = 32) {
        for (int i = 0; i < n_pairs; ++i) {
            BScanImage clean;
            clean.rows = hw;
            clean.cols = hw;
            clean.scale = ImageScale::log_normalized;
            clean.px.resize(static_cast<std::size_t>(hw) * hw);
            for (int y = 0; y < hw; ++y)
                for (int x = 0; x < hw; ++x)
                    clean.at(y, x) = 0.5f + 0.3f * std::sin(0.3 * y) * std::cos(0.2 * x);
            BScanImage noisy_in = clean, noisy_tg = clean;
            Rng rng(100 + static_cast<std::uint64_t>(i));
            for (auto& v : noisy_in.px) v = static_cast<float>(v + 0.08 * rng.normal());
            for (auto& v : noisy_tg.px) v = static_cast<float>(v + 0.08 * rng.normal());
            inputs.push_back(noisy_in);
            targets.push_back(scheme == Scheme::n2v ? noisy_in : noisy_tg);
            TrainingPair p;
            p.scheme = scheme;
            p.bscan = i;
            p.input = {i, 0, -1};
            p.target = {i, scheme == Scheme::n2v ? 0 : 1, -1};
            pairs.push_back(p);
        }
    }

    PairMaterializer materializer() {
        return [this](const TrainingPair& p) {
            PairImages pi;
            pi.input = &inputs[static_cast<std::size_t>(p.bscan)];
            pi.target = &targets[static_cast<std::size_t>(p.bscan)];
            return pi;
        };
    }
};

}  // namespace

TEST_CASE("training loop") {
    SUBCASE("1 epoch, 4 pairs, batch 2: exactly 2 optimizer steps") {
        ToyData data(5, Scheme::n2n);
        const DatasetSplit split = split_train_val(data.pairs, 4.0, 1);
        REQUIRE(split.train.size() == 4);
        TrainConfig tc;
        tc.scheme = Scheme::n2n;
        tc.arch = tiny_arch(1, 2);
        tc.epochs = 1;
        tc.batch_size = 2;
        tc.seed = 3;
        const TrainResult r = train(split, tc, data.materializer());
        CHECK(r.opt.t == 2);
        CHECK(r.history.epochs.size() == 1);
    }

    SUBCASE("loss decreases on a learnable toy problem, all three schemes") {
        for (const Scheme scheme : {Scheme::s2f, Scheme::n2n, Scheme::n2v}) {
            ToyData data(10, scheme);
            const DatasetSplit split = split_train_val(data.pairs, 4.0, 1);
            TrainConfig tc;
            tc.scheme = scheme;
            tc.arch = tiny_arch(2, 4);
            tc.epochs = 15;
            tc.batch_size = 2;
            tc.seed = 3;
            tc.patience = 0;
            tc.n2v_mask_count = 16;
            const TrainResult r = train(split, tc, data.materializer());
            REQUIRE(!r.history.epochs.empty());
            CHECK(r.history.epochs.back().val_loss < r.history.epochs.front().val_loss);
            CHECK(r.history.convergence_epoch >= 1);
        }
    }

    SUBCASE("bit-identical history for identical config and seed") {
        ToyData data(8, Scheme::n2n);
        const DatasetSplit split = split_train_val(data.pairs, 4.0, 2);
        TrainConfig tc;
        tc.scheme = Scheme::n2n;
        tc.arch = tiny_arch(1, 2);
        tc.epochs = 4;
        tc.batch_size = 2;
        tc.seed = 11;
        const TrainResult a = train(split, tc, data.materializer());
        const TrainResult b = train(split, tc, data.materializer());
        REQUIRE(a.history.epochs.size() == b.history.epochs.size());
        for (std::size_t i = 0; i < a.history.epochs.size(); ++i) {
            CHECK(a.history.epochs[i].train_loss == b.history.epochs[i].train_loss);
            CHECK(a.history.epochs[i].val_loss == b.history.epochs[i].val_loss);
        }
        for (std::size_t i = 0; i < a.params.blocks.size(); ++i)
            CHECK(a.params.blocks[i].data == b.params.blocks[i].data);
    }

    SUBCASE("non-finite input aborts with the last good checkpoint") {
        ToyData data(6, Scheme::n2n);
        data.inputs[0].px[0] = std::numeric_limits<float>::infinity();
        const DatasetSplit split = split_train_val(data.pairs, 4.0, 2);
        TrainConfig tc;
        tc.scheme = Scheme::n2n;
        tc.arch = tiny_arch(1, 2);
        tc.epochs = 3;
        tc.batch_size = 2;
        tc.seed = 1;
        const TrainResult r = train(split, tc, data.materializer());
        CHECK(r.history.aborted);
        CHECK(!r.history.abort_reason.empty());
        CHECK(r.params.blocks.size() > 0);
    }

    SUBCASE("scheme mismatch is rejected") {
        ToyData data(6, Scheme::n2n);
        const DatasetSplit split = split_train_val(data.pairs, 4.0, 2);
        TrainConfig tc;
        tc.scheme = Scheme::s2f;
        tc.arch = tiny_arch(1, 2);
        CHECK_THROWS_AS(train(split, tc, data.materializer()), std::invalid_argument);
    }
}
