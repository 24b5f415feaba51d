#include "s2f/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "s2f/net_ops.hpp"
#include "s2f/rng.hpp"

namespace s2f {

namespace {

// Block layout: enc0..enc{L-1}, bott, dec{L-1}..dec1, dec0, out; weights
// followed by biases for each conv.
struct BlockSpec {
    std::string name;
    int co, ci;
};

std::vector<BlockSpec> block_specs(const ArchDescriptor& arch) {
    const int L = arch.levels, C = arch.base_channels;
    std::vector<BlockSpec> specs;
    specs.push_back({"enc0", C, 1});
    for (int l = 1; l < L; ++l) specs.push_back({"enc" + std::to_string(l), C << l, C << (l - 1)});
    specs.push_back({"bott", C << (L - 1), C << (L - 1)});
    for (int l = L - 1; l >= 1; --l) specs.push_back({"dec" + std::to_string(l), C << (l - 1), C << l});
    specs.push_back({"dec0", C, C});
    specs.push_back({"out", 1, C});
    return specs;
}

void validate_arch(const ArchDescriptor& arch) {
    if (arch.levels < 1 || arch.base_channels < 1)
        throw std::invalid_argument("net: levels and base_channels must be >= 1");
}

template <typename T>
const ParamBlock<T>& find_block(const Params<T>& p, const std::string& name) {
    for (const auto& b : p.blocks)
        if (b.name == name) return b;
    throw std::logic_error("net: missing parameter block " + name);
}

template <typename T>
T act_slope(const ArchDescriptor& arch) {
    return arch.activation == Activation::leaky_relu_01 ? static_cast<T>(0.1) : static_cast<T>(1.0);
}

template <typename T>
void activate(const ArchDescriptor& arch, const Tensor<T>& z, Tensor<T>& y) {
    if (arch.activation == Activation::linear) {
        y = z;
    } else {
        leaky_relu_forward(z, act_slope<T>(arch), y);
    }
}

template <typename T>
void activate_backward(const ArchDescriptor& arch, const Tensor<T>& z, const Tensor<T>& gy,
                       Tensor<T>& gz) {
    if (arch.activation == Activation::linear) {
        gz = gy;
    } else {
        leaky_relu_backward(z, gy, act_slope<T>(arch), gz);
    }
}

}  // namespace

template <typename T>
std::string Params<T>::id() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](const void* p, std::size_t len) {
        const auto* c = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= c[i];
            h *= 0x100000001b3ull;
        }
    };
    for (const auto& b : blocks) {
        mix(b.name.data(), b.name.size());
        mix(b.data.data(), b.data.size() * sizeof(T));
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "net-%016llx", static_cast<unsigned long long>(h));
    return buf;
}

template <typename T>
Params<T> net_init(const ArchDescriptor& arch, std::uint64_t seed) {
    validate_arch(arch);
    Params<T> p;
    p.arch = arch;
    const auto specs = block_specs(arch);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& s = specs[i];
        ParamBlock<T> wblk, bblk;
        wblk.name = s.name + ".w";
        wblk.shape = {s.co, s.ci, 3, 3};
        wblk.data.resize(static_cast<std::size_t>(s.co) * s.ci * 9);
        const double bound = std::sqrt(6.0 / (static_cast<double>(s.ci) * 9.0));
        Rng rng(derive_seed(seed, {0x1217ull, static_cast<std::uint64_t>(i)}));
        for (auto& w : wblk.data) w = static_cast<T>(rng.uniform(-bound, bound));
        bblk.name = s.name + ".b";
        bblk.shape = {s.co};
        bblk.data.assign(static_cast<std::size_t>(s.co), T(0));
        p.blocks.push_back(std::move(wblk));
        p.blocks.push_back(std::move(bblk));
    }
    return p;
}

template <typename T>
Tensor<T> net_forward(const Params<T>& params, const Tensor<T>& input, ForwardCache<T>* cache) {
    const ArchDescriptor& arch = params.arch;
    const int L = arch.levels;
    if (input.c != 1) throw std::invalid_argument("net_forward: expected a single input channel");
    if (input.h % arch.divisor() != 0 || input.w % arch.divisor() != 0)
        throw std::invalid_argument("net_forward: spatial dims must be divisible by 2^levels");

    ForwardCache<T> local;
    ForwardCache<T>& cc = cache ? *cache : local;
    cc.valid = false;
    cc.x = input;
    cc.enc_in.resize(static_cast<std::size_t>(L));
    cc.z_enc.resize(static_cast<std::size_t>(L));
    cc.e.resize(static_cast<std::size_t>(L));
    cc.u.resize(static_cast<std::size_t>(L));
    cc.z_dec.resize(static_cast<std::size_t>(L));
    cc.d.resize(static_cast<std::size_t>(L));

    // encoder
    {
        const auto& w = find_block(params, "enc0.w");
        const auto& b = find_block(params, "enc0.b");
        conv3x3_forward(input, w.data, b.data, cc.z_enc[0]);
        activate(arch, cc.z_enc[0], cc.e[0]);
    }
    for (int l = 1; l < L; ++l) {
        avgpool2_forward(cc.e[static_cast<std::size_t>(l - 1)], cc.enc_in[static_cast<std::size_t>(l)]);
        const auto& w = find_block(params, "enc" + std::to_string(l) + ".w");
        const auto& b = find_block(params, "enc" + std::to_string(l) + ".b");
        conv3x3_forward(cc.enc_in[static_cast<std::size_t>(l)], w.data, b.data,
                        cc.z_enc[static_cast<std::size_t>(l)]);
        activate(arch, cc.z_enc[static_cast<std::size_t>(l)], cc.e[static_cast<std::size_t>(l)]);
    }

    // bottleneck
    avgpool2_forward(cc.e[static_cast<std::size_t>(L - 1)], cc.pb);
    {
        const auto& w = find_block(params, "bott.w");
        const auto& b = find_block(params, "bott.b");
        conv3x3_forward(cc.pb, w.data, b.data, cc.z_bott);
        activate(arch, cc.z_bott, cc.b);
    }

    // decoder
    const Tensor<T>* prev = &cc.b;
    for (int l = L - 1; l >= 1; --l) {
        upsample2_forward(*prev, cc.u[static_cast<std::size_t>(l)]);
        add_inplace(cc.u[static_cast<std::size_t>(l)], cc.e[static_cast<std::size_t>(l)]);
        const auto& w = find_block(params, "dec" + std::to_string(l) + ".w");
        const auto& b = find_block(params, "dec" + std::to_string(l) + ".b");
        conv3x3_forward(cc.u[static_cast<std::size_t>(l)], w.data, b.data,
                        cc.z_dec[static_cast<std::size_t>(l)]);
        activate(arch, cc.z_dec[static_cast<std::size_t>(l)], cc.d[static_cast<std::size_t>(l)]);
        prev = &cc.d[static_cast<std::size_t>(l)];
    }
    upsample2_forward(*prev, cc.u[0]);
    add_inplace(cc.u[0], cc.e[0]);
    {
        const auto& w = find_block(params, "dec0.w");
        const auto& b = find_block(params, "dec0.b");
        conv3x3_forward(cc.u[0], w.data, b.data, cc.z_dec[0]);
        activate(arch, cc.z_dec[0], cc.d[0]);
    }
    {
        const auto& w = find_block(params, "out.w");
        const auto& b = find_block(params, "out.b");
        conv3x3_forward(cc.d[0], w.data, b.data, cc.corr);
    }

    Tensor<T> y = cc.corr;
    add_inplace(y, input);
    cc.valid = true;
    return y;
}

template <typename T>
double l2_loss(const Tensor<T>& pred, const Tensor<T>& target, const Tensor<T>* mask,
               Tensor<T>& dpred) {
    if (!pred.same_shape(target)) throw std::invalid_argument("l2_loss: pred/target shape mismatch");
    if (mask && !mask->same_shape(pred)) throw std::invalid_argument("l2_loss: mask shape mismatch");

    double denom;
    if (mask) {
        double s = 0.0;
        for (const T m : mask->v) {
            if (m != T(0) && m != T(1)) throw std::invalid_argument("l2_loss: mask must be binary");
            s += static_cast<double>(m);
        }
        if (s == 0.0) throw std::invalid_argument("l2_loss: mask is all zero");
        denom = s;
    } else {
        denom = static_cast<double>(pred.size());
    }

    dpred.resize(pred.n, pred.c, pred.h, pred.w);
    double loss = 0.0;
    const double inv = 1.0 / denom;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double m = mask ? static_cast<double>(mask->v[i]) : 1.0;
        const double diff = static_cast<double>(pred.v[i]) - static_cast<double>(target.v[i]);
        loss += m * diff * diff;
        dpred.v[i] = static_cast<T>(2.0 * m * diff * inv);
    }
    return loss * inv;
}

template <typename T>
Grads<T> net_backward(const Params<T>& params, const ForwardCache<T>& cache, const Tensor<T>& dout,
                      BackwardWorkspace<T>* workspace) {
    if (!cache.valid) throw std::invalid_argument("net_backward: stale or missing forward cache");
    if (!dout.same_shape(cache.x)) throw std::invalid_argument("net_backward: dout shape mismatch");

    const ArchDescriptor& arch = params.arch;
    const int L = arch.levels;

    BackwardWorkspace<T> local;
    BackwardWorkspace<T>& ws = workspace ? *workspace : local;
    ws.de.resize(static_cast<std::size_t>(L));
    Tensor<T>& dz = ws.dz;
    Tensor<T>& daux = ws.daux;    // conv input gradients before they move into de[]
    Tensor<T>& dprev = ws.dprev;  // gradient flowing down the decoder chain

    Grads<T> grads(params.blocks.size());
    auto block_index = [&params](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < params.blocks.size(); ++i)
            if (params.blocks[i].name == name) return i;
        throw std::logic_error("net_backward: missing block " + name);
    };
    auto conv_grads = [&](const std::string& stem, const Tensor<T>& in, const Tensor<T>& gout) {
        std::vector<T> gw, gb;
        conv3x3_backward_weights(in, gout, gw, gb);
        grads[block_index(stem + ".w")] = std::move(gw);
        grads[block_index(stem + ".b")] = std::move(gb);
    };

    // residual head: d(corr) = dout
    {
        const auto& w = find_block(params, "out.w");
        conv_grads("out", cache.d[0], dout);
        conv3x3_backward_data(dout, w.data, cache.d[0].c, daux);
    }

    activate_backward(arch, cache.z_dec[0], daux, dz);
    {
        const auto& w = find_block(params, "dec0.w");
        conv_grads("dec0", cache.u[0], dz);
        conv3x3_backward_data(dz, w.data, cache.u[0].c, daux);
    }

    std::swap(ws.de[0], daux);            // skip-path gradient into e[0]
    upsample2_backward(ws.de[0], dprev);  // gradient into d[1] (or b when L == 1)

    for (int l = 1; l < L; ++l) {
        activate_backward(arch, cache.z_dec[static_cast<std::size_t>(l)], dprev, dz);
        const auto& w = find_block(params, "dec" + std::to_string(l) + ".w");
        conv_grads("dec" + std::to_string(l), cache.u[static_cast<std::size_t>(l)], dz);
        conv3x3_backward_data(dz, w.data, cache.u[static_cast<std::size_t>(l)].c, daux);
        std::swap(ws.de[static_cast<std::size_t>(l)], daux);
        upsample2_backward(ws.de[static_cast<std::size_t>(l)], dprev);
    }

    // bottleneck
    activate_backward(arch, cache.z_bott, dprev, dz);
    {
        const auto& w = find_block(params, "bott.w");
        conv_grads("bott", cache.pb, dz);
        conv3x3_backward_data(dz, w.data, cache.pb.c, ws.dpb);
    }
    avgpool2_backward(ws.dpb, ws.dchain);  // gradient into e[L-1] along the encoder chain

    for (int l = L - 1; l >= 1; --l) {
        add_inplace(ws.de[static_cast<std::size_t>(l)], ws.dchain);
        activate_backward(arch, cache.z_enc[static_cast<std::size_t>(l)],
                          ws.de[static_cast<std::size_t>(l)], dz);
        const auto& w = find_block(params, "enc" + std::to_string(l) + ".w");
        conv_grads("enc" + std::to_string(l), cache.enc_in[static_cast<std::size_t>(l)], dz);
        conv3x3_backward_data(dz, w.data, cache.enc_in[static_cast<std::size_t>(l)].c, daux);
        avgpool2_backward(daux, ws.dchain);
    }

    add_inplace(ws.de[0], ws.dchain);
    activate_backward(arch, cache.z_enc[0], ws.de[0], dz);
    conv_grads("enc0", cache.x, dz);

    return grads;
}

template <typename T>
AdamState<T> make_adam_state(const Params<T>& params, double learning_rate) {
    AdamState<T> st;
    st.learning_rate = learning_rate;
    st.m.resize(params.blocks.size());
    st.v.resize(params.blocks.size());
    for (std::size_t i = 0; i < params.blocks.size(); ++i) {
        st.m[i].assign(params.blocks[i].data.size(), T(0));
        st.v[i].assign(params.blocks[i].data.size(), T(0));
    }
    return st;
}

template <typename T>
void adam_step(Params<T>& params, const Grads<T>& grads, AdamState<T>& state) {
    if (grads.size() != params.blocks.size() || state.m.size() != params.blocks.size())
        throw std::invalid_argument("adam_step: mismatched gradient/state layout");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (grads[i].size() != params.blocks[i].data.size())
            throw std::invalid_argument("adam_step: gradient size mismatch in block " +
                                        params.blocks[i].name);
        for (const T g : grads[i])
            if (!std::isfinite(static_cast<double>(g)))
                throw std::runtime_error("adam_step: non-finite gradient in block " +
                                         params.blocks[i].name);
    }

    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    const T b1 = static_cast<T>(state.beta1), b2 = static_cast<T>(state.beta2);
    for (std::size_t i = 0; i < grads.size(); ++i) {
        T* m = state.m[i].data();
        T* v = state.v[i].data();
        T* p = params.blocks[i].data.data();
        const T* g = grads[i].data();
        const std::size_t nn = grads[i].size();
        for (std::size_t j = 0; j < nn; ++j) {
            m[j] = b1 * m[j] + (T(1) - b1) * g[j];
            v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
            const double mhat = static_cast<double>(m[j]) / bc1;
            const double vhat = static_cast<double>(v[j]) / bc2;
            p[j] = static_cast<T>(static_cast<double>(p[j]) -
                                  state.learning_rate * mhat / (std::sqrt(vhat) + state.eps));
        }
    }
}

double grad_check(const Params<double>& params, const Tensor<double>& input,
                  const Tensor<double>& target, const Tensor<double>* mask, double eps,
                  std::size_t max_samples, std::uint64_t seed) {
    Params<double> p = params;
    ForwardCache<double> cache;
    Tensor<double> dpred;
    const Tensor<double> pred = net_forward(p, input, &cache);
    (void)l2_loss(pred, target, mask, dpred);
    const Grads<double> analytic = net_backward(p, cache, dpred);

    auto loss_at = [&](void) {
        Tensor<double> dp;
        const Tensor<double> out = net_forward(p, input);
        return l2_loss(out, target, mask, dp);
    };

    // enumerate (block, offset) coordinates, optionally subsampled
    std::vector<std::pair<std::size_t, std::size_t>> coords;
    for (std::size_t bi = 0; bi < p.blocks.size(); ++bi)
        for (std::size_t j = 0; j < p.blocks[bi].data.size(); ++j) coords.emplace_back(bi, j);
    if (max_samples > 0 && coords.size() > max_samples) {
        Rng rng(derive_seed(seed, {0x6C1Cull}));
        for (std::size_t i = 0; i < max_samples; ++i) {
            const std::size_t j = i + rng.uniform_index(coords.size() - i);
            std::swap(coords[i], coords[j]);
        }
        coords.resize(max_samples);
    }

    double max_rel = 0.0;
    for (const auto& [bi, j] : coords) {
        const double orig = p.blocks[bi].data[j];
        p.blocks[bi].data[j] = orig + eps;
        const double lp = loss_at();
        p.blocks[bi].data[j] = orig - eps;
        const double lm = loss_at();
        p.blocks[bi].data[j] = orig;
        const double numeric = (lp - lm) / (2.0 * eps);
        const double ana = analytic[bi][j];
        const double denom = std::max({1e-12, std::abs(numeric), std::abs(ana)});
        max_rel = std::max(max_rel, std::abs(numeric - ana) / denom);
    }
    return max_rel;
}

BScanImage denoise(const Params<float>& params, const BScanImage& image) {
    const int div = params.arch.divisor();
    const int H = image.rows, W = image.cols;
    const int Hp = ((H + div - 1) / div) * div;
    const int Wp = ((W + div - 1) / div) * div;

    Tensor<float> in(1, 1, Hp, Wp);
    for (int y = 0; y < Hp; ++y) {
        // reflect-pad indices
        int sy = y < H ? y : 2 * H - 2 - y;
        sy = std::clamp(sy, 0, H - 1);
        for (int x = 0; x < Wp; ++x) {
            int sx = x < W ? x : 2 * W - 2 - x;
            sx = std::clamp(sx, 0, W - 1);
            in.v[static_cast<std::size_t>(y) * Wp + x] = image.at(sy, sx);
        }
    }

    const Tensor<float> out = net_forward(params, in);

    BScanImage res;
    res.rows = H;
    res.cols = W;
    res.scale = image.scale;
    res.px.resize(static_cast<std::size_t>(H) * W);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            res.at(y, x) = std::clamp(out.v[static_cast<std::size_t>(y) * Wp + x], 0.0f, 1.0f);
    res.prov = image.prov;
    res.prov.model_id = params.id();
    return res;
}

namespace {

void put_u32f(std::ofstream& f, std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); }
std::uint32_t get_u32f(std::ifstream& f) {
    std::uint32_t v = 0;
    f.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Params<float>& params,
                     const AdamState<float>* opt_state) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
    f.write("S2FW", 4);
    put_u32f(f, 1);
    put_u32f(f, static_cast<std::uint32_t>(params.arch.levels));
    put_u32f(f, static_cast<std::uint32_t>(params.arch.base_channels));
    put_u32f(f, static_cast<std::uint32_t>(params.arch.activation));
    put_u32f(f, static_cast<std::uint32_t>(params.blocks.size()));
    for (const auto& b : params.blocks) {
        put_u32f(f, static_cast<std::uint32_t>(b.name.size()));
        f.write(b.name.data(), static_cast<std::streamsize>(b.name.size()));
        put_u32f(f, static_cast<std::uint32_t>(b.shape.size()));
        for (const int d : b.shape) put_u32f(f, static_cast<std::uint32_t>(d));
    }
    for (const auto& b : params.blocks)
        f.write(reinterpret_cast<const char*>(b.data.data()),
                static_cast<std::streamsize>(b.data.size() * sizeof(float)));
    const std::uint8_t has_opt = opt_state ? 1 : 0;
    f.write(reinterpret_cast<const char*>(&has_opt), 1);
    if (opt_state) {
        for (const auto& m : opt_state->m)
            f.write(reinterpret_cast<const char*>(m.data()),
                    static_cast<std::streamsize>(m.size() * sizeof(float)));
        for (const auto& v : opt_state->v)
            f.write(reinterpret_cast<const char*>(v.data()),
                    static_cast<std::streamsize>(v.size() * sizeof(float)));
        const std::uint64_t t = static_cast<std::uint64_t>(opt_state->t);
        f.write(reinterpret_cast<const char*>(&t), 8);
    }
    if (!f) throw std::runtime_error("short write: " + path.string());
}

Params<float> load_checkpoint(const std::filesystem::path& path, AdamState<float>* opt_state) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint: " + path.string());
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "S2FW", 4) != 0)
        throw std::runtime_error("not an S2FW checkpoint: " + path.string());
    if (get_u32f(f) != 1) throw std::runtime_error("unsupported checkpoint version: " + path.string());

    Params<float> p;
    p.arch.levels = static_cast<int>(get_u32f(f));
    p.arch.base_channels = static_cast<int>(get_u32f(f));
    p.arch.activation = static_cast<Activation>(get_u32f(f));
    const std::uint32_t n_blocks = get_u32f(f);
    validate_arch(p.arch);
    if (n_blocks == 0 || n_blocks > 4096) throw std::runtime_error("corrupt checkpoint: " + path.string());

    p.blocks.resize(n_blocks);
    for (auto& b : p.blocks) {
        const std::uint32_t name_len = get_u32f(f);
        if (name_len > 256) throw std::runtime_error("corrupt checkpoint: " + path.string());
        b.name.resize(name_len);
        f.read(b.name.data(), name_len);
        const std::uint32_t ndim = get_u32f(f);
        if (ndim == 0 || ndim > 4) throw std::runtime_error("corrupt checkpoint: " + path.string());
        std::size_t count = 1;
        b.shape.resize(ndim);
        for (auto& d : b.shape) {
            d = static_cast<int>(get_u32f(f));
            count *= static_cast<std::size_t>(d);
        }
        b.data.resize(count);
    }
    for (auto& b : p.blocks)
        f.read(reinterpret_cast<char*>(b.data.data()),
               static_cast<std::streamsize>(b.data.size() * sizeof(float)));

    std::uint8_t has_opt = 0;
    f.read(reinterpret_cast<char*>(&has_opt), 1);
    if (!f) throw std::runtime_error("truncated checkpoint: " + path.string());
    if (opt_state) {
        *opt_state = make_adam_state(p, opt_state->learning_rate);
        if (has_opt) {
            for (auto& m : opt_state->m)
                f.read(reinterpret_cast<char*>(m.data()),
                       static_cast<std::streamsize>(m.size() * sizeof(float)));
            for (auto& v : opt_state->v)
                f.read(reinterpret_cast<char*>(v.data()),
                       static_cast<std::streamsize>(v.size() * sizeof(float)));
            std::uint64_t t = 0;
            f.read(reinterpret_cast<char*>(&t), 8);
            opt_state->t = static_cast<long>(t);
            if (!f) throw std::runtime_error("truncated optimizer state: " + path.string());
        }
    }

    // consistency with the descriptor
    const auto expect = net_init<float>(p.arch, 0);
    if (expect.blocks.size() != p.blocks.size())
        throw std::runtime_error("checkpoint does not match its architecture descriptor: " + path.string());
    for (std::size_t i = 0; i < p.blocks.size(); ++i)
        if (expect.blocks[i].name != p.blocks[i].name || expect.blocks[i].shape != p.blocks[i].shape)
            throw std::runtime_error("checkpoint block layout mismatch: " + path.string());
    return p;
}

// explicit instantiations
template struct Params<float>;
template struct Params<double>;
template Params<float> net_init<float>(const ArchDescriptor&, std::uint64_t);
template Params<double> net_init<double>(const ArchDescriptor&, std::uint64_t);
template Tensor<float> net_forward<float>(const Params<float>&, const Tensor<float>&, ForwardCache<float>*);
template Tensor<double> net_forward<double>(const Params<double>&, const Tensor<double>&,
                                            ForwardCache<double>*);
template double l2_loss<float>(const Tensor<float>&, const Tensor<float>&, const Tensor<float>*,
                               Tensor<float>&);
template double l2_loss<double>(const Tensor<double>&, const Tensor<double>&, const Tensor<double>*,
                                Tensor<double>&);
template Grads<float> net_backward<float>(const Params<float>&, const ForwardCache<float>&,
                                          const Tensor<float>&, BackwardWorkspace<float>*);
template Grads<double> net_backward<double>(const Params<double>&, const ForwardCache<double>&,
                                            const Tensor<double>&, BackwardWorkspace<double>*);
template AdamState<float> make_adam_state<float>(const Params<float>&, double);
template AdamState<double> make_adam_state<double>(const Params<double>&, double);
template void adam_step<float>(Params<float>&, const Grads<float>&, AdamState<float>&);
template void adam_step<double>(Params<double>&, const Grads<double>&, AdamState<double>&);

}  // namespace s2f
