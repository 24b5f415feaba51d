#include "s2f/net_ops.hpp"

#include <stdexcept>

namespace s2f {

namespace {

// acc[x] += w0*in[x-1] + w1*in[x] + w2*in[x+1], zero padding outside [0, w)
template <typename T>
inline void row_conv3(T* acc, const T* in, int w, T w0, T w1, T w2) {
    acc[0] += w1 * in[0] + w2 * in[1];
    for (int x = 1; x < w - 1; ++x) acc[x] += w0 * in[x - 1] + w1 * in[x] + w2 * in[x + 1];
    acc[w - 1] += w0 * in[w - 2] + w1 * in[w - 1];
}

// full 3x3 accumulation for an interior output row (all three input rows
// valid); one acc pass instead of three
template <typename T>
inline void row_conv3x3(T* acc, const T* r0, const T* r1, const T* r2, int w, const T* wk) {
    for (int x = 1; x < w - 1; ++x) {
        acc[x] += wk[0] * r0[x - 1] + wk[1] * r0[x] + wk[2] * r0[x + 1] + wk[3] * r1[x - 1] +
                  wk[4] * r1[x] + wk[5] * r1[x + 1] + wk[6] * r2[x - 1] + wk[7] * r2[x] +
                  wk[8] * r2[x + 1];
    }
    acc[0] += wk[1] * r0[0] + wk[2] * r0[1] + wk[4] * r1[0] + wk[5] * r1[1] + wk[7] * r2[0] +
              wk[8] * r2[1];
    acc[w - 1] += wk[0] * r0[w - 2] + wk[1] * r0[w - 1] + wk[3] * r1[w - 2] + wk[4] * r1[w - 1] +
                  wk[6] * r2[w - 2] + wk[7] * r2[w - 1];
}

// dot product with 16 fixed accumulation lanes (vectorizable without
// reassociation, order independent of thread count)
template <typename T>
inline T row_dot(const T* a, const T* b, int len) {
    T lanes[16] = {};
    int x = 0;
    for (; x + 16 <= len; x += 16)
        for (int j = 0; j < 16; ++j) lanes[j] += a[x + j] * b[x + j];
    T tail = 0;
    for (; x < len; ++x) tail += a[x] * b[x];
    T s = tail;
    for (int j = 0; j < 16; ++j) s += lanes[j];
    return s;
}

// all nine 3x3 weight-gradient dot products of one interior row in one pass:
// acc9[ky*3+kx] += sum_x g[x] * r_ky[x + kx - 1] over x in [1, w-2]
template <typename T>
inline void row_dot9(const T* g, const T* r0, const T* r1, const T* r2, int w, T* acc9) {
    T lanes[9][16] = {};
    int x = 1;
    for (; x + 16 <= w - 1; x += 16) {
        for (int j = 0; j < 16; ++j) {
            const T gv = g[x + j];
            lanes[0][j] += gv * r0[x + j - 1];
            lanes[1][j] += gv * r0[x + j];
            lanes[2][j] += gv * r0[x + j + 1];
            lanes[3][j] += gv * r1[x + j - 1];
            lanes[4][j] += gv * r1[x + j];
            lanes[5][j] += gv * r1[x + j + 1];
            lanes[6][j] += gv * r2[x + j - 1];
            lanes[7][j] += gv * r2[x + j];
            lanes[8][j] += gv * r2[x + j + 1];
        }
    }
    T tail[9] = {};
    for (; x <= w - 2; ++x) {
        const T gv = g[x];
        tail[0] += gv * r0[x - 1];
        tail[1] += gv * r0[x];
        tail[2] += gv * r0[x + 1];
        tail[3] += gv * r1[x - 1];
        tail[4] += gv * r1[x];
        tail[5] += gv * r1[x + 1];
        tail[6] += gv * r2[x - 1];
        tail[7] += gv * r2[x];
        tail[8] += gv * r2[x + 1];
    }
    // x = 0 (kx=0 leaves the image) and x = w-1 (kx=2 leaves)
    const T gl = g[0], gr = g[w - 1];
    tail[1] += gl * r0[0];
    tail[2] += gl * r0[1];
    tail[4] += gl * r1[0];
    tail[5] += gl * r1[1];
    tail[7] += gl * r2[0];
    tail[8] += gl * r2[1];
    tail[0] += gr * r0[w - 2];
    tail[1] += gr * r0[w - 1];
    tail[3] += gr * r1[w - 2];
    tail[4] += gr * r1[w - 1];
    tail[6] += gr * r2[w - 2];
    tail[7] += gr * r2[w - 1];
    for (int m = 0; m < 9; ++m) {
        T s = tail[m];
        for (int j = 0; j < 16; ++j) s += lanes[m][j];
        acc9[m] += s;
    }
}

template <typename T>
inline T row_sum(const T* a, int len) {
    T lanes[16] = {};
    int x = 0;
    for (; x + 16 <= len; x += 16)
        for (int j = 0; j < 16; ++j) lanes[j] += a[x + j];
    T tail = 0;
    for (; x < len; ++x) tail += a[x];
    T s = tail;
    for (int j = 0; j < 16; ++j) s += lanes[j];
    return s;
}

}  // namespace

template <typename T>
void conv3x3_forward(const Tensor<T>& in, const std::vector<T>& weights, const std::vector<T>& bias,
                     Tensor<T>& out) {
    const int n = in.n, ci = in.c, h = in.h, w = in.w;
    const int co = static_cast<int>(bias.size());
    if (weights.size() != static_cast<std::size_t>(co) * ci * 9)
        throw std::invalid_argument("conv3x3_forward: weight/bias shape mismatch");
    if (h < 2 || w < 2) throw std::invalid_argument("conv3x3_forward: spatial dims must be >= 2");
    out.resize(n, co, h, w);

#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < n; ++b) {
        for (int oc = 0; oc < co; ++oc) {
            T* oplane = out.plane(b, oc);
            for (int y = 0; y < h; ++y) {
                T* orow = oplane + static_cast<std::size_t>(y) * w;
                for (int x = 0; x < w; ++x) orow[x] = bias[oc];
                const bool interior = y > 0 && y < h - 1;
                for (int icc = 0; icc < ci; ++icc) {
                    const T* iplane = in.plane(b, icc);
                    const T* wk = weights.data() + (static_cast<std::size_t>(oc) * ci + icc) * 9;
                    if (interior) {
                        const T* r1 = iplane + static_cast<std::size_t>(y) * w;
                        row_conv3x3(orow, r1 - w, r1, r1 + w, w, wk);
                    } else {
                        for (int ky = 0; ky < 3; ++ky) {
                            const int yy = y + ky - 1;
                            if (yy < 0 || yy >= h) continue;
                            row_conv3(orow, iplane + static_cast<std::size_t>(yy) * w, w,
                                      wk[ky * 3 + 0], wk[ky * 3 + 1], wk[ky * 3 + 2]);
                        }
                    }
                }
            }
        }
    }
}

template <typename T>
void conv3x3_backward_data(const Tensor<T>& gout, const std::vector<T>& weights, int ci,
                           Tensor<T>& gin) {
    const int n = gout.n, co = gout.c, h = gout.h, w = gout.w;
    if (weights.size() != static_cast<std::size_t>(co) * ci * 9)
        throw std::invalid_argument("conv3x3_backward_data: weight shape mismatch");
    gin.resize(n, ci, h, w);

#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < n; ++b) {
        for (int icc = 0; icc < ci; ++icc) {
            T* iplane = gin.plane(b, icc);
            for (int yy = 0; yy < h; ++yy) {
                T* irow = iplane + static_cast<std::size_t>(yy) * w;
                for (int x = 0; x < w; ++x) irow[x] = T(0);
                const bool interior = yy > 0 && yy < h - 1;
                for (int oc = 0; oc < co; ++oc) {
                    const T* gplane = gout.plane(b, oc);
                    const T* wk = weights.data() + (static_cast<std::size_t>(oc) * ci + icc) * 9;
                    if (interior) {
                        // 180-degree rotated kernel
                        const T rot[9] = {wk[8], wk[7], wk[6], wk[5], wk[4], wk[3], wk[2], wk[1], wk[0]};
                        const T* r1 = gplane + static_cast<std::size_t>(yy) * w;
                        row_conv3x3(irow, r1 - w, r1, r1 + w, w, rot);
                    } else {
                        for (int ky = 0; ky < 3; ++ky) {
                            const int y = yy + 1 - ky;
                            if (y < 0 || y >= h) continue;
                            // flipped kernel in x: offsets +1, 0, -1 for kx = 0,1,2
                            row_conv3(irow, gplane + static_cast<std::size_t>(y) * w, w, wk[ky * 3 + 2],
                                      wk[ky * 3 + 1], wk[ky * 3 + 0]);
                        }
                    }
                }
            }
        }
    }
}

template <typename T>
void conv3x3_backward_weights(const Tensor<T>& in, const Tensor<T>& gout, std::vector<T>& gw,
                              std::vector<T>& gb) {
    const int n = in.n, ci = in.c, h = in.h, w = in.w;
    const int co = gout.c;
    if (gout.n != n || gout.h != h || gout.w != w)
        throw std::invalid_argument("conv3x3_backward_weights: shape mismatch");
    gw.assign(static_cast<std::size_t>(co) * ci * 9, T(0));
    gb.assign(static_cast<std::size_t>(co), T(0));

#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < co; ++oc) {
        T bias_acc = 0;
        for (int b = 0; b < n; ++b) {
            const T* gplane = gout.plane(b, oc);
            for (int y = 0; y < h; ++y) bias_acc += row_sum(gplane + static_cast<std::size_t>(y) * w, w);
        }
        gb[oc] = bias_acc;

        for (int icc = 0; icc < ci; ++icc) {
            T* wk = gw.data() + (static_cast<std::size_t>(oc) * ci + icc) * 9;
            T acc9[9] = {};
            for (int b = 0; b < n; ++b) {
                const T* gplane = gout.plane(b, oc);
                const T* iplane = in.plane(b, icc);
                for (int y = 1; y < h - 1; ++y) {
                    const T* r1 = iplane + static_cast<std::size_t>(y) * w;
                    row_dot9(gplane + static_cast<std::size_t>(y) * w, r1 - w, r1, r1 + w, w, acc9);
                }
                // boundary output rows: only the in-range kernel rows contribute
                for (const int y : {0, h - 1}) {
                    for (int ky = 0; ky < 3; ++ky) {
                        const int yy = y + ky - 1;
                        if (yy < 0 || yy >= h) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int dx = kx - 1;
                            const int x0 = dx < 0 ? 1 : 0;
                            const int len = w - (dx < 0 ? 1 : dx);
                            acc9[ky * 3 + kx] +=
                                row_dot(gplane + static_cast<std::size_t>(y) * w + x0,
                                        iplane + static_cast<std::size_t>(yy) * w + x0 + dx, len);
                        }
                    }
                }
            }
            for (int m = 0; m < 9; ++m) wk[m] = acc9[m];
        }
    }
}

template <typename T>
void avgpool2_forward(const Tensor<T>& in, Tensor<T>& out) {
    if (in.h % 2 != 0 || in.w % 2 != 0) throw std::invalid_argument("avgpool2: odd spatial dims");
    const int n = in.n, c = in.c, h = in.h / 2, w = in.w / 2;
    out.resize(n, c, h, w);
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < n; ++b) {
        for (int cc = 0; cc < c; ++cc) {
            const T* ip = in.plane(b, cc);
            T* op = out.plane(b, cc);
            for (int y = 0; y < h; ++y) {
                const T* r0 = ip + static_cast<std::size_t>(2 * y) * in.w;
                const T* r1 = r0 + in.w;
                T* orow = op + static_cast<std::size_t>(y) * w;
                for (int x = 0; x < w; ++x)
                    orow[x] = static_cast<T>(0.25) * (r0[2 * x] + r0[2 * x + 1] + r1[2 * x] + r1[2 * x + 1]);
            }
        }
    }
}

template <typename T>
void avgpool2_backward(const Tensor<T>& gout, Tensor<T>& gin) {
    const int n = gout.n, c = gout.c, h = gout.h * 2, w = gout.w * 2;
    gin.resize(n, c, h, w);
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < n; ++b) {
        for (int cc = 0; cc < c; ++cc) {
            const T* gp = gout.plane(b, cc);
            T* ip = gin.plane(b, cc);
            for (int y = 0; y < gout.h; ++y) {
                const T* grow = gp + static_cast<std::size_t>(y) * gout.w;
                T* r0 = ip + static_cast<std::size_t>(2 * y) * w;
                T* r1 = r0 + w;
                for (int x = 0; x < gout.w; ++x) {
                    const T g = static_cast<T>(0.25) * grow[x];
                    r0[2 * x] = g;
                    r0[2 * x + 1] = g;
                    r1[2 * x] = g;
                    r1[2 * x + 1] = g;
                }
            }
        }
    }
}

template <typename T>
void upsample2_forward(const Tensor<T>& in, Tensor<T>& out) {
    const int n = in.n, c = in.c, h = in.h * 2, w = in.w * 2;
    out.resize(n, c, h, w);
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < n; ++b) {
        for (int cc = 0; cc < c; ++cc) {
            const T* ip = in.plane(b, cc);
            T* op = out.plane(b, cc);
            for (int y = 0; y < in.h; ++y) {
                const T* irow = ip + static_cast<std::size_t>(y) * in.w;
                T* r0 = op + static_cast<std::size_t>(2 * y) * w;
                T* r1 = r0 + w;
                for (int x = 0; x < in.w; ++x) {
                    const T v = irow[x];
                    r0[2 * x] = v;
                    r0[2 * x + 1] = v;
                    r1[2 * x] = v;
                    r1[2 * x + 1] = v;
                }
            }
        }
    }
}

template <typename T>
void upsample2_backward(const Tensor<T>& gout, Tensor<T>& gin) {
    if (gout.h % 2 != 0 || gout.w % 2 != 0) throw std::invalid_argument("upsample2_backward: odd dims");
    const int n = gout.n, c = gout.c, h = gout.h / 2, w = gout.w / 2;
    gin.resize(n, c, h, w);
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < n; ++b) {
        for (int cc = 0; cc < c; ++cc) {
            const T* gp = gout.plane(b, cc);
            T* ip = gin.plane(b, cc);
            for (int y = 0; y < h; ++y) {
                const T* r0 = gp + static_cast<std::size_t>(2 * y) * gout.w;
                const T* r1 = r0 + gout.w;
                T* irow = ip + static_cast<std::size_t>(y) * w;
                for (int x = 0; x < w; ++x)
                    irow[x] = r0[2 * x] + r0[2 * x + 1] + r1[2 * x] + r1[2 * x + 1];
            }
        }
    }
}

template <typename T>
void leaky_relu_forward(const Tensor<T>& z, T slope, Tensor<T>& y) {
    y.resize(z.n, z.c, z.h, z.w);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(z.size()); ++i)
        y.v[i] = z.v[i] > T(0) ? z.v[i] : slope * z.v[i];
}

template <typename T>
void leaky_relu_backward(const Tensor<T>& z, const Tensor<T>& gy, T slope, Tensor<T>& gz) {
    if (!z.same_shape(gy)) throw std::invalid_argument("leaky_relu_backward: shape mismatch");
    gz.resize(z.n, z.c, z.h, z.w);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(z.size()); ++i)
        gz.v[i] = z.v[i] > T(0) ? gy.v[i] : slope * gy.v[i];
}

template <typename T>
void add_inplace(Tensor<T>& a, const Tensor<T>& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("add_inplace: shape mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a.v[i] += b.v[i];
}

// explicit instantiations
#define S2F_INSTANTIATE_OPS(T)                                                                      \
    template void conv3x3_forward<T>(const Tensor<T>&, const std::vector<T>&, const std::vector<T>&, \
                                     Tensor<T>&);                                                   \
    template void conv3x3_backward_data<T>(const Tensor<T>&, const std::vector<T>&, int, Tensor<T>&); \
    template void conv3x3_backward_weights<T>(const Tensor<T>&, const Tensor<T>&, std::vector<T>&,  \
                                              std::vector<T>&);                                     \
    template void avgpool2_forward<T>(const Tensor<T>&, Tensor<T>&);                                \
    template void avgpool2_backward<T>(const Tensor<T>&, Tensor<T>&);                               \
    template void upsample2_forward<T>(const Tensor<T>&, Tensor<T>&);                               \
    template void upsample2_backward<T>(const Tensor<T>&, Tensor<T>&);                              \
    template void leaky_relu_forward<T>(const Tensor<T>&, T, Tensor<T>&);                           \
    template void leaky_relu_backward<T>(const Tensor<T>&, const Tensor<T>&, T, Tensor<T>&);        \
    template void add_inplace<T>(Tensor<T>&, const Tensor<T>&);

S2F_INSTANTIATE_OPS(float)
S2F_INSTANTIATE_OPS(double)

}  // namespace s2f
