#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace s2f {

// Dense NCHW tensor.
template <typename T>
struct Tensor {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> v;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_) { resize(n_, c_, h_, w_); }

    // Reshape without clearing when the element count is unchanged; ops that
    // accumulate must zero their output explicitly.
    void resize(int n_, int c_, int h_, int w_) {
        if (n_ < 1 || c_ < 1 || h_ < 1 || w_ < 1) throw std::invalid_argument("tensor: non-positive shape");
        n = n_;
        c = c_;
        h = h_;
        w = w_;
        const std::size_t total = static_cast<std::size_t>(n) * c * h * w;
        if (v.size() != total) v.assign(total, T(0));
    }

    std::size_t size() const { return v.size(); }
    bool same_shape(const Tensor& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }

    T* plane(int n_, int c_) { return v.data() + (static_cast<std::size_t>(n_) * c + c_) * h * w; }
    const T* plane(int n_, int c_) const {
        return v.data() + (static_cast<std::size_t>(n_) * c + c_) * h * w;
    }
    T* row(int n_, int c_, int y) { return plane(n_, c_) + static_cast<std::size_t>(y) * w; }
    const T* row(int n_, int c_, int y) const { return plane(n_, c_) + static_cast<std::size_t>(y) * w; }

    void fill(T x) { std::fill(v.begin(), v.end(), x); }
};

}  // namespace s2f
