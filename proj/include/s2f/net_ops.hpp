#pragma once

#include "s2f/tensor.hpp"

namespace s2f {

// 3x3 same-padding convolution primitives. All loops use a fixed summation
// order, so results are bitwise identical for any thread count.

template <typename T>
void conv3x3_forward(const Tensor<T>& in, const std::vector<T>& weights, const std::vector<T>& bias,
                     Tensor<T>& out);  // weights (co,ci,3,3) flattened

template <typename T>
void conv3x3_backward_data(const Tensor<T>& gout, const std::vector<T>& weights, int ci,
                           Tensor<T>& gin);

template <typename T>
void conv3x3_backward_weights(const Tensor<T>& in, const Tensor<T>& gout, std::vector<T>& gw,
                              std::vector<T>& gb);

template <typename T>
void avgpool2_forward(const Tensor<T>& in, Tensor<T>& out);

template <typename T>
void avgpool2_backward(const Tensor<T>& gout, Tensor<T>& gin);

template <typename T>
void upsample2_forward(const Tensor<T>& in, Tensor<T>& out);

template <typename T>
void upsample2_backward(const Tensor<T>& gout, Tensor<T>& gin);

// y = leaky_relu(z); slope applies for z <= 0 (negative-side convention at
// the kink).
template <typename T>
void leaky_relu_forward(const Tensor<T>& z, T slope, Tensor<T>& y);

// gz = gy * (z > 0 ? 1 : slope)
template <typename T>
void leaky_relu_backward(const Tensor<T>& z, const Tensor<T>& gy, T slope, Tensor<T>& gz);

template <typename T>
void add_inplace(Tensor<T>& a, const Tensor<T>& b);  // a += b

}  // namespace s2f
