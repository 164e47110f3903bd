// Copyright 2026 The cgvo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "cgvo/tensor.hpp"

// Differentiable operators. Each takes the tape first and records a
// backward closure when any input requires a gradient. Feature maps are
// C x H x W; there is no batch extent and no broadcasting.
namespace cgvo::nn {

// Output extent of a convolution along one axis.
constexpr std::size_t conv_out_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                                      std::size_t padding) {
  return (in + 2 * padding - kernel) / stride + 1;
}

// weights: (out_ch, in_ch, k, k); bias: (out_ch) or null.
template <typename T>
TensorPtr<T> conv2d(Tape<T>& tape, const TensorPtr<T>& input, const TensorPtr<T>& weights,
                    const TensorPtr<T>& bias, int stride, int padding);

// 2x2 window, stride 2; ties go to the first maximal element in row-major order.
template <typename T>
TensorPtr<T> max_pool2(Tape<T>& tape, const TensorPtr<T>& input);

template <typename T>
TensorPtr<T> relu(Tape<T>& tape, const TensorPtr<T>& input);
template <typename T>
TensorPtr<T> sigmoid(Tape<T>& tape, const TensorPtr<T>& input);
template <typename T>
TensorPtr<T> tanh(Tape<T>& tape, const TensorPtr<T>& input);

// y = W * flatten(x) + b; weights (out, in), bias (out). Output shape (out).
template <typename T>
TensorPtr<T> linear(Tape<T>& tape, const TensorPtr<T>& input, const TensorPtr<T>& weights,
                    const TensorPtr<T>& bias);

template <typename T>
TensorPtr<T> add(Tape<T>& tape, const TensorPtr<T>& a, const TensorPtr<T>& b);
template <typename T>
TensorPtr<T> multiply(Tape<T>& tape, const TensorPtr<T>& a, const TensorPtr<T>& b);
template <typename T>
TensorPtr<T> one_minus(Tape<T>& tape, const TensorPtr<T>& a);

// Concatenates along the leading (channel) extent.
template <typename T>
TensorPtr<T> concat_channels(Tape<T>& tape, const TensorPtr<T>& a, const TensorPtr<T>& b);

// Stacks equally shaped tensors under a new leading extent.
template <typename T>
TensorPtr<T> stack(Tape<T>& tape, std::span<const TensorPtr<T>> parts);

template <typename T>
TensorPtr<T> flatten(Tape<T>& tape, const TensorPtr<T>& input);

// Scalar (shape (1)) sum of all entries.
template <typename T>
TensorPtr<T> sum(Tape<T>& tape, const TensorPtr<T>& input);

// Inverted dropout. Returns the input unchanged when !training or p == 0.
template <typename T>
TensorPtr<T> dropout(Tape<T>& tape, const TensorPtr<T>& input, double p, bool training,
                     std::mt19937_64& rng);

}  // namespace cgvo::nn
