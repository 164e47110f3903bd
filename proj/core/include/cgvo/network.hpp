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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cgvo/ops.hpp"
#include "cgvo/tensor.hpp"

namespace cgvo {

struct ConvLayerSpec {
  std::string name;
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;

  // "same"-style padding.
  int padding() const { return kernel / 2; }
  bool operator==(const ConvLayerSpec&) const = default;
};

// Feature-encoding CNN geometry. The default instance is the ten-layer
// FlowNetSimple-style encoder at 1280x384 followed by a 2x2 max-pool.
struct EncoderConfig {
  std::vector<ConvLayerSpec> layers;
  int width = 1280;
  int height = 384;
  int in_channels = 6;
  double width_multiplier = 1.0;

  static EncoderConfig table1();

  // The same ten layers at another resolution and channel width. Leading
  // stride-2 layers are kept while the pooled map stays even-sized; the
  // remaining stride-2 layers become stride 1. Throws ShapeError when no
  // assignment works.
  static EncoderConfig scaled(int width, int height, double width_multiplier);

  // Output shape after each conv layer, then the pooled map (layers.size()+1 entries).
  std::vector<nn::Shape> layer_shapes() const;
  nn::Shape output_shape() const { return layer_shapes().back(); }

  // Throws ShapeError if any layer collapses or the pre-pool map is odd.
  void validate() const;

  bool operator==(const EncoderConfig&) const = default;
};

struct ModelConfig {
  EncoderConfig encoder = EncoderConfig::table1();
  // 0 selects the CNN-only topology (encoder -> head).
  int gru_cells = 3;
  int head_hidden = 512;
  double dropout = 0.2;

  // "full": 1280x384, x1. "desk": 320x96, x1/4. "tiny": 64x24, x1/16.
  static ModelConfig preset(std::string_view name);

  // One key=value per line; parse() is the inverse.
  std::string serialize() const;
  static ModelConfig parse(std::string_view text);

  bool operator==(const ModelConfig&) const = default;
};

// Named parameter tensors in registration order.
template <typename T>
class ParameterSet {
 public:
  using Entry = std::pair<std::string, nn::TensorPtr<T>>;

  nn::TensorPtr<T> add(std::string name, nn::Shape shape);
  const nn::TensorPtr<T>& at(std::string_view name) const;
  nn::TensorPtr<T> find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void zero_grad();

 private:
  std::vector<Entry> entries_;
};

// Xavier-uniform weights in +-sqrt(6 / (fan_in + fan_out)); every rank-1
// tensor (bias) is zeroed. Parameters are filled in registration order
// from one generator, so a seed fixes the result. When `only_prefix` is
// non-empty, only names starting with it are touched.
template <typename T>
void xavier_init(ParameterSet<T>& params, std::uint64_t seed, std::string_view only_prefix = {});

// Fan-in/fan-out of a weight shape: (out, in) or (out, in, k, k).
std::pair<double, double> fan_in_out(const nn::Shape& shape);

template <typename T>
struct GruCellParams {
  nn::TensorPtr<T> w_hz, w_xz, b_z;
  nn::TensorPtr<T> w_hr, w_xr, b_r;
  nn::TensorPtr<T> w_h, w_x, b;
};

template <typename T>
struct GruStepResult {
  nn::TensorPtr<T> h;
  nn::TensorPtr<T> update_gate;
  nn::TensorPtr<T> reset_gate;
  nn::TensorPtr<T> candidate;
};

// One convolutional GRU update:
//   z  = sigmoid(W_hz * h + W_xz * x + b_z)
//   r  = sigmoid(W_hr * h + W_xr * x + b_r)
//   h~ = tanh(W_h * (r . h) + W_x * x + b)
//   h' = (1 - z) . h + z . h~
// Gate convolutions are 3x3, stride 1, padding 1.
template <typename T>
GruStepResult<T> gru_step(nn::Tape<T>& tape, const nn::TensorPtr<T>& x, const nn::TensorPtr<T>& h_prev,
                          const GruCellParams<T>& cell);

// Recurrent state: one hidden map per stacked cell.
template <typename T>
struct ConvGruState {
  std::vector<nn::TensorPtr<T>> hidden;
};

struct ForwardOptions {
  bool training = false;
  std::mt19937_64* dropout_rng = nullptr;  // required when training with dropout > 0
};

template <typename T>
class PoseModel {
 public:
  explicit PoseModel(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  ParameterSet<T>& parameters() { return params_; }
  const ParameterSet<T>& parameters() const { return params_; }
  bool has_memory() const { return config_.gru_cells > 0; }

  void init_weights(std::uint64_t seed) { xavier_init(params_, seed); }

  // Stacks two 3xHxW frames to 6 channels and runs conv+relu layers then max_pool2.
  nn::TensorPtr<T> encode_pair(nn::Tape<T>& tape, const nn::TensorPtr<T>& frame_a,
                               const nn::TensorPtr<T>& frame_b) const;

  GruCellParams<T> cell(std::size_t index) const;

  // flatten -> linear(head_hidden) -> relu -> dropout -> linear(6)
  nn::TensorPtr<T> head(nn::Tape<T>& tape, const nn::TensorPtr<T>& top,
                        const ForwardOptions& options) const;

  ConvGruState<T> zero_state() const;

  // One pair through encoder, the cell stack (updating state) and head.
  nn::TensorPtr<T> step(nn::Tape<T>& tape, const nn::TensorPtr<T>& frame_a,
                        const nn::TensorPtr<T>& frame_b, ConvGruState<T>& state,
                        const ForwardOptions& options) const;

  // T+1 frames -> T pose 6-vectors, from a zero state. Throws ContractError for T = 0.
  std::vector<nn::TensorPtr<T>> forward_sequence(nn::Tape<T>& tape,
                                                 std::span<const nn::TensorPtr<T>> frames,
                                                 const ForwardOptions& options) const;

  static constexpr std::string_view kEncoderPrefix = "encoder.";
  static constexpr std::string_view kGruPrefix = "gru.";
  static constexpr std::string_view kHeadPrefix = "head.";

 private:
  ModelConfig config_;
  ParameterSet<T> params_;
  std::vector<std::pair<nn::TensorPtr<T>, nn::TensorPtr<T>>> encoder_layers_;
  std::vector<GruCellParams<T>> cells_;
  nn::TensorPtr<T> fc1_w_, fc1_b_, fc2_w_, fc2_b_;
};

extern template class ParameterSet<float>;
extern template class ParameterSet<double>;
extern template class PoseModel<float>;
extern template class PoseModel<double>;

}  // namespace cgvo
