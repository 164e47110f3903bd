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

#include "cgvo/network.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "cgvo/error.hpp"

namespace cgvo {
namespace {

struct BaseLayer {
  const char* name;
  int channels;
  int kernel;
  int stride;
};

constexpr BaseLayer kTable1[] = {
    {"conv1", 64, 7, 2},     {"conv2", 128, 5, 2},    {"conv3", 256, 5, 2},
    {"conv3_1", 256, 3, 1},  {"conv4", 512, 3, 2},    {"conv4_1", 512, 3, 1},
    {"conv5", 512, 3, 2},    {"conv5_1", 512, 3, 1},  {"conv6", 1024, 3, 2},
    {"conv6_1", 1024, 3, 1},
};

constexpr int kGateKernel = 3;

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

int parse_int(std::string_view s, std::string_view what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError("model config: bad integer for " + std::string(what) + ": '" + std::string(s) + "'");
  return v;
}

double parse_double(std::string_view s, std::string_view what) {
  try {
    std::size_t used = 0;
    const std::string str(s);
    double v = std::stod(str, &used);
    if (used != str.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("model config: bad number for " + std::string(what) + ": '" + std::string(s) + "'");
  }
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- EncoderConfig

EncoderConfig EncoderConfig::table1() {
  EncoderConfig c;
  for (const auto& l : kTable1) c.layers.push_back({l.name, l.channels, l.kernel, l.stride});
  return c;
}

EncoderConfig EncoderConfig::scaled(int width, int height, double width_multiplier) {
  if (width <= 0 || height <= 0 || !(width_multiplier > 0))
    throw ShapeError("encoder: resolution and width multiplier must be positive");
  int total_stride2 = 0;
  for (const auto& l : kTable1) total_stride2 += l.stride == 2;

  for (int keep = total_stride2; keep >= 0; --keep) {
    EncoderConfig c;
    c.width = width;
    c.height = height;
    c.width_multiplier = width_multiplier;
    int seen = 0;
    for (const auto& l : kTable1) {
      int stride = l.stride;
      if (stride == 2 && seen++ >= keep) stride = 1;
      const int ch = std::max(1, static_cast<int>(std::lround(l.channels * width_multiplier)));
      c.layers.push_back({l.name, ch, l.kernel, stride});
    }
    try {
      c.validate();
      return c;
    } catch (const ShapeError&) {
    }
  }
  throw ShapeError("encoder: no stride assignment yields an even pooled map at " + std::to_string(width) +
                   "x" + std::to_string(height));
}

std::vector<nn::Shape> EncoderConfig::layer_shapes() const {
  std::vector<nn::Shape> shapes;
  std::size_t h = height, w = width;
  for (const auto& l : layers) {
    const std::size_t k = l.kernel, s = l.stride, p = l.padding();
    if (h + 2 * p < k || w + 2 * p < k)
      throw ShapeError("encoder: layer " + l.name + " kernel exceeds padded input");
    h = nn::conv_out_extent(h, k, s, p);
    w = nn::conv_out_extent(w, k, s, p);
    shapes.push_back({static_cast<std::size_t>(l.out_channels), h, w});
  }
  const std::size_t c = layers.empty() ? in_channels : layers.back().out_channels;
  shapes.push_back({c, h / 2, w / 2});
  return shapes;
}

void EncoderConfig::validate() const {
  if (layers.empty()) throw ShapeError("encoder: no layers");
  for (const auto& l : layers)
    if (l.out_channels <= 0 || l.kernel <= 0 || l.stride <= 0)
      throw ShapeError("encoder: layer " + l.name + " has non-positive geometry");
  const auto shapes = layer_shapes();
  const auto& last = shapes[shapes.size() - 2];
  if (last[1] < 2 || last[2] < 2 || last[1] % 2 != 0 || last[2] % 2 != 0)
    throw ShapeError("encoder: pre-pool map " + nn::to_string(last) + " must have even extents >= 2");
}

// ---------------------------------------------------------------- ModelConfig

ModelConfig ModelConfig::preset(std::string_view name) {
  ModelConfig c;
  if (name == "full") {
    c.encoder = EncoderConfig::table1();
  } else if (name == "desk") {
    c.encoder = EncoderConfig::scaled(320, 96, 0.25);
  } else if (name == "tiny") {
    c.encoder = EncoderConfig::scaled(64, 24, 1.0 / 16.0);
  } else {
    throw ConfigError("unknown model scale '" + std::string(name) + "' (full, desk, tiny)");
  }
  return c;
}

std::string ModelConfig::serialize() const {
  std::ostringstream os;
  os << "model.width=" << encoder.width << '\n'
     << "model.height=" << encoder.height << '\n'
     << "model.in_channels=" << encoder.in_channels << '\n'
     << "model.width_multiplier=" << format_double(encoder.width_multiplier) << '\n'
     << "model.layers=";
  for (std::size_t i = 0; i < encoder.layers.size(); ++i) {
    const auto& l = encoder.layers[i];
    os << (i ? "," : "") << l.name << ':' << l.out_channels << ':' << l.kernel << ':' << l.stride;
  }
  os << '\n'
     << "model.gru_cells=" << gru_cells << '\n'
     << "model.head_hidden=" << head_hidden << '\n'
     << "model.dropout=" << format_double(dropout) << '\n';
  return os.str();
}

ModelConfig ModelConfig::parse(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  for (auto line : split(text, '\n')) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("model config: malformed line '" + std::string(line) + "'");
    kv.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }
  auto need = [&](std::string_view key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("model config: missing key " + std::string(key));
    return it->second;
  };
  ModelConfig c;
  c.encoder.layers.clear();
  c.encoder.width = parse_int(need("model.width"), "model.width");
  c.encoder.height = parse_int(need("model.height"), "model.height");
  c.encoder.in_channels = parse_int(need("model.in_channels"), "model.in_channels");
  c.encoder.width_multiplier = parse_double(need("model.width_multiplier"), "model.width_multiplier");
  for (auto item : split(need("model.layers"), ',')) {
    const auto f = split(item, ':');
    if (f.size() != 4) throw ConfigError("model config: bad layer spec '" + std::string(item) + "'");
    c.encoder.layers.push_back({std::string(f[0]), parse_int(f[1], "layer channels"),
                                parse_int(f[2], "layer kernel"), parse_int(f[3], "layer stride")});
  }
  c.gru_cells = parse_int(need("model.gru_cells"), "model.gru_cells");
  c.head_hidden = parse_int(need("model.head_hidden"), "model.head_hidden");
  c.dropout = parse_double(need("model.dropout"), "model.dropout");
  c.encoder.validate();
  return c;
}

// ---------------------------------------------------------------- ParameterSet

template <typename T>
nn::TensorPtr<T> ParameterSet<T>::add(std::string name, nn::Shape shape) {
  if (find(name)) throw ContractError("duplicate parameter " + name);
  auto t = nn::make_parameter<T>(std::move(shape));
  entries_.emplace_back(std::move(name), t);
  return t;
}

template <typename T>
nn::TensorPtr<T> ParameterSet<T>::find(std::string_view name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return t;
  return nullptr;
}

template <typename T>
const nn::TensorPtr<T>& ParameterSet<T>::at(std::string_view name) const {
  for (const auto& e : entries_)
    if (e.first == name) return e.second;
  throw ContractError("unknown parameter " + std::string(name));
}

template <typename T>
std::size_t ParameterSet<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second->size();
  return n;
}

template <typename T>
void ParameterSet<T>::zero_grad() {
  for (auto& e : entries_) e.second->zero_grad();
}

std::pair<double, double> fan_in_out(const nn::Shape& shape) {
  if (shape.size() == 2) return {double(shape[1]), double(shape[0])};
  if (shape.size() == 4) {
    const double rf = double(shape[2] * shape[3]);
    return {shape[1] * rf, shape[0] * rf};
  }
  throw ShapeError("fan_in_out: unsupported weight shape " + nn::to_string(shape));
}

template <typename T>
void xavier_init(ParameterSet<T>& params, std::uint64_t seed, std::string_view only_prefix) {
  std::mt19937_64 rng(seed);
  for (const auto& [name, t] : params) {
    if (!only_prefix.empty() && !name.starts_with(only_prefix)) continue;
    if (t->rank() == 1) {
      std::fill(t->values().begin(), t->values().end(), T(0));
      continue;
    }
    const auto [fi, fo] = fan_in_out(t->shape());
    const double a = std::sqrt(6.0 / (fi + fo));
    std::uniform_real_distribution<double> dist(-a, a);
    for (T& v : t->values()) v = static_cast<T>(dist(rng));
  }
}

// ---------------------------------------------------------------- GRU

template <typename T>
GruStepResult<T> gru_step(nn::Tape<T>& tape, const nn::TensorPtr<T>& x, const nn::TensorPtr<T>& h_prev,
                          const GruCellParams<T>& cell) {
  if (x->rank() != 3 || h_prev->rank() != 3 || x->dim(1) != h_prev->dim(1) || x->dim(2) != h_prev->dim(2))
    throw ShapeError("gru_step: input " + nn::to_string(x->shape()) + " and state " +
                     nn::to_string(h_prev->shape()) + " differ spatially");
  constexpr int pad = kGateKernel / 2;
  auto gate = [&](const nn::TensorPtr<T>& wh, const nn::TensorPtr<T>& h, const nn::TensorPtr<T>& wx,
                  const nn::TensorPtr<T>& b) {
    auto from_h = nn::conv2d<T>(tape, h, wh, nullptr, 1, pad);
    auto from_x = nn::conv2d<T>(tape, x, wx, b, 1, pad);
    return nn::add(tape, from_h, from_x);
  };
  GruStepResult<T> r;
  r.update_gate = nn::sigmoid(tape, gate(cell.w_hz, h_prev, cell.w_xz, cell.b_z));
  r.reset_gate = nn::sigmoid(tape, gate(cell.w_hr, h_prev, cell.w_xr, cell.b_r));
  auto gated = nn::multiply(tape, r.reset_gate, h_prev);
  r.candidate = nn::tanh(tape, gate(cell.w_h, gated, cell.w_x, cell.b));
  auto keep = nn::multiply(tape, nn::one_minus(tape, r.update_gate), h_prev);
  auto take = nn::multiply(tape, r.update_gate, r.candidate);
  r.h = nn::add(tape, keep, take);
  return r;
}

// ---------------------------------------------------------------- PoseModel

template <typename T>
PoseModel<T>::PoseModel(ModelConfig config) : config_(std::move(config)) {
  config_.encoder.validate();
  if (config_.gru_cells < 0 || config_.head_hidden <= 0 || config_.dropout < 0 || config_.dropout >= 1)
    throw ConfigError("model: invalid gru_cells/head_hidden/dropout");

  std::size_t in_ch = config_.encoder.in_channels;
  for (const auto& l : config_.encoder.layers) {
    const std::string base = std::string(kEncoderPrefix) + l.name;
    auto w = params_.add(base + ".weight", {std::size_t(l.out_channels), in_ch, std::size_t(l.kernel),
                                            std::size_t(l.kernel)});
    auto b = params_.add(base + ".bias", {std::size_t(l.out_channels)});
    encoder_layers_.emplace_back(w, b);
    in_ch = l.out_channels;
  }
  const nn::Shape feat = config_.encoder.output_shape();
  const std::size_t c = feat[0];
  const nn::Shape gate_w{c, c, kGateKernel, kGateKernel};
  for (int i = 0; i < config_.gru_cells; ++i) {
    const std::string base = std::string(kGruPrefix) + std::to_string(i) + ".";
    GruCellParams<T> p;
    p.w_hz = params_.add(base + "w_hz", gate_w);
    p.w_xz = params_.add(base + "w_xz", gate_w);
    p.b_z = params_.add(base + "b_z", {c});
    p.w_hr = params_.add(base + "w_hr", gate_w);
    p.w_xr = params_.add(base + "w_xr", gate_w);
    p.b_r = params_.add(base + "b_r", {c});
    p.w_h = params_.add(base + "w_h", gate_w);
    p.w_x = params_.add(base + "w_x", gate_w);
    p.b = params_.add(base + "b", {c});
    cells_.push_back(p);
  }
  const std::size_t flat = nn::element_count(feat);
  const std::size_t hidden = config_.head_hidden;
  fc1_w_ = params_.add(std::string(kHeadPrefix) + "fc1.weight", {hidden, flat});
  fc1_b_ = params_.add(std::string(kHeadPrefix) + "fc1.bias", {hidden});
  fc2_w_ = params_.add(std::string(kHeadPrefix) + "fc2.weight", {6, hidden});
  fc2_b_ = params_.add(std::string(kHeadPrefix) + "fc2.bias", {6});
}

template <typename T>
nn::TensorPtr<T> PoseModel<T>::encode_pair(nn::Tape<T>& tape, const nn::TensorPtr<T>& frame_a,
                                           const nn::TensorPtr<T>& frame_b) const {
  const nn::Shape expected{3, std::size_t(config_.encoder.height), std::size_t(config_.encoder.width)};
  if (frame_a->shape() != expected || frame_b->shape() != expected)
    throw ShapeError("encode_pair: frames " + nn::to_string(frame_a->shape()) + " / " +
                     nn::to_string(frame_b->shape()) + " do not match configured " + nn::to_string(expected));
  auto x = nn::concat_channels(tape, frame_a, frame_b);
  for (std::size_t i = 0; i < encoder_layers_.size(); ++i) {
    const auto& spec = config_.encoder.layers[i];
    const auto& [w, b] = encoder_layers_[i];
    x = nn::relu(tape, nn::conv2d(tape, x, w, b, spec.stride, spec.padding()));
  }
  return nn::max_pool2(tape, x);
}

template <typename T>
GruCellParams<T> PoseModel<T>::cell(std::size_t index) const {
  return cells_.at(index);
}

template <typename T>
nn::TensorPtr<T> PoseModel<T>::head(nn::Tape<T>& tape, const nn::TensorPtr<T>& top,
                                    const ForwardOptions& options) const {
  auto hidden = nn::relu(tape, nn::linear(tape, top, fc1_w_, fc1_b_));
  if (options.training && config_.dropout > 0) {
    if (!options.dropout_rng) throw ContractError("head: training with dropout needs a generator");
    hidden = nn::dropout(tape, hidden, config_.dropout, true, *options.dropout_rng);
  }
  return nn::linear(tape, hidden, fc2_w_, fc2_b_);
}

template <typename T>
ConvGruState<T> PoseModel<T>::zero_state() const {
  ConvGruState<T> s;
  for (std::size_t i = 0; i < cells_.size(); ++i)
    s.hidden.push_back(nn::make_tensor<T>(config_.encoder.output_shape()));
  return s;
}

template <typename T>
nn::TensorPtr<T> PoseModel<T>::step(nn::Tape<T>& tape, const nn::TensorPtr<T>& frame_a,
                                    const nn::TensorPtr<T>& frame_b, ConvGruState<T>& state,
                                    const ForwardOptions& options) const {
  if (state.hidden.size() != cells_.size()) throw ContractError("step: state does not match cell count");
  auto x = encode_pair(tape, frame_a, frame_b);
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    state.hidden[i] = gru_step(tape, x, state.hidden[i], cells_[i]).h;
    x = state.hidden[i];
  }
  return head(tape, x, options);
}

template <typename T>
std::vector<nn::TensorPtr<T>> PoseModel<T>::forward_sequence(nn::Tape<T>& tape,
                                                             std::span<const nn::TensorPtr<T>> frames,
                                                             const ForwardOptions& options) const {
  if (frames.size() < 2) throw ContractError("forward_sequence: need at least two frames (T >= 1)");
  auto state = zero_state();
  std::vector<nn::TensorPtr<T>> poses;
  poses.reserve(frames.size() - 1);
  for (std::size_t t = 0; t + 1 < frames.size(); ++t)
    poses.push_back(step(tape, frames[t], frames[t + 1], state, options));
  return poses;
}

#define CGVO_INSTANTIATE_NETWORK(T)                                                                \
  template class ParameterSet<T>;                                                                  \
  template class PoseModel<T>;                                                                     \
  template void xavier_init(ParameterSet<T>&, std::uint64_t, std::string_view);                    \
  template GruStepResult<T> gru_step(nn::Tape<T>&, const nn::TensorPtr<T>&, const nn::TensorPtr<T>&, \
                                     const GruCellParams<T>&);

CGVO_INSTANTIATE_NETWORK(float)
CGVO_INSTANTIATE_NETWORK(double)

#undef CGVO_INSTANTIATE_NETWORK

}  // namespace cgvo
