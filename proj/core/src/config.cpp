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

#include "cgvo/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cgvo/error.hpp"

namespace cgvo {

namespace {

constexpr std::array kKeys = {
    ConfigKey{"seed", "0", "master seed for initialization, sampling, shuffling, augmentation, dropout"},
    ConfigKey{"data.root", "data", "dataset root in KITTI layout, relative to the run directory"},
    ConfigKey{"data.t1", "3", "pose pairs per training clip"},
    ConfigKey{"data.t2", "2", "recorded in run metadata, not used by any computation"},
    ConfigKey{"data.strides", "1,2,3", "frame-skip factors drawn per training clip"},
    ConfigKey{"data.overlap", "1", "spacing between consecutive clip start frames"},
    ConfigKey{"data.train_sequences", "00,01,02,08,09", "training sequence ids"},
    ConfigKey{"data.test_sequences", "03,04,05,06,07,10", "test sequence ids"},
    ConfigKey{"data.validation_count", "640", "trailing training clips held out for validation"},
    ConfigKey{"data.hflip_prob", "0.5", "probability of a horizontal flip per clip"},
    ConfigKey{"data.tflip_prob", "0.5", "probability of a temporal flip per clip"},
    ConfigKey{"model.scale", "desk", "full (1280x384), desk (320x96, 1/4 width) or tiny (64x24, 1/16 width)"},
    ConfigKey{"model.gru_cells", "3", "stacked memory cells for fine-tune and mirror phases"},
    ConfigKey{"model.precision", "float", "float or double"},
    ConfigKey{"loss.beta", "0.9", "orientation weight of the pair loss"},
    ConfigKey{"loss.beta1", "0.9", "orientation weight of the forward mirror branch"},
    ConfigKey{"loss.beta2", "0.999", "orientation weight of the reversed mirror branch"},
    ConfigKey{"train.phase", "pretrain-cnn", "pretrain-cnn, fine-tune or mirror-constrained"},
    ConfigKey{"train.batch_size", "4", "clips per update (halved in the mirror phase)"},
    ConfigKey{"train.epochs", "1", "epochs to run, counted from the resumed epoch"},
    ConfigKey{"train.max_steps", "0", "stop after this many updates in total; 0 = unlimited"},
    ConfigKey{"train.checkpoint_interval", "5", "epochs between checkpoints"},
    ConfigKey{"train.lr", "1e-4", "initial learning rate"},
    ConfigKey{"train.lr_halving_epochs", "30", "epochs between learning-rate halvings"},
    ConfigKey{"train.pretrain_checkpoint", "", "encoder source for fine-tune (optional for mirror)"},
    ConfigKey{"train.init_checkpoint", "", "full-model weights to start from, without optimizer state"},
    ConfigKey{"train.resume", "", "training checkpoint to continue from"},
    ConfigKey{"train.freeze_encoder", "false", "keep encoder weights fixed after pretraining"},
    ConfigKey{"train.clip_norm", "0", "global gradient-norm clip; 0 disables"},
    ConfigKey{"train.consistency_samples", "8", "clips used for the mirror consistency log"},
    ConfigKey{"eval.checkpoint", "", "model checkpoint to evaluate"},
    ConfigKey{"eval.mode", "model", "model or ground-truth (oracle predictions)"},
    ConfigKey{"eval.sequences", "", "sequence ids to evaluate; empty = data.test_sequences"},
    ConfigKey{"eval.lengths", "100,200,300,400,500,600,700,800", "subsequence lengths in metres"},
    ConfigKey{"eval.start_stride", "10", "frames between subsequence start frames"},
    ConfigKey{"eval.frame_rate", "10", "frames per second for speed binning"},
    ConfigKey{"eval.speed_window", "10", "frames per speed-binned window"},
    ConfigKey{"eval.speed_bins", "7", "equal-width speed bins"},
    ConfigKey{"eval.window", "0", "pairs per recurrent window during inference; 0 = whole sequence"},
    ConfigKey{"eval.output", "eval", "report directory, relative to the run directory"},
    ConfigKey{"synth.sequences", "3", "number of synthetic sequences"},
    ConfigKey{"synth.first_id", "0", "id of the first synthetic sequence"},
    ConfigKey{"synth.frames", "101", "frames per synthetic sequence"},
    ConfigKey{"synth.width", "320", "rendered width in pixels"},
    ConfigKey{"synth.height", "96", "rendered height in pixels"},
    ConfigKey{"synth.script", "drive", "drive or identity"},
    ConfigKey{"synth.camera_height", "1.65", "camera height above the ground plane in metres"},
    ConfigKey{"synth.speed_min", "0.5", "minimum speed in metres per frame"},
    ConfigKey{"synth.speed_max", "1.2", "maximum speed in metres per frame"},
    ConfigKey{"synth.yaw_rate_max", "0.02", "maximum yaw rate in radians per frame"},
    ConfigKey{"preview.count", "4", "clips written by augment-preview"},
    ConfigKey{"preview.ops", "hflip", "comma list of hflip, tflip applied in order"},
    ConfigKey{"preview.output", "preview", "preview directory, relative to the run directory"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

const ConfigKey* find_key(std::string_view name) {
  for (const auto& k : kKeys)
    if (k.name == name) return &k;
  return nullptr;
}

template <typename N>
N parse_number(std::string_view key, const std::string& text) {
  N value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(std::string(key) + ": '" + text + "' is not a valid number");
  return value;
}

}  // namespace

std::span<const ConfigKey> config_keys() { return kKeys; }

RunConfig::RunConfig() {
  for (const auto& k : kKeys) values_.emplace(std::string(k.name), std::string(k.default_value));
}

void RunConfig::set(std::string_view key, std::string value) {
  if (!find_key(key)) throw ConfigError("unknown config key '" + std::string(key) + "'");
  values_[std::string(key)] = std::move(value);
}

void RunConfig::merge_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    const auto key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ParseError("empty key", line_no);
    set(key, trim(std::string_view(line).substr(eq + 1)));
  }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    merge_text(buf.str());
  } catch (const ParseError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void RunConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

const std::string& RunConfig::get(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  return it->second;
}

long RunConfig::get_int(std::string_view key) const { return parse_number<long>(key, get(key)); }

std::uint64_t RunConfig::get_uint(std::string_view key) const {
  return parse_number<std::uint64_t>(key, get(key));
}

double RunConfig::get_double(std::string_view key) const {
  const double v = parse_number<double>(key, get(key));
  if (!std::isfinite(v)) throw ConfigError(std::string(key) + " must be finite");
  return v;
}

bool RunConfig::get_bool(std::string_view key) const {
  const auto& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(std::string(key) + ": '" + v + "' is not a boolean");
}

std::vector<std::string> RunConfig::get_list(std::string_view key) const {
  std::vector<std::string> out;
  std::istringstream in(get(key));
  for (std::string item; std::getline(in, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> RunConfig::get_double_list(std::string_view key) const {
  std::vector<double> out;
  for (const auto& item : get_list(key)) out.push_back(parse_number<double>(key, item));
  return out;
}

std::string RunConfig::serialize() const {
  std::string out;
  for (const auto& k : kKeys) out += std::string(k.name) + " = " + get(k.name) + "\n";
  return out;
}

void RunConfig::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize();
}

ModelConfig model_config(const RunConfig& cfg) {
  ModelConfig m = ModelConfig::preset(cfg.get("model.scale"));
  const long cells = cfg.get_int("model.gru_cells");
  if (cells < 0) throw ConfigError("model.gru_cells must be >= 0");
  m.gru_cells = int(cells);
  const auto& precision = cfg.get("model.precision");
  if (precision != "float" && precision != "double")
    throw ConfigError("model.precision must be float or double");
  return m;
}

LossConfig loss_config(const RunConfig& cfg) {
  LossConfig l{cfg.get_double("loss.beta"), cfg.get_double("loss.beta1"), cfg.get_double("loss.beta2")};
  l.validate();
  return l;
}

SamplingConfig sampling_config(const RunConfig& cfg) {
  SamplingConfig s;
  s.pairs = int(cfg.get_int("data.t1"));
  s.strides.clear();
  for (const auto& item : cfg.get_list("data.strides")) s.strides.push_back(parse_number<int>("data.strides", item));
  s.overlap = int(cfg.get_int("data.overlap"));
  s.seed = cfg.get_uint("seed");
  try {
    s.validate();
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
  return s;
}

SplitSpec split_spec(const RunConfig& cfg) {
  SplitSpec s;
  s.train_sequences = cfg.get_list("data.train_sequences");
  s.test_sequences = cfg.get_list("data.test_sequences");
  const long v = cfg.get_int("data.validation_count");
  if (v < 0) throw ConfigError("data.validation_count must be >= 0");
  s.validation_count = std::size_t(v);
  return s;
}

TrainConfig train_config(const RunConfig& cfg) {
  TrainConfig t;
  t.phase = parse_phase(cfg.get("train.phase"));
  t.t1 = int(cfg.get_int("data.t1"));
  t.batch_size = int(cfg.get_int("train.batch_size"));
  t.epochs = int(cfg.get_int("train.epochs"));
  t.max_steps = cfg.get_int("train.max_steps");
  t.checkpoint_interval = int(cfg.get_int("train.checkpoint_interval"));
  t.lr = cfg.get_double("train.lr");
  t.lr_halving_epochs = int(cfg.get_int("train.lr_halving_epochs"));
  t.seed = cfg.get_uint("seed");
  t.pretrain_checkpoint = cfg.get("train.pretrain_checkpoint");
  t.init_checkpoint = cfg.get("train.init_checkpoint");
  t.freeze_encoder = cfg.get_bool("train.freeze_encoder");
  t.clip_norm = cfg.get_double("train.clip_norm");
  t.hflip_prob = cfg.get_double("data.hflip_prob");
  t.tflip_prob = cfg.get_double("data.tflip_prob");
  t.validate();
  return t;
}

EvalConfig eval_config(const RunConfig& cfg) {
  EvalConfig e;
  e.lengths = cfg.get_double_list("eval.lengths");
  const long stride = cfg.get_int("eval.start_stride"), win = cfg.get_int("eval.speed_window"),
             window = cfg.get_int("eval.window");
  if (stride < 1 || win < 1 || window < 0)
    throw ConfigError("eval.start_stride and eval.speed_window must be >= 1, eval.window >= 0");
  e.start_stride = std::size_t(stride);
  e.frame_rate = cfg.get_double("eval.frame_rate");
  e.speed_window = std::size_t(win);
  e.speed_bins = int(cfg.get_int("eval.speed_bins"));
  e.window = std::size_t(window);
  e.validate();
  return e;
}

DrivingProfile driving_profile(const RunConfig& cfg) {
  DrivingProfile p{cfg.get_double("synth.speed_min"), cfg.get_double("synth.speed_max"),
                   cfg.get_double("synth.yaw_rate_max")};
  if (!(p.speed_min >= 0) || p.speed_max < p.speed_min || p.yaw_rate_max < 0)
    throw ConfigError("synth speeds must satisfy 0 <= speed_min <= speed_max and yaw_rate_max >= 0");
  return p;
}

}  // namespace cgvo
