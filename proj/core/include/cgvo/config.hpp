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
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cgvo/evaluation.hpp"
#include "cgvo/network.hpp"
#include "cgvo/objective.hpp"
#include "cgvo/sampling.hpp"
#include "cgvo/synthetic.hpp"
#include "cgvo/training.hpp"

namespace cgvo {

struct ConfigKey {
  std::string_view name;
  std::string_view default_value;
  std::string_view help;
};

// Every recognised key with its default, in output order.
std::span<const ConfigKey> config_keys();

// Flat namespaced key=value settings. Unknown keys are rejected.
class RunConfig {
 public:
  RunConfig();  // all defaults

  // Lines of "key = value"; '#' starts a comment. Throws ParseError for a
  // malformed line and ConfigError for an unknown key.
  void merge_text(std::string_view text);
  void merge_file(const std::filesystem::path& path);
  // "key=value" as given on the command line.
  void apply_override(std::string_view assignment);
  void set(std::string_view key, std::string value);

  const std::string& get(std::string_view key) const;
  long get_int(std::string_view key) const;
  std::uint64_t get_uint(std::string_view key) const;
  double get_double(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  // Comma-separated; empty entries are dropped.
  std::vector<std::string> get_list(std::string_view key) const;
  std::vector<double> get_double_list(std::string_view key) const;

  // Every key in registry order, "key = value" per line.
  std::string serialize() const;
  void write(const std::filesystem::path& path) const;

  const std::map<std::string, std::string, std::less<>>& values() const { return values_; }

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

// Typed views of a resolved configuration. Each validates its section.
ModelConfig model_config(const RunConfig& cfg);
LossConfig loss_config(const RunConfig& cfg);
SamplingConfig sampling_config(const RunConfig& cfg);
SplitSpec split_spec(const RunConfig& cfg);
TrainConfig train_config(const RunConfig& cfg);
EvalConfig eval_config(const RunConfig& cfg);
DrivingProfile driving_profile(const RunConfig& cfg);

}  // namespace cgvo
