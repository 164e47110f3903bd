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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgvo/config.hpp"
#include "cgvo/evaluation.hpp"

namespace cgvo::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDataError = 3,
  kContractError = 4,
};

// Maps a library exception onto the process exit code.
int exit_code_for(const std::exception& e);

struct Context {
  std::filesystem::path run_dir = ".";
  RunConfig config;
  bool force = false;
  int workers = 0;
  std::ostream* out = nullptr;  // progress messages; null = silent

  // Relative paths resolve against run_dir.
  std::filesystem::path resolve(const std::filesystem::path& p) const;
  std::filesystem::path data_root() const { return resolve(config.get("data.root")); }
};

// Defaults, then the optional file, then each key=value override.
RunConfig resolve_config(const std::optional<std::filesystem::path>& file, std::span<const std::string> overrides);

struct SynthSummary {
  std::vector<std::string> sequences;
  std::size_t frames = 0;  // total
};

struct TrainSummary {
  int first_epoch = 0;  // epochs completed before this run
  int last_epoch = 0;   // epochs completed after this run
  long steps = 0;       // optimizer steps in total
  std::size_t train_clips = 0;
  std::size_t validation_clips = 0;
  std::vector<double> epoch_losses;
  std::filesystem::path last_checkpoint;
};

SynthSummary cmd_synth(const Context& ctx);
TrainSummary cmd_train(const Context& ctx);
EvalReport cmd_eval(const Context& ctx);
// Returns the number of clips written.
std::size_t cmd_augment_preview(const Context& ctx);

// Full command-line entry point; returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cgvo::cli
