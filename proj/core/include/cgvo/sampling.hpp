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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cgvo/geometry.hpp"
#include "cgvo/kitti.hpp"

namespace cgvo {

// A clip of T + 1 frames with its T ground-truth relative poses. Before a
// temporal flip the frame indices are an arithmetic progression with
// common difference `stride`.
struct SequenceSample {
  std::string sequence_id;
  std::vector<long> frame_indices;
  int stride = 1;
  bool mirrored = false;
  bool time_reversed = false;
  std::vector<PoseVector6> targets;

  std::size_t pairs() const { return targets.size(); }
  bool operator==(const SequenceSample&) const = default;
};

struct SequencePoses {
  std::string id;
  std::vector<RigidTransform> absolutes;
};

struct SamplingConfig {
  int pairs = 1;                // T
  std::vector<int> strides{1};  // frame-skip factors, drawn per sample
  int overlap = 1;              // spacing between consecutive start frames
  std::uint64_t seed = 0;

  void validate() const;
};

struct SamplingResult {
  std::vector<SequenceSample> samples;
  // Start positions (or whole sequences) too short for the drawn stride.
  std::size_t skipped = 0;
};

// Fixed-length samples from each sequence, in sequence order then start
// order. Targets are computed from the absolutes at the strided indices.
SamplingResult sample_sequences(std::span<const SequencePoses> sequences, const SamplingConfig& config);

// Training-order samples of the listed sequences; the validation set is
// the last `validation_count` of them (taken out of train). The test split
// always uses stride 1.
struct SplitSpec {
  std::vector<std::string> train_sequences{"00", "01", "02", "08", "09"};
  std::vector<std::string> test_sequences{"03", "04", "05", "06", "07", "10"};
  std::size_t validation_count = 640;
};

struct DatasetSplit {
  std::vector<SequenceSample> train;
  std::vector<SequenceSample> validation;
  std::vector<SequenceSample> test;
  std::size_t skipped = 0;
};

// Throws ContractError if train and test sequence lists intersect.
DatasetSplit make_split(const KittiLayout& layout, const SplitSpec& spec, const SamplingConfig& config);

// Targets implied by the sample's frame indices and flags, re-derived
// from the absolute trajectory of its sequence.
std::vector<PoseVector6> derive_targets(const SequenceSample& sample, std::span<const RigidTransform> absolutes);

// Largest per-component deviation between stored and re-derived targets.
double target_consistency_error(const SequenceSample& sample, std::span<const RigidTransform> absolutes);

}  // namespace cgvo
