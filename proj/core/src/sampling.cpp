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

#include "cgvo/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cgvo/error.hpp"

namespace cgvo {

void SamplingConfig::validate() const {
  if (pairs < 1) throw ContractError("sampling: T must be >= 1");
  if (overlap < 1) throw ContractError("sampling: overlap stride must be >= 1");
  if (strides.empty()) throw ContractError("sampling: empty stride set");
  for (int s : strides)
    if (s < 1) throw ContractError("sampling: strides must be >= 1");
}

SamplingResult sample_sequences(std::span<const SequencePoses> sequences, const SamplingConfig& config) {
  config.validate();
  SamplingResult result;
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, config.strides.size() - 1);
  const int min_stride = *std::min_element(config.strides.begin(), config.strides.end());

  for (const auto& seq : sequences) {
    const long n = static_cast<long>(seq.absolutes.size());
    if (n < long(config.pairs) * min_stride + 1) {
      ++result.skipped;
      continue;
    }
    for (long start = 0; start < n; start += config.overlap) {
      const int s = config.strides.size() == 1 ? config.strides[0] : config.strides[pick(rng)];
      const long last = start + long(config.pairs) * s;
      if (last >= n) {
        // Only count starts that a minimal stride could have served.
        if (start + long(config.pairs) * min_stride < n) ++result.skipped;
        continue;
      }
      SequenceSample sample;
      sample.sequence_id = seq.id;
      sample.stride = s;
      for (long f = start; f <= last; f += s) sample.frame_indices.push_back(f);
      for (std::size_t k = 0; k + 1 < sample.frame_indices.size(); ++k)
        sample.targets.push_back(
            relative_pose(seq.absolutes[sample.frame_indices[k]], seq.absolutes[sample.frame_indices[k + 1]]));
      result.samples.push_back(std::move(sample));
    }
  }
  return result;
}

DatasetSplit make_split(const KittiLayout& layout, const SplitSpec& spec, const SamplingConfig& config) {
  for (const auto& t : spec.test_sequences)
    if (std::find(spec.train_sequences.begin(), spec.train_sequences.end(), t) != spec.train_sequences.end())
      throw ContractError("split: sequence " + t + " is in both train and test lists");

  auto load = [&](const std::vector<std::string>& ids) {
    std::vector<SequencePoses> out;
    for (const auto& id : ids) out.push_back({id, layout.load_poses(id)});
    return out;
  };

  DatasetSplit split;
  const auto train_seqs = load(spec.train_sequences);
  auto train = sample_sequences(train_seqs, config);
  split.skipped += train.skipped;
  const std::size_t nval = std::min(spec.validation_count, train.samples.size());
  split.validation.assign(train.samples.end() - static_cast<long>(nval), train.samples.end());
  train.samples.resize(train.samples.size() - nval);
  split.train = std::move(train.samples);

  SamplingConfig test_cfg = config;
  test_cfg.strides = {1};
  const auto test_seqs = load(spec.test_sequences);
  auto test = sample_sequences(test_seqs, test_cfg);
  split.skipped += test.skipped;
  split.test = std::move(test.samples);
  return split;
}

std::vector<PoseVector6> derive_targets(const SequenceSample& sample, std::span<const RigidTransform> absolutes) {
  std::vector<PoseVector6> out;
  for (std::size_t k = 0; k + 1 < sample.frame_indices.size(); ++k) {
    const long a = sample.frame_indices[k], b = sample.frame_indices[k + 1];
    if (a < 0 || b < 0 || std::size_t(a) >= absolutes.size() || std::size_t(b) >= absolutes.size())
      throw ContractError("derive_targets: frame index outside trajectory");
    RigidTransform rel = compose(invert(absolutes[a]), absolutes[b]);
    if (sample.mirrored) rel = conjugate_mirror(rel);
    out.push_back(se3_to_vec(rel));
  }
  return out;
}

double target_consistency_error(const SequenceSample& sample, std::span<const RigidTransform> absolutes) {
  const auto derived = derive_targets(sample, absolutes);
  if (derived.size() != sample.targets.size()) return INFINITY;
  double worst = 0;
  for (std::size_t k = 0; k < derived.size(); ++k) {
    const auto a = derived[k].as_array(), b = sample.targets[k].as_array();
    for (int i = 0; i < 6; ++i) {
      double d = std::abs(a[i] - b[i]);
      if (i >= 3) d = std::abs(wrap_angle(a[i] - b[i]));
      worst = std::max(worst, d);
    }
  }
  return worst;
}

}  // namespace cgvo
