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

#include <vector>

#include "cgvo/sampling.hpp"
#include "cgvo/tensor.hpp"

// Pose-consistent augmentations. Both flips are involutions.
namespace cgvo {

// Targets become se3_to_vec(conjugate_mirror(vec_to_se3(target))).
SequenceSample horizontal_flip(const SequenceSample& sample);

// Frame order reversed; target k becomes the inverse of old target T-1-k.
SequenceSample temporal_flip(const SequenceSample& sample);

template <typename T>
struct SampleWithFrames {
  SequenceSample sample;
  std::vector<nn::TensorPtr<T>> frames;  // T + 1 frames, 3 x H x W
};

// Also mirrors every frame about its vertical axis.
template <typename T>
SampleWithFrames<T> horizontal_flip(const SampleWithFrames<T>& in);

// Also reverses the frame list.
template <typename T>
SampleWithFrames<T> temporal_flip(const SampleWithFrames<T>& in);

}  // namespace cgvo
