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

#include "cgvo/augment.hpp"

#include <algorithm>

#include "cgvo/error.hpp"
#include "cgvo/image_io.hpp"

namespace cgvo {

SequenceSample horizontal_flip(const SequenceSample& sample) {
  SequenceSample out = sample;
  out.mirrored = !sample.mirrored;
  for (auto& t : out.targets) t = se3_to_vec(conjugate_mirror(vec_to_se3(t)));
  return out;
}

SequenceSample temporal_flip(const SequenceSample& sample) {
  SequenceSample out = sample;
  out.time_reversed = !sample.time_reversed;
  std::reverse(out.frame_indices.begin(), out.frame_indices.end());
  const std::size_t n = sample.targets.size();
  for (std::size_t k = 0; k < n; ++k)
    out.targets[k] = se3_to_vec(invert(vec_to_se3(sample.targets[n - 1 - k])));
  return out;
}

template <typename T>
SampleWithFrames<T> horizontal_flip(const SampleWithFrames<T>& in) {
  SampleWithFrames<T> out;
  out.sample = horizontal_flip(in.sample);
  out.frames.reserve(in.frames.size());
  for (const auto& f : in.frames) out.frames.push_back(std::make_shared<nn::Tensor<T>>(mirror_horizontally(*f)));
  return out;
}

template <typename T>
SampleWithFrames<T> temporal_flip(const SampleWithFrames<T>& in) {
  if (in.frames.size() != in.sample.frame_indices.size())
    throw ContractError("temporal_flip: frame count does not match sample");
  SampleWithFrames<T> out;
  out.sample = temporal_flip(in.sample);
  out.frames.assign(in.frames.rbegin(), in.frames.rend());
  return out;
}

template SampleWithFrames<float> horizontal_flip(const SampleWithFrames<float>&);
template SampleWithFrames<double> horizontal_flip(const SampleWithFrames<double>&);
template SampleWithFrames<float> temporal_flip(const SampleWithFrames<float>&);
template SampleWithFrames<double> temporal_flip(const SampleWithFrames<double>&);

}  // namespace cgvo
