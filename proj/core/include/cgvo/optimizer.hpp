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

#include <string_view>
#include <vector>

#include "cgvo/checkpoint.hpp"
#include "cgvo/network.hpp"

namespace cgvo {

struct AmsGradConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with a running elementwise maximum of the second moment and bias
// correction:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,  vhat <- max(vhat, v)
//   theta <- theta - lr * (m / (1 - b1^t)) / (sqrt(vhat / (1 - b2^t)) + eps)
template <typename T>
class AmsGrad {
 public:
  AmsGrad(const ParameterSet<T>& params, AmsGradConfig config);

  // Updates every parameter not starting with `frozen_prefix` (when
  // non-empty). Throws ContractError naming any updated parameter that has
  // no gradient slot.
  void step(ParameterSet<T>& params, std::string_view frozen_prefix = {});

  double lr() const { return config_.lr; }
  void set_lr(double lr) { config_.lr = lr; }
  long step_count() const { return steps_; }
  const AmsGradConfig& config() const { return config_; }

  // Moments stored as "optim.m.<name>" / "optim.v.<name>" / "optim.vhat.<name>".
  void store(Checkpoint& ckpt, const ParameterSet<T>& params) const;
  void restore(const Checkpoint& ckpt, const ParameterSet<T>& params);

  std::span<const T> max_second_moment(std::size_t param_index) const { return state_.at(param_index).vhat; }

 private:
  struct Moments {
    nn::AlignedVector<T> m, v, vhat;
  };
  AmsGradConfig config_;
  std::vector<Moments> state_;
  long steps_ = 0;
};

extern template class AmsGrad<float>;
extern template class AmsGrad<double>;

}  // namespace cgvo
