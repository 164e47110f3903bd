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

#include "cgvo/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "cgvo/error.hpp"

namespace cgvo {

template <typename T>
AmsGrad<T>::AmsGrad(const ParameterSet<T>& params, AmsGradConfig config) : config_(config) {
  if (!(config_.lr >= 0) || !(config_.beta1 >= 0 && config_.beta1 < 1) || !(config_.beta2 >= 0 && config_.beta2 < 1) ||
      !(config_.epsilon > 0))
    throw ConfigError("amsgrad: invalid hyperparameters");
  for (const auto& [name, t] : params) {
    Moments m;
    m.m.assign(t->size(), T(0));
    m.v.assign(t->size(), T(0));
    m.vhat.assign(t->size(), T(0));
    state_.push_back(std::move(m));
  }
}

template <typename T>
void AmsGrad<T>::step(ParameterSet<T>& params, std::string_view frozen_prefix) {
  if (params.size() != state_.size()) throw ContractError("amsgrad: parameter set changed since construction");
  for (const auto& [name, t] : params) {
    if (!frozen_prefix.empty() && name.starts_with(frozen_prefix)) continue;
    if (!t->has_grad()) throw ContractError("amsgrad: parameter " + name + " has no gradient");
  }
  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, double(steps_));
  const double c2 = 1.0 - std::pow(b2, double(steps_));
  std::size_t index = 0;
  for (const auto& [name, t] : params) {
    Moments& s = state_[index++];
    if (!frozen_prefix.empty() && name.starts_with(frozen_prefix)) continue;
    auto theta = t->values();
    auto g = t->grad();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double gi = g[i];
      const double m = b1 * s.m[i] + (1.0 - b1) * gi;
      const double v = b2 * s.v[i] + (1.0 - b2) * gi * gi;
      s.m[i] = static_cast<T>(m);
      s.v[i] = static_cast<T>(v);
      s.vhat[i] = std::max(s.vhat[i], s.v[i]);
      const double m_hat = m / c1;
      const double v_tilde = double(s.vhat[i]) / c2;
      theta[i] = static_cast<T>(theta[i] - config_.lr * m_hat / (std::sqrt(v_tilde) + config_.epsilon));
    }
  }
}

template <typename T>
void AmsGrad<T>::store(Checkpoint& ckpt, const ParameterSet<T>& params) const {
  std::size_t index = 0;
  for (const auto& [name, t] : params) {
    const Moments& s = state_.at(index++);
    for (auto [tag, vec] : {std::pair{"m", &s.m}, std::pair{"v", &s.v}, std::pair{"vhat", &s.vhat}}) {
      StoredTensor st;
      st.name = std::string("optim.") + tag + "." + name;
      st.shape = t->shape();
      st.dtype = sizeof(T) == 4 ? DType::kFloat32 : DType::kFloat64;
      st.values.assign(vec->begin(), vec->end());
      ckpt.tensors.push_back(std::move(st));
    }
  }
  ckpt.metadata["optim.steps"] = std::to_string(steps_);
}

template <typename T>
void AmsGrad<T>::restore(const Checkpoint& ckpt, const ParameterSet<T>& params) {
  std::size_t index = 0;
  for (const auto& [name, t] : params) {
    Moments& s = state_.at(index++);
    for (auto [tag, vec] : {std::pair{"m", &s.m}, std::pair{"v", &s.v}, std::pair{"vhat", &s.vhat}}) {
      const StoredTensor* st = ckpt.find(std::string("optim.") + tag + "." + name);
      if (!st || st->shape != t->shape()) throw CheckpointError("optimizer state missing or mismatched for " + name);
      for (std::size_t i = 0; i < vec->size(); ++i) (*vec)[i] = static_cast<T>(st->values[i]);
    }
  }
  steps_ = std::stol(ckpt.meta("optim.steps", "0"));
}

template class AmsGrad<float>;
template class AmsGrad<double>;

}  // namespace cgvo
