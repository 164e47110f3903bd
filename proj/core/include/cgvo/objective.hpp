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

#include "cgvo/tensor.hpp"

namespace cgvo {

// Orientation weights: beta for the pair loss, beta1/beta2 for the forward
// and reversed branches of the mirror loss.
struct LossConfig {
  double beta = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;

  // Throws ConfigError unless all weights are positive and finite.
  void validate() const;
};

// (1 / (M N)) * sum_ij |P_ij - P^_ij|^2 + beta |Phi_ij - Phi^_ij|^2 over
// M x N x 6 tensors (components 0-2 position, 3-5 Euler angles). Angle
// residuals are raw differences; any |residual| >= pi/2 raises ContractError.
template <typename T>
nn::TensorPtr<T> pair_loss(nn::Tape<T>& tape, const nn::TensorPtr<T>& pred, const nn::Tensor<T>& target,
                           double beta);

// Forward and time-reversed branches summed under one joint 1 / (M N):
// sum |dP1|^2 + beta1 |dPhi1|^2 + |dP2|^2 + beta2 |dPhi2|^2.
template <typename T>
nn::TensorPtr<T> mirror_loss(nn::Tape<T>& tape, const nn::TensorPtr<T>& pred_fwd,
                             const nn::Tensor<T>& target_fwd, const nn::TensorPtr<T>& pred_bwd,
                             const nn::Tensor<T>& target_bwd, double beta1, double beta2);

}  // namespace cgvo
