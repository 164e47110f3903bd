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

#include "cgvo/objective.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cgvo/error.hpp"
#include "cgvo/ops.hpp"

namespace cgvo {
namespace {

template <typename T>
void check_pose_batch(const char* op, const nn::Tensor<T>& pred, const nn::Tensor<T>& target) {
  if (pred.shape() != target.shape() || pred.rank() != 3 || pred.dim(2) != 6)
    throw ShapeError(std::string(op) + ": expected matching M x N x 6 tensors, got " +
                     nn::to_string(pred.shape()) + " and " + nn::to_string(target.shape()));
}

// scale * sum_k w_k (pred_k - target_k)^2 with w = (1,1,1,beta,beta,beta).
template <typename T>
nn::TensorPtr<T> weighted_square_error(nn::Tape<T>& tape, const nn::TensorPtr<T>& pred,
                                       const nn::Tensor<T>& target, double beta, double scale) {
  const std::size_t n = pred->size();
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = double((*pred)[i]) - double(target[i]);
    const bool angle = i % 6 >= 3;
    if (angle && !(std::abs(d) < std::numbers::pi / 2)) {
      std::ostringstream os;
      os << "loss: orientation residual " << d << " at element " << i << " is outside (-pi/2, pi/2)";
      throw ContractError(os.str());
    }
    acc += (angle ? beta : 1.0) * d * d;
  }
  auto out = nn::make_tensor<T>({1}, static_cast<T>(scale * acc));
  if (tape.enabled() && pred->requires_grad()) {
    nn::Tensor<T>* o = out.get();
    nn::AlignedVector<T> residual(n);
    for (std::size_t i = 0; i < n; ++i) residual[i] = (*pred)[i] - target[i];
    tape.record(out, [pred, o, residual = std::move(residual), beta, scale] {
      const double g = double(o->grad()[0]) * 2.0 * scale;
      auto gp = pred->grad();
      for (std::size_t i = 0; i < residual.size(); ++i)
        gp[i] += static_cast<T>(g * (i % 6 >= 3 ? beta : 1.0) * double(residual[i]));
    });
  }
  return out;
}

}  // namespace

void LossConfig::validate() const {
  for (double b : {beta, beta1, beta2})
    if (!(b > 0) || !std::isfinite(b)) throw ConfigError("loss weights must be positive and finite");
}

template <typename T>
nn::TensorPtr<T> pair_loss(nn::Tape<T>& tape, const nn::TensorPtr<T>& pred, const nn::Tensor<T>& target,
                           double beta) {
  check_pose_batch("pair_loss", *pred, target);
  const double mn = double(pred->dim(0) * pred->dim(1));
  return weighted_square_error(tape, pred, target, beta, 1.0 / mn);
}

template <typename T>
nn::TensorPtr<T> mirror_loss(nn::Tape<T>& tape, const nn::TensorPtr<T>& pred_fwd,
                             const nn::Tensor<T>& target_fwd, const nn::TensorPtr<T>& pred_bwd,
                             const nn::Tensor<T>& target_bwd, double beta1, double beta2) {
  check_pose_batch("mirror_loss", *pred_fwd, target_fwd);
  check_pose_batch("mirror_loss", *pred_bwd, target_bwd);
  if (pred_fwd->shape() != pred_bwd->shape())
    throw ShapeError("mirror_loss: forward " + nn::to_string(pred_fwd->shape()) + " and backward " +
                     nn::to_string(pred_bwd->shape()) + " batches differ");
  const double mn = double(pred_fwd->dim(0) * pred_fwd->dim(1));
  auto fwd = weighted_square_error(tape, pred_fwd, target_fwd, beta1, 1.0 / mn);
  auto bwd = weighted_square_error(tape, pred_bwd, target_bwd, beta2, 1.0 / mn);
  return nn::add(tape, fwd, bwd);
}

template nn::TensorPtr<float> pair_loss(nn::Tape<float>&, const nn::TensorPtr<float>&,
                                        const nn::Tensor<float>&, double);
template nn::TensorPtr<double> pair_loss(nn::Tape<double>&, const nn::TensorPtr<double>&,
                                         const nn::Tensor<double>&, double);
template nn::TensorPtr<float> mirror_loss(nn::Tape<float>&, const nn::TensorPtr<float>&,
                                          const nn::Tensor<float>&, const nn::TensorPtr<float>&,
                                          const nn::Tensor<float>&, double, double);
template nn::TensorPtr<double> mirror_loss(nn::Tape<double>&, const nn::TensorPtr<double>&,
                                           const nn::Tensor<double>&, const nn::TensorPtr<double>&,
                                           const nn::Tensor<double>&, double, double);

}  // namespace cgvo
