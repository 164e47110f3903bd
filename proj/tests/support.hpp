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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cgvo/ops.hpp"
#include "cgvo/tensor.hpp"

namespace cgvo::testing {

inline nn::TensorPtr<double> random_tensor(std::mt19937_64& rng, nn::Shape shape, double scale = 1.0,
                                           bool requires_grad = true) {
  std::uniform_real_distribution<double> u(-scale, scale);
  auto t = nn::make_tensor<double>(std::move(shape));
  for (double& v : t->values()) v = u(rng);
  t->set_requires_grad(requires_grad);
  return t;
}

struct GradCheck {
  double max_rel_error = 0;
  std::size_t checked = 0;
  std::size_t reprobed = 0;  // samples re-measured with a smaller step
};

// |a - n| / max(|a|, |n|, floor): relative error with an absolute floor
// for gradients that vanish.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Compares reverse-mode gradients of a scalar function against central
// differences with step h. `loss` must rebuild the graph from `inputs`
// on every call. At most `samples_per_input` entries of each input are
// probed (all when 0). A sample above `tolerance` is re-measured at h/10
// and h/100: a stencil straddling a relu or max-pool switch point shrinks
// its error with the step, a wrong gradient does not.
inline GradCheck check_gradients(const std::function<nn::TensorPtr<double>(nn::Tape<double>&)>& loss,
                                 const std::vector<nn::TensorPtr<double>>& inputs, std::mt19937_64& rng,
                                 std::size_t samples_per_input = 0, double h = 1e-5, double tolerance = 1e-4) {
  for (const auto& in : inputs) in->zero_grad();
  {
    nn::Tape<double> tape;
    tape.backward(loss(tape));
  }
  GradCheck out;
  for (const auto& in : inputs) {
    std::vector<std::size_t> idx(in->size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (samples_per_input > 0 && samples_per_input < idx.size()) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(samples_per_input);
    }
    const std::vector<double> analytic(in->grad().begin(), in->grad().end());
    for (std::size_t i : idx) {
      auto central = [&](double step) {
        const double saved = (*in)[i];
        nn::Tape<double> off;
        off.set_enabled(false);
        (*in)[i] = saved + step;
        const double up = (*loss(off))[0];
        (*in)[i] = saved - step;
        const double down = (*loss(off))[0];
        (*in)[i] = saved;
        return (up - down) / (2 * step);
      };
      double err = relative_error(analytic[i], central(h));
      if (err >= tolerance) {
        ++out.reprobed;
        for (double step : {h / 10, h / 100}) err = std::min(err, relative_error(analytic[i], central(step)));
      }
      out.max_rel_error = std::max(out.max_rel_error, err);
      ++out.checked;
    }
  }
  return out;
}

// Scalar probe sum_i w_i * x_i with fixed random weights, so every output
// entry carries a distinct gradient.
inline nn::TensorPtr<double> weighted_sum(nn::Tape<double>& tape, const nn::TensorPtr<double>& x,
                                          const nn::TensorPtr<double>& weights) {
  return nn::sum(tape, nn::multiply(tape, x, weights));
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cgvo_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace cgvo::testing
