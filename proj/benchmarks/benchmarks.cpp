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


#include <benchmark/benchmark.h>

#include <random>

#include "cgvo/evaluation.hpp"
#include "cgvo/network.hpp"
#include "cgvo/ops.hpp"

namespace cgvo {
namespace {

template <typename T>
nn::TensorPtr<T> filled(nn::Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<T> u(T(-0.5), T(0.5));
  auto t = nn::make_tensor<T>(std::move(shape));
  for (T& v : t->values()) v = u(rng);
  return t;
}

void BM_Conv2dForward(benchmark::State& state) {
  const auto c = std::size_t(state.range(0));
  auto x = filled<float>({c, 24, 80}, 1);
  auto w = filled<float>({c, c, 3, 3}, 2);
  auto b = filled<float>({c}, 3);
  nn::Tape<float> tape;
  tape.set_enabled(false);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d(tape, x, w, b, 1, 1));
  state.SetItemsProcessed(state.iterations() * std::int64_t(c * c * 9 * 24 * 80));
}
BENCHMARK(BM_Conv2dForward)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Conv2dBackward(benchmark::State& state) {
  const auto c = std::size_t(state.range(0));
  auto x = filled<float>({c, 24, 80}, 1);
  auto w = filled<float>({c, c, 3, 3}, 2);
  w->set_requires_grad(true);
  x->set_requires_grad(true);
  for (auto _ : state) {
    nn::Tape<float> tape;
    tape.backward(nn::sum(tape, nn::conv2d(tape, x, w, nn::TensorPtr<float>{}, 1, 1)));
  }
}
BENCHMARK(BM_Conv2dBackward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_GruStep(benchmark::State& state) {
  const std::size_t c = 256;
  GruCellParams<float> p;
  std::uint64_t seed = 10;
  for (auto* t : {&p.w_hz, &p.w_xz, &p.w_hr, &p.w_xr, &p.w_h, &p.w_x}) *t = filled<float>({c, c, 3, 3}, seed++);
  for (auto* t : {&p.b_z, &p.b_r, &p.b}) *t = filled<float>({c}, seed++);
  auto x = filled<float>({c, 3, 10}, 1);
  auto h = filled<float>({c, 3, 10}, 2);
  nn::Tape<float> tape;
  tape.set_enabled(false);
  for (auto _ : state) benchmark::DoNotOptimize(gru_step(tape, x, h, p).h);
}
BENCHMARK(BM_GruStep)->Unit(benchmark::kMillisecond);

void BM_ModelPair(benchmark::State& state) {
  const char* scale = state.range(0) == 0 ? "tiny" : "desk";
  PoseModel<float> model(ModelConfig::preset(scale));
  model.init_weights(1);
  const auto& enc = model.config().encoder;
  auto a = filled<float>({3, std::size_t(enc.height), std::size_t(enc.width)}, 1);
  auto b = filled<float>({3, std::size_t(enc.height), std::size_t(enc.width)}, 2);
  nn::Tape<float> tape;
  tape.set_enabled(false);
  for (auto _ : state) {
    auto st = model.zero_state();
    benchmark::DoNotOptimize(model.step(tape, a, b, st, {}));
  }
  state.SetLabel(scale);
}
BENCHMARK(BM_ModelPair)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SegmentErrors(benchmark::State& state) {
  std::vector<RigidTransform> gt{RigidTransform::identity()}, est{RigidTransform::identity()};
  for (int i = 0; i < 4000; ++i) {
    gt.push_back(compose(gt.back(), vec_to_se3({0, 0, 1, 0, 0.001, 0})));
    est.push_back(compose(est.back(), vec_to_se3({0, 0, 1.02, 0, 0.0012, 0})));
  }
  const std::vector<double> lengths{100, 200, 300, 400, 500, 600, 700, 800};
  for (auto _ : state) benchmark::DoNotOptimize(segment_errors(gt, est, lengths, 10));
}
BENCHMARK(BM_SegmentErrors)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace cgvo

BENCHMARK_MAIN();
