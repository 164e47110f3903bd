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

#include <array>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "cgvo/augment.hpp"
#include "cgvo/checkpoint.hpp"
#include "cgvo/kitti.hpp"
#include "cgvo/network.hpp"
#include "cgvo/objective.hpp"
#include "cgvo/optimizer.hpp"

namespace cgvo {

enum class Phase { kPretrainCnn, kFineTune, kMirror };

std::string_view to_string(Phase phase);
// "pretrain-cnn", "fine-tune", "mirror-constrained" (or "mirror").
Phase parse_phase(std::string_view text);

struct TrainConfig {
  Phase phase = Phase::kFineTune;
  int t1 = 3;  // frames per clip
  int batch_size = 4;
  int epochs = 1;
  long max_steps = 0;  // 0 = no step budget
  int checkpoint_interval = 5;
  double lr = 1e-4;
  int lr_halving_epochs = 30;
  std::uint64_t seed = 0;
  std::string pretrain_checkpoint;
  std::string init_checkpoint;  // full-model weights to start from, memory phases only
  bool freeze_encoder = false;
  double clip_norm = 0;  // global-norm clipping; 0 disables
  double hflip_prob = 0.5;
  double tflip_prob = 0.5;

  // Throws ConfigError; fine-tune requires exactly one of pretrain_checkpoint
  // and init_checkpoint.
  void validate() const;
};

// lr0 * 0.5^floor(epoch / halving_epochs).
double lr_schedule(double initial_lr, int epoch, int halving_epochs = 30);

// Random-access clips. load() must be safe to call concurrently.
template <typename T>
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual std::size_t size() const = 0;
  virtual SampleWithFrames<T> load(std::size_t index) const = 0;
};

template <typename T>
class KittiSampleSource final : public SampleSource<T> {
 public:
  KittiSampleSource(KittiLayout layout, std::vector<SequenceSample> samples, int width, int height)
      : layout_(std::move(layout)), samples_(std::move(samples)), width_(width), height_(height) {}

  std::size_t size() const override { return samples_.size(); }
  SampleWithFrames<T> load(std::size_t index) const override;
  const std::vector<SequenceSample>& samples() const { return samples_; }

 private:
  KittiLayout layout_;
  std::vector<SequenceSample> samples_;
  int width_, height_;
};

template <typename T>
class MemorySampleSource final : public SampleSource<T> {
 public:
  explicit MemorySampleSource(std::vector<SampleWithFrames<T>> items) : items_(std::move(items)) {}
  std::size_t size() const override { return items_.size(); }
  SampleWithFrames<T> load(std::size_t index) const override { return items_.at(index); }

 private:
  std::vector<SampleWithFrames<T>> items_;
};

// Loads `order` with a pool of worker threads and hands results back in
// order through a bounded buffer, so the stream is identical for any
// worker count. workers == 0 loads inline.
template <typename T>
class OrderedLoader {
 public:
  OrderedLoader(const SampleSource<T>& source, std::vector<std::size_t> order, int workers, std::size_t bound = 8);
  ~OrderedLoader();
  OrderedLoader(const OrderedLoader&) = delete;
  OrderedLoader& operator=(const OrderedLoader&) = delete;

  // Next item in order, or nullopt at the end. Rethrows worker errors.
  std::optional<SampleWithFrames<T>> next();

 private:
  void work();

  const SampleSource<T>& source_;
  std::vector<std::size_t> order_;
  std::size_t bound_;
  std::size_t consumed_ = 0;
  std::size_t claimed_ = 0;
  bool stop_ = false;
  std::map<std::size_t, SampleWithFrames<T>> ready_;
  std::exception_ptr error_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<std::thread> threads_;
};

struct StepStats {
  double loss = 0;
  std::array<double, 6> squared_error_sum{};
  std::size_t poses = 0;
  double consistency = 0;  // mirror phase only
};

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0;
  std::array<double, 6> rmse{};
  double lr = 0;
  double wall_seconds = 0;
  long steps = 0;
  bool partial_batch = false;
  bool stopped_by_step_budget = false;
  double mean_consistency = 0;
};

template <typename T>
class Trainer {
 public:
  Trainer(PoseModel<T>& model, TrainConfig config, LossConfig loss);

  // One optimizer update on already-augmented clips. In the mirror phase
  // each clip is paired with its temporal flip.
  StepStats step(std::span<const SampleWithFrames<T>> batch);

  // Seeded per-epoch shuffle, on-the-fly flips, batches of batch_size
  // (halved in the mirror phase). Stops early when max_steps is reached.
  EpochStats train_epoch(const SampleSource<T>& data, int epoch, int workers = 0);

  // Pair loss of the given clips in evaluation mode, no update.
  double evaluate_loss(const SampleSource<T>& data, std::span<const std::size_t> indices) const;

  AmsGrad<T>& optimizer() { return optimizer_; }
  const AmsGrad<T>& optimizer() const { return optimizer_; }
  const TrainConfig& config() const { return config_; }
  long global_step() const { return optimizer_.step_count(); }
  bool budget_exhausted() const { return config_.max_steps > 0 && global_step() >= config_.max_steps; }

 private:
  PoseModel<T>& model_;
  TrainConfig config_;
  LossConfig loss_;
  AmsGrad<T> optimizer_;
};

// Mean |se3_to_vec(T_fwd_j * T_bwd_j)| over the pairs of the given clips,
// where T_bwd_j is the prediction for the same pair on the reversed clip.
// Evaluation mode.
template <typename T>
double mirror_consistency(const PoseModel<T>& model, const SampleSource<T>& data,
                          std::span<const std::size_t> indices);

// Full model whose encoder comes from a pretraining checkpoint; memory
// cells and head are freshly Xavier-initialized from `seed`. Throws
// CheckpointError listing differing encoder tensors.
template <typename T>
PoseModel<T> fine_tune_init(const Checkpoint& pretrain, const ModelConfig& config, std::uint64_t seed);

// Model + optimizer state + epoch/phase metadata.
template <typename T>
void save_training_checkpoint(const std::filesystem::path& path, const PoseModel<T>& model,
                              const AmsGrad<T>& optimizer, int epoch, Phase phase);

}  // namespace cgvo
