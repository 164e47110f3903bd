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

#include "cgvo/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "cgvo/error.hpp"
#include "cgvo/image_io.hpp"

namespace cgvo {

namespace {

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                    std::uint32_t(index), std::uint32_t(index >> 32)};
  return std::mt19937_64(seq);
}

constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kAugmentStream = 2;
constexpr std::uint64_t kDropoutStream = 3;

// T x 6 predictions of one clip.
template <typename T>
nn::TensorPtr<T> predict_clip(nn::Tape<T>& tape, const PoseModel<T>& model, const SampleWithFrames<T>& clip,
                              const ForwardOptions& options) {
  const auto poses = model.forward_sequence(tape, clip.frames, options);
  return nn::stack<T>(tape, poses);
}

template <typename T>
nn::Tensor<T> target_batch(std::span<const SequenceSample* const> samples) {
  const std::size_t m = samples.size();
  const std::size_t n = samples.front()->pairs();
  nn::Tensor<T> out({m, n, 6});
  for (std::size_t i = 0; i < m; ++i) {
    if (samples[i]->pairs() != n) throw ShapeError("batch mixes clips of different length");
    for (std::size_t j = 0; j < n; ++j) {
      const auto a = samples[i]->targets[j].as_array();
      for (std::size_t c = 0; c < 6; ++c) out[(i * n + j) * 6 + c] = T(a[c]);
    }
  }
  return out;
}

PoseVector6 pose_at(std::span<const double> values, std::size_t offset) {
  return PoseVector6{values[offset], values[offset + 1], values[offset + 2],
                     values[offset + 3], values[offset + 4], values[offset + 5]};
}

// |se3_to_vec(fwd_j * bwd_{T-1-j})| for each pair j of one clip.
double clip_consistency(std::span<const double> fwd, std::span<const double> bwd, std::size_t pairs) {
  double total = 0;
  for (std::size_t j = 0; j < pairs; ++j) {
    const auto a = vec_to_se3(pose_at(fwd, j * 6));
    const auto b = vec_to_se3(pose_at(bwd, (pairs - 1 - j) * 6));
    const auto r = se3_to_vec(compose(a, b)).as_array();
    double sq = 0;
    for (double x : r) sq += x * x;
    total += std::sqrt(sq);
  }
  return total;
}

template <typename T>
std::vector<double> as_doubles(std::span<const T> v) {
  return std::vector<double>(v.begin(), v.end());
}

template <typename T>
void clip_gradients(ParameterSet<T>& params, double max_norm) {
  double sq = 0;
  for (const auto& [name, p] : params) {
    if (!p->has_grad()) continue;
    for (T g : std::as_const(*p).grad()) sq += double(g) * double(g);
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm || norm == 0) return;
  const T scale = T(max_norm / norm);
  for (const auto& [name, p] : params)
    if (p->has_grad())
      for (T& g : p->grad()) g *= scale;
}

}  // namespace

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::kPretrainCnn: return "pretrain-cnn";
    case Phase::kFineTune: return "fine-tune";
    case Phase::kMirror: return "mirror-constrained";
  }
  return "?";
}

Phase parse_phase(std::string_view text) {
  if (text == "pretrain-cnn") return Phase::kPretrainCnn;
  if (text == "fine-tune") return Phase::kFineTune;
  if (text == "mirror-constrained" || text == "mirror") return Phase::kMirror;
  throw ConfigError("unknown training phase '" + std::string(text) +
                    "' (expected pretrain-cnn, fine-tune or mirror-constrained)");
}

void TrainConfig::validate() const {
  if (t1 < 1) throw ConfigError("train.t1 must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (phase == Phase::kMirror && batch_size < 2)
    throw ConfigError("train.batch_size must be >= 2 in the mirror-constrained phase");
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (max_steps < 0) throw ConfigError("train.max_steps must be >= 0");
  if (checkpoint_interval < 1) throw ConfigError("train.checkpoint_interval must be >= 1");
  if (!(lr > 0) || !std::isfinite(lr)) throw ConfigError("train.lr must be positive");
  if (lr_halving_epochs < 1) throw ConfigError("train.lr_halving_epochs must be >= 1");
  if (clip_norm < 0) throw ConfigError("train.clip_norm must be >= 0");
  if (hflip_prob < 0 || hflip_prob > 1 || tflip_prob < 0 || tflip_prob > 1)
    throw ConfigError("augmentation probabilities must lie in [0, 1]");
  if (!pretrain_checkpoint.empty() && !init_checkpoint.empty())
    throw ConfigError("train.pretrain_checkpoint and train.init_checkpoint are mutually exclusive");
  if (phase == Phase::kPretrainCnn && !init_checkpoint.empty())
    throw ConfigError("train.init_checkpoint applies to the fine-tune and mirror phases");
  if (phase == Phase::kFineTune && pretrain_checkpoint.empty() && init_checkpoint.empty())
    throw ConfigError("fine-tune phase requires train.pretrain_checkpoint or train.init_checkpoint");
}

double lr_schedule(double initial_lr, int epoch, int halving_epochs) {
  if (halving_epochs < 1) throw ConfigError("lr halving interval must be >= 1");
  return initial_lr * std::pow(0.5, std::max(epoch, 0) / halving_epochs);
}

template <typename T>
SampleWithFrames<T> KittiSampleSource<T>::load(std::size_t index) const {
  const SequenceSample& s = samples_.at(index);
  SampleWithFrames<T> out;
  out.sample = s;
  out.frames.reserve(s.frame_indices.size());
  for (long f : s.frame_indices) {
    auto t = std::make_shared<nn::Tensor<T>>(
        load_and_preprocess<T>(layout_.image_path(s.sequence_id, f), width_, height_));
    if (s.mirrored) *t = mirror_horizontally(*t);
    out.frames.push_back(std::move(t));
  }
  return out;
}

template <typename T>
OrderedLoader<T>::OrderedLoader(const SampleSource<T>& source, std::vector<std::size_t> order, int workers,
                                std::size_t bound)
    : source_(source), order_(std::move(order)), bound_(std::max<std::size_t>(bound, 1)) {
  for (int i = 0; i < workers; ++i) threads_.emplace_back([this] { work(); });
}

template <typename T>
OrderedLoader<T>::~OrderedLoader() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
}

template <typename T>
void OrderedLoader<T>::work() {
  for (;;) {
    std::size_t slot;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stop_ || claimed_ >= order_.size() || claimed_ < consumed_ + bound_; });
      if (stop_ || claimed_ >= order_.size()) return;
      slot = claimed_++;
    }
    try {
      auto item = source_.load(order_[slot]);
      std::lock_guard lock(mu_);
      ready_.emplace(slot, std::move(item));
    } catch (...) {
      std::lock_guard lock(mu_);
      if (!error_) error_ = std::current_exception();
    }
    cv_.notify_all();
  }
}

template <typename T>
std::optional<SampleWithFrames<T>> OrderedLoader<T>::next() {
  if (consumed_ >= order_.size()) return std::nullopt;
  if (threads_.empty()) return source_.load(order_[consumed_++]);
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return error_ || ready_.count(consumed_) > 0; });
  if (error_) std::rethrow_exception(error_);
  auto node = ready_.extract(consumed_);
  ++consumed_;
  lock.unlock();
  cv_.notify_all();
  return std::move(node.mapped());
}

template <typename T>
Trainer<T>::Trainer(PoseModel<T>& model, TrainConfig config, LossConfig loss)
    : model_(model),
      config_(std::move(config)),
      loss_(loss),
      optimizer_(model.parameters(), AmsGradConfig{config_.lr, 0.9, 0.999, 1e-8}) {
  config_.validate();
  loss_.validate();
  if (config_.phase == Phase::kPretrainCnn && model_.has_memory())
    throw ContractError("pretrain-cnn phase requires the CNN-only topology (model.gru_cells = 0)");
  if (config_.phase != Phase::kPretrainCnn && !model_.has_memory())
    throw ContractError(std::string(to_string(config_.phase)) + " phase requires memory cells");
  for (const auto& [name, p] : model_.parameters())
    if (config_.freeze_encoder && name.starts_with(PoseModel<T>::kEncoderPrefix)) {
      p->set_requires_grad(false);
      p->drop_grad();
    }
}

template <typename T>
StepStats Trainer<T>::step(std::span<const SampleWithFrames<T>> batch) {
  if (batch.empty()) throw ContractError("train step on an empty batch");
  StepStats stats;
  nn::Tape<T> tape;
  auto rng = derived_rng(config_.seed, kDropoutStream, std::uint64_t(global_step()));
  const ForwardOptions options{true, &rng};
  model_.parameters().zero_grad();

  auto predict_all = [&](std::span<const SampleWithFrames<T>> clips) {
    std::vector<nn::TensorPtr<T>> preds;
    preds.reserve(clips.size());
    for (const auto& c : clips) preds.push_back(predict_clip(tape, model_, c, options));
    return nn::stack<T>(tape, preds);
  };
  auto accumulate_errors = [&](const nn::Tensor<T>& pred, const nn::Tensor<T>& target) {
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double d = double(pred[i]) - double(target[i]);
      stats.squared_error_sum[i % 6] += d * d;
    }
    stats.poses += pred.size() / 6;
  };

  std::vector<const SequenceSample*> fwd_samples;
  for (const auto& c : batch) fwd_samples.push_back(&c.sample);
  const auto fwd_target = target_batch<T>(fwd_samples);
  const auto fwd_pred = predict_all(batch);
  accumulate_errors(*fwd_pred, fwd_target);

  nn::TensorPtr<T> loss;
  if (config_.phase == Phase::kMirror) {
    std::vector<SampleWithFrames<T>> reversed;
    reversed.reserve(batch.size());
    for (const auto& c : batch) reversed.push_back(temporal_flip(c));
    std::vector<const SequenceSample*> bwd_samples;
    for (const auto& c : reversed) bwd_samples.push_back(&c.sample);
    const auto bwd_target = target_batch<T>(bwd_samples);
    const auto bwd_pred = predict_all(reversed);
    accumulate_errors(*bwd_pred, bwd_target);
    loss = mirror_loss(tape, fwd_pred, fwd_target, bwd_pred, bwd_target, loss_.beta1, loss_.beta2);
    const std::size_t n = fwd_target.dim(1);
    const auto fv = as_doubles<T>(fwd_pred->values());
    const auto bv = as_doubles<T>(bwd_pred->values());
    double total = 0;
    for (std::size_t i = 0; i < batch.size(); ++i)
      total += clip_consistency(std::span(fv).subspan(i * n * 6, n * 6), std::span(bv).subspan(i * n * 6, n * 6), n);
    stats.consistency = total / double(batch.size() * n);
  } else {
    loss = pair_loss(tape, fwd_pred, fwd_target, loss_.beta);
  }
  stats.loss = double((*loss)[0]);
  if (!std::isfinite(stats.loss)) throw ContractError("training loss became non-finite");
  tape.backward(loss);
  if (config_.clip_norm > 0) clip_gradients(model_.parameters(), config_.clip_norm);
  optimizer_.step(model_.parameters(), config_.freeze_encoder ? PoseModel<T>::kEncoderPrefix : std::string_view{});
  return stats;
}

template <typename T>
EpochStats Trainer<T>::train_epoch(const SampleSource<T>& data, int epoch, int workers) {
  if (data.size() == 0) throw DataError("training set is empty");
  const auto start = std::chrono::steady_clock::now();
  EpochStats stats;
  stats.epoch = epoch;
  stats.lr = lr_schedule(config_.lr, epoch, config_.lr_halving_epochs);
  optimizer_.set_lr(stats.lr);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  auto shuffle_rng = derived_rng(config_.seed, kShuffleStream, std::uint64_t(epoch));
  std::shuffle(order.begin(), order.end(), shuffle_rng);

  const std::size_t batch = config_.phase == Phase::kMirror ? std::size_t(config_.batch_size) / 2
                                                           : std::size_t(config_.batch_size);
  OrderedLoader<T> loader(data, order, workers);
  std::array<double, 6> sq{};
  std::size_t poses = 0;
  double loss_sum = 0, consistency_sum = 0;
  std::size_t position = 0;
  std::vector<SampleWithFrames<T>> pending;
  auto flush = [&] {
    if (budget_exhausted()) {
      stats.stopped_by_step_budget = true;
      pending.clear();
      return;
    }
    if (pending.size() < batch) stats.partial_batch = true;
    const auto s = step(pending);
    loss_sum += s.loss;
    consistency_sum += s.consistency;
    for (std::size_t c = 0; c < 6; ++c) sq[c] += s.squared_error_sum[c];
    poses += s.poses;
    ++stats.steps;
    pending.clear();
  };
  while (auto item = loader.next()) {
    auto rng = derived_rng(config_.seed, kAugmentStream,
                           (std::uint64_t(epoch) << 32) ^ std::uint64_t(position++));
    std::bernoulli_distribution hflip(config_.hflip_prob), tflip(config_.tflip_prob);
    SampleWithFrames<T> clip = std::move(*item);
    if (hflip(rng)) clip = horizontal_flip(clip);
    // The mirror phase builds its own reversed branch.
    if (config_.phase != Phase::kMirror && tflip(rng)) clip = temporal_flip(clip);
    pending.push_back(std::move(clip));
    if (pending.size() == batch) flush();
    if (stats.stopped_by_step_budget) break;
  }
  if (!pending.empty() && !stats.stopped_by_step_budget) flush();

  if (stats.steps > 0) {
    stats.mean_loss = loss_sum / double(stats.steps);
    stats.mean_consistency = consistency_sum / double(stats.steps);
  }
  for (std::size_t c = 0; c < 6; ++c) stats.rmse[c] = poses ? std::sqrt(sq[c] / double(poses)) : 0.0;
  stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return stats;
}

template <typename T>
double Trainer<T>::evaluate_loss(const SampleSource<T>& data, std::span<const std::size_t> indices) const {
  if (indices.empty()) throw ContractError("evaluate_loss on an empty index set");
  nn::Tape<T> tape;
  tape.set_enabled(false);
  double total = 0;
  for (std::size_t idx : indices) {
    const auto clip = data.load(idx);
    const SequenceSample* one[] = {&clip.sample};
    const auto target = target_batch<T>(one);
    auto pred = predict_clip(tape, model_, clip, ForwardOptions{});
    pred->reshape({1, target.dim(1), 6});
    total += double((*pair_loss(tape, pred, target, loss_.beta))[0]);
  }
  return total / double(indices.size());
}

template <typename T>
double mirror_consistency(const PoseModel<T>& model, const SampleSource<T>& data,
                          std::span<const std::size_t> indices) {
  if (indices.empty()) throw ContractError("mirror_consistency on an empty index set");
  nn::Tape<T> tape;
  tape.set_enabled(false);
  double total = 0;
  std::size_t pairs = 0;
  for (std::size_t idx : indices) {
    const auto clip = data.load(idx);
    const auto fwd = predict_clip(tape, model, clip, ForwardOptions{});
    const auto bwd = predict_clip(tape, model, temporal_flip(clip), ForwardOptions{});
    const std::size_t n = clip.sample.pairs();
    total += clip_consistency(as_doubles<T>(fwd->values()), as_doubles<T>(bwd->values()), n);
    pairs += n;
  }
  return total / double(pairs);
}

template <typename T>
PoseModel<T> fine_tune_init(const Checkpoint& pretrain, const ModelConfig& config, std::uint64_t seed) {
  if (config.gru_cells <= 0) throw ConfigError("fine-tune target model has no memory cells");
  const ModelConfig source = model_config_from(pretrain);
  if (!(source.encoder == config.encoder))
    throw CheckpointError("pretraining checkpoint encoder geometry differs from the model configuration");
  PoseModel<T> model(config);
  model.init_weights(seed);
  restore_parameters(model.parameters(), pretrain, {}, PoseModel<T>::kEncoderPrefix);
  return model;
}

template <typename T>
void save_training_checkpoint(const std::filesystem::path& path, const PoseModel<T>& model,
                              const AmsGrad<T>& optimizer, int epoch, Phase phase) {
  Checkpoint ckpt = make_model_checkpoint(model);
  optimizer.store(ckpt, model.parameters());
  ckpt.metadata["train.epoch"] = std::to_string(epoch);
  ckpt.metadata["train.phase"] = std::string(to_string(phase));
  save_checkpoint(path, ckpt);
}

#define CGVO_INSTANTIATE_TRAINING(T)                                                                       \
  template class KittiSampleSource<T>;                                                                     \
  template class OrderedLoader<T>;                                                                         \
  template class Trainer<T>;                                                                               \
  template double mirror_consistency(const PoseModel<T>&, const SampleSource<T>&,                          \
                                     std::span<const std::size_t>);                                        \
  template PoseModel<T> fine_tune_init(const Checkpoint&, const ModelConfig&, std::uint64_t);              \
  template void save_training_checkpoint(const std::filesystem::path&, const PoseModel<T>&,                \
                                         const AmsGrad<T>&, int, Phase);

CGVO_INSTANTIATE_TRAINING(float)
CGVO_INSTANTIATE_TRAINING(double)

}  // namespace cgvo
