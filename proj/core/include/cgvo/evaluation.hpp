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

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cgvo/geometry.hpp"
#include "cgvo/kitti.hpp"
#include "cgvo/network.hpp"

namespace cgvo {

// Drift of one sub-trajectory: E = inv(inv(G_a) G_b) * inv(E_a) E_b.
struct SegmentError {
  std::size_t first = 0;
  double length = 0;             // requested length in metres
  double translation_error = 0;  // |t(E)| / length
  double rotation_error = 0;     // angle(E) / length, rad/m
  double speed = 0;              // metres per second over the segment
};

struct EvalConfig {
  std::vector<double> lengths{100, 200, 300, 400, 500, 600, 700, 800};
  std::size_t start_stride = 10;
  double frame_rate = 10;        // Hz
  std::size_t speed_window = 10;  // frames per speed-binned window
  int speed_bins = 7;
  // Pairs per recurrent window during inference; 0 runs each sequence as
  // one window.
  std::size_t window = 0;
  void validate() const;
};

// For every start (every start_stride-th frame) and every length L, the
// first end frame whose ground-truth path length from the start reaches L.
// Starts with no such end frame are dropped. Throws ContractError when
// the trajectories differ in length.
std::vector<SegmentError> segment_errors(std::span<const RigidTransform> ground_truth,
                                         std::span<const RigidTransform> estimate,
                                         std::span<const double> lengths, std::size_t start_stride);

struct LengthRow {
  double length = 0;
  double translation_pct = 0;  // mean translation error, percent
  double rotation_deg_per_m = 0;
  std::size_t segments = 0;
  bool present() const { return segments > 0; }
};

// Mean error per length, one row per requested length. A length no
// segment reaches keeps a row with segments == 0 and zero errors.
std::vector<LengthRow> length_table(std::span<const SegmentError> errors, std::span<const double> lengths);

// Fixed windows of `window` frames at every start; speed is the window's
// mean ground-truth speed. Stationary windows are skipped.
std::vector<SegmentError> window_errors(std::span<const RigidTransform> ground_truth,
                                        std::span<const RigidTransform> estimate, std::size_t window,
                                        double frame_rate);

struct SpeedRow {
  int bin = 0;
  double speed_lo = 0;  // m/s
  double speed_hi = 0;
  double translation_pct = 0;
  double rotation_deg_per_m = 0;
  std::size_t windows = 0;
  bool present() const { return windows > 0; }
};

// Equal-width bins over [min speed, max speed]; one row per bin, empty
// bins have windows == 0. Empty input gives no rows.
// When every window has the same speed they all land in bin 0.
std::vector<SpeedRow> speed_table(std::span<const SegmentError> windows, int bins);

struct SequenceResult {
  std::string id;
  std::size_t frames = 0;
  bool has_ground_truth = false;
  double translation_pct = 0;  // mean over segment_errors
  double rotation_deg_per_m = 0;
  std::size_t segments = 0;
  Trajectory estimate;
  std::vector<SegmentError> segments_detail;
  std::vector<SegmentError> windows_detail;
};

struct EvalReport {
  std::vector<SequenceResult> sequences;
  std::vector<LengthRow> lengths;  // pooled over sequences with ground truth
  std::vector<SpeedRow> speeds;
};

// Relative motions for frame pairs (i, i+1) of a sequence with `frames` frames.
using PosePredictor = std::function<std::vector<PoseVector6>(const std::string& sequence, std::size_t frames)>;

// Runs the model over consecutive image pairs with the tape disabled,
// restarting the memory every `window` pairs (0 = never).
template <typename T>
PosePredictor model_predictor(const PoseModel<T>& model, KittiLayout layout, std::size_t window);

// Ground-truth relatives; the evaluator must then report zero error.
PosePredictor ground_truth_predictor(KittiLayout layout);

// Number of frames of a sequence: its pose count, or the image count when
// no pose file exists. Throws DataError if neither is present.
std::size_t sequence_frame_count(const KittiLayout& layout, const std::string& sequence);

// Predicts and accumulates every sequence. Sequences without ground truth
// only get an estimated trajectory.
EvalReport evaluate_sequences(const KittiLayout& layout, std::span<const std::string> sequences,
                              const PosePredictor& predictor, const EvalConfig& config);

// "frame_index x y z" per line, 9 significant digits.
void export_trajectory(std::ostream& out, const Trajectory& trajectory);
void export_trajectory(const std::filesystem::path& path, const Trajectory& trajectory);

struct TrajectoryRow {
  long frame_index = 0;
  double x = 0, y = 0, z = 0;
};
std::vector<TrajectoryRow> parse_trajectory(std::istream& in);

// lengths.csv, speeds.csv, sequences.csv and trajectories/<id>.txt under dir.
void write_report(const std::filesystem::path& dir, const EvalReport& report);

}  // namespace cgvo
