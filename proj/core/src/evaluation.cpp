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

#include "cgvo/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "cgvo/error.hpp"
#include "cgvo/image_io.hpp"

namespace cgvo {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::vector<double> path_distances(std::span<const RigidTransform> poses) {
  std::vector<double> dist(poses.size(), 0.0);
  for (std::size_t i = 1; i < poses.size(); ++i)
    dist[i] = dist[i - 1] + (poses[i].translation() - poses[i - 1].translation()).norm();
  return dist;
}

SegmentError drift(std::span<const RigidTransform> gt, std::span<const RigidTransform> est, std::size_t a,
                   std::size_t b, double length) {
  const RigidTransform rel_gt = compose(invert(gt[a]), gt[b]);
  const RigidTransform rel_est = compose(invert(est[a]), est[b]);
  const RigidTransform e = compose(invert(rel_gt), rel_est);
  SegmentError out;
  out.first = a;
  out.length = length;
  out.translation_error = e.translation().norm() / length;
  out.rotation_error = rotation_angle(e.rotation()) / length;
  return out;
}

void check_pair(std::span<const RigidTransform> gt, std::span<const RigidTransform> est) {
  if (gt.size() != est.size())
    throw ContractError("trajectory lengths differ: " + std::to_string(gt.size()) + " ground-truth vs " +
                        std::to_string(est.size()) + " estimated poses");
}

std::vector<RigidTransform> poses_of(const Trajectory& t) {
  std::vector<RigidTransform> out;
  out.reserve(t.size());
  for (const auto& p : t) out.push_back(p.pose);
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

void EvalConfig::validate() const {
  if (lengths.empty()) throw ConfigError("eval.lengths must not be empty");
  for (double l : lengths)
    if (!(l > 0) || !std::isfinite(l)) throw ConfigError("eval.lengths must be positive");
  if (start_stride < 1) throw ConfigError("eval.start_stride must be >= 1");
  if (!(frame_rate > 0)) throw ConfigError("eval.frame_rate must be positive");
  if (speed_window < 1) throw ConfigError("eval.speed_window must be >= 1");
  if (speed_bins < 1) throw ConfigError("eval.speed_bins must be >= 1");
}

std::vector<SegmentError> segment_errors(std::span<const RigidTransform> ground_truth,
                                         std::span<const RigidTransform> estimate,
                                         std::span<const double> lengths, std::size_t start_stride) {
  check_pair(ground_truth, estimate);
  if (start_stride == 0) throw ContractError("segment_errors: start stride must be >= 1");
  const auto dist = path_distances(ground_truth);
  std::vector<SegmentError> out;
  for (std::size_t first = 0; first < ground_truth.size(); first += start_stride) {
    for (double length : lengths) {
      const auto it = std::lower_bound(dist.begin() + first, dist.end(), dist[first] + length);
      if (it == dist.end()) continue;
      const auto last = std::size_t(it - dist.begin());
      auto e = drift(ground_truth, estimate, first, last, length);
      e.speed = length / double(last - first);
      out.push_back(e);
    }
  }
  return out;
}

std::vector<LengthRow> length_table(std::span<const SegmentError> errors, std::span<const double> lengths) {
  std::vector<LengthRow> rows;
  for (double length : lengths) {
    LengthRow row;
    row.length = length;
    for (const auto& e : errors) {
      if (e.length != length) continue;
      row.translation_pct += e.translation_error;
      row.rotation_deg_per_m += e.rotation_error;
      ++row.segments;
    }
    if (row.segments > 0) {
      row.translation_pct *= 100.0 / double(row.segments);
      row.rotation_deg_per_m *= kRadToDeg / double(row.segments);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<SegmentError> window_errors(std::span<const RigidTransform> ground_truth,
                                        std::span<const RigidTransform> estimate, std::size_t window,
                                        double frame_rate) {
  check_pair(ground_truth, estimate);
  if (window == 0) throw ContractError("window_errors: window must be >= 1");
  const auto dist = path_distances(ground_truth);
  std::vector<SegmentError> out;
  for (std::size_t a = 0; a + window < ground_truth.size(); ++a) {
    const double length = dist[a + window] - dist[a];
    if (!(length > 0)) continue;
    auto e = drift(ground_truth, estimate, a, a + window, length);
    e.speed = length * frame_rate / double(window);
    out.push_back(e);
  }
  return out;
}

std::vector<SpeedRow> speed_table(std::span<const SegmentError> windows, int bins) {
  if (bins < 1) throw ContractError("speed_table: bins must be >= 1");
  if (windows.empty()) return {};
  const auto [lo_it, hi_it] = std::minmax_element(windows.begin(), windows.end(),
                                                  [](const auto& a, const auto& b) { return a.speed < b.speed; });
  const double lo = lo_it->speed, hi = hi_it->speed;
  // Speeds equal up to accumulation rounding share one bin.
  const double width = hi - lo > 1e-9 * std::max(1.0, std::abs(hi)) ? (hi - lo) / bins : 0.0;
  std::vector<SpeedRow> rows(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    rows[b].bin = b;
    rows[b].speed_lo = lo + width * b;
    rows[b].speed_hi = b + 1 == bins ? hi : lo + width * (b + 1);
  }
  for (const auto& w : windows) {
    int b = width > 0 ? int((w.speed - lo) / width) : 0;
    b = std::clamp(b, 0, bins - 1);
    rows[b].translation_pct += w.translation_error;
    rows[b].rotation_deg_per_m += w.rotation_error;
    ++rows[b].windows;
  }
  for (auto& r : rows) {
    if (r.windows == 0) continue;
    r.translation_pct *= 100.0 / double(r.windows);
    r.rotation_deg_per_m *= kRadToDeg / double(r.windows);
  }
  return rows;
}

template <typename T>
PosePredictor model_predictor(const PoseModel<T>& model, KittiLayout layout, std::size_t window) {
  return [&model, layout = std::move(layout), window](const std::string& seq, std::size_t frames) {
    if (frames < 2) throw DataError("sequence " + seq + " has fewer than two frames");
    const int w = model.config().encoder.width, h = model.config().encoder.height;
    nn::Tape<T> tape;
    tape.set_enabled(false);
    auto load = [&](std::size_t i) {
      return std::make_shared<nn::Tensor<T>>(load_and_preprocess<T>(layout.image_path(seq, long(i)), w, h));
    };
    std::vector<PoseVector6> out;
    out.reserve(frames - 1);
    auto state = model.zero_state();
    auto prev = load(0);
    for (std::size_t i = 0; i + 1 < frames; ++i) {
      if (window > 0 && i % window == 0) state = model.zero_state();
      auto next = load(i + 1);
      const auto pose = model.step(tape, prev, next, state, ForwardOptions{});
      out.push_back(PoseVector6{double((*pose)[0]), double((*pose)[1]), double((*pose)[2]),
                                double((*pose)[3]), double((*pose)[4]), double((*pose)[5])});
      prev = std::move(next);
    }
    return out;
  };
}

PosePredictor ground_truth_predictor(KittiLayout layout) {
  return [layout = std::move(layout)](const std::string& seq, std::size_t frames) {
    const auto poses = layout.load_poses(seq);
    if (poses.size() != frames) throw DataError("sequence " + seq + ": pose count differs from frame count");
    std::vector<PoseVector6> out;
    for (std::size_t i = 0; i + 1 < poses.size(); ++i) out.push_back(relative_pose(poses[i], poses[i + 1]));
    return out;
  };
}

std::size_t sequence_frame_count(const KittiLayout& layout, const std::string& sequence) {
  if (layout.has_poses(sequence)) return layout.load_poses(sequence).size();
  const auto dir = layout.image_dir(sequence);
  if (!std::filesystem::is_directory(dir))
    throw DataError("sequence " + sequence + " has neither poses nor images under " + layout.root().string());
  std::size_t n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".png") ++n;
  return n;
}

EvalReport evaluate_sequences(const KittiLayout& layout, std::span<const std::string> sequences,
                              const PosePredictor& predictor, const EvalConfig& config) {
  config.validate();
  EvalReport report;
  std::vector<SegmentError> all_segments, all_windows;
  for (const auto& id : sequences) {
    SequenceResult r;
    r.id = id;
    r.frames = sequence_frame_count(layout, id);
    const auto preds = predictor(id, r.frames);
    if (preds.size() + 1 != r.frames)
      throw ContractError("predictor returned " + std::to_string(preds.size()) + " poses for " +
                          std::to_string(r.frames) + " frames of sequence " + id);
    std::vector<RigidTransform> rel;
    rel.reserve(preds.size());
    for (const auto& p : preds) rel.push_back(vec_to_se3(p));
    r.estimate = accumulate(rel);
    r.has_ground_truth = layout.has_poses(id);
    if (r.has_ground_truth) {
      const auto gt = layout.load_poses(id);
      const auto est = poses_of(r.estimate);
      r.segments_detail = segment_errors(gt, est, config.lengths, config.start_stride);
      r.windows_detail = window_errors(gt, est, config.speed_window, config.frame_rate);
      for (const auto& e : r.segments_detail) {
        r.translation_pct += e.translation_error;
        r.rotation_deg_per_m += e.rotation_error;
      }
      r.segments = r.segments_detail.size();
      if (r.segments > 0) {
        r.translation_pct *= 100.0 / double(r.segments);
        r.rotation_deg_per_m *= kRadToDeg / double(r.segments);
      }
      all_segments.insert(all_segments.end(), r.segments_detail.begin(), r.segments_detail.end());
      all_windows.insert(all_windows.end(), r.windows_detail.begin(), r.windows_detail.end());
    }
    report.sequences.push_back(std::move(r));
  }
  report.lengths = length_table(all_segments, config.lengths);
  report.speeds = speed_table(all_windows, config.speed_bins);
  return report;
}

void export_trajectory(std::ostream& out, const Trajectory& trajectory) {
  out << std::setprecision(9);
  for (const auto& p : trajectory) {
    const auto t = p.pose.translation();
    out << p.frame_index << ' ' << t.x() << ' ' << t.y() << ' ' << t.z() << '\n';
  }
}

void export_trajectory(const std::filesystem::path& path, const Trajectory& trajectory) {
  auto out = open_out(path);
  export_trajectory(out, trajectory);
}

std::vector<TrajectoryRow> parse_trajectory(std::istream& in) {
  std::vector<TrajectoryRow> rows;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    TrajectoryRow r;
    std::string extra;
    if (!(ls >> r.frame_index >> r.x >> r.y >> r.z) || (ls >> extra))
      throw ParseError("expected 'frame_index x y z'", line_no);
    rows.push_back(r);
  }
  return rows;
}

void write_report(const std::filesystem::path& dir, const EvalReport& report) {
  std::filesystem::create_directories(dir / "trajectories");
  {
    auto out = open_out(dir / "lengths.csv");
    out << "length_m,translation_error_pct,rotation_error_deg_per_m,segments\n" << std::setprecision(9);
    for (const auto& r : report.lengths) {
      out << r.length << ',';
      if (r.present())
        out << r.translation_pct << ',' << r.rotation_deg_per_m;
      else
        out << ',';
      out << ',' << r.segments << '\n';
    }
  }
  {
    auto out = open_out(dir / "speeds.csv");
    out << "bin,speed_lo_mps,speed_hi_mps,translation_error_pct,rotation_error_deg_per_m,windows\n"
        << std::setprecision(9);
    for (const auto& r : report.speeds) {
      out << r.bin << ',' << r.speed_lo << ',' << r.speed_hi << ',';
      if (r.present())
        out << r.translation_pct << ',' << r.rotation_deg_per_m;
      else
        out << ',';
      out << ',' << r.windows << '\n';
    }
  }
  {
    auto out = open_out(dir / "sequences.csv");
    out << "sequence,frames,has_ground_truth,translation_error_pct,rotation_error_deg_per_m,segments\n"
        << std::setprecision(9);
    for (const auto& s : report.sequences) {
      out << s.id << ',' << s.frames << ',' << (s.has_ground_truth ? 1 : 0) << ',';
      if (s.has_ground_truth && s.segments > 0)
        out << s.translation_pct << ',' << s.rotation_deg_per_m;
      else
        out << ',';
      out << ',' << s.segments << '\n';
    }
  }
  for (const auto& s : report.sequences) export_trajectory(dir / "trajectories" / (s.id + ".txt"), s.estimate);
}

template PosePredictor model_predictor(const PoseModel<float>&, KittiLayout, std::size_t);
template PosePredictor model_predictor(const PoseModel<double>&, KittiLayout, std::size_t);

}  // namespace cgvo
