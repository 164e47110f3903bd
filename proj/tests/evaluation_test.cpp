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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "cgvo/error.hpp"
#include "cgvo/evaluation.hpp"
#include "cgvo/image_io.hpp"
#include "cgvo/kitti.hpp"
#include "support.hpp"

namespace cgvo {
namespace {

const std::vector<double> kLengths{100, 200, 300, 400, 500, 600, 700, 800};
constexpr double kDeg = 180.0 / std::numbers::pi;

std::vector<RigidTransform> chain(const std::vector<PoseVector6>& steps) {
  std::vector<RigidTransform> abs{RigidTransform::identity()};
  for (const auto& s : steps) abs.push_back(compose(abs.back(), vec_to_se3(s)));
  return abs;
}

std::vector<PoseVector6> straight(std::size_t n, double step, double yaw = 0) {
  return std::vector<PoseVector6>(n, PoseVector6{0, 0, step, 0, yaw, 0});
}

std::vector<RigidTransform> wiggly(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> small(-0.02, 0.02), speed(0.5, 1.5);
  std::vector<PoseVector6> steps;
  for (std::size_t i = 0; i < n; ++i) steps.push_back({small(rng), small(rng), speed(rng), small(rng), small(rng), small(rng)});
  return chain(steps);
}

TEST(SubsequenceErrors, IdenticalTrajectoriesGiveZero) {
  const auto gt = wiggly(1000, 1);
  const auto rows = length_table(segment_errors(gt, gt, kLengths, 10), kLengths);
  ASSERT_EQ(rows.size(), 8u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.present());
    EXPECT_NEAR(r.translation_pct, 0.0, 1e-9);
    EXPECT_NEAR(r.rotation_deg_per_m, 0.0, 1e-9);
  }
}

TEST(SubsequenceErrors, ScaledStraightLineIsFivePercent) {
  const auto gt = chain(straight(1000, 1.0));
  const auto est = chain(straight(1000, 1.05));
  const auto rows = length_table(segment_errors(gt, est, kLengths, 10), kLengths);
  ASSERT_EQ(rows.size(), 8u);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.translation_pct, 5.0, 1e-9) << r.length;
    EXPECT_NEAR(r.rotation_deg_per_m, 0.0, 1e-12);
  }
}

TEST(SubsequenceErrors, YawDriftRotationRate) {
  const auto gt = chain(straight(1000, 1.0));
  const auto est = chain(straight(1000, 1.0, 0.001));
  const auto rows = length_table(segment_errors(gt, est, kLengths, 10), kLengths);
  for (const auto& r : rows) EXPECT_NEAR(r.rotation_deg_per_m, 0.001 * kDeg, 0.02 * 0.001 * kDeg) << r.length;
}

TEST(SubsequenceErrors, EndFrameIsFirstToReachLength) {
  const auto gt = chain(straight(30, 0.7));
  const double lengths[] = {2.0};
  const auto segs = segment_errors(gt, gt, lengths, 1);
  // 0.7 * 3 = 2.1 is the first distance >= 2.
  ASSERT_FALSE(segs.empty());
  EXPECT_EQ(segs.front().first, 0u);
  EXPECT_NEAR(segs.front().speed, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(segs.size(), 28u);  // starts 0..27 reach index start + 3 <= 30
}

TEST(SubsequenceErrors, ShortTrajectoryFlagsRows) {
  const auto gt = chain(straight(50, 1.0));
  const auto rows = length_table(segment_errors(gt, gt, kLengths, 10), kLengths);
  ASSERT_EQ(rows.size(), 8u);
  for (const auto& r : rows) EXPECT_FALSE(r.present());
  EXPECT_THROW(segment_errors(gt, chain(straight(49, 1.0)), kLengths, 10), ContractError);
}

TEST(SubsequenceErrors, InvariantUnderCommonRigidMotion) {
  const auto gt = wiggly(900, 2), est = wiggly(900, 3);
  const auto g = vec_to_se3({10, -3, 7, 0.3, -0.8, 1.1});
  std::vector<RigidTransform> gt2, est2;
  for (const auto& p : gt) gt2.push_back(compose(g, p));
  for (const auto& p : est) est2.push_back(compose(g, p));
  const auto a = length_table(segment_errors(gt, est, kLengths, 10), kLengths);
  const auto b = length_table(segment_errors(gt2, est2, kLengths, 10), kLengths);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].translation_pct, b[i].translation_pct, 1e-7);
    EXPECT_NEAR(a[i].rotation_deg_per_m, b[i].rotation_deg_per_m, 1e-9);
  }
  const auto sa = speed_table(window_errors(gt, est, 10, 10), 7);
  const auto sb = speed_table(window_errors(gt2, est2, 10, 10), 7);
  ASSERT_EQ(sa.size(), sb.size());
  for (std::size_t i = 0; i < sa.size(); ++i) EXPECT_NEAR(sa[i].translation_pct, sb[i].translation_pct, 1e-7);
}

TEST(SpeedBins, IdenticalGivesZeroAndConstantSpeedUsesOneBin) {
  const auto gt = wiggly(300, 4);
  for (const auto& r : speed_table(window_errors(gt, gt, 10, 10), 7)) EXPECT_NEAR(r.translation_pct, 0.0, 1e-9);
  const auto line = chain(straight(300, 1.2));
  const auto rows = speed_table(window_errors(line, line, 10, 10), 7);
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0].windows, 291u);
  for (std::size_t b = 1; b < 7; ++b) EXPECT_FALSE(rows[b].present());
  EXPECT_NEAR(rows[0].speed_lo, 12.0, 1e-9);
}

TEST(SpeedBins, TwoSpeedHalvesMatchClosedForms) {
  // 5 m/s then 15 m/s at 10 Hz; the estimate over-reads the slow half by 2 % and the fast half by 10 %.
  std::vector<PoseVector6> gt_steps = straight(200, 0.5), est_steps = straight(200, 0.5 * 1.02);
  const auto fast = straight(200, 1.5), fast_est = straight(200, 1.5 * 1.10);
  gt_steps.insert(gt_steps.end(), fast.begin(), fast.end());
  est_steps.insert(est_steps.end(), fast_est.begin(), fast_est.end());
  const auto rows = speed_table(window_errors(chain(gt_steps), chain(est_steps), 10, 10), 7);
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_NEAR(rows.front().speed_lo, 5.0, 1e-9);
  EXPECT_NEAR(rows.back().speed_hi, 15.0, 1e-9);
  EXPECT_NEAR(rows.front().translation_pct, 2.0, 0.02 * 2.0);
  EXPECT_NEAR(rows.back().translation_pct, 10.0, 0.02 * 10.0);
  // 191 windows per pure half plus the one straddling window closest to it.
  EXPECT_EQ(rows.front().windows, 192u);
  EXPECT_EQ(rows.back().windows, 192u);
}

TEST(Trajectory, ExportParseRoundTrip) {
  const auto abs = wiggly(120, 5);
  Trajectory t;
  for (std::size_t i = 0; i < abs.size(); ++i) t.push_back({long(i), abs[i]});
  std::stringstream io;
  export_trajectory(io, t);
  const auto rows = parse_trajectory(io);
  ASSERT_EQ(rows.size(), abs.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].frame_index, long(i));
    const auto p = abs[i].translation();
    EXPECT_NEAR(rows[i].x, p.x(), 1e-8 * std::max(1.0, std::abs(p.x())));
    EXPECT_NEAR(rows[i].y, p.y(), 1e-8 * std::max(1.0, std::abs(p.y())));
    EXPECT_NEAR(rows[i].z, p.z(), 1e-8 * std::max(1.0, std::abs(p.z())));
  }
  std::istringstream bad("0 1 2\n");
  EXPECT_THROW(parse_trajectory(bad), ParseError);
}

TEST(Trajectory, IdentityExportsZeros) {
  const Trajectory t{{0, RigidTransform::identity()}, {1, RigidTransform::identity()}};
  std::stringstream io;
  export_trajectory(io, t);
  EXPECT_EQ(io.str(), "0 0 0 0\n1 0 0 0\n");
}

// A dataset directory with poses for 00 and 01 and images only for 02.
std::filesystem::path small_dataset(const std::string& name) {
  const auto root = testing::scratch_dir(name);
  const KittiLayout layout(root);
  std::filesystem::create_directories(root / "poses");
  write_kitti_poses(layout.pose_file("00"), wiggly(60, 6));
  write_kitti_poses(layout.pose_file("01"), chain(straight(40, 1.0, 0.01)));
  std::filesystem::create_directories(layout.image_dir("02"));
  for (long i = 0; i < 5; ++i) write_png(layout.image_path("02", i), Image(8, 4, 100));
  return root;
}

TEST(Evaluate, GroundTruthPredictionsGiveZeroReport) {
  const KittiLayout layout(small_dataset("eval_gt"));
  EvalConfig cfg;
  cfg.lengths = {5, 10, 20};
  const std::vector<std::string> ids{"00", "01"};
  const auto report = evaluate_sequences(layout, ids, ground_truth_predictor(layout), cfg);
  ASSERT_EQ(report.sequences.size(), 2u);
  EXPECT_EQ(report.lengths.size(), 3u);
  EXPECT_EQ(report.speeds.size(), 7u);
  for (const auto& r : report.lengths) {
    EXPECT_TRUE(r.present());
    EXPECT_NEAR(r.translation_pct, 0.0, 1e-9);
    EXPECT_NEAR(r.rotation_deg_per_m, 0.0, 1e-6);
  }
  for (const auto& s : report.sequences) EXPECT_EQ(s.estimate.size(), s.frames);
  const auto again = evaluate_sequences(layout, ids, ground_truth_predictor(layout), cfg);
  for (std::size_t i = 0; i < report.lengths.size(); ++i)
    EXPECT_EQ(report.lengths[i].translation_pct, again.lengths[i].translation_pct);
}

TEST(Evaluate, MissingGroundTruthStillExportsTrajectory) {
  const auto root = small_dataset("eval_missing");
  const KittiLayout layout(root);
  const std::vector<std::string> ids{"02"};
  PosePredictor forward = [](const std::string&, std::size_t frames) {
    return std::vector<PoseVector6>(frames - 1, PoseVector6{0, 0, 1, 0, 0, 0});
  };
  const auto report = evaluate_sequences(layout, ids, forward, EvalConfig{});
  ASSERT_EQ(report.sequences.size(), 1u);
  EXPECT_FALSE(report.sequences[0].has_ground_truth);
  EXPECT_EQ(report.sequences[0].estimate.size(), 5u);
  write_report(root / "out", report);
  std::ifstream in(root / "out" / "trajectories" / "02.txt");
  const auto rows = parse_trajectory(in);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_DOUBLE_EQ(rows.back().z, 4.0);
  EXPECT_THROW(evaluate_sequences(layout, std::vector<std::string>{"07"}, forward, EvalConfig{}), DataError);
}

}  // namespace
}  // namespace cgvo
