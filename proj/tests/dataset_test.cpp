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
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "cgvo/augment.hpp"
#include "cgvo/error.hpp"
#include "cgvo/image_io.hpp"
#include "cgvo/kitti.hpp"
#include "cgvo/sampling.hpp"
#include "cgvo/synthetic.hpp"
#include "support.hpp"

namespace cgvo {
namespace {

std::vector<RigidTransform> wiggly_trajectory(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> small(-0.05, 0.05);
  std::vector<RigidTransform> abs{vec_to_se3({0.3, -0.1, 2.0, 0.01, -0.02, 0.03})};
  for (std::size_t i = 1; i < n; ++i)
    abs.push_back(compose(abs.back(), vec_to_se3({small(rng), small(rng), 1 + small(rng), small(rng), small(rng), small(rng)})));
  return abs;
}

double max_diff(const PoseVector6& a, const PoseVector6& b) {
  double m = 0;
  for (std::size_t i = 0; i < 6; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

TEST(Sampling, CountsAndStructure) {
  const std::vector<SequencePoses> seqs{{"00", wiggly_trajectory(20, 1)}, {"01", wiggly_trajectory(3, 2)}};
  SamplingConfig cfg;
  cfg.pairs = 3;
  auto r = sample_sequences(seqs, cfg);
  EXPECT_EQ(r.samples.size(), 17u);
  EXPECT_EQ(r.skipped, 1u);  // sequence 01 cannot hold 4 frames
  for (const auto& s : r.samples) {
    EXPECT_EQ(s.frame_indices.size(), 4u);
    EXPECT_EQ(s.pairs(), 3u);
    for (std::size_t k = 1; k < s.frame_indices.size(); ++k)
      EXPECT_EQ(s.frame_indices[k] - s.frame_indices[k - 1], s.stride);
  }
  cfg.overlap = 5;
  EXPECT_EQ(sample_sequences(seqs, cfg).samples.size(), 4u);  // starts 0, 5, 10, 15
  cfg.pairs = 0;
  EXPECT_THROW(sample_sequences(seqs, cfg), ContractError);
}

TEST(Sampling, StrideTwoTargetComposesStrideOne) {
  const auto abs = wiggly_trajectory(30, 3);
  const std::vector<SequencePoses> seqs{{"05", abs}};
  SamplingConfig one, two;
  one.pairs = 2;
  two.pairs = 1;
  two.strides = {2};
  const auto a = sample_sequences(seqs, one).samples;
  const auto b = sample_sequences(seqs, two).samples;
  for (std::size_t i = 0; i < b.size(); ++i) {
    ASSERT_EQ(a[i].frame_indices.front(), b[i].frame_indices.front());
    const auto composed = se3_to_vec(compose(vec_to_se3(a[i].targets[0]), vec_to_se3(a[i].targets[1])));
    EXPECT_LT(max_diff(composed, b[i].targets[0]), 1e-9);
  }
}

TEST(Sampling, MixedStridesAreSeededAndBounded) {
  const std::vector<SequencePoses> seqs{{"00", wiggly_trajectory(200, 4)}};
  SamplingConfig cfg;
  cfg.pairs = 3;
  cfg.strides = {1, 2, 3};
  cfg.seed = 9;
  const auto a = sample_sequences(seqs, cfg), b = sample_sequences(seqs, cfg);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_EQ(a.samples[i], b.samples[i]);
  std::set<int> seen;
  for (const auto& s : a.samples) {
    seen.insert(s.stride);
    EXPECT_LT(s.frame_indices.back(), 200);
  }
  EXPECT_EQ(seen, (std::set<int>{1, 2, 3}));
}

// Pose-only replica of the benchmark layout with the published frame counts.
TEST(Split, PublishedPairCountsOnPoseReplica) {
  const auto root = testing::scratch_dir("replica");
  const KittiLayout layout(root);
  const std::map<std::string, std::size_t> frames{{"00", 4541}, {"01", 1101}, {"02", 4661}, {"03", 801},
                                                  {"04", 271},  {"05", 2761}, {"06", 1101}, {"07", 1101},
                                                  {"08", 4071}, {"09", 1591}, {"10", 1201}};
  std::filesystem::create_directories(root / "poses");
  for (const auto& [id, n] : frames) {
    std::vector<RigidTransform> abs;
    for (std::size_t i = 0; i < n; ++i) abs.push_back(RigidTransform::translation(0, 0, double(i)));
    write_kitti_poses(layout.pose_file(id), abs);
  }
  SamplingConfig cfg;
  cfg.pairs = 1;
  const auto split = make_split(layout, SplitSpec{}, cfg);
  EXPECT_EQ(split.train.size(), 15320u);
  EXPECT_EQ(split.validation.size(), 640u);
  EXPECT_EQ(split.test.size(), 7230u);
  EXPECT_EQ(split.skipped, 0u);
  EXPECT_EQ(layout.load_poses("04").size(), 271u);

  const std::set<std::string> test_ids{"03", "04", "05", "06", "07", "10"};
  for (const auto* list : {&split.train, &split.validation}) {
    for (const auto& s : *list) ASSERT_EQ(test_ids.count(s.sequence_id), 0u);
  }
  // Validation is the tail of the training order: the end of sequence 09.
  EXPECT_EQ(split.validation.back().sequence_id, "09");
  EXPECT_EQ(split.validation.back().frame_indices.back(), 1590);
}

TEST(Split, OverlappingListsAndMissingPoses) {
  const auto root = testing::scratch_dir("split_errors");
  SplitSpec spec;
  spec.train_sequences = {"00", "04"};
  EXPECT_THROW(make_split(KittiLayout(root), spec, SamplingConfig{}), ContractError);
  try {
    KittiLayout(root).load_poses("07");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("07"), std::string::npos);
  }
}

SequenceSample sample_of(const std::vector<RigidTransform>& abs, long start, int pairs, int stride) {
  SequenceSample s;
  s.sequence_id = "00";
  s.stride = stride;
  for (int k = 0; k <= pairs; ++k) s.frame_indices.push_back(start + k * stride);
  s.targets = derive_targets(s, abs);
  return s;
}

TEST(Augment, HorizontalFlipExamples) {
  SequenceSample s;
  s.frame_indices = {0, 1};
  s.targets = {{0, 0, 1, 0, 0, 0}};
  EXPECT_LT(max_diff(horizontal_flip(s).targets[0], {0, 0, 1, 0, 0, 0}), 1e-15);
  s.targets = {{1, 0, 0, 0, 0, 0}};
  EXPECT_LT(max_diff(horizontal_flip(s).targets[0], {-1, 0, 0, 0, 0, 0}), 1e-15);
  s.targets = {{0, 0, 0.5, 0, 0.1, 0}};  // yaw turn
  EXPECT_LT(max_diff(horizontal_flip(s).targets[0], {0, 0, 0.5, 0, -0.1, 0}), 1e-12);
  EXPECT_TRUE(horizontal_flip(s).mirrored);
}

TEST(Augment, TemporalFlipExamples) {
  SequenceSample s;
  s.frame_indices = {4, 5};
  const PoseVector6 t{0.2, -0.1, 1.0, 0.01, 0.05, -0.02};
  s.targets = {t};
  const auto f = temporal_flip(s);
  EXPECT_EQ(f.frame_indices, (std::vector<long>{5, 4}));
  EXPECT_LT(max_diff(f.targets[0], se3_to_vec(invert(vec_to_se3(t)))), 1e-12);
  EXPECT_TRUE(f.time_reversed);
}

TEST(Augment, InvolutionsAndConsistency) {
  const auto abs = wiggly_trajectory(60, 5);
  std::mt19937_64 rng(6);
  for (int i = 0; i < 200; ++i) {
    const int stride = 1 + i % 3;
    auto s = sample_of(abs, i % 20, 1 + i % 4, stride);
    const auto orig = s;
    auto twice_h = horizontal_flip(horizontal_flip(s));
    auto twice_t = temporal_flip(temporal_flip(s));
    EXPECT_EQ(twice_h.frame_indices, orig.frame_indices);
    EXPECT_EQ(twice_t.frame_indices, orig.frame_indices);
    EXPECT_EQ(twice_h.mirrored, orig.mirrored);
    EXPECT_EQ(twice_t.time_reversed, orig.time_reversed);
    for (std::size_t k = 0; k < orig.pairs(); ++k) {
      EXPECT_LT(max_diff(twice_h.targets[k], orig.targets[k]), 1e-9);
      EXPECT_LT(max_diff(twice_t.targets[k], orig.targets[k]), 1e-9);
    }
    if (rng() % 2) s = horizontal_flip(s);
    if (rng() % 2) s = temporal_flip(s);
    if (rng() % 2) s = horizontal_flip(s);
    EXPECT_LE(target_consistency_error(s, abs), 1e-9);
  }
}

TEST(Augment, ReversedAccumulationIsRebasedReverse) {
  const auto abs = wiggly_trajectory(12, 7);
  const auto s = sample_of(abs, 0, 11, 1);
  const auto f = temporal_flip(s);
  std::vector<RigidTransform> rel;
  for (const auto& t : f.targets) rel.push_back(vec_to_se3(t));
  const auto traj = accumulate(rel);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto expected = compose(invert(abs[11]), abs[11 - k]);
    EXPECT_LT((traj[k].pose.matrix() - expected.matrix()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Augment, FramesFollowTheFlags) {
  SampleWithFrames<float> clip;
  clip.sample.frame_indices = {0, 1};
  clip.sample.targets = {{0.1, 0, 1, 0, 0.01, 0}};
  for (int i = 0; i < 2; ++i) {
    auto t = nn::make_tensor<float>({3, 2, 3});
    for (std::size_t k = 0; k < t->size(); ++k) (*t)[k] = float(k + 10 * i);
    clip.frames.push_back(t);
  }
  const auto h = horizontal_flip(clip);
  EXPECT_EQ((*h.frames[0])[0], (*clip.frames[0])[2]);
  EXPECT_EQ((*h.frames[0])[2], (*clip.frames[0])[0]);
  const auto t = temporal_flip(clip);
  EXPECT_EQ(t.frames[0], clip.frames[1]);
  const auto hh = horizontal_flip(h);
  for (std::size_t k = 0; k < clip.frames[0]->size(); ++k) EXPECT_EQ((*hh.frames[0])[k], (*clip.frames[0])[k]);
}

TEST(Images, PreprocessingRangeAndResize) {
  const auto dir = testing::scratch_dir("images");
  write_png(dir / "black.png", Image(40, 20, 0));
  const auto black = load_and_preprocess<float>(dir / "black.png", 64, 24);
  EXPECT_EQ(black.shape(), (nn::Shape{3, 24, 64}));
  for (float v : black.values()) EXPECT_EQ(v, -0.5f);
  const auto gray = resize_bilinear(Image(17, 9, 77), 50, 31);
  for (auto v : gray.rgb) EXPECT_EQ(v, 77);
  EXPECT_THROW(read_image(dir / "absent.png"), IoError);

  Image img(4, 3);
  for (std::size_t i = 0; i < img.rgb.size(); ++i) img.rgb[i] = std::uint8_t(i * 7);
  write_png(dir / "pattern.png", img);
  EXPECT_EQ(read_image(dir / "pattern.png"), img);
  const auto t = image_to_tensor<double>(img);
  EXPECT_DOUBLE_EQ(t[0], img.at(0, 0, 0) / 255.0 - 0.5);
  EXPECT_DOUBLE_EQ(t[12 + 1], img.at(1, 0, 1) / 255.0 - 0.5);  // channel 1, pixel (1, 0)
  EXPECT_EQ(mirror_horizontally(mirror_horizontally(img)), img);
  EXPECT_EQ(mirror_horizontally(img).at(0, 0, 2), img.at(3, 0, 2));
}

TEST(Synthetic, IdentityScriptGivesConstantFrames) {
  const auto cam = CameraModel::for_resolution(64, 24);
  const std::vector<PoseVector6> script(3);
  const auto seq = generate_synthetic(cam, script, Texture::band_limited_noise(1, 128), TexturedPlane::ground(1.65));
  ASSERT_EQ(seq.frames.size(), 4u);
  ASSERT_EQ(seq.targets.size(), 3u);
  for (const auto& f : seq.frames) EXPECT_EQ(f, seq.frames[0]);
  for (const auto& t : seq.targets) EXPECT_EQ(t, PoseVector6{});
}

TEST(Synthetic, CountsAndExactTargets) {
  const auto cam = CameraModel::for_resolution(64, 24);
  const auto script = driving_script(3, 7, DrivingProfile{});
  const auto seq = generate_synthetic(cam, script, Texture::band_limited_noise(2, 128), TexturedPlane::ground(1.65));
  EXPECT_EQ(seq.frames.size(), 8u);
  ASSERT_EQ(seq.targets.size(), 7u);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(seq.targets[i], script[i]);
    EXPECT_LT(max_diff(relative_pose(seq.absolutes[i], seq.absolutes[i + 1]), script[i]), 1e-9);
  }
  EXPECT_NE(seq.frames[0], seq.frames[1]);
}

TEST(Synthetic, FrontoParallelTranslationShiftsByFocalTimesRatio) {
  const CameraModel cam{500, 500, 160, 48, 320, 96};
  const auto pose = RigidTransform::translation(0.1, 0, 0);
  const Eigen::Matrix3d h = plane_homography(cam, pose, TexturedPlane::fronto_parallel(10));
  for (const auto& [u, v] : std::vector<std::pair<double, double>>{{0, 0}, {100, 20}, {319, 95}}) {
    const Eigen::Vector3d p = h * Eigen::Vector3d(u, v, 1);
    EXPECT_NEAR(p.x() / p.z(), u + 5.0, 1e-9);
    EXPECT_NEAR(p.y() / p.z(), v, 1e-9);
  }
  // Rendered content: pixel u of the moved view shows what pixel u + 5 showed before.
  const auto tex = Texture::band_limited_noise(4, 256);
  RenderOptions opt;
  opt.fog_distance = 0;
  const auto plane = TexturedPlane::fronto_parallel(10);
  const auto f0 = render_view(cam, RigidTransform::identity(), tex, plane, opt);
  const auto f1 = render_view(cam, pose, tex, plane, opt);
  double err = 0, spread = 0;
  std::size_t n = 0;
  for (int y = 10; y < 86; ++y)
    for (int x = 10; x < 300; ++x) {
      err += std::abs(double(f1.at(x, y, 0)) - double(f0.at(x + 5, y, 0)));
      spread += std::abs(double(f1.at(x, y, 0)) - double(f0.at(x, y, 0)));
      ++n;
    }
  EXPECT_LT(err / n, 1.0);
  EXPECT_GT(spread / n, 3 * (err / n));
}

TEST(Synthetic, GenerationErrors) {
  const auto cam = CameraModel::for_resolution(64, 24);
  EXPECT_THROW(plane_homography(cam, RigidTransform::translation(0, 2, 0), TexturedPlane::ground(1.65)),
               GenerationError);
  CameraModel bad = cam;
  bad.cx = 100;
  EXPECT_THROW(bad.validate(), GenerationError);
  bad = cam;
  bad.fx = 0;
  EXPECT_THROW(bad.validate(), GenerationError);
}

TEST(Synthetic, TextureIsSeededAndPeriodic) {
  const auto a = Texture::band_limited_noise(5, 64), b = Texture::band_limited_noise(5, 64);
  const auto c = Texture::band_limited_noise(6, 64);
  EXPECT_EQ(a.sample(0.37, 1.21), b.sample(0.37, 1.21));
  EXPECT_NE(a.sample(0.37, 1.21), c.sample(0.37, 1.21));
  const double period = 64 * a.texel();
  EXPECT_NEAR(a.sample(0.37, 1.21), a.sample(0.37 + period, 1.21 - period), 1e-6);
  for (int i = 0; i < 100; ++i) {
    const double v = a.sample(0.13 * i, -0.07 * i);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

}  // namespace
}  // namespace cgvo
