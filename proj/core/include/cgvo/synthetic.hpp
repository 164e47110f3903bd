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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cgvo/geometry.hpp"
#include "cgvo/image_io.hpp"
#include "cgvo/kitti.hpp"

// Synthetic sequences with exact ground truth: a pinhole camera moving over
// a textured plane. Each frame is the base texture warped by the
// plane-induced homography of the camera's cumulative pose.
namespace cgvo {

struct CameraModel {
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  int width = 0, height = 0;

  // KITTI-like field of view: fx = fy = 0.58 * width, principal point at
  // (width / 2, 0.3 * height) so the ground plane fills most of the frame.
  static CameraModel for_resolution(int width, int height);

  Eigen::Matrix3d intrinsics() const;
  // Throws GenerationError for non-positive focals or a principal point outside the image.
  void validate() const;
};

// n . X = d in the first camera's frame; n is a unit normal and d > 0.
struct TexturedPlane {
  Eigen::Vector3d normal{0.0, 1.0, 0.0};
  double distance = 1.65;

  static TexturedPlane ground(double camera_height) { return {{0.0, 1.0, 0.0}, camera_height}; }
  static TexturedPlane fronto_parallel(double depth) { return {{0.0, 0.0, 1.0}, depth}; }
};

// Periodic band-limited noise on the plane, in [0, 1].
class Texture {
 public:
  // White noise smoothed at three scales and summed; size x size texels
  // of `texel` meters each.
  static Texture band_limited_noise(std::uint64_t seed, int size = 512, double texel = 0.05);

  // Bilinear, wrapping. Coordinates in meters along the plane basis.
  double sample(double u, double v) const;

  int size() const { return size_; }
  double texel() const { return texel_; }

 private:
  int size_ = 0;
  double texel_ = 0;
  std::vector<float> values_;
};

struct RenderOptions {
  // Exponential falloff to background with distance; 0 disables it.
  double fog_distance = 25.0;
  std::uint8_t background = 128;
  int supersample = 2;
};

// Maps pixels of a camera at `pose` (camera -> first-camera transform) to
// pixels of the first camera: K (R + t n_k^T / d_k) K^-1, where (n_k, d_k)
// is the plane expressed in the moved camera. Throws GenerationError when
// the camera has crossed the plane.
Eigen::Matrix3d plane_homography(const CameraModel& camera, const RigidTransform& pose, const TexturedPlane& plane);

Image render_view(const CameraModel& camera, const RigidTransform& pose, const Texture& texture,
                  const TexturedPlane& plane, const RenderOptions& options = {});

struct SyntheticSequence {
  std::vector<Image> frames;              // script.size() + 1
  std::vector<PoseVector6> targets;       // the script itself
  std::vector<RigidTransform> absolutes;  // accumulated poses, frame 0 = identity
};

// Throws GenerationError if the plane ends up behind the camera or out of view.
SyntheticSequence generate_synthetic(const CameraModel& camera, std::span<const PoseVector6> script,
                                     const Texture& texture, const TexturedPlane& plane,
                                     const RenderOptions& options = {});

// Forward driving with smoothly varying speed (m/frame) and yaw rate (rad/frame).
struct DrivingProfile {
  double speed_min = 0.5;
  double speed_max = 1.2;
  double yaw_rate_max = 0.02;
};

std::vector<PoseVector6> driving_script(std::uint64_t seed, int motions, const DrivingProfile& profile);

// poses/<id>.txt and sequences/<id>/image_2/*.png.
void write_sequence(const KittiLayout& layout, const std::string& id, const SyntheticSequence& seq);

}  // namespace cgvo
