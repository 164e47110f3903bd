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
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace cgvo {

// Relative 6-DoF motion between two frames: translation in meters followed
// by Euler angles in radians. Rotation convention: R = Rz(rz) * Ry(ry) * Rx(rx),
// axes in the camera frame (x right, y down, z forward), so ry is yaw.
struct PoseVector6 {
  double tx = 0, ty = 0, tz = 0;
  double rx = 0, ry = 0, rz = 0;

  std::array<double, 6> as_array() const { return {tx, ty, tz, rx, ry, rz}; }
  static PoseVector6 from_array(std::span<const double, 6> v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
  }
  double operator[](std::size_t i) const { return as_array()[i]; }

  bool operator==(const PoseVector6&) const = default;
};

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

// Homogeneous SE(3) element. Construction validates orthonormality of the
// rotation block, det(R) = +1 and the bottom row, all within 1e-9.
class RigidTransform {
 public:
  static constexpr double kTolerance = 1e-9;

  RigidTransform() : m_(Eigen::Matrix4d::Identity()) {}
  explicit RigidTransform(const Eigen::Matrix4d& m);
  RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform translation(double x, double y, double z);

  const Eigen::Matrix4d& matrix() const { return m_; }
  Eigen::Matrix3d rotation() const { return m_.topLeftCorner<3, 3>(); }
  Eigen::Vector3d translation() const { return m_.topRightCorner<3, 1>(); }

  // Deviation of R^T R from I (max abs entry).
  double orthonormality_drift() const;

 private:
  struct Unchecked {};
  RigidTransform(const Eigen::Matrix4d& m, Unchecked) : m_(m) {}
  friend RigidTransform compose(const RigidTransform&, const RigidTransform&);
  friend RigidTransform invert(const RigidTransform&);
  friend RigidTransform conjugate_mirror(const RigidTransform&);

  Eigen::Matrix4d m_;
};

struct TrajectoryPoint {
  long frame_index = 0;
  RigidTransform pose;
};

// Absolute poses indexed by frame; indices strictly increasing.
using Trajectory = std::vector<TrajectoryPoint>;

// Throws std::invalid_argument on non-finite components.
RigidTransform vec_to_se3(const PoseVector6& p);

// Throws DegenerateOrientationError when |ry| is within 1e-6 of pi/2.
PoseVector6 se3_to_vec(const RigidTransform& t);

// a * b; the rotation block is re-orthonormalized by polar decomposition
// when the product drifts more than 1e-9 from SO(3).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

// Closed form (R^T, -R^T t).
RigidTransform invert(const RigidTransform& t);

// F * T * F with F = diag(-1, 1, 1, 1): the pose seen through a
// horizontally mirrored camera.
RigidTransform conjugate_mirror(const RigidTransform& t);

// absolute_0 = identity, absolute_i = absolute_{i-1} * relative_i.
// Returns relatives.size() + 1 points indexed 0..n.
Trajectory accumulate(std::span<const RigidTransform> relatives);

// Rotation angle of R in radians, clamped so it is never NaN.
double rotation_angle(const Eigen::Matrix3d& r);

// Elementary rotations (right-handed, active).
Eigen::Matrix3d rot_x(double a);
Eigen::Matrix3d rot_y(double a);
Eigen::Matrix3d rot_z(double a);

}  // namespace cgvo
