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

#include "cgvo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "cgvo/error.hpp"

namespace cgvo {
namespace {

constexpr double kGimbalGuard = 1e-6;

void validate(const Eigen::Matrix4d& m) {
  if (!m.allFinite()) throw std::invalid_argument("RigidTransform: non-finite entry");
  if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0)
    throw std::invalid_argument("RigidTransform: bottom row must be (0, 0, 0, 1)");
  const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  const double drift = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (drift > RigidTransform::kTolerance) {
    std::ostringstream os;
    os << "RigidTransform: rotation block not orthonormal (drift " << drift << ")";
    throw std::invalid_argument(os.str());
  }
  if (std::abs(r.determinant() - 1.0) > RigidTransform::kTolerance)
    throw std::invalid_argument("RigidTransform: det(R) != 1");
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& r) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0) u.col(2) *= -1.0;
  return u * v.transpose();
}

}  // namespace

double wrap_angle(double a) {
  constexpr double kPi = std::numbers::pi;
  a = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

RigidTransform::RigidTransform(const Eigen::Matrix4d& m) : m_(m) { validate(m_); }

RigidTransform::RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : m_(Eigen::Matrix4d::Identity()) {
  m_.topLeftCorner<3, 3>() = rotation;
  m_.topRightCorner<3, 1>() = translation;
  validate(m_);
}

RigidTransform RigidTransform::translation(double x, double y, double z) {
  return RigidTransform(Eigen::Matrix3d::Identity(), Eigen::Vector3d(x, y, z));
}

double RigidTransform::orthonormality_drift() const {
  const Eigen::Matrix3d r = rotation();
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

Eigen::Matrix3d rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Eigen::Matrix3d rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

Eigen::Matrix3d rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

RigidTransform vec_to_se3(const PoseVector6& p) {
  for (double v : p.as_array())
    if (!std::isfinite(v)) throw std::invalid_argument("vec_to_se3: non-finite pose component");
  return RigidTransform(rot_z(p.rz) * rot_y(p.ry) * rot_x(p.rx), Eigen::Vector3d(p.tx, p.ty, p.tz));
}

PoseVector6 se3_to_vec(const RigidTransform& t) {
  const Eigen::Matrix3d r = t.rotation();
  const double cy = std::hypot(r(0, 0), r(1, 0));
  const double ry = std::atan2(-r(2, 0), cy);
  if (std::abs(std::abs(ry) - std::numbers::pi / 2) < kGimbalGuard) {
    std::ostringstream os;
    os << "se3_to_vec: ry = " << ry << " is within " << kGimbalGuard << " of +-pi/2 (gimbal lock)";
    throw DegenerateOrientationError(os.str());
  }
  const Eigen::Vector3d tr = t.translation();
  return {tr.x(),
          tr.y(),
          tr.z(),
          wrap_angle(std::atan2(r(2, 1), r(2, 2))),
          wrap_angle(ry),
          wrap_angle(std::atan2(r(1, 0), r(0, 0)))};
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  Eigen::Matrix4d m = a.m_ * b.m_;
  m.row(3) << 0, 0, 0, 1;
  const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  const double drift = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (drift > RigidTransform::kTolerance) m.topLeftCorner<3, 3>() = nearest_rotation(r);
  return RigidTransform(m, RigidTransform::Unchecked{});
}

RigidTransform invert(const RigidTransform& t) {
  const Eigen::Matrix3d rt = t.m_.topLeftCorner<3, 3>().transpose();
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rt;
  m.topRightCorner<3, 1>() = -rt * t.m_.topRightCorner<3, 1>();
  return RigidTransform(m, RigidTransform::Unchecked{});
}

RigidTransform conjugate_mirror(const RigidTransform& t) {
  // Flipping the sign of row 0 and column 0 is F*T*F exactly; entry (0,0)
  // is negated twice.
  Eigen::Matrix4d m = t.m_;
  m.row(0) *= -1.0;
  m.col(0) *= -1.0;
  return RigidTransform(m, RigidTransform::Unchecked{});
}

Trajectory accumulate(std::span<const RigidTransform> relatives) {
  if (relatives.empty()) throw ContractError("accumulate: empty relative pose list");
  Trajectory out;
  out.reserve(relatives.size() + 1);
  out.push_back({0, RigidTransform::identity()});
  for (std::size_t i = 0; i < relatives.size(); ++i)
    out.push_back({static_cast<long>(i + 1), compose(out.back().pose, relatives[i])});
  return out;
}

double rotation_angle(const Eigen::Matrix3d& r) {
  // atan2 of the sine and cosine parts stays accurate near 0 and pi.
  const Eigen::Vector3d axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::atan2(0.5 * axis.norm(), c);
}

}  // namespace cgvo
