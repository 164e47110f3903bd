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

#include "cgvo/kitti.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <Eigen/Dense>

#include "cgvo/error.hpp"

namespace cgvo {
namespace {

constexpr double kMaxPrintedDrift = 1e-3;

Eigen::Matrix3d project_to_rotation(const Eigen::Matrix3d& r) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  if ((u * svd.matrixV().transpose()).determinant() < 0) u.col(2) *= -1.0;
  return u * svd.matrixV().transpose();
}

}  // namespace

std::vector<RigidTransform> parse_kitti_poses(std::istream& in) {
  std::vector<RigidTransform> poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    double v[12];
    for (int i = 0; i < 12; ++i) {
      if (!(ls >> v[i])) throw ParseError("expected 12 reals, got " + std::to_string(i), line_no);
      if (!std::isfinite(v[i])) throw ParseError("non-finite value", line_no);
    }
    std::string extra;
    if (ls >> extra) throw ParseError("more than 12 values", line_no);

    Eigen::Matrix3d r;
    r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    const double drift = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (drift > kMaxPrintedDrift || r.determinant() <= 0)
      throw ParseError("rotation block is not a rotation", line_no);
    if (drift > RigidTransform::kTolerance || std::abs(r.determinant() - 1.0) > RigidTransform::kTolerance)
      r = project_to_rotation(r);
    poses.emplace_back(r, Eigen::Vector3d(v[3], v[7], v[11]));
  }
  return poses;
}

std::vector<RigidTransform> read_kitti_poses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read pose file " + path.string());
  try {
    return parse_kitti_poses(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.line());
  }
}

void write_kitti_poses(std::ostream& out, std::span<const RigidTransform> poses) {
  out << std::setprecision(17);
  for (const auto& p : poses) {
    const Eigen::Matrix4d& m = p.matrix();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) out << m(r, c) << (r == 2 && c == 3 ? '\n' : ' ');
  }
}

void write_kitti_poses(const std::filesystem::path& path, std::span<const RigidTransform> poses) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write pose file " + path.string());
  write_kitti_poses(out, poses);
}

PoseVector6 relative_pose(const RigidTransform& abs_i, const RigidTransform& abs_j) {
  return se3_to_vec(compose(invert(abs_i), abs_j));
}

std::filesystem::path KittiLayout::pose_file(const std::string& sequence) const {
  return root_ / "poses" / (sequence + ".txt");
}

std::filesystem::path KittiLayout::image_dir(const std::string& sequence) const {
  return root_ / "sequences" / sequence / "image_2";
}

std::filesystem::path KittiLayout::image_path(const std::string& sequence, long frame) const {
  std::ostringstream name;
  name << std::setw(6) << std::setfill('0') << frame << ".png";
  return image_dir(sequence) / name.str();
}

bool KittiLayout::has_poses(const std::string& sequence) const {
  return std::filesystem::is_regular_file(pose_file(sequence));
}

std::vector<RigidTransform> KittiLayout::load_poses(const std::string& sequence) const {
  if (!has_poses(sequence))
    throw DataError("sequence " + sequence + ": missing ground-truth pose file " + pose_file(sequence).string());
  return read_kitti_poses(pose_file(sequence));
}

std::string sequence_id(int index) {
  std::ostringstream os;
  os << std::setw(2) << std::setfill('0') << index;
  return os.str();
}

}  // namespace cgvo
