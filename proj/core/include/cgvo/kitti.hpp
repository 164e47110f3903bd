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

#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cgvo/geometry.hpp"

namespace cgvo {

// One pose per line: 12 whitespace-separated reals, the row-major 3x4
// [R | t]. Rotation blocks printed at limited precision are projected onto
// SO(3); a block further than 1e-3 from orthonormal is a parse error.
// Blank lines are skipped. Errors carry the 1-based line number.
std::vector<RigidTransform> parse_kitti_poses(std::istream& in);
std::vector<RigidTransform> read_kitti_poses(const std::filesystem::path& path);

// Full double precision, so parse(write(x)) == x.
void write_kitti_poses(std::ostream& out, std::span<const RigidTransform> poses);
void write_kitti_poses(const std::filesystem::path& path, std::span<const RigidTransform> poses);

// se3_to_vec(invert(abs_i) * abs_j): motion from frame i to frame j in i's frame.
PoseVector6 relative_pose(const RigidTransform& abs_i, const RigidTransform& abs_j);

// sequences/<NN>/image_2/<FFFFFF>.png and poses/<NN>.txt under a root.
class KittiLayout {
 public:
  explicit KittiLayout(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path pose_file(const std::string& sequence) const;
  std::filesystem::path image_dir(const std::string& sequence) const;
  std::filesystem::path image_path(const std::string& sequence, long frame) const;

  bool has_poses(const std::string& sequence) const;
  // Throws DataError naming the sequence when the pose file is absent.
  std::vector<RigidTransform> load_poses(const std::string& sequence) const;

 private:
  std::filesystem::path root_;
};

// Two-digit KITTI sequence id ("4" -> "04").
std::string sequence_id(int index);

}  // namespace cgvo
