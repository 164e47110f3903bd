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

#include "cgvo/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "cgvo/error.hpp"

namespace cgvo {
namespace {

// Periodic separable Gaussian blur of a size x size grid.
std::vector<double> blur_periodic(const std::vector<double>& src, int size, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double norm = 0;
  for (int i = -radius; i <= radius; ++i) norm += kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& k : kernel) k /= norm;
  auto wrap = [size](int i) { return ((i % size) + size) % size; };

  std::vector<double> tmp(src.size()), out(src.size());
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * src[y * size + wrap(x + i)];
      tmp[y * size + x] = acc;
    }
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp[wrap(y + i) * size + x];
      out[y * size + x] = acc;
    }
  return out;
}

void normalize_unit(std::vector<double>& v) {
  double mean = 0, sq = 0;
  for (double x : v) mean += x;
  mean /= double(v.size());
  for (double x : v) sq += (x - mean) * (x - mean);
  const double sd = std::sqrt(sq / double(v.size()));
  for (double& x : v) x = (x - mean) / (sd > 0 ? sd : 1.0);
}

struct PlaneBasis {
  Eigen::Vector3d u, v;
};

PlaneBasis basis_for(const Eigen::Vector3d& n) {
  Eigen::Vector3d ref = std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitZ();
  Eigen::Vector3d u = (ref - ref.dot(n) * n).normalized();
  return {u, n.cross(u)};
}

void check_plane(const TexturedPlane& plane) {
  if (std::abs(plane.normal.norm() - 1.0) > 1e-9 || !(plane.distance > 0))
    throw GenerationError("plane needs a unit normal and positive distance");
}

}  // namespace

CameraModel CameraModel::for_resolution(int width, int height) {
  CameraModel c;
  c.width = width;
  c.height = height;
  c.fx = c.fy = 0.58 * width;
  c.cx = 0.5 * width;
  c.cy = 0.3 * height;
  return c;
}

Eigen::Matrix3d CameraModel::intrinsics() const {
  Eigen::Matrix3d k;
  k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  return k;
}

void CameraModel::validate() const {
  if (!(fx > 0) || !(fy > 0)) throw GenerationError("camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw GenerationError("camera resolution must be positive");
  if (cx < 0 || cx > width || cy < 0 || cy > height)
    throw GenerationError("camera principal point lies outside the image");
}

Texture Texture::band_limited_noise(std::uint64_t seed, int size, double texel) {
  if (size < 8 || !(texel > 0)) throw GenerationError("texture: size >= 8 and texel > 0 required");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> white(std::size_t(size) * size);
  for (double& w : white) w = normal(rng);

  std::vector<double> sum(white.size(), 0.0);
  constexpr double kSigmas[] = {1.0, 3.0, 8.0};
  constexpr double kWeights[] = {0.45, 0.35, 0.20};
  for (int o = 0; o < 3; ++o) {
    auto band = blur_periodic(white, size, kSigmas[o]);
    normalize_unit(band);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += kWeights[o] * band[i];
  }
  normalize_unit(sum);

  Texture t;
  t.size_ = size;
  t.texel_ = texel;
  t.values_.resize(sum.size());
  for (std::size_t i = 0; i < sum.size(); ++i)
    t.values_[i] = static_cast<float>(std::clamp(0.5 + 0.2 * sum[i], 0.0, 1.0));
  return t;
}

double Texture::sample(double u, double v) const {
  const double x = u / texel_, y = v / texel_;
  const double fx = std::floor(x), fy = std::floor(y);
  const double ax = x - fx, ay = y - fy;
  auto wrap = [this](long i) { return static_cast<std::size_t>(((i % size_) + size_) % size_); };
  const std::size_t x0 = wrap(long(fx)), x1 = wrap(long(fx) + 1);
  const std::size_t y0 = wrap(long(fy)), y1 = wrap(long(fy) + 1);
  const std::size_t s = size_;
  return (1 - ay) * ((1 - ax) * values_[y0 * s + x0] + ax * values_[y0 * s + x1]) +
         ay * ((1 - ax) * values_[y1 * s + x0] + ax * values_[y1 * s + x1]);
}

Eigen::Matrix3d plane_homography(const CameraModel& camera, const RigidTransform& pose, const TexturedPlane& plane) {
  check_plane(plane);
  const Eigen::Matrix3d r = pose.rotation();
  const Eigen::Vector3d t = pose.translation();
  const Eigen::Vector3d n_k = r.transpose() * plane.normal;
  const double d_k = plane.distance - plane.normal.dot(t);
  if (!(d_k > 0)) throw GenerationError("plane is behind the camera (camera crossed the plane)");
  const Eigen::Matrix3d k = camera.intrinsics();
  return k * (r + t * n_k.transpose() / d_k) * k.inverse();
}

Image render_view(const CameraModel& camera, const RigidTransform& pose, const Texture& texture,
                  const TexturedPlane& plane, const RenderOptions& options) {
  camera.validate();
  check_plane(plane);
  const Eigen::Matrix3d r = pose.rotation();
  const Eigen::Vector3d t = pose.translation();
  const Eigen::Vector3d n_k = r.transpose() * plane.normal;
  const double d_k = plane.distance - plane.normal.dot(t);
  if (!(d_k > 0)) throw GenerationError("plane is behind the camera (camera crossed the plane)");
  const PlaneBasis basis = basis_for(plane.normal);
  const int ss = std::max(1, options.supersample);
  constexpr double kGains[3] = {1.0, 0.92, 0.84};
  const double bg = options.background / 255.0;

  Image img(camera.width, camera.height);
  std::size_t hits = 0;
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      double acc = 0;
      for (int sy = 0; sy < ss; ++sy) {
        for (int sx = 0; sx < ss; ++sx) {
          const double px = x + (sx + 0.5) / ss - 0.5, py = y + (sy + 0.5) / ss - 0.5;
          const Eigen::Vector3d ray((px - camera.cx) / camera.fx, (py - camera.cy) / camera.fy, 1.0);
          const double denom = n_k.dot(ray);
          if (!(denom > 1e-12)) {
            acc += bg;
            continue;
          }
          ++hits;
          const double lambda = d_k / denom;
          const Eigen::Vector3d world = r * (lambda * ray) + t;
          double value = texture.sample(basis.u.dot(world), basis.v.dot(world));
          if (options.fog_distance > 0) {
            const double w = std::exp(-lambda * ray.norm() / options.fog_distance);
            value = w * value + (1 - w) * bg;
          }
          acc += value;
        }
      }
      const double v = acc / (ss * ss);
      for (int c = 0; c < 3; ++c)
        img.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(255.0 * kGains[c] * v), 0L, 255L));
    }
  }
  if (hits == 0) throw GenerationError("plane is not visible from the camera");
  return img;
}

SyntheticSequence generate_synthetic(const CameraModel& camera, std::span<const PoseVector6> script,
                                     const Texture& texture, const TexturedPlane& plane,
                                     const RenderOptions& options) {
  SyntheticSequence seq;
  seq.targets.assign(script.begin(), script.end());
  std::vector<RigidTransform> rel;
  rel.reserve(script.size());
  for (const auto& p : script) rel.push_back(vec_to_se3(p));
  if (rel.empty()) {
    seq.absolutes.push_back(RigidTransform::identity());
  } else {
    for (const auto& pt : accumulate(rel)) seq.absolutes.push_back(pt.pose);
  }
  for (const auto& a : seq.absolutes) seq.frames.push_back(render_view(camera, a, texture, plane, options));
  return seq;
}

std::vector<PoseVector6> driving_script(std::uint64_t seed, int motions, const DrivingProfile& profile) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double base_speed = profile.speed_min + (profile.speed_max - profile.speed_min) * unit(rng);
  const double base_yaw = profile.yaw_rate_max * (2 * unit(rng) - 1);
  const double speed_period = 20 + 40 * unit(rng), yaw_period = 20 + 40 * unit(rng);
  const double speed_phase = 2 * std::numbers::pi * unit(rng), yaw_phase = 2 * std::numbers::pi * unit(rng);
  const double speed_swing = 0.5 * (profile.speed_max - profile.speed_min);

  std::vector<PoseVector6> script;
  script.reserve(std::max(0, motions));
  for (int k = 0; k < motions; ++k) {
    double v = base_speed + 0.5 * speed_swing * std::sin(2 * std::numbers::pi * k / speed_period + speed_phase);
    double w = base_yaw + 0.5 * profile.yaw_rate_max * std::sin(2 * std::numbers::pi * k / yaw_period + yaw_phase);
    v = std::clamp(v, profile.speed_min, profile.speed_max);
    w = std::clamp(w, -profile.yaw_rate_max, profile.yaw_rate_max);
    script.push_back({0.0, 0.0, v, 0.0, w, 0.0});
  }
  return script;
}

void write_sequence(const KittiLayout& layout, const std::string& id, const SyntheticSequence& seq) {
  write_kitti_poses(layout.pose_file(id), seq.absolutes);
  for (std::size_t i = 0; i < seq.frames.size(); ++i) write_png(layout.image_path(id, long(i)), seq.frames[i]);
}

}  // namespace cgvo
