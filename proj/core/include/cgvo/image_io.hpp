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
#include <filesystem>
#include <vector>

#include "cgvo/tensor.hpp"

namespace cgvo {

// 8-bit interleaved RGB image.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // width * height * 3

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0) : width(w), height(h), rgb(std::size_t(w) * h * 3, fill) {}

  std::uint8_t& at(int x, int y, int c) { return rgb[(std::size_t(y) * width + x) * 3 + c]; }
  std::uint8_t at(int x, int y, int c) const { return rgb[(std::size_t(y) * width + x) * 3 + c]; }
  bool operator==(const Image&) const = default;
};

// Throws IoError naming the path.
Image read_image(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);

// Bilinear resize (no-op when the size already matches).
Image resize_bilinear(const Image& image, int width, int height);

// 3 x H x W tensor with channel values v / 255 - 0.5, i.e. in [-0.5, 0.5].
template <typename T>
nn::Tensor<T> image_to_tensor(const Image& image);

// Decode, resize to width x height, normalize.
template <typename T>
nn::Tensor<T> load_and_preprocess(const std::filesystem::path& path, int width, int height);

// Mirror about the vertical axis (CxHxW tensors and 8-bit images).
template <typename T>
nn::Tensor<T> mirror_horizontally(const nn::Tensor<T>& frame);
Image mirror_horizontally(const Image& image);

}  // namespace cgvo
