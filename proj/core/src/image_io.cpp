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

#include "cgvo/image_io.hpp"

#include <cstring>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "cgvo/error.hpp"

namespace cgvo {

Image read_image(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw IoError("cannot read image " + path.string());
  if (bgr.depth() != CV_8U) throw IoError("not an 8-bit image: " + path.string());
  Image img(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = row[x][2 - c];
  }
  return img;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  cv::Mat bgr(image.height, image.width, CV_8UC3);
  for (int y = 0; y < image.height; ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < 3; ++c) row[x][2 - c] = image.at(x, y, c);
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!cv::imwrite(path.string(), bgr)) throw IoError("cannot write image " + path.string());
}

Image resize_bilinear(const Image& image, int width, int height) {
  if (image.width == width && image.height == height) return image;
  cv::Mat src(image.height, image.width, CV_8UC3, const_cast<std::uint8_t*>(image.rgb.data()));
  cv::Mat dst;
  cv::resize(src, dst, cv::Size(width, height), 0, 0, cv::INTER_LINEAR);
  Image out(width, height);
  std::memcpy(out.rgb.data(), dst.data, out.rgb.size());
  return out;
}

template <typename T>
nn::Tensor<T> image_to_tensor(const Image& image) {
  const std::size_t h = image.height, w = image.width;
  nn::Tensor<T> t({3, h, w});
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        t[(c * h + y) * w + x] = static_cast<T>(image.at(int(x), int(y), int(c)) / 255.0 - 0.5);
  return t;
}

template <typename T>
nn::Tensor<T> load_and_preprocess(const std::filesystem::path& path, int width, int height) {
  return image_to_tensor<T>(resize_bilinear(read_image(path), width, height));
}

template <typename T>
nn::Tensor<T> mirror_horizontally(const nn::Tensor<T>& frame) {
  if (frame.rank() != 3) throw ShapeError("mirror_horizontally: expected CxHxW, got " + nn::to_string(frame.shape()));
  nn::Tensor<T> out(frame.shape());
  const std::size_t c = frame.dim(0), h = frame.dim(1), w = frame.dim(2);
  for (std::size_t k = 0; k < c * h; ++k)
    for (std::size_t x = 0; x < w; ++x) out[k * w + x] = frame[k * w + (w - 1 - x)];
  return out;
}

Image mirror_horizontally(const Image& image) {
  Image out(image.width, image.height);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = image.at(image.width - 1 - x, y, c);
  return out;
}

template nn::Tensor<float> image_to_tensor(const Image&);
template nn::Tensor<double> image_to_tensor(const Image&);
template nn::Tensor<float> load_and_preprocess(const std::filesystem::path&, int, int);
template nn::Tensor<double> load_and_preprocess(const std::filesystem::path&, int, int);
template nn::Tensor<float> mirror_horizontally(const nn::Tensor<float>&);
template nn::Tensor<double> mirror_horizontally(const nn::Tensor<double>&);

}  // namespace cgvo
