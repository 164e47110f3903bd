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

#include <cmath>
#include <cstddef>
#include <vector>

namespace cgvo::testing {

// Straight-line convolutional GRU in plain arrays: 3x3 kernels, stride 1,
// zero padding 1.
struct PlainGru {
  std::size_t c, h, w;

  double conv_at(const std::vector<double>& k, const std::vector<double>& in, std::size_t o, std::size_t y,
                 std::size_t x) const {
    double acc = 0;
    for (std::size_t i = 0; i < c; ++i)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const long yy = long(y) + dy, xx = long(x) + dx;
          if (yy < 0 || xx < 0 || yy >= long(h) || xx >= long(w)) continue;
          acc += k[((o * c + i) * 3 + (dy + 1)) * 3 + (dx + 1)] * in[(i * h + yy) * w + xx];
        }
    return acc;
  }

  std::vector<double> step(const std::vector<std::vector<double>>& p, const std::vector<double>& x,
                           const std::vector<double>& hp) const {
    // p: w_hz, w_xz, b_z, w_hr, w_xr, b_r, w_h, w_x, b
    const std::size_t n = c * h * w;
    std::vector<double> z(n), r(n), rh(n), out(n);
    for (std::size_t o = 0; o < c; ++o)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t xx = 0; xx < w; ++xx) {
          const std::size_t i = (o * h + y) * w + xx;
          z[i] = 1.0 / (1.0 + std::exp(-(conv_at(p[0], hp, o, y, xx) + conv_at(p[1], x, o, y, xx) + p[2][o])));
          r[i] = 1.0 / (1.0 + std::exp(-(conv_at(p[3], hp, o, y, xx) + conv_at(p[4], x, o, y, xx) + p[5][o])));
          rh[i] = r[i] * hp[i];
        }
    for (std::size_t o = 0; o < c; ++o)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t xx = 0; xx < w; ++xx) {
          const std::size_t i = (o * h + y) * w + xx;
          const double cand = std::tanh(conv_at(p[6], rh, o, y, xx) + conv_at(p[7], x, o, y, xx) + p[8][o]);
          out[i] = (1 - z[i]) * hp[i] + z[i] * cand;
        }
    return out;
  }
};

}  // namespace cgvo::testing
