// Copyright 2026 The xscript Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "xscript/synth/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "xscript/common.hpp"

namespace xscript::synth {

namespace {

// a + t (b - a) returns a exactly when a == b, so constant images stay
// constant under resampling.
inline float lerp(float a, float b, float t) { return a + t * (b - a); }

void source_coord(int dst, double scale, int src_size, int& i0, int& i1, float& t) {
  double s = (dst + 0.5) * scale - 0.5;
  s = std::clamp(s, 0.0, static_cast<double>(src_size - 1));
  i0 = static_cast<int>(std::floor(s));
  i1 = std::min(i0 + 1, src_size - 1);
  t = static_cast<float>(s - i0);
}

}  // namespace

InkImage resize_bilinear(const InkImage& image, int height, int width) {
  if (image.height < 1 || image.width < 1) throw DataError("resize: empty image");
  if (height < 1 || width < 1) throw ConfigError("resize: target size must be positive");
  if (height == image.height && width == image.width) return image;
  const double sy = static_cast<double>(image.height) / height;
  const double sx = static_cast<double>(image.width) / width;
  std::vector<int> x0(static_cast<std::size_t>(width)), x1(static_cast<std::size_t>(width));
  std::vector<float> tx(static_cast<std::size_t>(width));
  for (int x = 0; x < width; ++x) {
    source_coord(x, sx, image.width, x0[static_cast<std::size_t>(x)], x1[static_cast<std::size_t>(x)],
                 tx[static_cast<std::size_t>(x)]);
  }
  InkImage out(height, width);
  for (int y = 0; y < height; ++y) {
    int y0 = 0, y1 = 0;
    float ty = 0.0f;
    source_coord(y, sy, image.height, y0, y1, ty);
    for (int x = 0; x < width; ++x) {
      const auto xi = static_cast<std::size_t>(x);
      const float top = lerp(image.at(y0, x0[xi]), image.at(y0, x1[xi]), tx[xi]);
      const float bottom = lerp(image.at(y1, x0[xi]), image.at(y1, x1[xi]), tx[xi]);
      out.at(y, x) = lerp(top, bottom, ty);
    }
  }
  return out;
}

InkImage fit_to_height(const InkImage& image, const PreprocessOptions& opts) {
  if (image.height < 1 || image.width < 1) throw DataError("preprocess: zero-dimension image");
  if (opts.height < 1 || opts.max_width < 1) throw ConfigError("preprocess: invalid target geometry");
  const double scale = static_cast<double>(opts.height) / image.height;
  int width = std::max(1, static_cast<int>(std::lround(image.width * scale)));
  width = std::min(width, opts.max_width);
  return resize_bilinear(image, opts.height, width);
}

InkImage preprocess(const GrayImage& image, const PreprocessOptions& opts) {
  if (image.height < 1 || image.width < 1) throw DataError("preprocess: zero-dimension image");
  InkImage ink(image.height, image.width);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    ink.data[i] = 1.0f - static_cast<float>(image.pixels[i]) / 255.0f;
  }
  return fit_to_height(ink, opts);
}

}  // namespace xscript::synth
