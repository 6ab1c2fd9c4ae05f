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

#include "xscript/synth/augment.hpp"

#include <algorithm>
#include <cmath>

namespace xscript::synth {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Bilinear read with zero outside the image.
float sample(const InkImage& img, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const double ax = x - fx;
  const double ay = y - fy;
  auto px = [&](int yy, int xx) -> double {
    if (xx < 0 || yy < 0 || xx >= img.width || yy >= img.height) return 0.0;
    return img.at(yy, xx);
  };
  const double top = px(y0, x0) * (1 - ax) + px(y0, x0 + 1) * ax;
  const double bottom = px(y0 + 1, x0) * (1 - ax) + px(y0 + 1, x0 + 1) * ax;
  return static_cast<float>(std::clamp(top * (1 - ay) + bottom * ay, 0.0, 1.0));
}

template <typename Key>
double get_prob(const nlohmann::json& j, const Key& key, double def) {
  return j.contains(key) ? j.at(key).template get<double>() : def;
}

}  // namespace

AugmentConfig AugmentConfig::disabled() {
  AugmentConfig c;
  c.p_affine = c.p_morphology = c.p_brightness = c.p_gamma = c.p_elastic = 0.0;
  return c;
}

void to_json(nlohmann::json& j, const AugmentConfig& c) {
  j = nlohmann::json{{"p_affine", c.p_affine},
                     {"p_morphology", c.p_morphology},
                     {"p_brightness", c.p_brightness},
                     {"p_gamma", c.p_gamma},
                     {"p_elastic", c.p_elastic},
                     {"max_rotation_deg", c.max_rotation_deg},
                     {"max_shear", c.max_shear},
                     {"min_scale", c.min_scale},
                     {"max_scale", c.max_scale},
                     {"max_translate", c.max_translate},
                     {"max_contrast_delta", c.max_contrast_delta},
                     {"max_brightness_delta", c.max_brightness_delta},
                     {"min_gamma", c.min_gamma},
                     {"max_gamma", c.max_gamma},
                     {"elastic_alpha", c.elastic_alpha},
                     {"elastic_cell", c.elastic_cell}};
}

void from_json(const nlohmann::json& j, AugmentConfig& c) {
  nlohmann::json defaults;
  to_json(defaults, c);
  for (const auto& item : j.items()) {
    if (!defaults.contains(item.key())) throw ConfigError("augment config: unknown key '" + item.key() + "'");
  }
  try {
    c.p_affine = get_prob(j, "p_affine", c.p_affine);
    c.p_morphology = get_prob(j, "p_morphology", c.p_morphology);
    c.p_brightness = get_prob(j, "p_brightness", c.p_brightness);
    c.p_gamma = get_prob(j, "p_gamma", c.p_gamma);
    c.p_elastic = get_prob(j, "p_elastic", c.p_elastic);
    c.max_rotation_deg = get_prob(j, "max_rotation_deg", c.max_rotation_deg);
    c.max_shear = get_prob(j, "max_shear", c.max_shear);
    c.min_scale = get_prob(j, "min_scale", c.min_scale);
    c.max_scale = get_prob(j, "max_scale", c.max_scale);
    c.max_translate = get_prob(j, "max_translate", c.max_translate);
    c.max_contrast_delta = get_prob(j, "max_contrast_delta", c.max_contrast_delta);
    c.max_brightness_delta = get_prob(j, "max_brightness_delta", c.max_brightness_delta);
    c.min_gamma = get_prob(j, "min_gamma", c.min_gamma);
    c.max_gamma = get_prob(j, "max_gamma", c.max_gamma);
    c.elastic_alpha = get_prob(j, "elastic_alpha", c.elastic_alpha);
    c.elastic_cell = j.value("elastic_cell", c.elastic_cell);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("augment config: ") + e.what());
  }
  for (double p : {c.p_affine, c.p_morphology, c.p_brightness, c.p_gamma, c.p_elastic}) {
    if (p < 0.0 || p > 1.0) throw ConfigError("augment config: probabilities must lie in [0, 1]");
  }
  if (c.min_scale <= 0.0 || c.min_scale > c.max_scale || c.min_gamma <= 0.0 || c.min_gamma > c.max_gamma ||
      c.elastic_cell < 1) {
    throw ConfigError("augment config: invalid ranges");
  }
}

InkImage affine(const InkImage& image, double rotation_deg, double shear, double scale, double tx, double ty) {
  // Forward map about the image center: p' = S * Sh * R * (p - c) + c + t.
  const double a = rotation_deg * kPi / 180.0;
  const double ca = std::cos(a), sa = std::sin(a);
  // M = scale * [[1, shear], [0, 1]] * [[ca, -sa], [sa, ca]]
  const double m00 = scale * (ca + shear * sa), m01 = scale * (-sa + shear * ca);
  const double m10 = scale * sa, m11 = scale * ca;
  const double det = m00 * m11 - m01 * m10;
  const double i00 = m11 / det, i01 = -m01 / det, i10 = -m10 / det, i11 = m00 / det;
  const double cx = image.width / 2.0, cy = image.height / 2.0;
  InkImage out(image.height, image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double dx = x + 0.5 - cx - tx;
      const double dy = y + 0.5 - cy - ty;
      const double sx = i00 * dx + i01 * dy + cx - 0.5;
      const double sy = i10 * dx + i11 * dy + cy - 0.5;
      out.at(y, x) = sample(image, sx, sy);
    }
  }
  return out;
}

InkImage morphology(const InkImage& image, bool dilate) {
  InkImage out(image.height, image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      float v = image.at(y, x);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = y + dy, xx = x + dx;
          // Outside pixels count as background.
          const float n = (yy < 0 || xx < 0 || yy >= image.height || xx >= image.width) ? 0.0f : image.at(yy, xx);
          v = dilate ? std::max(v, n) : std::min(v, n);
        }
      }
      out.at(y, x) = v;
    }
  }
  return out;
}

InkImage brightness_contrast(const InkImage& image, double contrast, double brightness) {
  InkImage out = image;
  for (auto& v : out.data) v = static_cast<float>(std::clamp(contrast * v + brightness, 0.0, 1.0));
  return out;
}

InkImage gamma_correct(const InkImage& image, double gamma) {
  InkImage out = image;
  for (auto& v : out.data) v = static_cast<float>(std::pow(std::clamp(static_cast<double>(v), 0.0, 1.0), gamma));
  return out;
}

InkImage elastic(const InkImage& image, Rng& rng, double alpha, int cell) {
  const int gh = image.height / cell + 2;
  const int gw = image.width / cell + 2;
  std::vector<double> gx(static_cast<std::size_t>(gh) * gw), gy(gx.size());
  for (std::size_t i = 0; i < gx.size(); ++i) {
    gx[i] = uniform(rng, -alpha, alpha);
    gy[i] = uniform(rng, -alpha, alpha);
  }
  auto field = [&](const std::vector<double>& g, double fx, double fy) {
    const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
    const double ax = fx - x0, ay = fy - y0;
    auto at = [&](int yy, int xx) { return g[static_cast<std::size_t>(yy) * gw + xx]; };
    return (at(y0, x0) * (1 - ax) + at(y0, x0 + 1) * ax) * (1 - ay) +
           (at(y0 + 1, x0) * (1 - ax) + at(y0 + 1, x0 + 1) * ax) * ay;
  };
  InkImage out(image.height, image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double fx = static_cast<double>(x) / cell;
      const double fy = static_cast<double>(y) / cell;
      out.at(y, x) = sample(image, x + field(gx, fx, fy), y + field(gy, fx, fy));
    }
  }
  return out;
}

InkImage augment(const InkImage& image, std::uint64_t seed, const AugmentConfig& cfg) {
  Rng rng = make_rng(seed, "augment");
  InkImage img = image;
  if (bernoulli(rng, cfg.p_affine)) {
    const double rot = uniform(rng, -cfg.max_rotation_deg, cfg.max_rotation_deg);
    const double shear = uniform(rng, -cfg.max_shear, cfg.max_shear);
    const double scale = uniform(rng, cfg.min_scale, cfg.max_scale);
    const double tx = uniform(rng, -cfg.max_translate, cfg.max_translate) * img.width;
    const double ty = uniform(rng, -cfg.max_translate, cfg.max_translate) * img.height;
    img = affine(img, rot, shear, scale, tx, ty);
  }
  if (bernoulli(rng, cfg.p_morphology)) img = morphology(img, bernoulli(rng, 0.5));
  if (bernoulli(rng, cfg.p_brightness)) {
    const double c = 1.0 + uniform(rng, -cfg.max_contrast_delta, cfg.max_contrast_delta);
    const double b = uniform(rng, -cfg.max_brightness_delta, cfg.max_brightness_delta);
    img = brightness_contrast(img, c, b);
  }
  if (bernoulli(rng, cfg.p_gamma)) {
    // Log-uniform so that darkening and lightening are equally likely.
    const double g = std::exp(uniform(rng, std::log(cfg.min_gamma), std::log(cfg.max_gamma)));
    img = gamma_correct(img, g);
  }
  if (bernoulli(rng, cfg.p_elastic)) img = elastic(img, rng, cfg.elastic_alpha, cfg.elastic_cell);
  return img;
}

}  // namespace xscript::synth
