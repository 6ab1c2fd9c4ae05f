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

// Seeded augmentation of ink images. Every operator preserves the image
// dimensions and keeps values in [0, 1].

#pragma once

#include <cstdint>

#include "json.hpp"
#include "xscript/common.hpp"
#include "xscript/synth/image.hpp"

namespace xscript::synth {

struct AugmentConfig {
  double p_affine = 0.5;
  double p_morphology = 0.25;
  double p_brightness = 0.5;
  double p_gamma = 0.3;
  double p_elastic = 0.3;
  double max_rotation_deg = 2.0;
  double max_shear = 0.2;
  double min_scale = 0.9;
  double max_scale = 1.1;
  double max_translate = 0.02;  // fraction of each dimension
  double max_contrast_delta = 0.2;
  double max_brightness_delta = 0.1;
  double min_gamma = 0.5;
  double max_gamma = 2.0;
  double elastic_alpha = 1.5;  // peak displacement in pixels
  int elastic_cell = 8;        // control-grid spacing in pixels

  static AugmentConfig disabled();
};

void to_json(nlohmann::json& j, const AugmentConfig& c);
void from_json(const nlohmann::json& j, AugmentConfig& c);

// Applies each operator with its probability, in a fixed order.
InkImage augment(const InkImage& image, std::uint64_t seed, const AugmentConfig& cfg);

// Individual operators.
InkImage affine(const InkImage& image, double rotation_deg, double shear, double scale, double tx, double ty);
InkImage morphology(const InkImage& image, bool dilate);
InkImage brightness_contrast(const InkImage& image, double contrast, double brightness);
InkImage gamma_correct(const InkImage& image, double gamma);
InkImage elastic(const InkImage& image, Rng& rng, double alpha, int cell);

}  // namespace xscript::synth
