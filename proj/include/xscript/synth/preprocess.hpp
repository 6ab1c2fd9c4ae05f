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

#pragma once

#include "xscript/synth/image.hpp"

namespace xscript::synth {

struct PreprocessOptions {
  int height = 48;
  int max_width = 1450;
};

// Gray -> ink (1 - p / 255), then bilinear resize to `height` keeping the
// aspect ratio; the width is clamped to `max_width`. Throws DataError for
// empty images.
InkImage preprocess(const GrayImage& image, const PreprocessOptions& opts);

// Same geometry rule on an ink image; an image already at the target size is
// returned unchanged.
InkImage fit_to_height(const InkImage& image, const PreprocessOptions& opts);

// Bilinear resampling (pixel-center aligned, edge clamped).
InkImage resize_bilinear(const InkImage& image, int height, int width);

}  // namespace xscript::synth
