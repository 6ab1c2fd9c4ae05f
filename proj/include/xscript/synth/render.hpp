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

#include <cstdint>
#include <string>

#include "xscript/synth/glyphs.hpp"
#include "xscript/synth/image.hpp"

namespace xscript::synth {

// Writer parameters derived from a style seed.
struct WriterStyle {
  double slant = 0.0;        // horizontal shift per unit height
  double thickness = 2.0;    // stroke width in pixels
  double jitter = 0.03;      // control-point noise, fraction of height
  double width_scale = 1.0;  // horizontal stretch of glyph bodies
  double darkness = 0.95;    // ink intensity in (0, 1]
};

WriterStyle make_writer_style(std::uint64_t style_seed, int height);

struct RenderOptions {
  int height = 48;
  // Lines are padded to at least (min_px_per_char * (length + 1)) pixels so
  // that a stride-8 trunk yields enough time steps for CTC.
  int min_px_per_char = 16;
};

// Coverage bitmap of one glyph; depends only on (glyph id, style seed,
// height, instance), never on the script that uses the glyph. The writer's
// form of a glyph is fixed by the style seed; a nonzero `instance` adds
// smaller per-occurrence noise on top of it.
InkImage render_glyph(const GlyphUniverse& universe, int glyph_id, std::uint64_t style_seed, int height,
                      std::uint64_t instance = 0);

// Composes the transcript along the writing direction (right to left when
// `rtl`) with seeded kerning and baseline jitter. Throws DataError for
// characters outside the universe.
GrayImage render_line(std::u32string_view transcript, const GlyphUniverse& universe, bool rtl,
                      std::uint64_t style_seed, const RenderOptions& opts);

// Reversed copy when rtl, otherwise unchanged.
std::u32string reverse_labels(std::u32string_view transcript, bool rtl);

}  // namespace xscript::synth
