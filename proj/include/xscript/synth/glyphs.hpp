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

// Procedural glyph universe and synthetic script profiles.
//
// A glyph is a base stroke skeleton plus a decoration (dots above/below, a
// small bar or ring). Several glyphs can share one base and differ only in
// decoration, which is what makes them confusable.

#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace xscript::synth {

struct Point {
  double x = 0.0;  // fraction of the glyph body width
  double y = 0.0;  // fraction of the line height, 0 = top
};

using Polyline = std::vector<Point>;

enum class Decoration : int {
  kNone = 0,
  kDotAbove,
  kTwoDotsAbove,
  kThreeDotsAbove,
  kDotBelow,
  kTwoDotsBelow,
  kThreeDotsBelow,
  kBarAbove,
  kRingAbove,
  kCount
};

struct GlyphShape {
  int base = 0;  // index of the base skeleton
  Decoration decoration = Decoration::kNone;
  double width = 0.6;  // body width as a fraction of the line height
  std::vector<Polyline> strokes;
};

// Glyph id g is written as the code point kGlyphCodeBase + g; word
// separators are ASCII spaces.
inline constexpr char32_t kGlyphCodeBase = 0x0100;
inline constexpr char32_t kWordSeparator = U' ';

char32_t glyph_char(int glyph_id);
int glyph_id_of(char32_t c);  // -1 for non-glyph characters

struct GlyphUniverse {
  std::vector<GlyphShape> glyphs;

  int size() const { return static_cast<int>(glyphs.size()); }
};

struct ScriptProfile {
  std::string script_id;
  std::vector<int> glyph_ids;       // sorted inventory
  std::vector<int> frequency_rank;  // glyph ids from most to least frequent
  double zipf_exponent = 1.0;
  std::pair<int, int> line_length_range{6, 14};  // characters, spaces excluded
  std::pair<int, int> word_length_range{2, 6};
  int writer_styles = 8;
  bool rtl = true;

  std::set<char32_t> inventory() const;  // glyph characters only
};

struct ScriptSet {
  GlyphUniverse universe;
  std::vector<ScriptProfile> scripts;
};

// Universe of n_shared + sum(uniques) glyphs. Glyphs [0, n_shared) belong to
// every script; script i additionally owns the next uniques[i] glyphs. A
// share of glyphs are decoration variants of other glyphs' bases; unique
// glyphs preferentially vary shared bases. Deterministic under `seed`.
// Throws ConfigError when n_shared < 1 or fewer than one script is requested.
ScriptSet make_overlap_scripts(int n_shared, const std::vector<int>& uniques, std::uint64_t seed);

}  // namespace xscript::synth
