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

#include "xscript/synth/glyphs.hpp"

#include <algorithm>
#include <numeric>

#include "xscript/common.hpp"

namespace xscript::synth {

namespace {

constexpr double kVariantShareShared = 0.35;
constexpr double kVariantShareUnique = 0.7;

struct Base {
  double width = 0.6;
  std::vector<Polyline> strokes;
};

Base make_base(Rng& rng) {
  Base b;
  b.width = uniform(rng, 0.45, 0.85);
  const int n_strokes = 1 + static_cast<int>(uniform_index(rng, 2));
  const bool ascender = bernoulli(rng, 0.3);
  const bool descender = bernoulli(rng, 0.25);
  for (int s = 0; s < n_strokes; ++s) {
    Polyline line;
    const int n_points = 3 + static_cast<int>(uniform_index(rng, 3));
    for (int k = 0; k < n_points; ++k) {
      Point p{uniform(rng, 0.0, 1.0), uniform(rng, 0.35, 0.78)};
      line.push_back(p);
    }
    if (s == 0 && ascender) line.front().y = uniform(rng, 0.12, 0.22);
    if (s == n_strokes - 1 && descender) line.back().y = uniform(rng, 0.84, 0.92);
    b.strokes.push_back(std::move(line));
  }
  return b;
}

Decoration random_decoration(Rng& rng) {
  if (bernoulli(rng, 0.55)) return Decoration::kNone;
  const auto n = static_cast<std::uint64_t>(Decoration::kCount) - 1;
  return static_cast<Decoration>(1 + uniform_index(rng, n));
}

class UniverseBuilder {
 public:
  explicit UniverseBuilder(Rng& rng) : rng_(rng) {}

  void add_fresh() {
    bases_.push_back(make_base(rng_));
    used_.emplace_back();
    add_glyph(static_cast<int>(bases_.size()) - 1, random_decoration(rng_));
  }

  // Returns false when no base in [0, limit) has a free decoration.
  bool add_variant(int base_limit) {
    std::vector<int> candidates;
    for (int b = 0; b < std::min(base_limit, static_cast<int>(bases_.size())); ++b) {
      if (used_[static_cast<std::size_t>(b)].size() < static_cast<std::size_t>(Decoration::kCount)) {
        candidates.push_back(b);
      }
    }
    if (candidates.empty()) return false;
    const int b = candidates[uniform_index(rng_, candidates.size())];
    std::vector<Decoration> free;
    for (int d = 0; d < static_cast<int>(Decoration::kCount); ++d) {
      if (!used_[static_cast<std::size_t>(b)].count(static_cast<Decoration>(d))) free.push_back(static_cast<Decoration>(d));
    }
    add_glyph(b, free[uniform_index(rng_, free.size())]);
    return true;
  }

  int base_count() const { return static_cast<int>(bases_.size()); }
  GlyphUniverse finish() { return std::move(universe_); }

 private:
  void add_glyph(int base, Decoration d) {
    used_[static_cast<std::size_t>(base)].insert(d);
    const Base& b = bases_[static_cast<std::size_t>(base)];
    universe_.glyphs.push_back(GlyphShape{base, d, b.width, b.strokes});
  }

  Rng& rng_;
  std::vector<Base> bases_;
  std::vector<std::set<Decoration>> used_;
  GlyphUniverse universe_;
};

}  // namespace

char32_t glyph_char(int glyph_id) {
  if (glyph_id < 0 || glyph_id > 0x1000) throw ConfigError("glyph id out of range");
  return kGlyphCodeBase + static_cast<char32_t>(glyph_id);
}

int glyph_id_of(char32_t c) {
  if (c < kGlyphCodeBase || c > kGlyphCodeBase + 0x1000) return -1;
  return static_cast<int>(c - kGlyphCodeBase);
}

std::set<char32_t> ScriptProfile::inventory() const {
  std::set<char32_t> out;
  for (int g : glyph_ids) out.insert(glyph_char(g));
  return out;
}

ScriptSet make_overlap_scripts(int n_shared, const std::vector<int>& uniques, std::uint64_t seed) {
  if (n_shared < 1) throw ConfigError("make_overlap_scripts: n_shared must be >= 1");
  if (uniques.empty()) throw ConfigError("make_overlap_scripts: at least one script required");
  for (int u : uniques) {
    if (u < 0) throw ConfigError("make_overlap_scripts: negative unique count");
  }

  Rng rng = make_rng(seed, "glyphs");
  UniverseBuilder builder(rng);
  for (int i = 0; i < n_shared; ++i) {
    if (i >= 4 && bernoulli(rng, kVariantShareShared) && builder.add_variant(builder.base_count())) continue;
    builder.add_fresh();
  }
  const int shared_bases = builder.base_count();
  for (int u : uniques) {
    for (int k = 0; k < u; ++k) {
      if (bernoulli(rng, kVariantShareUnique) && builder.add_variant(shared_bases)) continue;
      builder.add_fresh();
    }
  }

  ScriptSet set;
  set.universe = builder.finish();
  int next = n_shared;
  for (std::size_t s = 0; s < uniques.size(); ++s) {
    ScriptProfile p;
    p.script_id = "script" + std::to_string(s);
    p.glyph_ids.resize(static_cast<std::size_t>(n_shared));
    std::iota(p.glyph_ids.begin(), p.glyph_ids.end(), 0);
    for (int k = 0; k < uniques[s]; ++k) p.glyph_ids.push_back(next++);
    p.frequency_rank = p.glyph_ids;
    Rng order = make_rng(seed, "frequency_rank", s);
    shuffle(p.frequency_rank.begin(), p.frequency_rank.end(), order);
    set.scripts.push_back(std::move(p));
  }
  return set;
}

}  // namespace xscript::synth
