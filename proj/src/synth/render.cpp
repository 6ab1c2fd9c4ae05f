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

#include "xscript/synth/render.hpp"

#include <algorithm>
#include <cmath>
#include <string_view>

#include "xscript/common.hpp"

namespace xscript::synth {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kAboveY = 0.15;
constexpr double kBelowY = 0.9;

struct Segment {
  double x0, y0, x1, y1;
};

struct Disc {
  double x, y, r;
};

double segment_distance(const Segment& s, double px, double py) {
  const double dx = s.x1 - s.x0;
  const double dy = s.y1 - s.y0;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - s.x0) * dx + (py - s.y0) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = s.x0 + t * dx - px;
  const double ey = s.y0 + t * dy - py;
  return std::sqrt(ex * ex + ey * ey);
}

// Decoration geometry in glyph-relative coordinates (x in body widths).
void decoration_parts(Decoration d, double body_px, double height, std::vector<Polyline>& strokes,
                      std::vector<Point>& dots) {
  const double gap = std::max(0.22, 3.0 / std::max(body_px, 1.0));
  switch (d) {
    case Decoration::kNone:
    case Decoration::kCount:
      break;
    case Decoration::kDotAbove:
      dots.push_back({0.5, kAboveY});
      break;
    case Decoration::kTwoDotsAbove:
      dots.push_back({0.5 - gap / 2, kAboveY});
      dots.push_back({0.5 + gap / 2, kAboveY});
      break;
    case Decoration::kThreeDotsAbove:
      dots.push_back({0.5 - gap / 2, kAboveY + 0.04});
      dots.push_back({0.5 + gap / 2, kAboveY + 0.04});
      dots.push_back({0.5, kAboveY - 0.06});
      break;
    case Decoration::kDotBelow:
      dots.push_back({0.5, kBelowY});
      break;
    case Decoration::kTwoDotsBelow:
      dots.push_back({0.5 - gap / 2, kBelowY});
      dots.push_back({0.5 + gap / 2, kBelowY});
      break;
    case Decoration::kThreeDotsBelow:
      dots.push_back({0.5 - gap / 2, kBelowY - 0.04});
      dots.push_back({0.5 + gap / 2, kBelowY - 0.04});
      dots.push_back({0.5, kBelowY + 0.05});
      break;
    case Decoration::kBarAbove:
      strokes.push_back({{0.25, kAboveY}, {0.75, kAboveY - 0.03}});
      break;
    case Decoration::kRingAbove: {
      Polyline ring;
      const double r = 0.06;
      const double rx = r * height / std::max(body_px, 1.0);
      for (int k = 0; k <= 8; ++k) {
        const double a = 2.0 * kPi * k / 8.0;
        ring.push_back({0.5 + rx * std::cos(a), kAboveY + r * std::sin(a)});
      }
      strokes.push_back(std::move(ring));
      break;
    }
  }
}

std::uint64_t text_hash(std::u32string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char32_t c : s) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace

WriterStyle make_writer_style(std::uint64_t style_seed, int height) {
  Rng rng = make_rng(style_seed, "writer_style");
  WriterStyle s;
  const double unit = static_cast<double>(height) / 32.0;
  s.slant = uniform(rng, -0.4, 0.4);
  s.thickness = unit * uniform(rng, 1.3, 2.8);
  s.jitter = uniform(rng, 0.03, 0.07);
  s.width_scale = uniform(rng, 0.8, 1.25);
  s.darkness = uniform(rng, 0.8, 1.0);
  return s;
}

InkImage render_glyph(const GlyphUniverse& universe, int glyph_id, std::uint64_t style_seed, int height,
                      std::uint64_t instance) {
  if (glyph_id < 0 || glyph_id >= universe.size()) throw DataError("render_glyph: unknown glyph id");
  if (height < 4) throw ConfigError("render_glyph: height must be >= 4");
  const GlyphShape& g = universe.glyphs[static_cast<std::size_t>(glyph_id)];
  const WriterStyle style = make_writer_style(style_seed, height);
  Rng rng = make_rng(style_seed, "glyph_jitter", static_cast<std::uint64_t>(glyph_id));
  Rng noise = make_rng(style_seed ^ mix64(instance), "instance_jitter", static_cast<std::uint64_t>(glyph_id));
  const double instance_jitter = instance == 0 ? 0.0 : 0.5 * style.jitter;
  const double h = static_cast<double>(height);
  const double body = std::max(3.0, g.width * h * style.width_scale);

  std::vector<Polyline> strokes = g.strokes;
  std::vector<Point> dot_points;
  decoration_parts(g.decoration, body, h, strokes, dot_points);

  // Glyph coordinates -> pixels, before the horizontal offset.
  auto to_px = [&](const Point& p, bool jitter) {
    double jx = 0.0, jy = 0.0;
    if (jitter) {
      jx = uniform(rng, -style.jitter, style.jitter) * h;
      jy = uniform(rng, -style.jitter, style.jitter) * h;
      if (instance_jitter > 0.0) {
        jx += uniform(noise, -instance_jitter, instance_jitter) * h;
        jy += uniform(noise, -instance_jitter, instance_jitter) * h;
      }
    }
    const double y = p.y * h + jy;
    const double x = p.x * body + style.slant * (0.6 * h - y) + jx;
    return Point{x, y};
  };

  std::vector<Segment> segments;
  for (const auto& line : strokes) {
    std::vector<Point> pts;
    for (const auto& p : line) pts.push_back(to_px(p, true));
    for (std::size_t k = 1; k < pts.size(); ++k) {
      segments.push_back({pts[k - 1].x, pts[k - 1].y, pts[k].x, pts[k].y});
    }
    if (pts.size() == 1) segments.push_back({pts[0].x, pts[0].y, pts[0].x, pts[0].y});
  }
  std::vector<Disc> discs;
  for (const auto& p : dot_points) {
    const Point q = to_px(p, false);
    discs.push_back({q.x, q.y, 0.75 * style.thickness + 0.35});
  }

  double lo = 1e9, hi = -1e9;
  for (const auto& s : segments) {
    lo = std::min({lo, s.x0, s.x1});
    hi = std::max({hi, s.x0, s.x1});
  }
  for (const auto& d : discs) {
    lo = std::min(lo, d.x - d.r);
    hi = std::max(hi, d.x + d.r);
  }
  const double margin = style.thickness / 2.0 + 1.0;
  const double shift = margin - lo;
  const int width = std::max(1, static_cast<int>(std::ceil(hi - lo + 2.0 * margin)));

  InkImage img(height, width);
  const double half = style.thickness / 2.0;
  for (int y = 0; y < height; ++y) {
    const double py = y + 0.5;
    for (int x = 0; x < width; ++x) {
      const double px = x + 0.5 - shift;
      double cov = 0.0;
      for (const auto& s : segments) {
        cov = std::max(cov, std::clamp(half + 0.5 - segment_distance(s, px, py), 0.0, 1.0));
        if (cov >= 1.0) break;
      }
      for (const auto& d : discs) {
        const double dist = std::hypot(px - d.x, py - d.y);
        cov = std::max(cov, std::clamp(d.r + 0.5 - dist, 0.0, 1.0));
      }
      img.at(y, x) = static_cast<float>(cov * style.darkness);
    }
  }
  return img;
}

GrayImage render_line(std::u32string_view transcript, const GlyphUniverse& universe, bool rtl,
                      std::uint64_t style_seed, const RenderOptions& opts) {
  const int h = opts.height;
  Rng layout = make_rng(style_seed ^ text_hash(transcript), "layout");
  const int pad = std::max(2, h / 8);
  const int word_gap_base = std::max(3, static_cast<int>(std::lround(0.3 * h)));
  const int max_shift = std::max(1, h / 32);

  struct Placed {
    InkImage glyph;
    int x;
    int dy;
  };
  std::vector<Placed> placed;
  const std::u32string visual = reverse_labels(transcript, rtl);
  const std::uint64_t line_key = text_hash(transcript);
  int x = pad;
  std::uint64_t position = 0;
  for (char32_t c : visual) {
    ++position;
    if (c == kWordSeparator) {
      x += word_gap_base + static_cast<int>(uniform_index(layout, static_cast<std::uint64_t>(h / 8 + 1)));
      continue;
    }
    const int id = glyph_id_of(c);
    if (id < 0 || id >= universe.size()) throw DataError("render_line: character outside the glyph universe");
    InkImage g = render_glyph(universe, id, style_seed, h, mix64(line_key + position));
    const int dy = static_cast<int>(uniform_index(layout, static_cast<std::uint64_t>(2 * max_shift + 1))) - max_shift;
    const int w = g.width;
    placed.push_back({std::move(g), x, dy});
    // Slightly negative kerning lets neighbouring strokes touch.
    x += w - 2 + static_cast<int>(uniform_index(layout, 4));
  }
  int width = x + pad;
  const int min_width = opts.min_px_per_char * (static_cast<int>(transcript.size()) + 1);
  int offset = 0;
  if (width < min_width) {
    // Extra space goes after the text in writing order.
    if (rtl) offset = min_width - width;
    width = min_width;
  }

  InkImage ink(h, width);
  for (const auto& p : placed) {
    for (int y = 0; y < h; ++y) {
      const int ty = y + p.dy;
      if (ty < 0 || ty >= h) continue;
      for (int gx = 0; gx < p.glyph.width; ++gx) {
        const int tx = p.x + gx + offset;
        if (tx < 0 || tx >= width) continue;
        ink.at(ty, tx) = std::max(ink.at(ty, tx), p.glyph.at(y, gx));
      }
    }
  }
  GrayImage out(h, width);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - static_cast<double>(ink.data[i]))));
  }
  return out;
}

std::u32string reverse_labels(std::u32string_view transcript, bool rtl) {
  std::u32string out(transcript);
  if (rtl) std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace xscript::synth
