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

#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "doctest.h"
#include "xscript/corpus_stats.hpp"
#include "xscript/manifest.hpp"
#include "xscript/synth/augment.hpp"
#include "xscript/synth/corpus.hpp"
#include "xscript/synth/glyphs.hpp"
#include "xscript/synth/preprocess.hpp"
#include "xscript/synth/render.hpp"
#include "xscript/utf8.hpp"

using namespace xscript;
using namespace xscript::synth;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("xscript_test_synth_" + name);
  fs::remove_all(dir);
  return dir;
}

InkImage ramp(int h, int w) {
  InkImage img(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(y, x) = static_cast<float>((x * 7 + y * 3) % 11) / 10.0f;
  return img;
}

ScriptProfile profile_of(const ScriptSet& set, std::size_t i, const std::string& id) {
  ScriptProfile p = set.scripts[i];
  p.script_id = id;
  return p;
}

}  // namespace

TEST_CASE("overlap scripts reproduce the requested inventory structure") {
  const auto set = make_overlap_scripts(30, {1, 9, 0}, 5);
  REQUIRE(set.scripts.size() == 3);
  CHECK(set.universe.size() == 40);
  const auto part = stats::overlap_partition(
      {{"ara", set.scripts[0].inventory()}, {"urd", set.scripts[1].inventory()}, {"fas", set.scripts[2].inventory()}});
  CHECK(part.shared.size() == 30);
  CHECK(part.partially_shared.empty());
  CHECK(part.unique_per_script.at("ara").size() == 1);
  CHECK(part.unique_per_script.at("urd").size() == 9);
  CHECK(part.unique_per_script.at("fas").empty());
  for (const auto& s : set.scripts) {
    CHECK(std::is_sorted(s.glyph_ids.begin(), s.glyph_ids.end()));
    std::vector<int> ranked = s.frequency_rank;
    std::sort(ranked.begin(), ranked.end());
    CHECK(ranked == s.glyph_ids);
  }

  const auto same = make_overlap_scripts(5, {0, 0}, 1);
  CHECK(same.scripts[0].inventory() == same.scripts[1].inventory());
  CHECK(same.scripts[0].inventory().size() == 5);

  const auto again = make_overlap_scripts(30, {1, 9, 0}, 5);
  for (int g = 0; g < set.universe.size(); ++g) {
    CHECK(again.universe.glyphs[g].base == set.universe.glyphs[g].base);
    CHECK(again.universe.glyphs[g].decoration == set.universe.glyphs[g].decoration);
  }
  CHECK_THROWS_AS(make_overlap_scripts(0, {1, 1}, 1), ConfigError);
}

TEST_CASE("glyph code points") {
  CHECK(glyph_char(0) == kGlyphCodeBase);
  CHECK(glyph_id_of(glyph_char(17)) == 17);
  CHECK(glyph_id_of(U' ') == -1);
}

TEST_CASE("rendering is deterministic and glyphs are distinct") {
  const auto set = make_overlap_scripts(30, {1, 9, 0}, 3);
  RenderOptions opts;
  opts.height = 32;
  const std::u32string text = {glyph_char(1), glyph_char(4), U' ', glyph_char(30)};
  CHECK(render_line(text, set.universe, true, 99, opts) == render_line(text, set.universe, true, 99, opts));
  CHECK(render_line(text, set.universe, true, 99, opts).height == 32);
  CHECK(!(render_line(text, set.universe, true, 99, opts) == render_line(text, set.universe, true, 100, opts)));

  std::set<std::vector<float>> seen;
  for (int g = 0; g < set.universe.size(); ++g) seen.insert(render_glyph(set.universe, g, 42, 32).data);
  CHECK(static_cast<int>(seen.size()) == set.universe.size());

  // per-occurrence noise perturbs, the base form stays fixed
  const auto base = render_glyph(set.universe, 3, 42, 32);
  CHECK(render_glyph(set.universe, 3, 42, 32, 7) == render_glyph(set.universe, 3, 42, 32, 7));
  CHECK(!(render_glyph(set.universe, 3, 42, 32, 7) == base));

  const auto blank = render_line(U"", set.universe, false, 1, opts);
  CHECK(blank.width == opts.min_px_per_char);
  for (auto px : blank.pixels) CHECK(px == 255);

  CHECK_THROWS_AS(render_line(U"z", set.universe, false, 1, opts), DataError);
  CHECK_THROWS_AS(render_line(std::u32string(1, glyph_char(40)), set.universe, false, 1, opts), DataError);
}

TEST_CASE("writing direction changes the layout") {
  const auto set = make_overlap_scripts(6, {0}, 3);
  RenderOptions opts;
  opts.height = 24;
  opts.min_px_per_char = 0;
  const std::u32string ab = {glyph_char(0), glyph_char(1)};
  CHECK(render_line(ab, set.universe, true, 5, opts).width > 0);
  CHECK(render_line(ab, set.universe, true, 5, opts).height == 24);
  CHECK(render_line(ab, set.universe, true, 5, opts).width >= render_line(ab.substr(0, 1), set.universe, true, 5, opts).width);
  CHECK(!(render_line(ab, set.universe, true, 5, opts) == render_line(ab, set.universe, false, 5, opts)));
}

TEST_CASE("reverse labels") {
  CHECK(reverse_labels(U"abc", true) == U"cba");
  CHECK(reverse_labels(U"abc", false) == U"abc");
  CHECK(reverse_labels(U"abba", true) == U"abba");
  CHECK(reverse_labels(reverse_labels(U"xyz", true), true) == U"xyz");
}

TEST_CASE("preprocess examples") {
  GrayImage img(220, 800, 255);
  for (int x = 0; x < 800; x += 3) img.at(100, x) = 0;
  PreprocessOptions opts;
  opts.height = 110;
  auto out = preprocess(img, opts);
  CHECK(out.height == 110);
  CHECK(out.width == 400);

  GrayImage wide(110, 4000, 128);
  out = preprocess(wide, opts);
  CHECK(out.width == opts.max_width);

  GrayImage flat(37, 91, 51);
  out = preprocess(flat, opts);
  for (float v : out.data) CHECK(v == doctest::Approx(1.0f - 51.0f / 255.0f));

  GrayImage white(20, 20, 255);
  for (float v : preprocess(white, opts).data) CHECK(v == 0.0f);

  CHECK_THROWS_AS(preprocess(GrayImage(0, 10), opts), DataError);
  CHECK_THROWS_AS(preprocess(GrayImage(10, 0), opts), DataError);
}

TEST_CASE("fit to height is idempotent on conforming images") {
  PreprocessOptions opts;
  opts.height = 32;
  opts.max_width = 200;
  const auto img = ramp(32, 150);
  CHECK(fit_to_height(img, opts) == img);
  const auto once = fit_to_height(ramp(50, 400), opts);
  CHECK(once.height == 32);
  CHECK(once.width == 200);
  CHECK(fit_to_height(once, opts) == once);
}

TEST_CASE("augmentation") {
  const auto img = ramp(24, 80);
  CHECK(augment(img, 5, AugmentConfig::disabled()) == img);
  AugmentConfig cfg;
  CHECK(augment(img, 5, cfg) == augment(img, 5, cfg));

  AugmentConfig always = cfg;
  always.p_affine = always.p_morphology = always.p_brightness = always.p_gamma = always.p_elastic = 1.0;
  bool changed = false;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto out = augment(img, seed, seed % 2 ? always : cfg);
    REQUIRE(out.height == img.height);
    REQUIRE(out.width == img.width);
    for (float v : out.data) REQUIRE((v >= 0.0f && v <= 1.0f));
    changed = changed || !(out == img);
  }
  CHECK(changed);

  Rng rng(1);
  for (const auto& out : {affine(img, 2.0, 0.2, 1.1, 1.0, -1.0), morphology(img, true), morphology(img, false),
                          brightness_contrast(img, 1.2, 0.1), gamma_correct(img, 0.5), elastic(img, rng, 1.5, 8)}) {
    CHECK(out.height == img.height);
    CHECK(out.width == img.width);
  }
  CHECK(affine(img, 0.0, 0.0, 1.0, 0.0, 0.0) == img);
  CHECK(gamma_correct(img, 1.0) == img);
}

TEST_CASE("augment config round trips through JSON") {
  AugmentConfig c;
  c.p_gamma = 0.9;
  c.elastic_cell = 5;
  nlohmann::json j = c;
  const auto back = j.get<AugmentConfig>();
  CHECK(back.p_gamma == 0.9);
  CHECK(back.elastic_cell == 5);
}

TEST_CASE("split counts") {
  CHECK(split_counts(1000, {0.8, 0.1, 0.1}) == std::array<int, 3>{800, 100, 100});
  CHECK(split_counts(7, {0.8, 0.1, 0.1}) == std::array<int, 3>{7, 0, 0});
}

TEST_CASE("corpus text respects the profile") {
  const auto set = make_overlap_scripts(30, {1, 9, 0}, 2);
  auto p = profile_of(set, 1, "urd");
  p.line_length_range = {4, 10};
  p.writer_styles = 10;
  CorpusOptions opts;
  opts.n_lines = 1000;
  opts.writer_disjoint = true;
  const auto lines = sample_corpus_text(p, opts, 11);
  REQUIRE(lines.size() == 1000);
  std::array<int, 3> per_split{};
  std::array<std::set<std::uint64_t>, 3> writers;
  const auto inv = p.inventory();
  for (const auto& s : lines) {
    const auto k = static_cast<std::size_t>(s.split);
    ++per_split[k];
    writers[k].insert(s.style_seed);
    int glyphs = 0;
    for (char32_t c : s.transcript) {
      if (c == kWordSeparator) continue;
      CHECK(inv.count(c) == 1);
      ++glyphs;
    }
    CHECK(glyphs >= 4);
    CHECK(glyphs <= 10);
    CHECK(s.transcript.front() != kWordSeparator);
    CHECK(s.transcript.back() != kWordSeparator);
  }
  CHECK(per_split == std::array<int, 3>{800, 100, 100});
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b)
      for (auto w : writers[a]) CHECK(writers[b].count(w) == 0);

  p.writer_styles = 2;
  CHECK_THROWS_AS(sample_corpus_text(p, opts, 11), ConfigError);
  opts.split_fractions = {0.5, 0.3, 0.3};
  CHECK_THROWS_AS(sample_corpus_text(p, opts, 11), ConfigError);
}

TEST_CASE("duplication injection is recovered by diversity statistics") {
  const auto set = make_overlap_scripts(30, {1, 9, 0}, 2);
  auto p = profile_of(set, 1, "urd");
  p.line_length_range = {4, 10};
  CorpusOptions opts;
  opts.n_lines = 1000;
  opts.split_fractions = {1.0, 0.0, 0.0};
  opts.duplication = 0.33;
  std::vector<std::string> text;
  for (const auto& s : sample_corpus_text(p, opts, 3)) text.push_back(utf8_encode(s.transcript));
  const auto st = stats::diversity_stats(text);
  CHECK(std::fabs(st.duplication_ratio - 0.33) <= 0.03);

  opts.duplication = 0.0;
  text.clear();
  for (const auto& s : sample_corpus_text(p, opts, 3)) text.push_back(utf8_encode(s.transcript));
  CHECK(stats::diversity_stats(text).duplication_ratio < 0.03);
}

TEST_CASE("zipf sampling follows the configured ranking") {
  const std::vector<int> ids{7, 3, 9, 1, 0, 5, 2, 8, 6, 4};
  const ZipfSampler z(ids, 1.0);
  double total = 0.0;
  for (std::size_t r = 0; r < ids.size(); ++r) {
    total += z.probability(r);
    if (r) CHECK(z.probability(r) < z.probability(r - 1));
  }
  CHECK(total == doctest::Approx(1.0));
  CHECK(z.probability(0) / z.probability(1) == doctest::Approx(2.0));

  Rng rng(9);
  std::map<int, int> counts;
  for (int i = 0; i < 50000; ++i) ++counts[z(rng)];
  for (std::size_t r = 1; r < ids.size(); ++r) CHECK(counts[ids[r]] < counts[ids[r - 1]]);
  CHECK_THROWS_AS(ZipfSampler({}, 1.0), ConfigError);
}

TEST_CASE("pgm round trip") {
  const auto dir = scratch("pgm");
  fs::create_directories(dir);
  GrayImage img(3, 5);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 17);
  write_pgm(img, dir / "a.pgm");
  CHECK(read_pgm(dir / "a.pgm") == img);
  {
    std::ofstream bad(dir / "b.pgm", std::ios::binary);
    bad << "P5\n3 5\n255\n" << "xx";
  }
  CHECK_THROWS_AS(read_pgm(dir / "b.pgm"), DataError);
  fs::remove_all(dir);
}

TEST_CASE("benchmark generation is reproducible") {
  const auto cfg = parse_datagen_config(nlohmann::json::parse(R"({
    "seed": 4, "n_shared": 6, "uniques": [1, 2], "render_height": 16,
    "scripts": [
      {"id": "a", "n_lines": 20, "line_length": [2, 4], "writer_styles": 3},
      {"id": "b", "n_lines": 30, "line_length": [2, 4], "writer_styles": 10, "writer_disjoint": true, "rtl": false}
    ]})"));
  const auto d1 = scratch("gen1"), d2 = scratch("gen2");
  const auto g1 = generate_benchmark(cfg, d1);
  const auto g2 = generate_benchmark(cfg, d2);
  REQUIRE(g1.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(slurp(g1[i].manifest) == slurp(g2[i].manifest));
    const auto m = read_manifest(g1[i].manifest);
    for (const auto& row : m.rows) {
      CHECK(slurp(m.resolve(row)) == slurp(d2 / g1[i].id / row.image_path));
      CHECK(read_pgm(m.resolve(row)).height == 16);
    }
  }
  CHECK(read_manifest(g1[0].manifest).rows.size() == 20);
  CHECK(read_manifest(g1[1].manifest).rows_in(Split::kTest).size() == 3);
  CHECK(!g1[1].rtl);
  fs::remove_all(d1);
  fs::remove_all(d2);

  CHECK_THROWS_AS(parse_datagen_config(nlohmann::json::parse(R"({"uniques": [1], "scripts": [{"id": "a", "bogus": 1}]})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_datagen_config(nlohmann::json::parse(R"({"uniques": [1, 2], "scripts": [{"id": "a"}]})")),
                  ConfigError);
}
