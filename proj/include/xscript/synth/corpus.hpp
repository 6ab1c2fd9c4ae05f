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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "xscript/common.hpp"
#include "xscript/manifest.hpp"
#include "xscript/synth/glyphs.hpp"
#include "xscript/synth/render.hpp"

namespace xscript::synth {

struct TextLineSample {
  GrayImage image;
  std::u32string transcript;  // logical order
  std::string script_id;
  Split split = Split::kTrain;
  std::uint64_t style_seed = 0;
};

struct CorpusOptions {
  int n_lines = 1000;
  std::array<double, 3> split_fractions{0.8, 0.1, 0.1};  // train, val, test
  // Fraction of lines in every split that repeat the transcript of another
  // line of the same split (rendered by a possibly different writer).
  double duplication = 0.0;
  // Size of the script's word list; 0 draws every word afresh.
  int lexicon_size = 0;
  // Partition the writer styles across splits (train/val/test never share a
  // writer) in the same proportions as the lines.
  bool writer_disjoint = false;
  RenderOptions render;
};

// Zipf draw over the profile's frequency ranking: P(rank r) ~ 1 / r^s.
class ZipfSampler {
 public:
  ZipfSampler(std::vector<int> ranked_ids, double exponent);
  int operator()(Rng& rng) const;
  double probability(std::size_t rank) const;

 private:
  std::vector<int> ids_;
  std::vector<double> cumulative_;
};

// Per-split row counts: val and test take floor(n * fraction), train the rest.
std::array<int, 3> split_counts(int n_lines, const std::array<double, 3>& fractions);

// Transcripts, splits and style seeds for every line (no rendering).
std::vector<TextLineSample> sample_corpus_text(const ScriptProfile& profile, const CorpusOptions& opts,
                                               std::uint64_t seed);

// Full generation including rendering. Deterministic under `seed`.
std::vector<TextLineSample> generate_corpus(const ScriptProfile& profile, const GlyphUniverse& universe,
                                            const CorpusOptions& opts, std::uint64_t seed);

// Writes images under <dir>/images and <dir>/manifest.tsv; returns the
// manifest path.
std::filesystem::path write_corpus(const std::vector<TextLineSample>& samples, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Benchmark description consumed by the `gen-data` command.

struct ScriptSpec {
  std::string id;
  bool rtl = true;
  double zipf_exponent = 1.0;
  std::pair<int, int> line_length{6, 14};
  std::pair<int, int> word_length{2, 6};
  int writer_styles = 8;
  CorpusOptions corpus;
};

struct DataGenConfig {
  std::uint64_t seed = 1;
  int n_shared = 30;
  int render_height = 48;
  std::vector<int> uniques;
  std::vector<ScriptSpec> scripts;  // one per entry of `uniques`
};

DataGenConfig parse_datagen_config(const nlohmann::json& j);

struct GeneratedDataset {
  std::string id;
  std::filesystem::path manifest;
  bool rtl = true;
};

// Generates every script of the benchmark into <out>/<script id>/.
std::vector<GeneratedDataset> generate_benchmark(const DataGenConfig& cfg, const std::filesystem::path& out);

}  // namespace xscript::synth
