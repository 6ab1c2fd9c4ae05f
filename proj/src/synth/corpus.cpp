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

#include "xscript/synth/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <set>

#include "xscript/common.hpp"

namespace xscript::synth {

namespace {

constexpr int kUniqueRetries = 200;

void check_options(const CorpusOptions& o) {
  if (o.n_lines < 1) throw ConfigError("corpus: n_lines must be >= 1");
  double sum = 0.0;
  for (double f : o.split_fractions) {
    if (f < 0.0) throw ConfigError("corpus: negative split fraction");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("corpus: split fractions must sum to 1");
  if (o.duplication < 0.0 || o.duplication >= 1.0) throw ConfigError("corpus: duplication must lie in [0, 1)");
  if (o.lexicon_size < 0) throw ConfigError("corpus: lexicon_size must be >= 0");
}

void check_profile(const ScriptProfile& p) {
  if (p.glyph_ids.empty()) throw ConfigError("script '" + p.script_id + "' has an empty inventory");
  if (p.line_length_range.first < 1 || p.line_length_range.first > p.line_length_range.second) {
    throw ConfigError("script '" + p.script_id + "': invalid line length range");
  }
  if (p.word_length_range.first < 1 || p.word_length_range.first > p.word_length_range.second) {
    throw ConfigError("script '" + p.script_id + "': invalid word length range");
  }
  if (p.writer_styles < 1) throw ConfigError("script '" + p.script_id + "': writer_styles must be >= 1");
  if (p.zipf_exponent <= 0.0) throw ConfigError("script '" + p.script_id + "': zipf exponent must be > 0");
}

int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

class TextSource {
 public:
  TextSource(const ScriptProfile& p, int lexicon_size, std::uint64_t seed)
      : profile_(p), chars_(p.frequency_rank, p.zipf_exponent), rng_(make_rng(seed, "text", 0)) {
    Rng lex = make_rng(seed, "lexicon");
    for (int i = 0; i < lexicon_size; ++i) lexicon_.push_back(fresh_word(lex));
    if (!lexicon_.empty()) {
      std::vector<int> idx(lexicon_.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
      words_ = std::make_unique<ZipfSampler>(std::move(idx), 1.0);
    }
  }

  std::u32string line() {
    const int target = uniform_int(rng_, profile_.line_length_range.first, profile_.line_length_range.second);
    std::u32string out;
    int glyphs = 0;
    while (glyphs < target) {
      std::u32string w = lexicon_.empty() ? fresh_word(rng_) : lexicon_[static_cast<std::size_t>((*words_)(rng_))];
      const int room = target - glyphs;
      if (static_cast<int>(w.size()) > room) w.resize(static_cast<std::size_t>(room));
      if (!out.empty()) out.push_back(kWordSeparator);
      out += w;
      glyphs += static_cast<int>(w.size());
    }
    return out;
  }

  Rng& rng() { return rng_; }

 private:
  std::u32string fresh_word(Rng& rng) const {
    const int len = uniform_int(rng, profile_.word_length_range.first, profile_.word_length_range.second);
    std::u32string w;
    for (int i = 0; i < len; ++i) w.push_back(glyph_char(chars_(rng)));
    return w;
  }

  const ScriptProfile& profile_;
  ZipfSampler chars_;
  Rng rng_;
  std::vector<std::u32string> lexicon_;
  std::unique_ptr<ZipfSampler> words_;
};

template <typename T>
T json_get(const nlohmann::json& j, const char* key, T def) {
  return j.contains(key) ? j.at(key).get<T>() : def;
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : keys) ok = ok || item.key() == k;
    if (!ok) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

}  // namespace

ZipfSampler::ZipfSampler(std::vector<int> ranked_ids, double exponent) : ids_(std::move(ranked_ids)) {
  if (ids_.empty()) throw ConfigError("zipf sampler needs at least one id");
  double acc = 0.0;
  for (std::size_t r = 0; r < ids_.size(); ++r) {
    acc += 1.0 / std::pow(static_cast<double>(r + 1), exponent);
    cumulative_.push_back(acc);
  }
  for (auto& c : cumulative_) c /= acc;
  cumulative_.back() = 1.0;
}

int ZipfSampler::operator()(Rng& rng) const {
  const double u = uniform(rng, 0.0, 1.0);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return ids_[static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                                 static_cast<std::ptrdiff_t>(ids_.size()) - 1))];
}

double ZipfSampler::probability(std::size_t rank) const {
  return rank == 0 ? cumulative_[0] : cumulative_[rank] - cumulative_[rank - 1];
}

std::array<int, 3> split_counts(int n_lines, const std::array<double, 3>& fractions) {
  const int val = static_cast<int>(std::floor(n_lines * fractions[1] + 1e-9));
  const int test = static_cast<int>(std::floor(n_lines * fractions[2] + 1e-9));
  return {n_lines - val - test, val, test};
}

std::vector<TextLineSample> sample_corpus_text(const ScriptProfile& profile, const CorpusOptions& opts,
                                               std::uint64_t seed) {
  check_options(opts);
  check_profile(profile);
  TextSource source(profile, opts.lexicon_size, seed);
  Rng dup_rng = make_rng(seed, "duplication");
  Rng writer_rng = make_rng(seed, "writers");
  const auto counts = split_counts(opts.n_lines, opts.split_fractions);
  // Writer range [first, first + count) per split.
  std::array<std::pair<int, int>, 3> writers{};
  writers.fill({0, profile.writer_styles});
  if (opts.writer_disjoint) {
    const auto w = split_counts(profile.writer_styles, opts.split_fractions);
    int first = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      if (counts[s] > 0 && w[s] < 1) {
        throw ConfigError("script '" + profile.script_id + "': too few writer styles for writer-disjoint splits");
      }
      writers[s] = {first, w[s]};
      first += w[s];
    }
  }
  std::set<std::u32string> seen;
  std::vector<TextLineSample> out;
  for (int s = 0; s < 3; ++s) {
    const int count = counts[static_cast<std::size_t>(s)];
    const int dups = static_cast<int>(std::lround(opts.duplication * count));
    const int bases = count - dups;
    std::vector<std::u32string> lines;
    for (int i = 0; i < bases; ++i) {
      std::u32string t = source.line();
      for (int r = 0; r < kUniqueRetries && seen.count(t); ++r) t = source.line();
      seen.insert(t);
      lines.push_back(std::move(t));
    }
    for (int i = 0; i < dups && bases > 0; ++i) {
      lines.push_back(lines[uniform_index(dup_rng, static_cast<std::uint64_t>(bases))]);
    }
    shuffle(lines.begin(), lines.end(), dup_rng);
    for (auto& t : lines) {
      TextLineSample sample;
      sample.transcript = std::move(t);
      sample.script_id = profile.script_id;
      sample.split = static_cast<Split>(s);
      const auto [first, span] = writers[static_cast<std::size_t>(s)];
      const auto writer = static_cast<std::uint64_t>(first) + uniform_index(writer_rng, static_cast<std::uint64_t>(span));
      sample.style_seed = derive_seed(seed, "writer:" + profile.script_id, writer);
      out.push_back(std::move(sample));
    }
  }
  return out;
}

std::vector<TextLineSample> generate_corpus(const ScriptProfile& profile, const GlyphUniverse& universe,
                                            const CorpusOptions& opts, std::uint64_t seed) {
  std::vector<TextLineSample> samples = sample_corpus_text(profile, opts, seed);
  for (auto& s : samples) {
    s.image = render_line(s.transcript, universe, profile.rtl, s.style_seed, opts.render);
  }
  return samples;
}

std::filesystem::path write_corpus(const std::vector<TextLineSample>& samples, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  std::vector<ManifestRow> rows;
  rows.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    char name[64];
    std::snprintf(name, sizeof(name), "%06zu.pgm", i);
    const std::string rel = "images/" + s.script_id + "_" + name;
    write_pgm(s.image, dir / rel);
    rows.push_back({rel, s.transcript, s.script_id, s.split});
  }
  const auto manifest = dir / "manifest.tsv";
  write_manifest(manifest, rows);
  return manifest;
}

DataGenConfig parse_datagen_config(const nlohmann::json& j) {
  reject_unknown(j, {"seed", "n_shared", "uniques", "render_height", "scripts"}, "data config");
  DataGenConfig cfg;
  try {
    cfg.seed = json_get<std::uint64_t>(j, "seed", cfg.seed);
    cfg.n_shared = json_get<int>(j, "n_shared", cfg.n_shared);
    cfg.render_height = json_get<int>(j, "render_height", cfg.render_height);
    cfg.uniques = j.at("uniques").get<std::vector<int>>();
    for (const auto& s : j.at("scripts")) {
      reject_unknown(s,
                     {"id", "rtl", "zipf_exponent", "line_length", "word_length", "writer_styles", "n_lines", "splits",
                      "duplication", "lexicon_size", "writer_disjoint"},
                     "script entry");
      ScriptSpec spec;
      spec.id = s.at("id").get<std::string>();
      spec.rtl = json_get<bool>(s, "rtl", spec.rtl);
      spec.zipf_exponent = json_get<double>(s, "zipf_exponent", spec.zipf_exponent);
      spec.line_length = json_get<std::pair<int, int>>(s, "line_length", spec.line_length);
      spec.word_length = json_get<std::pair<int, int>>(s, "word_length", spec.word_length);
      spec.writer_styles = json_get<int>(s, "writer_styles", spec.writer_styles);
      spec.corpus.n_lines = json_get<int>(s, "n_lines", spec.corpus.n_lines);
      spec.corpus.split_fractions = json_get<std::array<double, 3>>(s, "splits", spec.corpus.split_fractions);
      spec.corpus.duplication = json_get<double>(s, "duplication", spec.corpus.duplication);
      spec.corpus.lexicon_size = json_get<int>(s, "lexicon_size", spec.corpus.lexicon_size);
      spec.corpus.writer_disjoint = json_get<bool>(s, "writer_disjoint", spec.corpus.writer_disjoint);
      spec.corpus.render.height = cfg.render_height;
      check_options(spec.corpus);
      cfg.scripts.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("data config: ") + e.what());
  }
  if (cfg.scripts.size() != cfg.uniques.size()) {
    throw ConfigError("data config: 'scripts' and 'uniques' must have equal length");
  }
  std::set<std::string> ids;
  for (const auto& s : cfg.scripts) {
    if (s.id.empty() || !ids.insert(s.id).second) throw ConfigError("data config: script ids must be unique");
  }
  return cfg;
}

std::vector<GeneratedDataset> generate_benchmark(const DataGenConfig& cfg, const std::filesystem::path& out) {
  ScriptSet set = make_overlap_scripts(cfg.n_shared, cfg.uniques, cfg.seed);
  std::vector<GeneratedDataset> result;
  for (std::size_t i = 0; i < cfg.scripts.size(); ++i) {
    const ScriptSpec& spec = cfg.scripts[i];
    ScriptProfile profile = set.scripts[i];
    profile.script_id = spec.id;
    profile.rtl = spec.rtl;
    profile.zipf_exponent = spec.zipf_exponent;
    profile.line_length_range = spec.line_length;
    profile.word_length_range = spec.word_length;
    profile.writer_styles = spec.writer_styles;
    const auto samples = generate_corpus(profile, set.universe, spec.corpus, derive_seed(cfg.seed, "corpus", i));
    const auto manifest = write_corpus(samples, out / spec.id);
    result.push_back({spec.id, manifest, spec.rtl});
  }
  return result;
}

}  // namespace xscript::synth
