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

#include "xscript/experiment/dataset.hpp"

#include <algorithm>

#include "xscript/nn/crnn.hpp"
#include "xscript/synth/preprocess.hpp"
#include "xscript/synth/render.hpp"
#include "xscript/utf8.hpp"

namespace xscript::exp {

namespace {

bool is_space(char32_t c) { return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r'; }

}  // namespace

std::vector<std::size_t> sample_k_subset(const Manifest& manifest, std::optional<int> k, std::uint64_t seed) {
  std::vector<std::size_t> train = manifest.indices_in(Split::kTrain);
  if (!k) return train;
  if (*k < 1) throw ConfigError("K must be >= 1");
  if (static_cast<std::size_t>(*k) > train.size()) {
    throw ConfigError("K = " + std::to_string(*k) + " exceeds the train split size " + std::to_string(train.size()) +
                      " of '" + manifest.source.string() + "'");
  }
  Rng rng = make_rng(seed, "k_subset");
  shuffle(train.begin(), train.end(), rng);
  train.resize(static_cast<std::size_t>(*k));
  std::sort(train.begin(), train.end());
  return train;
}

Vocabulary build_union_vocab(std::span<const Manifest> manifests) {
  std::set<char32_t> chars;
  for (const auto& m : manifests) {
    for (const auto& r : m.rows) {
      if (r.split == Split::kTest) continue;
      chars.insert(r.transcript.begin(), r.transcript.end());
    }
  }
  if (chars.empty()) throw DataError("union vocabulary is empty");
  return Vocabulary(chars);
}

std::set<char32_t> manifest_inventory(const Manifest& manifest) {
  std::set<char32_t> out;
  for (const auto& r : manifest.rows) {
    for (char32_t c : r.transcript) {
      if (!is_space(c)) out.insert(c);
    }
  }
  return out;
}

std::vector<int> encode_for_training(std::u32string_view transcript, bool rtl, const Vocabulary& vocab) {
  return vocab.encode(synth::reverse_labels(transcript, rtl));
}

std::u32string decode_from_model(std::span<const int> collapsed_ids, bool rtl, const Vocabulary& vocab) {
  return synth::reverse_labels(vocab.decode(collapsed_ids), rtl);
}

synth::InkImage pad_for_ctc(const synth::InkImage& image, std::size_t label_length, int pools) {
  const int needed = 2 * static_cast<int>(label_length) + 1;
  int width = image.width;
  while (nn::crnn_sequence_length(width, pools) < needed) ++width;
  if (width == image.width) return image;
  synth::InkImage out(image.height, width);
  for (int y = 0; y < image.height; ++y) {
    std::copy_n(image.data.begin() + static_cast<std::ptrdiff_t>(y) * image.width, image.width,
                out.data.begin() + static_cast<std::ptrdiff_t>(y) * width);
  }
  return out;
}

std::vector<LoadedSample> load_samples(const Manifest& manifest, std::span<const std::size_t> rows,
                                       const std::string& dataset_id, bool rtl, const Vocabulary& vocab,
                                       const LoadOptions& opts) {
  std::vector<LoadedSample> out;
  out.reserve(rows.size());
  const synth::PreprocessOptions pre{opts.height, opts.max_width};
  for (std::size_t idx : rows) {
    const ManifestRow& row = manifest.rows.at(idx);
    const auto missing = vocab.missing(row.transcript);
    if (!missing.empty()) {
      throw DataError("dataset '" + dataset_id + "' row " + std::to_string(idx) +
                      ": characters missing from the vocabulary: " +
                      describe_chars(std::u32string(missing.begin(), missing.end())));
    }
    LoadedSample s;
    s.id = dataset_id + ":" + std::to_string(idx);
    s.transcript = row.transcript;
    s.labels = encode_for_training(row.transcript, rtl, vocab);
    s.image = pad_for_ctc(synth::preprocess(synth::read_pgm(manifest.resolve(row)), pre), s.labels.size(), opts.pools);
    out.push_back(std::move(s));
  }
  return out;
}

nn::Tensor<float> to_tensor(const synth::InkImage& image) {
  nn::Tensor<float> t({1, image.height, image.width});
  std::copy(image.data.begin(), image.data.end(), t.data());
  return t;
}

std::map<char32_t, std::size_t> char_frequencies(std::span<const std::u32string> transcripts) {
  std::map<char32_t, std::size_t> out;
  for (const auto& t : transcripts) {
    for (char32_t c : t) {
      if (!is_space(c)) ++out[c];
    }
  }
  return out;
}

}  // namespace xscript::exp
