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
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "xscript/experiment/config.hpp"
#include "xscript/manifest.hpp"
#include "xscript/nn/tensor.hpp"
#include "xscript/synth/image.hpp"
#include "xscript/vocabulary.hpp"

namespace xscript::exp {

// Indices (into manifest.rows) of a uniform K-subset of the train split,
// sorted ascending. Depends only on the manifest, K and seed. K = nullopt
// selects the whole train split. Throws ConfigError when K exceeds it.
std::vector<std::size_t> sample_k_subset(const Manifest& manifest, std::optional<int> k, std::uint64_t seed);

// Sorted union of the characters in the train and val splits. Throws
// DataError when the union is empty.
Vocabulary build_union_vocab(std::span<const Manifest> manifests);

// Every character of each manifest (all splits) except whitespace.
std::set<char32_t> manifest_inventory(const Manifest& manifest);

struct LoadedSample {
  std::string id;              // "<dataset>:<row>"
  std::u32string transcript;   // logical order
  std::vector<int> labels;     // training order (reversed for right-to-left scripts)
  synth::InkImage image;       // preprocessed, padded so the CTC fit holds
};

struct LoadOptions {
  int height = 48;
  int max_width = 1450;
  int pools = 2;  // max pools in the recognizer trunk
};

// The single place where right-to-left label reversal happens on the way in.
std::vector<int> encode_for_training(std::u32string_view transcript, bool rtl, const Vocabulary& vocab);
// ... and its inverse on the way out.
std::u32string decode_from_model(std::span<const int> collapsed_ids, bool rtl, const Vocabulary& vocab);

// Reads, preprocesses and encodes the given manifest rows. Throws DataError
// for unreadable images or characters outside the vocabulary.
std::vector<LoadedSample> load_samples(const Manifest& manifest, std::span<const std::size_t> rows,
                                       const std::string& dataset_id, bool rtl, const Vocabulary& vocab,
                                       const LoadOptions& opts);

// Right-pads with background until the trunk yields 2L + 1 time steps.
synth::InkImage pad_for_ctc(const synth::InkImage& image, std::size_t label_length, int pools);

nn::Tensor<float> to_tensor(const synth::InkImage& image);

// Character frequencies over a set of transcripts (whitespace excluded).
std::map<char32_t, std::size_t> char_frequencies(std::span<const std::u32string> transcripts);

}  // namespace xscript::exp
