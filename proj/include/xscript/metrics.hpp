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

// Edit-distance evaluation: alignments, corpus CER and per-character error
// attribution.

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xscript::metrics {

enum class EditOp { kMatch, kSubstitute, kDelete, kInsert };

struct AlignedOp {
  EditOp kind;
  // Index into the reference. For insertions: the reference index the
  // inserted symbol precedes.
  std::size_t ref_pos;
  // Index into the hypothesis. For deletions: the hypothesis index the
  // deleted symbol would have preceded.
  std::size_t hyp_pos;

  bool operator==(const AlignedOp&) const = default;
};

struct EditAlignment {
  std::vector<AlignedOp> ops;
  std::size_t distance = 0;
};

// Minimal unit-cost alignment. Among equally cheap alignments the backtrace
// from the end prefers match, then substitute, delete, insert.
EditAlignment levenshtein(std::u32string_view reference, std::u32string_view hypothesis);

// Distance only, O(min(n, m)) memory.
std::size_t edit_distance(std::u32string_view reference, std::u32string_view hypothesis);

struct TextPair {
  std::u32string reference;
  std::u32string hypothesis;
};

// Micro-averaged CER as a fraction: sum of distances over total reference
// length. Throws DataError on an empty corpus or zero total reference length.
double corpus_cer(std::span<const TextPair> pairs);

class CharErrorTable {
 public:
  struct Entry {
    std::size_t count = 0;   // occurrences in the references
    std::size_t errors = 0;  // substitutions + deletions of this character
  };

  void add(char32_t c, std::size_t count, std::size_t errors);
  void add_insertions(std::size_t n) { insertions_ += n; }

  bool contains(char32_t c) const { return entries_.count(c) != 0; }
  const Entry& at(char32_t c) const;
  // errors(c) / count(c); nullopt when c never occurs in the references.
  std::optional<double> cer(char32_t c) const;

  const std::map<char32_t, Entry>& entries() const { return entries_; }
  std::size_t insertions() const { return insertions_; }
  std::size_t total_count() const;
  std::size_t total_errors() const;

 private:
  std::map<char32_t, Entry> entries_;
  std::size_t insertions_ = 0;
};

// Substitutions and deletions are charged to the reference character;
// insertions go to a global counter. Same preconditions as corpus_cer.
CharErrorTable char_error_table(std::span<const TextPair> pairs);

// 100 * (cer_multi(c) - cer_single(c)) in percentage points for every
// character of either table; nullopt where one table lacks the character.
std::map<char32_t, std::optional<double>> delta_cer(const CharErrorTable& single,
                                                    const CharErrorTable& multi);

// Prediction files: UTF-8, one "sample-id<TAB>reference<TAB>hypothesis" per line.
struct Prediction {
  std::string sample_id;
  std::u32string reference;
  std::u32string hypothesis;
};

std::vector<Prediction> read_predictions(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path, std::span<const Prediction> predictions);
std::vector<TextPair> to_pairs(std::span<const Prediction> predictions);

}  // namespace xscript::metrics
