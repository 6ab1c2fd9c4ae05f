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

#include <set>
#include <span>
#include <string>
#include <vector>

namespace xscript {

// Character <-> class-id bijection. Class 0 is the CTC blank; characters are
// stored sorted by code point and take ids 1..size.
class Vocabulary {
 public:
  static constexpr int kBlank = 0;

  Vocabulary() = default;
  explicit Vocabulary(const std::set<char32_t>& chars);

  // Number of classes including blank.
  int num_classes() const { return static_cast<int>(chars_.size()) + 1; }
  std::size_t num_chars() const { return chars_.size(); }
  const std::vector<char32_t>& chars() const { return chars_; }

  bool contains(char32_t c) const;
  int id(char32_t c) const;  // throws DataError for unknown characters
  char32_t character(int id) const;

  // Throws DataError naming every character missing from the vocabulary.
  std::vector<int> encode(std::u32string_view text) const;
  std::u32string decode(std::span<const int> ids) const;

  // Characters of `text` not covered by this vocabulary.
  std::set<char32_t> missing(std::u32string_view text) const;

  bool operator==(const Vocabulary&) const = default;

 private:
  std::vector<char32_t> chars_;
};

}  // namespace xscript
