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

#include "xscript/vocabulary.hpp"

#include <algorithm>

#include "xscript/common.hpp"
#include "xscript/utf8.hpp"

namespace xscript {

Vocabulary::Vocabulary(const std::set<char32_t>& chars) : chars_(chars.begin(), chars.end()) {}

bool Vocabulary::contains(char32_t c) const {
  return std::binary_search(chars_.begin(), chars_.end(), c);
}

int Vocabulary::id(char32_t c) const {
  const auto it = std::lower_bound(chars_.begin(), chars_.end(), c);
  if (it == chars_.end() || *it != c) {
    throw DataError("character " + code_point_label(c) + " not in vocabulary");
  }
  return static_cast<int>(it - chars_.begin()) + 1;
}

char32_t Vocabulary::character(int id) const {
  if (id <= 0 || id > static_cast<int>(chars_.size())) {
    throw DataError("class id " + std::to_string(id) + " has no character");
  }
  return chars_[static_cast<std::size_t>(id - 1)];
}

std::set<char32_t> Vocabulary::missing(std::u32string_view text) const {
  std::set<char32_t> out;
  for (char32_t c : text) {
    if (!contains(c)) out.insert(c);
  }
  return out;
}

std::vector<int> Vocabulary::encode(std::u32string_view text) const {
  const auto absent = missing(text);
  if (!absent.empty()) {
    throw DataError("characters missing from vocabulary: " + describe_chars(std::u32string(absent.begin(), absent.end())));
  }
  std::vector<int> ids;
  ids.reserve(text.size());
  for (char32_t c : text) ids.push_back(id(c));
  return ids;
}

std::u32string Vocabulary::decode(std::span<const int> ids) const {
  std::u32string out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(character(i));
  return out;
}

}  // namespace xscript
