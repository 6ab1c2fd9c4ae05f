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

// Checkpoint container.
//
//   XSCRIPT-CKPT <version>\n
//   config <single-line JSON>\n
//   vocab <n> <code point> ...\n
//   step <n>\n
//   arrays <count>\n
//   then per array:  <name> <rank> <d0> ... \n  <little-endian float32 data>
//
// Reading then writing reproduces the input bytes exactly.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "xscript/nn/tensor.hpp"

namespace xscript::nn {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointArray {
  std::string name;
  std::vector<int> shape;
  std::vector<float> values;
};

struct Checkpoint {
  nlohmann::json config;
  std::vector<char32_t> vocabulary;  // characters in id order (blank excluded)
  std::int64_t step = 0;
  std::vector<CheckpointArray> arrays;

  const CheckpointArray* find(const std::string& name) const;
};

void write_checkpoint(const Checkpoint& ckpt, std::ostream& out);
// Throws DataError on malformed or truncated input.
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Appends copies of the listed tensors.
void export_tensors(const TensorList<float>& tensors, Checkpoint& ckpt);
// Copies arrays back by name; every listed tensor must be present with an
// identical shape (DataError otherwise).
void import_tensors(const Checkpoint& ckpt, TensorList<float>& tensors);

}  // namespace xscript::nn
