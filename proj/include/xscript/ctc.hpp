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

// Connectionist temporal classification: loss with analytic gradient, path
// collapse and greedy decoding. Class 0 is the blank throughout.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "xscript/vocabulary.hpp"

namespace xscript::ctc {

// T x C row-major matrix of unnormalized log-scores, C = V + 1 (blank at 0).
struct LogitsSeq {
  int steps = 0;
  int classes = 0;
  std::vector<double> values;

  LogitsSeq() = default;
  LogitsSeq(int t, int c) : steps(t), classes(c), values(static_cast<std::size_t>(t) * c, 0.0) {}

  double& at(int t, int c) { return values[static_cast<std::size_t>(t) * classes + c]; }
  double at(int t, int c) const { return values[static_cast<std::size_t>(t) * classes + c]; }
  std::span<const double> row(int t) const {
    return {values.data() + static_cast<std::size_t>(t) * classes, static_cast<std::size_t>(classes)};
  }
};

// Drops repeated consecutive ids, then blanks.
std::vector<int> collapse(std::span<const int> path);

// Per-step argmax (ties to the lowest id).
std::vector<int> best_path(const LogitsSeq& logits);

std::u32string greedy_decode(const LogitsSeq& logits, const Vocabulary& vocab);

struct LossResult {
  double loss = 0.0;   // -log P(target | softmax(logits))
  LogitsSeq grad;      // d loss / d logits
};

// Targets must satisfy 2 * |target| + 1 <= T and ids in [1, C - 1];
// violations throw DataError, non-finite logits throw NumericError.
LossResult ctc_loss(const LogitsSeq& logits, std::span<const int> target);

// Loss only (no backward pass).
double ctc_neg_log_likelihood(const LogitsSeq& logits, std::span<const int> target);

}  // namespace xscript::ctc
