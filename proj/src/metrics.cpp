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

#include "xscript/metrics.hpp"

#include <algorithm>
#include <fstream>

#include "xscript/common.hpp"
#include "xscript/utf8.hpp"

namespace xscript::metrics {

EditAlignment levenshtein(std::u32string_view ref, std::u32string_view hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  const std::size_t stride = m + 1;
  std::vector<std::size_t> d((n + 1) * stride);
  for (std::size_t j = 0; j <= m; ++j) d[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    d[i * stride] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = d[(i - 1) * stride + j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const std::size_t up = d[(i - 1) * stride + j] + 1;
      const std::size_t left = d[i * stride + j - 1] + 1;
      d[i * stride + j] = std::min({diag, up, left});
    }
  }

  EditAlignment out;
  out.distance = d[n * stride + m];
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    const std::size_t here = d[i * stride + j];
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && d[(i - 1) * stride + j - 1] == here) {
      out.ops.push_back({EditOp::kMatch, i - 1, j - 1});
      --i;
      --j;
    } else if (i > 0 && j > 0 && d[(i - 1) * stride + j - 1] + 1 == here) {
      out.ops.push_back({EditOp::kSubstitute, i - 1, j - 1});
      --i;
      --j;
    } else if (i > 0 && d[(i - 1) * stride + j] + 1 == here) {
      out.ops.push_back({EditOp::kDelete, i - 1, j});
      --i;
    } else {
      out.ops.push_back({EditOp::kInsert, i, j - 1});
      --j;
    }
  }
  std::reverse(out.ops.begin(), out.ops.end());
  return out;
}

std::size_t edit_distance(std::u32string_view ref, std::u32string_view hyp) {
  if (hyp.size() > ref.size()) std::swap(ref, hyp);
  std::vector<std::size_t> row(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({diag + (ref[i - 1] == hyp[j - 1] ? 0 : 1), up + 1, row[j - 1] + 1});
      diag = up;
    }
  }
  return row[hyp.size()];
}

namespace {

void check_corpus(std::span<const TextPair> pairs) {
  if (pairs.empty()) throw DataError("CER requested for an empty corpus");
  std::size_t total = 0;
  for (const auto& p : pairs) total += p.reference.size();
  if (total == 0) throw DataError("CER undefined: total reference length is zero");
}

}  // namespace

double corpus_cer(std::span<const TextPair> pairs) {
  check_corpus(pairs);
  std::size_t errors = 0;
  std::size_t total = 0;
  for (const auto& p : pairs) {
    errors += edit_distance(p.reference, p.hypothesis);
    total += p.reference.size();
  }
  return static_cast<double>(errors) / static_cast<double>(total);
}

void CharErrorTable::add(char32_t c, std::size_t count, std::size_t errors) {
  auto& e = entries_[c];
  e.count += count;
  e.errors += errors;
}

const CharErrorTable::Entry& CharErrorTable::at(char32_t c) const {
  const auto it = entries_.find(c);
  if (it == entries_.end()) throw DataError("character not present in error table");
  return it->second;
}

std::optional<double> CharErrorTable::cer(char32_t c) const {
  const auto it = entries_.find(c);
  if (it == entries_.end() || it->second.count == 0) return std::nullopt;
  return static_cast<double>(it->second.errors) / static_cast<double>(it->second.count);
}

std::size_t CharErrorTable::total_count() const {
  std::size_t n = 0;
  for (const auto& [c, e] : entries_) n += e.count;
  return n;
}

std::size_t CharErrorTable::total_errors() const {
  std::size_t n = 0;
  for (const auto& [c, e] : entries_) n += e.errors;
  return n;
}

CharErrorTable char_error_table(std::span<const TextPair> pairs) {
  check_corpus(pairs);
  CharErrorTable table;
  for (const auto& p : pairs) {
    for (char32_t c : p.reference) table.add(c, 1, 0);
    const auto alignment = levenshtein(p.reference, p.hypothesis);
    for (const auto& op : alignment.ops) {
      switch (op.kind) {
        case EditOp::kMatch:
          break;
        case EditOp::kSubstitute:
        case EditOp::kDelete:
          table.add(p.reference[op.ref_pos], 0, 1);
          break;
        case EditOp::kInsert:
          table.add_insertions(1);
          break;
      }
    }
  }
  return table;
}

std::map<char32_t, std::optional<double>> delta_cer(const CharErrorTable& single,
                                                    const CharErrorTable& multi) {
  std::map<char32_t, std::optional<double>> out;
  auto visit = [&](char32_t c) {
    const auto a = single.cer(c);
    const auto b = multi.cer(c);
    out[c] = (a && b) ? std::optional<double>(100.0 * (*b - *a)) : std::nullopt;
  };
  for (const auto& [c, e] : single.entries()) visit(c);
  for (const auto& [c, e] : multi.entries()) visit(c);
  return out;
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open prediction file " + path.string());
  std::vector<Prediction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line, '\t');
    if (fields.size() != 3) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 3 tab-separated columns");
    }
    out.push_back({fields[0], utf8_decode(fields[1]), utf8_decode(fields[2])});
  }
  return out;
}

void write_predictions(const std::filesystem::path& path, std::span<const Prediction> predictions) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write prediction file " + path.string());
  for (const auto& p : predictions) {
    out << p.sample_id << '\t' << utf8_encode(p.reference) << '\t' << utf8_encode(p.hypothesis) << '\n';
  }
}

std::vector<TextPair> to_pairs(std::span<const Prediction> predictions) {
  std::vector<TextPair> pairs;
  pairs.reserve(predictions.size());
  for (const auto& p : predictions) pairs.push_back({p.reference, p.hypothesis});
  return pairs;
}

}  // namespace xscript::metrics
