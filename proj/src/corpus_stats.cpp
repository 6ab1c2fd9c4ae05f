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

#include "xscript/corpus_stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <boost/math/special_functions/beta.hpp>

#include "xscript/common.hpp"

namespace xscript::stats {

DiversityStats diversity_stats(std::span<const std::string> lines) {
  if (lines.empty()) throw DataError("diversity statistics need at least one line");

  DiversityStats s;
  s.total_lines = lines.size();
  s.unique_lines = std::unordered_set<std::string>(lines.begin(), lines.end()).size();
  s.duplication_ratio =
      1.0 - static_cast<double>(s.unique_lines) / static_cast<double>(s.total_lines);

  // Word sets as sorted vectors of interned ids.
  std::unordered_map<std::string, int> vocab;
  std::vector<std::vector<int>> word_sets;
  word_sets.reserve(lines.size());
  for (const auto& line : lines) {
    std::istringstream in(line);
    std::string word;
    std::vector<int> ids;
    while (in >> word) {
      ++s.word_tokens;
      const auto [it, inserted] = vocab.try_emplace(word, static_cast<int>(vocab.size()));
      ids.push_back(it->second);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    word_sets.push_back(std::move(ids));
  }
  s.unique_words = vocab.size();
  s.word_ttr = s.word_tokens == 0
                   ? 0.0
                   : static_cast<double>(s.unique_words) / static_cast<double>(s.word_tokens);

  if (lines.size() == 1) {
    s.jaccard_defined = false;
    s.mean_max_jaccard = 0.0;
    return s;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < word_sets.size(); ++i) {
    const auto& a = word_sets[i];
    double best = 0.0;
    if (!a.empty()) {
      for (std::size_t j = 0; j < word_sets.size() && best < 1.0; ++j) {
        if (j == i || word_sets[j].empty()) continue;
        const auto& b = word_sets[j];
        std::size_t inter = 0;
        auto ia = a.begin();
        auto ib = b.begin();
        while (ia != a.end() && ib != b.end()) {
          if (*ia < *ib) {
            ++ia;
          } else if (*ib < *ia) {
            ++ib;
          } else {
            ++inter;
            ++ia;
            ++ib;
          }
        }
        const double jac = static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
        best = std::max(best, jac);
      }
    }
    sum += best;
  }
  s.mean_max_jaccard = sum / static_cast<double>(word_sets.size());
  return s;
}

OverlapPartition overlap_partition(const std::map<std::string, CharSet>& inventories,
                                   SharedMode mode) {
  if (inventories.size() < 2) throw ConfigError("overlap partition needs at least two scripts");

  std::map<char32_t, std::size_t> membership;
  for (const auto& [script, chars] : inventories) {
    for (char32_t c : chars) ++membership[c];
  }

  OverlapPartition out;
  for (const auto& [script, chars] : inventories) {
    auto& unique = out.unique_per_script[script];
    for (char32_t c : chars) {
      if (membership[c] == 1) unique.insert(c);
    }
  }
  for (const auto& [c, n] : membership) {
    if (n < 2) continue;
    if (mode == SharedMode::kAnyPair || n == inventories.size()) {
      out.shared.insert(c);
    } else {
      out.partially_shared.insert(c);
    }
  }
  return out;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw DataError("Student t distribution needs positive degrees of freedom");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return boost::math::ibeta(df / 2.0, 0.5, x);
}

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;  // unbiased
};

Moments moments(std::span<const double> xs) {
  Moments m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(xs.size() - 1);
  return m;
}

}  // namespace

WelchResult welch_t_test(std::span<const double> group_a, std::span<const double> group_b) {
  if (group_a.size() < 2 || group_b.size() < 2) {
    throw DataError("Welch t-test needs at least two values per group");
  }
  const Moments a = moments(group_a);
  const Moments b = moments(group_b);
  if (a.var == 0.0 && b.var == 0.0) {
    throw DataError("Welch t-test undefined: both groups have zero variance");
  }
  const double na = static_cast<double>(group_a.size());
  const double nb = static_cast<double>(group_b.size());
  const double sa = a.var / na;
  const double sb = b.var / nb;
  WelchResult r;
  r.t = (a.mean - b.mean) / std::sqrt(sa + sb);
  r.df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p_value = student_t_two_sided_p(r.t, r.df);
  return r;
}

std::vector<CurveBin> binned_transfer_curve(const std::map<char32_t, double>& delta,
                                            const std::map<char32_t, std::size_t>& frequencies,
                                            int bins) {
  if (bins < 1) throw ConfigError("binned transfer curve needs at least one bin");
  if (delta.empty()) return {};

  std::vector<std::pair<double, double>> points;  // (log10 f, delta)
  for (const auto& [c, d] : delta) {
    const auto it = frequencies.find(c);
    if (it == frequencies.end() || it->second < 1) {
      throw DataError("binned transfer curve: character without positive frequency");
    }
    points.emplace_back(std::log10(static_cast<double>(it->second)), d);
  }
  double lo = points.front().first;
  double hi = lo;
  for (const auto& p : points) {
    lo = std::min(lo, p.first);
    hi = std::max(hi, p.first);
  }
  const double width = (hi - lo) / bins;

  std::vector<double> sums(static_cast<std::size_t>(bins), 0.0);
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (const auto& [x, d] : points) {
    int b = width > 0.0 ? static_cast<int>(std::floor((x - lo) / width)) : 0;
    b = std::clamp(b, 0, bins - 1);
    sums[static_cast<std::size_t>(b)] += d;
    ++counts[static_cast<std::size_t>(b)];
  }

  std::vector<CurveBin> out;
  for (int b = 0; b < bins; ++b) {
    const auto i = static_cast<std::size_t>(b);
    if (counts[i] == 0) continue;
    const double center = width > 0.0 ? lo + (b + 0.5) * width : lo;
    out.push_back({center, sums[i] / static_cast<double>(counts[i]), counts[i]});
  }
  return out;
}

}  // namespace xscript::stats
