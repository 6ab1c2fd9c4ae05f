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

// Corpus diversity diagnostics and shared/unique character statistics.

#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace xscript::stats {

struct DiversityStats {
  std::size_t total_lines = 0;
  std::size_t unique_lines = 0;
  double duplication_ratio = 0.0;  // 1 - unique_lines / total_lines
  double mean_max_jaccard = 0.0;
  bool jaccard_defined = true;     // false for single-line corpora (reported as 0)
  std::size_t word_tokens = 0;
  std::size_t unique_words = 0;
  double word_ttr = 0.0;
};

// Lines are tokenized on whitespace. Throws DataError on an empty list.
DiversityStats diversity_stats(std::span<const std::string> lines);

using CharSet = std::set<char32_t>;

enum class SharedMode {
  kAllScripts,  // shared = present in every script
  kAnyPair,     // shared = present in at least two scripts
};

struct OverlapPartition {
  CharSet shared;
  // Present in two or more scripts but not in all; only populated in
  // kAllScripts mode. Together with `shared` and the uniques this covers
  // the union inventory exactly.
  CharSet partially_shared;
  std::map<std::string, CharSet> unique_per_script;
};

// Requires at least two scripts (ConfigError otherwise).
OverlapPartition overlap_partition(const std::map<std::string, CharSet>& inventories,
                                   SharedMode mode = SharedMode::kAllScripts);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;  // two-sided
};

// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of freedom.
// Throws DataError if a group has fewer than two values or both sample
// variances are zero.
WelchResult welch_t_test(std::span<const double> group_a, std::span<const double> group_b);

// Two-sided tail probability P(|T| >= |t|) of Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct CurveBin {
  double log10_center = 0.0;
  double mean_delta = 0.0;
  std::size_t count = 0;
};

// Equal-width bins over log10(frequency); empty bins are omitted.
// Throws ConfigError for bins < 1 and DataError for a character with
// frequency < 1 or without a frequency entry.
std::vector<CurveBin> binned_transfer_curve(const std::map<char32_t, double>& delta,
                                            const std::map<char32_t, std::size_t>& frequencies,
                                            int bins);

}  // namespace xscript::stats
