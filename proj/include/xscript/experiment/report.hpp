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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xscript/corpus_stats.hpp"
#include "xscript/experiment/config.hpp"

namespace xscript::exp {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 for a single value
  std::size_t n = 0;
};

// Throws DataError on an empty span.
MeanStd mean_std(std::span<const double> values);

struct AggregateRow {
  std::string target;
  int j = 0;
  std::string k;
  std::string sampling;
  std::vector<double> test_cer;  // per run, fractions
  MeanStd cer;                   // over test_cer
};

// Reads <dir>/run<i>/summary.json for each experiment directory.
AggregateRow aggregate_runs(const std::filesystem::path& experiment_dir);

// One line per row: target,J,K,sampling,runs,cer_mean_pct,cer_std_pct,per-run values.
void write_aggregate_csv(std::span<const AggregateRow> rows, const std::filesystem::path& path);

struct DiversityRow {
  std::string dataset;
  std::string k;
  stats::DiversityStats stats;
};

// Diversity of each dataset's train K-subsets (same sampling as training).
// K values larger than the train split are skipped.
std::vector<DiversityRow> diversity_table(std::span<const DatasetRef> datasets, std::span<const std::optional<int>> ks,
                                          std::uint64_t seed);

void write_diversity_csv(std::span<const DiversityRow> rows, const std::filesystem::path& path);

}  // namespace xscript::exp
