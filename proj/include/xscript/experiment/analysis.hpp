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

// Character-level comparison of single-script and multi-script predictions.

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xscript/corpus_stats.hpp"
#include "xscript/metrics.hpp"

namespace xscript::exp {

struct TransferOptions {
  int bins = 5;                     // frequency bins of the transfer curve
  stats::SharedMode shared_mode = stats::SharedMode::kAllScripts;
  std::size_t min_train_count = 15;  // shared-character listing filter
  std::size_t shared_rows = 10;      // rows in the shared-character listing
};

struct TransferInputs {
  // One prediction set per run. Every run of both paradigms must cover the
  // same test samples in the same order; error tables pool all runs.
  std::vector<std::vector<metrics::Prediction>> single_runs;
  std::vector<std::vector<metrics::Prediction>> multi_runs;
  std::map<std::string, stats::CharSet> inventories;  // per script id, target included
  std::string target;
  std::map<char32_t, std::size_t> train_freq_single;  // target K-subset counts
  std::map<char32_t, std::size_t> train_freq_multi;   // K-subset plus auxiliaries
};

struct CharRow {
  char32_t c = 0;
  std::size_t train_single = 0;
  std::size_t train_multi = 0;
  double cer_single = 0.0;  // percent
  double cer_multi = 0.0;   // percent
  double delta = 0.0;       // percentage points, multi - single
};

struct TransferReport {
  metrics::CharErrorTable single_table, multi_table;
  std::map<char32_t, std::optional<double>> delta;
  stats::OverlapPartition partition;
  // Group members restricted to characters that occur in the test references.
  std::vector<CharRow> shared, unique;
  double mean_shared = 0.0;
  double mean_unique = 0.0;
  std::optional<stats::WelchResult> welch;  // absent when a group is too small
  std::vector<stats::CurveBin> curve;       // shared characters with train count >= 1
  std::vector<CharRow> shared_listing;      // largest reductions, frequent characters
  std::vector<CharRow> unique_listing;      // every unique character, by delta
};

// Throws DataError when the prediction sets disagree on samples or
// references, or when the target has no inventory.
TransferReport analyze_transfer(const TransferInputs& in, const TransferOptions& opts = {});

// True when the lowest-frequency bin has the smallest (most negative) mean
// delta of all bins.
bool lowest_bin_improves_most(const std::vector<stats::CurveBin>& curve);

// Writes table4.csv, table5_shared.csv, table6_unique.csv, delta_cer.csv and
// fig6.svg into `dir`.
void write_transfer_report(const TransferReport& report, const std::filesystem::path& dir);

// Assembles inputs from two experiment output directories holding run<i>/
// subdirectories. Throws ConfigError when the paradigms are not comparable
// (different target, K-subset or iteration budget).
TransferInputs load_transfer_inputs(const std::filesystem::path& single_dir, const std::filesystem::path& multi_dir);

}  // namespace xscript::exp
