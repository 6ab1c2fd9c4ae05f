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

#include "xscript/experiment/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "xscript/experiment/dataset.hpp"
#include "xscript/manifest.hpp"
#include "xscript/utf8.hpp"

namespace xscript::exp {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int precision) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(precision) << v;
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

}  // namespace

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw DataError("mean_std: no values");
  MeanStd r;
  r.n = values.size();
  for (double v : values) r.mean += v;
  r.mean /= static_cast<double>(r.n);
  if (r.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(r.n - 1));
  }
  return r;
}

AggregateRow aggregate_runs(const fs::path& experiment_dir) {
  AggregateRow row;
  bool first = true;
  for (int i = 0;; ++i) {
    const fs::path run = experiment_dir / ("run" + std::to_string(i));
    if (!fs::is_directory(run)) break;
    const nlohmann::json s = read_json_file(run / "summary.json");
    if (s.value("status", "") != "ok") throw DataError("run '" + run.string() + "' did not finish");
    const ExperimentConfig cfg = parse_experiment_config(s.at("config"), {});
    if (first) {
      row.target = cfg.target.id;
      row.j = cfg.j();
      row.k = cfg.k_label();
      row.sampling = sampling_mode_name(cfg.sampling_mode);
      first = false;
    } else if (row.target != cfg.target.id || row.j != cfg.j() || row.k != cfg.k_label()) {
      throw DataError("runs under '" + experiment_dir.string() + "' belong to different experiments");
    }
    row.test_cer.push_back(s.at("test_cer").get<double>());
  }
  if (first) throw DataError("no run directories under '" + experiment_dir.string() + "'");
  row.cer = mean_std(row.test_cer);
  return row;
}

void write_aggregate_csv(std::span<const AggregateRow> rows, const fs::path& path) {
  std::string s = "target,J,K,sampling,runs,cer_mean_pct,cer_std_pct,run_cer_pct\n";
  for (const auto& r : rows) {
    std::string per_run;
    for (double v : r.test_cer) per_run += (per_run.empty() ? "" : ";") + fixed(100.0 * v, 4);
    s += r.target + "," + std::to_string(r.j) + "," + r.k + "," + r.sampling + "," + std::to_string(r.cer.n) + "," +
         fixed(100.0 * r.cer.mean, 4) + "," + fixed(100.0 * r.cer.std, 4) + "," + per_run + "\n";
  }
  write_file(path, s);
}

std::vector<DiversityRow> diversity_table(std::span<const DatasetRef> datasets, std::span<const std::optional<int>> ks,
                                          std::uint64_t seed) {
  std::vector<DiversityRow> out;
  for (const auto& d : datasets) {
    const Manifest m = read_manifest(d.manifest);
    const std::size_t n_train = m.indices_in(Split::kTrain).size();
    for (const auto& k : ks) {
      if (k && static_cast<std::size_t>(*k) > n_train) continue;
      std::vector<std::string> lines;
      for (std::size_t r : sample_k_subset(m, k, seed)) lines.push_back(utf8_encode(m.rows[r].transcript));
      out.push_back({d.id, k ? std::to_string(*k) : "full", stats::diversity_stats(lines)});
    }
  }
  return out;
}

void write_diversity_csv(std::span<const DiversityRow> rows, const fs::path& path) {
  std::string s = "dataset,K,lines,unique_lines,duplication_ratio,mean_max_jaccard,word_tokens,unique_words,word_ttr\n";
  for (const auto& r : rows) {
    s += r.dataset + "," + r.k + "," + std::to_string(r.stats.total_lines) + "," +
         std::to_string(r.stats.unique_lines) + "," + fixed(r.stats.duplication_ratio, 3) + "," +
         fixed(r.stats.mean_max_jaccard, 3) + "," + std::to_string(r.stats.word_tokens) + "," +
         std::to_string(r.stats.unique_words) + "," + fixed(r.stats.word_ttr, 3) + "\n";
  }
  write_file(path, s);
}

}  // namespace xscript::exp
