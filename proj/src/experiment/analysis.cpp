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

#include "xscript/experiment/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "xscript/common.hpp"
#include "xscript/experiment/config.hpp"
#include "xscript/experiment/dataset.hpp"
#include "xscript/manifest.hpp"
#include "xscript/utf8.hpp"

namespace xscript::exp {

namespace fs = std::filesystem;

namespace {

std::vector<metrics::TextPair> pooled_pairs(const std::vector<std::vector<metrics::Prediction>>& runs) {
  std::vector<metrics::TextPair> out;
  for (const auto& r : runs) {
    const auto p = metrics::to_pairs(r);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

void check_same_samples(const std::vector<metrics::Prediction>& ref, const std::vector<metrics::Prediction>& other,
                        const std::string& what) {
  if (ref.size() != other.size()) {
    throw DataError(what + ": " + std::to_string(other.size()) + " predictions, expected " +
                    std::to_string(ref.size()));
  }
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (ref[i].sample_id != other[i].sample_id || ref[i].reference != other[i].reference) {
      throw DataError(what + ": test sample " + std::to_string(i) + " ('" + other[i].sample_id +
                      "') does not match '" + ref[i].sample_id + "'");
    }
  }
}

double mean_delta(const std::vector<CharRow>& rows) {
  if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (const auto& r : rows) s += r.delta;
  return s / static_cast<double>(rows.size());
}

std::size_t lookup(const std::map<char32_t, std::size_t>& m, char32_t c) {
  const auto it = m.find(c);
  return it == m.end() ? 0 : it->second;
}

bool by_delta(const CharRow& a, const CharRow& b) { return a.delta != b.delta ? a.delta < b.delta : a.c < b.c; }

std::string num(double v, int precision = 4) {
  if (!std::isfinite(v)) return "";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(precision) << v;
  return ss.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::string char_rows_csv(const std::vector<CharRow>& rows) {
  std::string s = "char,code_point,train_single,train_multi,cer_single_pct,cer_multi_pct,delta_pp\n";
  for (const auto& r : rows) {
    s += csv_field(utf8_encode(r.c)) + "," + code_point_label(r.c) + "," + std::to_string(r.train_single) + "," +
         std::to_string(r.train_multi) + "," + num(r.cer_single, 2) + "," + num(r.cer_multi, 2) + "," +
         num(r.delta, 2) + "\n";
  }
  return s;
}

std::string scatter_svg(const TransferReport& r) {
  constexpr double kW = 640, kH = 400, kL = 60, kR = 20, kT = 20, kB = 50;
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : r.shared) {
    if (row.train_single >= 1) pts.emplace_back(std::log10(static_cast<double>(row.train_single)), row.delta);
  }
  double x0 = 0, x1 = 1, y0 = -1, y1 = 1;
  if (!pts.empty()) {
    x0 = x1 = pts[0].first;
    y0 = y1 = pts[0].second;
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  }
  y0 = std::min(y0, 0.0), y1 = std::max(y1, 0.0);
  if (x1 - x0 < 1e-9) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-9) y0 -= 1.0, y1 += 1.0;
  const double px = (x1 - x0) * 0.05, py = (y1 - y0) * 0.05;
  x0 -= px, x1 += px, y0 -= py, y1 += py;
  auto sx = [&](double x) { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); };
  auto sy = [&](double y) { return kT + (y1 - y) / (y1 - y0) * (kH - kT - kB); };

  std::ostringstream s;
  s << std::fixed << std::setprecision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
    << kW << ' ' << kH << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<line x1=\"" << kL << "\" y1=\"" << sy(0) << "\" x2=\"" << kW - kR << "\" y2=\"" << sy(0)
    << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  s << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << kW - kL - kR << "\" height=\"" << kH - kT - kB
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    s << "<text x=\"" << sx(xv) << "\" y=\"" << kH - kB + 16 << "\" font-size=\"11\" text-anchor=\"middle\">"
      << num(xv, 2) << "</text>\n";
    s << "<text x=\"" << kL - 6 << "\" y=\"" << sy(yv) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
      << num(yv, 1) << "</text>\n";
  }
  s << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 10
    << "\" font-size=\"12\" text-anchor=\"middle\">log10 single-script training frequency</text>\n";
  s << "<text x=\"14\" y=\"" << (kT + kH - kB) / 2 << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
    << (kT + kH - kB) / 2 << ")\">delta CER (pp)</text>\n";
  for (const auto& [x, y] : pts) {
    s << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\"#3465a4\" fill-opacity=\"0.7\"/>\n";
  }
  if (!r.curve.empty()) {
    s << "<polyline fill=\"none\" stroke=\"#cc0000\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < r.curve.size(); ++i) {
      s << (i ? " " : "") << sx(r.curve[i].log10_center) << ',' << sy(r.curve[i].mean_delta);
    }
    s << "\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::vector<fs::path> run_dirs(const fs::path& dir) {
  std::vector<fs::path> out;
  for (int i = 0; fs::is_directory(dir / ("run" + std::to_string(i))); ++i) {
    out.push_back(dir / ("run" + std::to_string(i)));
  }
  if (out.empty()) throw DataError("no run directories under '" + dir.string() + "'");
  return out;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct ParadigmRuns {
  ExperimentConfig cfg;
  std::vector<std::vector<metrics::Prediction>> predictions;
  std::string k_subset;
};

ParadigmRuns load_paradigm(const fs::path& dir) {
  ParadigmRuns out;
  bool first = true;
  for (const auto& run : run_dirs(dir)) {
    const nlohmann::json summary = read_json_file(run / "summary.json");
    if (summary.value("status", "") != "ok") throw DataError("run '" + run.string() + "' did not finish");
    const ExperimentConfig cfg = parse_experiment_config(summary.at("config"), {});
    const std::string k = read_bytes(run / "k_subset.tsv");
    if (first) {
      out.cfg = cfg;
      out.k_subset = k;
      first = false;
    } else if (k != out.k_subset) {
      throw DataError("runs under '" + dir.string() + "' use different K-subsets");
    }
    out.predictions.push_back(metrics::read_predictions(run / "predictions.tsv"));
  }
  return out;
}

}  // namespace

TransferReport analyze_transfer(const TransferInputs& in, const TransferOptions& opts) {
  if (in.single_runs.empty() || in.multi_runs.empty()) throw DataError("analysis needs predictions of both paradigms");
  const auto& ref = in.single_runs.front();
  for (const auto& r : in.single_runs) check_same_samples(ref, r, "single-script predictions");
  for (const auto& r : in.multi_runs) check_same_samples(ref, r, "multi-script predictions");
  if (!in.inventories.count(in.target)) throw DataError("no inventory for target '" + in.target + "'");

  TransferReport rep;
  rep.single_table = metrics::char_error_table(pooled_pairs(in.single_runs));
  rep.multi_table = metrics::char_error_table(pooled_pairs(in.multi_runs));
  rep.delta = metrics::delta_cer(rep.single_table, rep.multi_table);
  rep.partition = stats::overlap_partition(in.inventories, opts.shared_mode);

  auto make_rows = [&](const stats::CharSet& group) {
    std::vector<CharRow> rows;
    for (char32_t c : group) {
      const auto d = rep.delta.find(c);
      if (d == rep.delta.end() || !d->second) continue;  // not in the test references
      rows.push_back({c, lookup(in.train_freq_single, c), lookup(in.train_freq_multi, c),
                      100.0 * *rep.single_table.cer(c), 100.0 * *rep.multi_table.cer(c), *d->second});
    }
    return rows;
  };
  rep.shared = make_rows(rep.partition.shared);
  const auto uit = rep.partition.unique_per_script.find(in.target);
  if (uit != rep.partition.unique_per_script.end()) rep.unique = make_rows(uit->second);
  rep.mean_shared = mean_delta(rep.shared);
  rep.mean_unique = mean_delta(rep.unique);

  std::vector<double> ds, du;
  for (const auto& r : rep.shared) ds.push_back(r.delta);
  for (const auto& r : rep.unique) du.push_back(r.delta);
  try {
    rep.welch = stats::welch_t_test(ds, du);
  } catch (const DataError&) {
    rep.welch.reset();
  }

  std::map<char32_t, double> curve_delta;
  std::map<char32_t, std::size_t> curve_freq;
  for (const auto& r : rep.shared) {
    if (r.train_single < 1) continue;
    curve_delta[r.c] = r.delta;
    curve_freq[r.c] = r.train_single;
  }
  if (!curve_delta.empty()) rep.curve = stats::binned_transfer_curve(curve_delta, curve_freq, opts.bins);

  for (const auto& r : rep.shared) {
    if (r.train_single >= opts.min_train_count) rep.shared_listing.push_back(r);
  }
  std::sort(rep.shared_listing.begin(), rep.shared_listing.end(), by_delta);
  if (rep.shared_listing.size() > opts.shared_rows) rep.shared_listing.resize(opts.shared_rows);
  rep.unique_listing = rep.unique;
  std::sort(rep.unique_listing.begin(), rep.unique_listing.end(), by_delta);
  return rep;
}

bool lowest_bin_improves_most(const std::vector<stats::CurveBin>& curve) {
  if (curve.size() < 2) return false;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (!(curve.front().mean_delta < curve[i].mean_delta)) return false;
  }
  return true;
}

void write_transfer_report(const TransferReport& r, const fs::path& dir) {
  fs::create_directories(dir);
  std::string t4 = "n_shared,n_unique,mean_delta_shared_pp,mean_delta_unique_pp,welch_t,welch_df,p_value\n";
  t4 += std::to_string(r.shared.size()) + "," + std::to_string(r.unique.size()) + "," + num(r.mean_shared) + "," +
        num(r.mean_unique) + ",";
  t4 += r.welch ? num(r.welch->t) + "," + num(r.welch->df) + "," + num(r.welch->p_value, 6) : std::string(",,");
  write_file(dir / "table4.csv", t4 + "\n");
  write_file(dir / "table5_shared.csv", char_rows_csv(r.shared_listing));
  write_file(dir / "table6_unique.csv", char_rows_csv(r.unique_listing));

  std::string all = "char,code_point,group,delta_pp\n";
  for (const auto& [c, d] : r.delta) {
    std::string group = "other";
    if (r.partition.shared.count(c)) {
      group = "shared";
    } else if (r.partition.partially_shared.count(c)) {
      group = "partially_shared";
    } else {
      for (const auto& [id, set] : r.partition.unique_per_script) {
        if (set.count(c)) group = "unique:" + id;
      }
    }
    all += csv_field(utf8_encode(c)) + "," + code_point_label(c) + "," + group + "," + (d ? num(*d, 4) : "") + "\n";
  }
  write_file(dir / "delta_cer.csv", all);

  std::string curve = "log10_center,mean_delta_pp,count\n";
  for (const auto& b : r.curve) curve += num(b.log10_center) + "," + num(b.mean_delta) + "," + std::to_string(b.count) + "\n";
  write_file(dir / "fig6_bins.csv", curve);
  write_file(dir / "fig6.svg", scatter_svg(r));
}

TransferInputs load_transfer_inputs(const fs::path& single_dir, const fs::path& multi_dir) {
  const ParadigmRuns single = load_paradigm(single_dir);
  const ParadigmRuns multi = load_paradigm(multi_dir);
  if (single.cfg.target.id != multi.cfg.target.id) throw ConfigError("paradigms have different targets");
  if (single.cfg.iteration_budget != multi.cfg.iteration_budget) {
    throw ConfigError("iteration budgets differ between paradigms (" + std::to_string(single.cfg.iteration_budget) +
                      " vs " + std::to_string(multi.cfg.iteration_budget) + ")");
  }
  if (single.k_subset != multi.k_subset) throw ConfigError("paradigms use different target K-subsets");

  TransferInputs in;
  in.single_runs = single.predictions;
  in.multi_runs = multi.predictions;
  in.target = multi.cfg.target.id;

  const Manifest target = read_manifest(multi.cfg.target.manifest);
  in.inventories[in.target] = manifest_inventory(target);
  const auto k_rows = sample_k_subset(target, multi.cfg.k, multi.cfg.seed);
  std::vector<std::u32string> single_text, multi_text;
  for (std::size_t r : k_rows) single_text.push_back(target.rows[r].transcript);
  multi_text = single_text;
  for (const auto& aux : multi.cfg.auxiliaries) {
    const Manifest m = read_manifest(aux.manifest);
    in.inventories[aux.id] = manifest_inventory(m);
    for (const auto& row : m.rows_in(Split::kTrain)) multi_text.push_back(row->transcript);
  }
  in.train_freq_single = char_frequencies(single_text);
  in.train_freq_multi = char_frequencies(multi_text);
  return in;
}

}  // namespace xscript::exp
