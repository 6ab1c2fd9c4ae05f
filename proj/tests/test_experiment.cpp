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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "xscript/ctc.hpp"
#include "xscript/experiment/analysis.hpp"
#include "xscript/experiment/config.hpp"
#include "xscript/experiment/dataset.hpp"
#include "xscript/experiment/report.hpp"
#include "xscript/experiment/trainer.hpp"
#include "xscript/synth/corpus.hpp"
#include "xscript/utf8.hpp"

using namespace xscript;
using namespace xscript::exp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << s;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("xscript_test_exp_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small three-script benchmark shared by the tests in this file.
const std::vector<synth::GeneratedDataset>& bench() {
  static const std::vector<synth::GeneratedDataset> data = [] {
    const auto cfg = synth::parse_datagen_config(nlohmann::json::parse(R"({
      "seed": 11, "n_shared": 6, "uniques": [3, 1, 0], "render_height": 16,
      "scripts": [
        {"id": "t", "n_lines": 40, "line_length": [2, 4], "writer_styles": 4, "duplication": 0.25},
        {"id": "a", "n_lines": 30, "line_length": [2, 4], "writer_styles": 4},
        {"id": "b", "n_lines": 20, "line_length": [2, 4], "writer_styles": 4, "rtl": false}
      ]})"));
    return synth::generate_benchmark(cfg, scratch("bench"));
  }();
  return data;
}

DatasetRef ref(std::size_t i) {
  const auto& g = bench()[i];
  return {g.id, g.manifest, g.rtl};
}

ExperimentConfig tiny_experiment(int j, const fs::path& out) {
  ExperimentConfig c;
  c.target = ref(0);
  for (int i = 1; i <= j; ++i) c.auxiliaries.push_back(ref(static_cast<std::size_t>(i)));
  c.k = 10;
  c.seed = 5;
  c.iteration_budget = 12;
  c.eval_every = 5;
  c.batch_size = 4;
  c.runs = 1;
  c.crnn.input_height = 16;
  c.crnn.stem_channels = 4;
  c.crnn.stage_blocks = {1, 1};
  c.crnn.stage_channels = {4, 6};
  c.crnn.lstm_layers = 1;
  c.crnn.lstm_hidden = 6;
  c.max_width = 400;
  c.output_dir = out;
  return c;
}

Manifest text_manifest(const std::vector<std::pair<std::u32string, Split>>& rows) {
  Manifest m;
  for (std::size_t i = 0; i < rows.size(); ++i)
    m.rows.push_back({"img" + std::to_string(i) + ".pgm", rows[i].first, "x", rows[i].second});
  return m;
}

int tool(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "xscript");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

}  // namespace

TEST_CASE("K-subset sampling") {
  std::vector<std::pair<std::u32string, Split>> rows;
  for (int i = 0; i < 1000; ++i) rows.push_back({U"a", i % 10 == 0 ? Split::kVal : Split::kTrain});
  const Manifest m = text_manifest(rows);
  const auto train = m.indices_in(Split::kTrain);
  CHECK(sample_k_subset(m, static_cast<int>(train.size()), 3) == train);
  CHECK(sample_k_subset(m, std::nullopt, 3) == train);
  const auto a = sample_k_subset(m, 100, 3);
  CHECK(a.size() == 100);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(a == sample_k_subset(m, 100, 3));
  for (auto i : a) CHECK(m.rows[i].split == Split::kTrain);
  for (std::uint64_t s = 0; s < 10; ++s) CHECK(sample_k_subset(m, 100, 2 * s) != sample_k_subset(m, 100, 2 * s + 1));
  CHECK_THROWS_AS(sample_k_subset(m, static_cast<int>(train.size()) + 1, 3), ConfigError);
}

TEST_CASE("union vocabulary") {
  const auto one = text_manifest({{U"cab", Split::kTrain}, {U"zz", Split::kTest}});
  auto v = build_union_vocab(std::vector<Manifest>{one});
  CHECK(v.chars() == std::vector<char32_t>{U'a', U'b', U'c'});

  const auto x = text_manifest({{U"abc", Split::kTrain}});
  const auto y = text_manifest({{U"defg", Split::kVal}});
  v = build_union_vocab(std::vector<Manifest>{x, y});
  CHECK(v.num_chars() == 7);
  CHECK(v.num_classes() == 8);
  CHECK(build_union_vocab(std::vector<Manifest>{y, x}) == v);

  // full-size synthetic inventories: 30 shared, 1 + 9 + 0 unique
  const auto set = synth::make_overlap_scripts(30, {1, 9, 0}, 4);
  std::vector<Manifest> ms;
  for (const auto& p0 : set.scripts) {
    auto p = p0;
    p.script_id = "s";
    synth::CorpusOptions opts;
    opts.n_lines = 2000;
    std::vector<std::pair<std::u32string, Split>> rows;
    for (const auto& s : synth::sample_corpus_text(p, opts, 1)) rows.push_back({s.transcript, s.split});
    ms.push_back(text_manifest(rows));
  }
  v = build_union_vocab(ms);
  int glyphs = 0;
  for (char32_t c : v.chars()) glyphs += synth::glyph_id_of(c) >= 0;
  CHECK(glyphs == 40);
  CHECK(v.contains(synth::kWordSeparator));

  const auto empty = text_manifest({{U"", Split::kTrain}});
  CHECK_THROWS_AS(build_union_vocab(std::vector<Manifest>{empty}), DataError);
  CHECK(manifest_inventory(text_manifest({{U"a b", Split::kTest}})) == std::set<char32_t>{U'a', U'b'});
}

TEST_CASE("right-to-left labels are reversed once in and once out") {
  const Vocabulary v({U'a', U'b', U'c'});
  const auto ids = encode_for_training(U"abc", true, v);
  CHECK(ids == std::vector<int>{3, 2, 1});
  CHECK(decode_from_model(ids, true, v) == U"abc");
  CHECK(encode_for_training(U"abc", false, v) == std::vector<int>{1, 2, 3});
  CHECK(decode_from_model(encode_for_training(U"cab", false, v), false, v) == U"cab");
}

TEST_CASE("padding guarantees enough time steps") {
  for (int pools : {1, 2, 3}) {
    for (std::size_t len : {0u, 1u, 5u, 40u}) {
      const synth::InkImage img(16, 9, 0.0f);
      const auto padded = pad_for_ctc(img, len, pools);
      CHECK(padded.height == 16);
      CHECK(padded.width >= 9);
      CHECK(nn::crnn_sequence_length(padded.width, pools) >= static_cast<int>(2 * len + 1));
    }
  }
  const std::vector<std::u32string> t{U"ab a", U"b"};
  const auto f = char_frequencies(t);
  CHECK(f.at(U'a') == 2);
  CHECK(f.at(U'b') == 2);
  CHECK(f.count(U' ') == 0);
}

TEST_CASE("batch sampler composition") {
  // proportional: target share follows pool sizes
  BatchSampler prop({100, 1200, 1300}, SamplingMode::kProportional, 3);
  std::array<std::size_t, 3> counts{};
  for (int b = 0; b < 2600; ++b)
    for (const auto& [d, i] : prop.next(16)) ++counts[static_cast<std::size_t>(d)];
  const double total = 2600.0 * 16.0;
  CHECK(std::fabs(counts[0] / total - 100.0 / 2600.0) < 0.002);
  CHECK(std::fabs(counts[1] / total - 1200.0 / 2600.0) < 0.005);

  // balanced: every even slot is a target sample
  BatchSampler bal({10, 50, 70}, SamplingMode::kBalanced, 3);
  for (int b = 0; b < 50; ++b) {
    const auto batch = bal.next(8);
    for (std::size_t s = 0; s < batch.size(); ++s) CHECK((batch[s].first == 0) == (s % 2 == 0));
  }

  // single dataset: only target draws, each sample once per cycle
  BatchSampler only({7}, SamplingMode::kProportional, 1);
  std::map<std::size_t, int> seen;
  for (int b = 0; b < 7; ++b)
    for (const auto& [d, i] : only.next(1)) {
      CHECK(d == 0);
      ++seen[i];
    }
  CHECK(seen.size() == 7);
}

TEST_CASE("experiment config parsing") {
  const auto base = scratch("cfg");
  const auto j = nlohmann::json::parse(R"({
    "target": {"id": "t", "manifest": "t/manifest.tsv", "rtl": true},
    "auxiliaries": [{"id": "a", "manifest": "/abs/a.tsv"}],
    "K": 100, "sampling_mode": "balanced", "output_dir": "out"})");
  const auto c = parse_experiment_config(j, base);
  CHECK(c.j() == 1);
  CHECK(c.k_label() == "100");
  CHECK(c.target.manifest == base / "t/manifest.tsv");
  CHECK(c.auxiliaries[0].manifest == fs::path("/abs/a.tsv"));
  CHECK(c.sampling_mode == SamplingMode::kBalanced);
  const auto back = parse_experiment_config(experiment_config_to_json(c), base);
  CHECK(experiment_config_to_json(back) == experiment_config_to_json(c));

  auto bad = j;
  bad["bogus"] = 1;
  CHECK_THROWS_AS(parse_experiment_config(bad, base), ConfigError);
  bad = j;
  bad["K"] = "most";
  CHECK_THROWS_AS(parse_experiment_config(bad, base), ConfigError);
  bad = j;
  bad["auxiliaries"][0]["id"] = "t";
  CHECK_THROWS_AS(parse_experiment_config(bad, base), ConfigError);
  bad = j;
  bad["iteration_budget"] = 0;
  CHECK_THROWS_AS(parse_experiment_config(bad, base), ConfigError);
  CHECK_THROWS_AS(read_json_file(base / "missing.json"), DataError);
  spit(base / "broken.json", "{ nope");
  CHECK_THROWS_AS(read_json_file(base / "broken.json"), ConfigError);
}

TEST_CASE("single-script runs touch only the target") {
  const auto out = scratch("j0");
  const auto cfg = tiny_experiment(0, out);
  RunOptions opts;
  opts.record_access_log = true;
  const auto r = run_training(cfg, 0, out / "run0", opts);
  CHECK(r.access_log.size() == static_cast<std::size_t>(cfg.iteration_budget * cfg.batch_size));
  for (const auto& id : r.access_log) CHECK(id.rfind("t:", 0) == 0);
  CHECK(r.draws.size() == 1);
  for (const char* f : {"checkpoint.bin", "train_log.csv", "predictions.tsv", "k_subset.tsv", "summary.json"})
    CHECK(fs::exists(out / "run0" / f));
}

TEST_CASE("multi-script runs draw proportionally from the union") {
  const auto out = scratch("j2");
  const auto cfg = tiny_experiment(2, out);
  RunOptions opts;
  opts.record_access_log = true;
  const auto r = run_training(cfg, 0, out / "run0", opts);
  const auto aux_train = read_manifest(ref(1).manifest).indices_in(Split::kTrain).size() +
                         read_manifest(ref(2).manifest).indices_in(Split::kTrain).size();
  // one full cycle over the union holds each sample exactly once
  const std::size_t cycle = 10 + aux_train;
  std::size_t target_in_cycle = 0;
  for (std::size_t i = 0; i < std::min(cycle, r.access_log.size()); ++i)
    target_in_cycle += r.access_log[i].rfind("t:", 0) == 0;
  if (r.access_log.size() >= cycle) CHECK(target_in_cycle == 10);
  CHECK(r.draws.at("t") + r.draws.at("a") + r.draws.at("b") == cfg.iteration_budget * cfg.batch_size);
}

TEST_CASE("deterministic runs are byte-identical and K-subsets are shared across J") {
  const auto d1 = scratch("det1"), d2 = scratch("det2"), d3 = scratch("det3");
  const auto cfg = tiny_experiment(1, d1);
  run_training(cfg, 0, d1 / "run0");
  run_training(cfg, 0, d2 / "run0");
  for (const char* f : {"checkpoint.bin", "predictions.tsv", "train_log.csv", "k_subset.tsv", "summary.json"})
    CHECK_MESSAGE(slurp(d1 / "run0" / f) == slurp(d2 / "run0" / f), f);

  run_training(tiny_experiment(0, d3), 0, d3 / "run0");
  run_training(tiny_experiment(2, d3), 0, d3 / "run0j2");
  CHECK(slurp(d1 / "run0" / "k_subset.tsv") == slurp(d3 / "run0" / "k_subset.tsv"));
  CHECK(slurp(d1 / "run0" / "k_subset.tsv") == slurp(d3 / "run0j2" / "k_subset.tsv"));
  // the subset does not depend on the run index either
  run_training(tiny_experiment(0, d3), 1, d3 / "run1");
  CHECK(slurp(d3 / "run0" / "k_subset.tsv") == slurp(d3 / "run1" / "k_subset.tsv"));
  CHECK(slurp(d3 / "run0" / "checkpoint.bin") != slurp(d3 / "run1" / "checkpoint.bin"));
}

TEST_CASE("reported test CER comes from the best validation checkpoint") {
  const auto out = scratch("best");
  auto cfg = tiny_experiment(0, out);
  cfg.iteration_budget = 30;
  cfg.eval_every = 4;
  const auto r = run_training(cfg, 0, out / "run0");
  std::ifstream log(out / "run0" / "train_log.csv");
  std::string line;
  std::getline(log, line);
  CHECK(line == "step,lr,loss,val_cer");
  double best = 2.0;
  std::int64_t best_step = -1, last_eval = -1;
  while (std::getline(log, line)) {
    const auto f = split_fields(line, ',');
    REQUIRE(f.size() == 4);
    if (f[3].empty()) continue;
    const double v = std::stod(f[3]);
    last_eval = std::stoll(f[0]);
    if (v < best) {
      best = v;
      best_step = last_eval;
    }
  }
  CHECK(last_eval == cfg.iteration_budget);
  CHECK(r.best_step == best_step);
  CHECK(std::fabs(r.best_val_cer - best) < 1e-6);
  const auto summary = read_json_file(out / "run0" / "summary.json");
  CHECK(summary.at("best_step").get<std::int64_t>() == best_step);
  CHECK(summary.at("iteration_budget").get<std::int64_t>() == cfg.iteration_budget);

  // the saved checkpoint is the best one and reproduces the test numbers
  const auto ckpt = nn::load_checkpoint(out / "run0" / "checkpoint.bin");
  CHECK(model_from_checkpoint(ckpt).step == best_step);
  const auto e1 = evaluate_checkpoint(out / "run0" / "checkpoint.bin", cfg.target, Split::kTest, cfg.max_width);
  const auto e2 = evaluate_checkpoint(out / "run0" / "checkpoint.bin", cfg.target, Split::kTest, cfg.max_width, 3);
  CHECK(e1.cer == r.test_cer);
  CHECK(e2.cer == e1.cer);
  REQUIRE(e1.predictions.size() == r.test_predictions.size());
  for (std::size_t i = 0; i < e1.predictions.size(); ++i) {
    CHECK(e1.predictions[i].sample_id == r.test_predictions[i].sample_id);
    CHECK(e1.predictions[i].hypothesis == r.test_predictions[i].hypothesis);
    CHECK(e2.predictions[i].hypothesis == e1.predictions[i].hypothesis);
  }
}

TEST_CASE("evaluation errors") {
  const auto out = scratch("evalerr");
  const auto cfg = tiny_experiment(0, out);
  run_training(cfg, 0, out / "run0");
  const auto ckpt = out / "run0" / "checkpoint.bin";

  // a split with no rows
  const auto m = read_manifest(cfg.target.manifest);
  std::vector<ManifestRow> no_test;
  for (const auto& row : m.rows)
    if (row.split != Split::kTest) no_test.push_back({fs::absolute(m.resolve(row)).string(), row.transcript, row.script_id, row.split});
  write_manifest(out / "no_test.tsv", no_test);
  CHECK_THROWS_AS(evaluate_checkpoint(ckpt, {"t", out / "no_test.tsv", true}, Split::kTest, 400), DataError);

  // characters the checkpoint never saw
  std::vector<ManifestRow> alien{{fs::absolute(m.resolve(m.rows[0])).string(), U"一", "t", Split::kTest}};
  write_manifest(out / "alien.tsv", alien);
  try {
    evaluate_checkpoint(ckpt, {"t", out / "alien.tsv", true}, Split::kTest, 400);
    CHECK(false);
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("U+4E00") != std::string::npos);
  }
}

TEST_CASE("a single memorized line decodes with zero error") {
  const auto out = scratch("overfit");
  const auto m = read_manifest(ref(0).manifest);
  const auto& row = m.rows[m.indices_in(Split::kTrain)[0]];
  const auto img = fs::absolute(m.resolve(row)).string();
  std::vector<ManifestRow> rows{{img, row.transcript, "t", Split::kTrain}, {img, row.transcript, "t", Split::kVal},
                                {img, row.transcript, "t", Split::kTest}};
  write_manifest(out / "one.tsv", rows);
  auto cfg = tiny_experiment(0, out);
  cfg.target = {"t", out / "one.tsv", true};
  cfg.k = 1;
  cfg.batch_size = 1;
  cfg.iteration_budget = 400;
  cfg.eval_every = 50;
  cfg.crnn.lstm_hidden = 16;
  cfg.optimizer.lr = 3e-3;
  cfg.optimizer.weight_decay = 0.0;
  cfg.augment = synth::AugmentConfig::disabled();
  const auto r = run_training(cfg, 0, out / "run0");
  CHECK(r.test_cer == 0.0);
  CHECK(r.test_predictions.at(0).hypothesis == row.transcript);
}

TEST_CASE("transfer analysis") {
  using metrics::Prediction;
  const std::vector<Prediction> single{{"t:1", U"abx", U"abx"}, {"t:2", U"aay", U"ay"}, {"t:3", U"b", U"c"}};
  const std::vector<Prediction> multi{{"t:1", U"abx", U"abb"}, {"t:2", U"aay", U"aay"}, {"t:3", U"b", U"b"}};
  TransferInputs in;
  in.target = "t";
  in.inventories = {{"t", {U'a', U'b', U'x', U'y', U'w'}}, {"u", {U'a', U'b', U'z'}}};
  in.train_freq_single = {{U'a', 4}, {U'b', 40}, {U'x', 3}, {U'y', 1}};
  in.train_freq_multi = {{U'a', 400}, {U'b', 90}, {U'x', 3}, {U'y', 1}, {U'z', 7}};

  in.single_runs = {single};
  in.multi_runs = {single};
  auto rep = analyze_transfer(in);
  for (const auto& [c, d] : rep.delta) CHECK(*d == 0.0);
  CHECK(rep.mean_shared == 0.0);
  CHECK(rep.mean_unique == 0.0);
  // w never occurs in the test references and is left out of the groups
  CHECK(rep.partition.unique_per_script.at("t").count(U'w') == 1);
  CHECK(rep.shared.size() == 2);
  CHECK(rep.unique.size() == 2);

  in.multi_runs = {multi};
  rep = analyze_transfer(in);
  // a: 1/3 -> 0, b: 1/2 -> 0, x: 0 -> 1, y: 0 -> 0
  CHECK(*rep.delta.at(U'a') == doctest::Approx(-100.0 / 3.0));
  CHECK(*rep.delta.at(U'b') == doctest::Approx(-50.0));
  CHECK(*rep.delta.at(U'x') == doctest::Approx(100.0));
  CHECK(rep.mean_shared == doctest::Approx(-125.0 / 3.0));
  CHECK(rep.mean_unique == doctest::Approx(50.0));
  REQUIRE(rep.welch.has_value());
  CHECK(rep.welch->t < 0.0);
  std::size_t binned = 0;
  for (const auto& b : rep.curve) binned += b.count;
  CHECK(binned == 2);

  const auto dir = scratch("analysis");
  write_transfer_report(rep, dir);
  for (const char* f : {"table4.csv", "table5_shared.csv", "table6_unique.csv", "delta_cer.csv", "fig6.svg"})
    CHECK(fs::file_size(dir / f) > 0);
  CHECK(slurp(dir / "table4.csv").rfind("n_shared,n_unique,mean_delta_shared_pp", 0) == 0);

  // runs are pooled: duplicating every run leaves the rates unchanged
  in.single_runs = {single, single};
  in.multi_runs = {multi, multi};
  CHECK(*analyze_transfer(in).delta.at(U'a') == doctest::Approx(-100.0 / 3.0));

  auto shifted = multi;
  shifted[0].sample_id = "t:9";
  in.multi_runs = {shifted};
  CHECK_THROWS_AS(analyze_transfer(in), DataError);
  shifted = multi;
  shifted[1].reference = U"aaa";
  in.multi_runs = {shifted};
  CHECK_THROWS_AS(analyze_transfer(in), DataError);
}

TEST_CASE("lowest bin criterion") {
  CHECK(lowest_bin_improves_most({{0.5, -9.0, 3}, {1.5, -2.0, 4}, {2.5, -1.0, 2}}));
  CHECK(!lowest_bin_improves_most({{0.5, -2.0, 3}, {1.5, -9.0, 4}}));
  CHECK(!lowest_bin_improves_most({{0.5, -2.0, 3}}));
  CHECK(!lowest_bin_improves_most({{0.5, -2.0, 3}, {1.5, -2.0, 4}}));
}

TEST_CASE("run aggregation") {
  const std::vector<double> v{0.1, 0.2, 0.4};
  const auto ms = mean_std(v);
  CHECK(ms.mean == doctest::Approx(0.7 / 3.0));
  CHECK(ms.std == doctest::Approx(std::sqrt(((0.1 - 0.7 / 3) * (0.1 - 0.7 / 3) + (0.2 - 0.7 / 3) * (0.2 - 0.7 / 3) +
                                             (0.4 - 0.7 / 3) * (0.4 - 0.7 / 3)) /
                                            2.0)));
  CHECK(ms.n == 3);
  const std::vector<double> single{0.3};
  CHECK(mean_std(single).std == 0.0);
  CHECK_THROWS_AS(mean_std(std::vector<double>{}), DataError);

  const auto dir = scratch("aggregate");
  auto cfg = tiny_experiment(2, dir);
  for (int i = 0; i < 3; ++i) {
    nlohmann::json s{{"status", "ok"}, {"test_cer", v[static_cast<std::size_t>(i)]},
                     {"config", experiment_config_to_json(cfg)}};
    spit(dir / ("run" + std::to_string(i)) / "summary.json", s.dump());
  }
  const auto row = aggregate_runs(dir);
  CHECK(row.j == 2);
  CHECK(row.k == "10");
  CHECK(row.target == "t");
  CHECK(row.cer.mean == doctest::Approx(ms.mean));
  CHECK(row.cer.std == doctest::Approx(ms.std));
  const std::vector<AggregateRow> rows{row};
  write_aggregate_csv(rows, dir / "agg.csv");
  const auto text = slurp(dir / "agg.csv");
  CHECK(text.find("t,2,10,proportional,3,23.3333,15.2753,10.0000;20.0000;40.0000") != std::string::npos);

  spit(dir / "run1" / "summary.json", nlohmann::json{{"status", "diverged"}}.dump());
  CHECK_THROWS_AS(aggregate_runs(dir), DataError);
  CHECK_THROWS_AS(aggregate_runs(scratch("empty")), DataError);
}

TEST_CASE("diversity table over K-subsets") {
  const std::vector<DatasetRef> ds{ref(0), ref(1)};
  const std::vector<std::optional<int>> ks{10, std::nullopt, 1000};
  const auto rows = diversity_table(ds, ks, 5);
  CHECK(rows.size() == 4);  // K=1000 exceeds both train splits
  CHECK(rows[0].k == "10");
  CHECK(rows[0].stats.total_lines == 10);
  CHECK(rows[1].k == "full");
  CHECK(rows[1].stats.total_lines == read_manifest(ref(0).manifest).indices_in(Split::kTrain).size());
  const auto dir = scratch("div");
  write_diversity_csv(rows, dir / "d.csv");
  CHECK(slurp(dir / "d.csv").rfind("dataset,K,lines,unique_lines,duplication_ratio", 0) == 0);
}

TEST_CASE("command line tool") {
  std::string text;
  CHECK(tool({}, &text) != 0);
  CHECK(tool({"train", "--bogus"}) == cli::kExitConfig);
  CHECK(tool({"train", "--config", "/nonexistent.json"}) == cli::kExitConfig);
  CHECK(tool({"frobnicate"}) == cli::kExitConfig);

  const auto dir = scratch("cli");
  spit(dir / "bad.json", R"({"target": {"id": "t", "manifest": "nope.tsv"}, "K": 1, "runs": 1})");
  CHECK(tool({"train", "--config", (dir / "bad.json").string()}) == cli::kExitData);
  spit(dir / "bad2.json", R"({"target": {"id": "t", "manifest": "nope.tsv"}, "K": -3})");
  CHECK(tool({"train", "--config", (dir / "bad2.json").string()}) == cli::kExitConfig);

  // gen-data then stats recovers the injected duplication
  spit(dir / "data.json", R"({"seed": 2, "n_shared": 6, "uniques": [2, 1], "render_height": 16, "scripts": [
      {"id": "p", "n_lines": 400, "line_length": [3, 6], "duplication": 0.33, "lexicon_size": 50,
       "splits": [1.0, 0.0, 0.0]},
      {"id": "q", "n_lines": 20, "line_length": [2, 3]}]})");
  REQUIRE(tool({"gen-data", "--config", (dir / "data.json").string(), "--out", (dir / "data").string()}, &text) == 0);
  spit(dir / "exp.json", R"({"target": {"id": "p", "manifest": "data/p/manifest.tsv"}, "K": 1})");
  REQUIRE(tool({"stats", "--config", (dir / "exp.json").string(), "--k", "full", "--out", (dir / "div.csv").string()},
              &text) == 0);
  std::istringstream csv(slurp(dir / "div.csv"));
  std::string header, line;
  std::getline(csv, header);
  std::getline(csv, line);
  const auto f = split_fields(line, ',');
  REQUIRE(f.size() > 4);
  CHECK(f[0] == "p");
  CHECK(std::fabs(std::stod(f[4]) - 0.33) <= 0.03);
}

TEST_CASE("train, analyze and report end to end through the tool") {
  const auto dir = scratch("e2e");
  for (int j : {0, 2}) {
    auto cfg = tiny_experiment(j, dir / ("j" + std::to_string(j)));
    cfg.runs = 2;
    spit(dir / ("j" + std::to_string(j) + ".json"), experiment_config_to_json(cfg).dump(2));
    REQUIRE(tool({"train", "--config", (dir / ("j" + std::to_string(j) + ".json")).string(), "--deterministic"}) == 0);
  }
  std::string text;
  REQUIRE(tool({"analyze", "--single", (dir / "j0").string(), "--multi", (dir / "j2").string(), "--out",
               (dir / "an").string()},
              &text) == 0);
  CHECK(fs::exists(dir / "an" / "table4.csv"));
  CHECK(fs::exists(dir / "an" / "fig6.svg"));
  REQUIRE(tool({"report", (dir / "j0").string(), (dir / "j2").string(), "--out", (dir / "table1.csv").string()}) == 0);
  const auto rows = std::vector<AggregateRow>{aggregate_runs(dir / "j0"), aggregate_runs(dir / "j2")};
  CHECK(rows[0].cer.n == 2);
  write_aggregate_csv(rows, dir / "expected.csv");
  CHECK(slurp(dir / "table1.csv") == slurp(dir / "expected.csv"));

  REQUIRE(tool({"eval", "--checkpoint", (dir / "j0" / "run0" / "checkpoint.bin").string(), "--config",
               (dir / "j0.json").string(), "--split", "test", "--predictions", (dir / "p.tsv").string()},
              &text) == 0);
  CHECK(slurp(dir / "p.tsv") == slurp(dir / "j0" / "run0" / "predictions.tsv"));

  // paradigms with different budgets are not comparable
  auto other = tiny_experiment(2, dir / "j2b");
  other.iteration_budget = 13;
  spit(dir / "j2b.json", experiment_config_to_json(other).dump(2));
  REQUIRE(tool({"train", "--config", (dir / "j2b.json").string()}) == 0);
  CHECK(tool({"analyze", "--single", (dir / "j0").string(), "--multi", (dir / "j2b").string(), "--out",
             (dir / "an2").string()}) == cli::kExitConfig);
}
