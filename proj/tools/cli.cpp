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

#include "cli.hpp"

#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xscript/common.hpp"
#include "xscript/experiment/analysis.hpp"
#include "xscript/experiment/config.hpp"
#include "xscript/experiment/report.hpp"
#include "xscript/experiment/trainer.hpp"
#include "xscript/synth/corpus.hpp"

namespace xscript::cli {

namespace fs = std::filesystem;

namespace {

struct Args {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  std::string out;

  // train
  std::optional<int> run_index;
  bool verbose = false;

  // stats
  std::vector<std::string> ks{"100", "500", "1000"};

  // eval
  std::string checkpoint, manifest, split = "test", predictions;
  bool rtl = false;
  int max_width = 1450;

  // analyze
  std::string single_dir, multi_dir, shared_mode = "all";
  int bins = 5;
  std::size_t min_count = 15, rows = 10;

  // report
  std::vector<std::string> experiments;
};

exp::ExperimentConfig experiment_config(const Args& a) {
  exp::ExperimentConfig cfg = exp::load_experiment_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.deterministic) cfg.deterministic = true;
  if (!a.out.empty()) cfg.output_dir = a.out;
  return cfg;
}

void cmd_gen_data(const Args& a, std::ostream& out) {
  synth::DataGenConfig cfg = synth::parse_datagen_config(exp::read_json_file(a.config));
  if (a.seed) cfg.seed = *a.seed;
  for (const auto& d : synth::generate_benchmark(cfg, a.out)) {
    out << d.id << '\t' << d.manifest.generic_string() << '\t' << (d.rtl ? "rtl" : "ltr") << '\n';
  }
}

void cmd_stats(const Args& a, std::ostream& out) {
  exp::ExperimentConfig cfg = exp::load_experiment_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  std::vector<exp::DatasetRef> datasets{cfg.target};
  datasets.insert(datasets.end(), cfg.auxiliaries.begin(), cfg.auxiliaries.end());
  std::vector<std::optional<int>> ks;
  for (const auto& k : a.ks) {
    if (k == "full") {
      ks.emplace_back();
      continue;
    }
    try {
      std::size_t used = 0;
      const int v = std::stoi(k, &used);
      if (used != k.size() || v < 1) throw std::invalid_argument(k);
      ks.emplace_back(v);
    } catch (const std::logic_error&) {
      throw ConfigError("--k: expected a positive count or \"full\", got '" + k + "'");
    }
  }
  const auto rows = exp::diversity_table(datasets, ks, cfg.seed);
  exp::write_diversity_csv(rows, a.out);
  out << "wrote " << rows.size() << " rows to " << a.out << '\n';
}

void cmd_train(const Args& a, std::ostream& out) {
  const exp::ExperimentConfig cfg = experiment_config(a);
  exp::RunOptions opts;
  opts.verbose = a.verbose;
  std::vector<exp::RunResult> results;
  if (a.run_index) {
    if (*a.run_index < 0 || *a.run_index >= cfg.runs) throw ConfigError("--run must lie in [0, runs)");
    results.push_back(exp::run_training(cfg, *a.run_index, cfg.output_dir / ("run" + std::to_string(*a.run_index)),
                                        opts));
  } else {
    results = exp::run_experiment(cfg, opts);
  }
  out << std::fixed << std::setprecision(4);
  for (const auto& r : results) {
    out << r.dir.generic_string() << "\tbest_step=" << r.best_step << "\tval_cer=" << 100.0 * r.best_val_cer
        << "\ttest_cer=" << 100.0 * r.test_cer << '\n';
  }
}

void cmd_eval(const Args& a, std::ostream& out) {
  exp::DatasetRef ds;
  int max_width = a.max_width;
  if (!a.config.empty()) {
    const exp::ExperimentConfig cfg = exp::load_experiment_config(a.config);
    ds = cfg.target;
    max_width = cfg.max_width;
  }
  if (!a.manifest.empty()) {
    ds.id = fs::path(a.manifest).parent_path().filename().string();
    ds.manifest = a.manifest;
    ds.rtl = a.rtl;
  }
  if (ds.manifest.empty()) throw ConfigError("eval needs --manifest or --config");
  if (ds.id.empty()) ds.id = "data";
  const exp::EvalResult r = exp::evaluate_checkpoint(a.checkpoint, ds, parse_split(a.split), max_width, 1);
  if (!a.predictions.empty()) metrics::write_predictions(a.predictions, r.predictions);
  out << std::fixed << std::setprecision(4) << "cer=" << 100.0 * r.cer << "\tsamples=" << r.predictions.size()
      << '\n';
}

void cmd_analyze(const Args& a, std::ostream& out) {
  exp::TransferOptions opts;
  opts.bins = a.bins;
  opts.min_train_count = a.min_count;
  opts.shared_rows = a.rows;
  opts.shared_mode = a.shared_mode == "any" ? stats::SharedMode::kAnyPair : stats::SharedMode::kAllScripts;
  const exp::TransferReport rep = exp::analyze_transfer(exp::load_transfer_inputs(a.single_dir, a.multi_dir), opts);
  exp::write_transfer_report(rep, a.out);
  out << std::fixed << std::setprecision(4) << "n_shared=" << rep.shared.size() << "\tn_unique=" << rep.unique.size()
      << "\tmean_delta_shared=" << rep.mean_shared << "\tmean_delta_unique=" << rep.mean_unique;
  if (rep.welch) out << "\tp=" << rep.welch->p_value;
  out << '\n';
}

void cmd_report(const Args& a, std::ostream& out) {
  std::vector<exp::AggregateRow> rows;
  for (const auto& d : a.experiments) rows.push_back(exp::aggregate_runs(d));
  exp::write_aggregate_csv(rows, a.out);
  out << std::fixed << std::setprecision(4);
  for (const auto& r : rows) {
    out << r.target << "\tJ=" << r.j << "\tK=" << r.k << "\tcer=" << 100.0 * r.cer.mean << " +- "
        << 100.0 * r.cer.std << '\n';
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-script handwriting recognition experiments"};
  app.require_subcommand(1);
  Args a;

  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic multi-script benchmark");
  gen->add_option("--config", a.config, "Data generation JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", a.out, "Output directory")->required();
  gen->add_option("--seed", a.seed, "Override the root seed");

  auto* st = app.add_subcommand("stats", "Diversity statistics of train K-subsets (CSV)");
  st->add_option("--config", a.config, "Experiment JSON naming the datasets")->required()->check(CLI::ExistingFile);
  st->add_option("--k", a.ks, "Subset sizes (count or full)")->delimiter(',');
  st->add_option("--seed", a.seed, "Override the sampling seed");
  st->add_option("--out", a.out, "Output CSV")->required();

  auto* tr = app.add_subcommand("train", "Train all runs of an experiment");
  tr->add_option("--config", a.config, "Experiment JSON")->required()->check(CLI::ExistingFile);
  tr->add_option("--seed", a.seed, "Override the root seed");
  tr->add_flag("--deterministic", a.deterministic, "Single-threaded, bit-reproducible mode");
  tr->add_option("--out", a.out, "Override the output directory");
  tr->add_option("--run", a.run_index, "Train only this run index");
  tr->add_flag("-v,--verbose", a.verbose, "Progress on stderr");

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
  ev->add_option("--checkpoint", a.checkpoint, "checkpoint.bin")->required()->check(CLI::ExistingFile);
  ev->add_option("--manifest", a.manifest, "Manifest TSV")->check(CLI::ExistingFile);
  ev->add_option("--config", a.config, "Experiment JSON (uses its target)")->check(CLI::ExistingFile);
  ev->add_option("--split", a.split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
  ev->add_flag("--rtl", a.rtl, "Right-to-left script (with --manifest)");
  ev->add_option("--max-width", a.max_width, "Width cap after resizing");
  ev->add_option("--predictions", a.predictions, "Write predictions TSV");
  ev->add_flag("--deterministic", a.deterministic, "Accepted for symmetry; evaluation is always deterministic");

  auto* an = app.add_subcommand("analyze", "Character-level single vs multi-script comparison");
  an->add_option("--single", a.single_dir, "Single-script experiment directory")->required()->check(CLI::ExistingDirectory);
  an->add_option("--multi", a.multi_dir, "Multi-script experiment directory")->required()->check(CLI::ExistingDirectory);
  an->add_option("--out", a.out, "Report directory")->required();
  an->add_option("--bins", a.bins, "Frequency bins")->check(CLI::PositiveNumber);
  an->add_option("--min-count", a.min_count, "Training-count filter of the shared listing");
  an->add_option("--rows", a.rows, "Rows of the shared listing");
  an->add_option("--shared-mode", a.shared_mode, "all: in every script; any: in two or more")
      ->check(CLI::IsMember({"all", "any"}));

  auto* rp = app.add_subcommand("report", "Aggregate runs into mean and std CSV");
  rp->add_option("experiments", a.experiments, "Experiment output directories")->required()->check(CLI::ExistingDirectory);
  rp->add_option("--out", a.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    if (*gen) cmd_gen_data(a, out);
    if (*st) cmd_stats(a, out);
    if (*tr) cmd_train(a, out);
    if (*ev) cmd_eval(a, out);
    if (*an) cmd_analyze(a, out);
    if (*rp) cmd_report(a, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace xscript::cli
