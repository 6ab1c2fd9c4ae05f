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
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "xscript/experiment/config.hpp"
#include "xscript/experiment/dataset.hpp"
#include "xscript/metrics.hpp"
#include "xscript/nn/checkpoint.hpp"
#include "xscript/nn/crnn.hpp"

namespace xscript::exp {

// Draw order over the training pool. Entries are (dataset index, sample
// index); dataset 0 is the target.
class BatchSampler {
 public:
  BatchSampler(std::vector<std::size_t> pool_sizes, SamplingMode mode, std::uint64_t seed);
  std::vector<std::pair<int, std::size_t>> next(int batch_size);

 private:
  struct Cycle {
    std::vector<std::pair<int, std::size_t>> order;
    std::size_t pos = 0;
  };
  std::pair<int, std::size_t> draw(Cycle& c);

  SamplingMode mode_;
  Rng rng_;
  Cycle all_, target_, aux_;
};

struct EvalResult {
  double cer = 0.0;
  std::vector<metrics::Prediction> predictions;
};

// Eval-mode forward, greedy decoding and right-to-left un-reversal.
EvalResult evaluate_samples(const nn::Crnn<float>& model, const std::vector<LoadedSample>& samples,
                            const Vocabulary& vocab, bool rtl, int threads = 1);

struct LoadedModel {
  std::unique_ptr<nn::Crnn<float>> model;
  Vocabulary vocab;
  std::int64_t step = 0;
};

nn::Checkpoint make_checkpoint(nn::Crnn<float>& model, const Vocabulary& vocab, std::int64_t step,
                               const nn::TensorList<float>* moments = nullptr);
LoadedModel model_from_checkpoint(const nn::Checkpoint& ckpt);

// Evaluates a saved checkpoint on one split of a manifest. Throws DataError
// for empty splits or characters missing from the checkpoint vocabulary.
EvalResult evaluate_checkpoint(const std::filesystem::path& checkpoint, const DatasetRef& dataset, Split split,
                               int max_width, int threads = 1);

struct RunResult {
  std::filesystem::path dir;
  std::int64_t best_step = 0;
  double best_val_cer = 1.0;
  double test_cer = 1.0;
  std::vector<metrics::Prediction> test_predictions;
  std::map<std::string, std::int64_t> draws;  // samples drawn per dataset id
  std::vector<std::string> access_log;        // sample ids in draw order, when requested
};

struct RunOptions {
  bool record_access_log = false;
  bool verbose = false;
};

// One training run of `cfg` with run seed cfg.seed + run_index. Writes
// checkpoint.bin, train_log.csv, predictions.tsv, k_subset.tsv and
// summary.json into `dir`.
RunResult run_training(const ExperimentConfig& cfg, int run_index, const std::filesystem::path& dir,
                       const RunOptions& opts = {});

// All runs of an experiment into <output_dir>/run<i>; returns per-run results.
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

}  // namespace xscript::exp
