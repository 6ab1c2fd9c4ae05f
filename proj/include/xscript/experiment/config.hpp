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
#include <string>
#include <vector>

#include "json.hpp"
#include "xscript/nn/crnn.hpp"
#include "xscript/synth/augment.hpp"

namespace xscript::exp {

struct DatasetRef {
  std::string id;
  std::filesystem::path manifest;
  bool rtl = false;
};

enum class SamplingMode { kProportional, kBalanced };

struct OptimizerConfig {
  double lr = 5e-4;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> milestones{0.5, 0.75};
  double decay = 0.1;
  double clip_norm = 0.0;  // 0 disables clipping
};

struct ExperimentConfig {
  DatasetRef target;
  std::vector<DatasetRef> auxiliaries;  // J = size
  std::optional<int> k;                 // nullopt = full train split
  std::uint64_t seed = 1;
  std::int64_t iteration_budget = 3000;
  std::int64_t eval_every = 200;
  int batch_size = 16;
  SamplingMode sampling_mode = SamplingMode::kProportional;
  int runs = 3;
  bool deterministic = true;
  nn::CrnnConfig crnn;  // vocab_size is filled in from the union vocabulary
  OptimizerConfig optimizer;
  int max_width = 1450;
  synth::AugmentConfig augment;
  std::filesystem::path output_dir = "runs";

  int j() const { return static_cast<int>(auxiliaries.size()); }
  std::string k_label() const { return k ? std::to_string(*k) : "full"; }
  void validate() const;
};

// Relative manifest and output paths are resolved against `base_dir`.
ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

nlohmann::json read_json_file(const std::filesystem::path& path);  // DataError / ConfigError

std::string sampling_mode_name(SamplingMode m);

}  // namespace xscript::exp
