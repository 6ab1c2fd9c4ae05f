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

#include "xscript/experiment/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace xscript::exp {

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : keys) ok = ok || item.key() == k;
    if (!ok) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

DatasetRef parse_dataset(const nlohmann::json& j, const std::filesystem::path& base) {
  reject_unknown(j, {"id", "manifest", "rtl"}, "dataset entry");
  DatasetRef d;
  d.id = j.at("id").get<std::string>();
  d.manifest = resolve(base, j.at("manifest").get<std::string>());
  d.rtl = j.value("rtl", false);
  return d;
}

nlohmann::json dataset_json(const DatasetRef& d) {
  return {{"id", d.id}, {"manifest", d.manifest.generic_string()}, {"rtl", d.rtl}};
}

OptimizerConfig parse_optimizer(const nlohmann::json& j) {
  reject_unknown(j, {"lr", "weight_decay", "beta1", "beta2", "eps", "milestones", "decay", "clip_norm"},
                 "optimizer");
  OptimizerConfig o;
  o.lr = j.value("lr", o.lr);
  o.weight_decay = j.value("weight_decay", o.weight_decay);
  o.beta1 = j.value("beta1", o.beta1);
  o.beta2 = j.value("beta2", o.beta2);
  o.eps = j.value("eps", o.eps);
  o.milestones = j.value("milestones", o.milestones);
  o.decay = j.value("decay", o.decay);
  o.clip_norm = j.value("clip_norm", o.clip_norm);
  return o;
}

}  // namespace

std::string sampling_mode_name(SamplingMode m) {
  return m == SamplingMode::kBalanced ? "balanced" : "proportional";
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("experiment config: " + m); };
  if (target.id.empty()) fail("target id missing");
  std::set<std::string> ids{target.id};
  for (const auto& a : auxiliaries) {
    if (a.id.empty() || !ids.insert(a.id).second) fail("dataset ids must be unique and non-empty");
  }
  if (k && *k < 1) fail("K must be >= 1 or \"full\"");
  if (iteration_budget < 1) fail("iteration_budget must be >= 1");
  if (eval_every < 1) fail("eval_every must be >= 1");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (runs < 1) fail("runs must be >= 1");
  if (max_width < 8) fail("max_width must be >= 8");
  if (optimizer.lr <= 0.0 || optimizer.weight_decay < 0.0 || optimizer.decay <= 0.0) fail("invalid optimizer values");
  for (double m : optimizer.milestones) {
    if (m < 0.0 || m > 1.0) fail("milestones are budget fractions in [0, 1]");
  }
  nn::CrnnConfig probe = crnn;
  probe.vocab_size = std::max(1, probe.vocab_size);
  probe.validate();
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j,
                 {"target", "auxiliaries", "K", "seed", "iteration_budget", "eval_every", "batch_size",
                  "sampling_mode", "runs", "deterministic", "crnn", "optimizer", "max_width", "augment",
                  "output_dir"},
                 "experiment config");
  ExperimentConfig c;
  try {
    c.target = parse_dataset(j.at("target"), base_dir);
    if (j.contains("auxiliaries")) {
      for (const auto& a : j.at("auxiliaries")) c.auxiliaries.push_back(parse_dataset(a, base_dir));
    }
    if (j.contains("K")) {
      const auto& k = j.at("K");
      if (k.is_string()) {
        if (k.get<std::string>() != "full") throw ConfigError("experiment config: K must be a count or \"full\"");
      } else {
        c.k = k.get<int>();
      }
    }
    c.seed = j.value("seed", c.seed);
    c.iteration_budget = j.value("iteration_budget", c.iteration_budget);
    c.eval_every = j.value("eval_every", c.eval_every);
    c.batch_size = j.value("batch_size", c.batch_size);
    if (j.contains("sampling_mode")) {
      const auto m = j.at("sampling_mode").get<std::string>();
      if (m == "proportional") {
        c.sampling_mode = SamplingMode::kProportional;
      } else if (m == "balanced") {
        c.sampling_mode = SamplingMode::kBalanced;
      } else {
        throw ConfigError("experiment config: sampling_mode must be \"proportional\" or \"balanced\"");
      }
    }
    c.runs = j.value("runs", c.runs);
    c.deterministic = j.value("deterministic", c.deterministic);
    if (j.contains("crnn")) c.crnn = j.at("crnn").get<nn::CrnnConfig>();
    if (j.contains("optimizer")) c.optimizer = parse_optimizer(j.at("optimizer"));
    c.max_width = j.value("max_width", c.max_width);
    if (j.contains("augment")) c.augment = j.at("augment").get<synth::AugmentConfig>();
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_json_file(path), path.parent_path());
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& c) {
  nlohmann::json aux = nlohmann::json::array();
  for (const auto& a : c.auxiliaries) aux.push_back(dataset_json(a));
  nlohmann::json opt{{"lr", c.optimizer.lr},
                     {"weight_decay", c.optimizer.weight_decay},
                     {"beta1", c.optimizer.beta1},
                     {"beta2", c.optimizer.beta2},
                     {"eps", c.optimizer.eps},
                     {"milestones", c.optimizer.milestones},
                     {"decay", c.optimizer.decay},
                     {"clip_norm", c.optimizer.clip_norm}};
  nlohmann::json j{{"target", dataset_json(c.target)},
                   {"auxiliaries", aux},
                   {"seed", c.seed},
                   {"iteration_budget", c.iteration_budget},
                   {"eval_every", c.eval_every},
                   {"batch_size", c.batch_size},
                   {"sampling_mode", sampling_mode_name(c.sampling_mode)},
                   {"runs", c.runs},
                   {"deterministic", c.deterministic},
                   {"crnn", c.crnn},
                   {"optimizer", opt},
                   {"max_width", c.max_width},
                   {"augment", c.augment},
                   {"output_dir", c.output_dir.generic_string()}};
  if (c.k) {
    j["K"] = *c.k;
  } else {
    j["K"] = "full";
  }
  return j;
}

}  // namespace xscript::exp
