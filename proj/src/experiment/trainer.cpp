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

#include "xscript/experiment/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "xscript/ctc.hpp"
#include "xscript/nn/optim.hpp"
#include "xscript/synth/augment.hpp"
#include "xscript/utf8.hpp"

namespace xscript::exp {

namespace fs = std::filesystem;

BatchSampler::BatchSampler(std::vector<std::size_t> pool_sizes, SamplingMode mode, std::uint64_t seed)
    : mode_(mode), rng_(derive_seed(seed, "sampler")) {
  if (pool_sizes.empty() || pool_sizes[0] == 0) throw DataError("sampler: the target pool is empty");
  for (std::size_t d = 0; d < pool_sizes.size(); ++d) {
    for (std::size_t i = 0; i < pool_sizes[d]; ++i) {
      all_.order.emplace_back(static_cast<int>(d), i);
      (d == 0 ? target_ : aux_).order.emplace_back(static_cast<int>(d), i);
    }
  }
  // Force a shuffle on first use.
  all_.pos = all_.order.size();
  target_.pos = target_.order.size();
  aux_.pos = aux_.order.size();
}

std::pair<int, std::size_t> BatchSampler::draw(Cycle& c) {
  if (c.pos >= c.order.size()) {
    shuffle(c.order.begin(), c.order.end(), rng_);
    c.pos = 0;
  }
  return c.order[c.pos++];
}

std::vector<std::pair<int, std::size_t>> BatchSampler::next(int batch_size) {
  std::vector<std::pair<int, std::size_t>> out;
  out.reserve(static_cast<std::size_t>(batch_size));
  const bool balanced = mode_ == SamplingMode::kBalanced && !aux_.order.empty();
  for (int i = 0; i < batch_size; ++i) {
    if (!balanced) {
      out.push_back(draw(all_));
    } else {
      out.push_back(draw(i % 2 == 0 ? target_ : aux_));
    }
  }
  return out;
}

EvalResult evaluate_samples(const nn::Crnn<float>& model, const std::vector<LoadedSample>& samples,
                            const Vocabulary& vocab, bool rtl, int threads) {
  if (samples.empty()) throw DataError("evaluation set is empty");
  EvalResult result;
  result.predictions.resize(samples.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const nn::Batch<float> logits = model.infer({to_tensor(samples[i].image)});
      const std::vector<int> ids = ctc::collapse(ctc::best_path(nn::to_logits(logits[0])));
      result.predictions[i] = {samples[i].id, samples[i].transcript, decode_from_model(ids, rtl, vocab)};
    }
  };
  const std::size_t n_threads =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, samples.size());
  if (n_threads == 1) {
    work(0, samples.size());
  } else {
    // Each sample's prediction is independent of the partition, so the
    // output does not depend on the thread count.
    std::vector<std::thread> pool;
    const std::size_t chunk = (samples.size() + n_threads - 1) / n_threads;
    for (std::size_t t = 0; t < n_threads; ++t) {
      const std::size_t b = t * chunk, e = std::min(samples.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  const auto pairs = metrics::to_pairs(result.predictions);
  result.cer = metrics::corpus_cer(pairs);
  return result;
}

nn::Checkpoint make_checkpoint(nn::Crnn<float>& model, const Vocabulary& vocab, std::int64_t step,
                               const nn::TensorList<float>* moments) {
  nn::Checkpoint ckpt;
  ckpt.config = model.config();
  ckpt.vocabulary = vocab.chars();
  ckpt.step = step;
  nn::export_tensors(model.parameters(), ckpt);
  nn::export_tensors(model.buffers(), ckpt);
  if (moments) nn::export_tensors(*moments, ckpt);
  return ckpt;
}

LoadedModel model_from_checkpoint(const nn::Checkpoint& ckpt) {
  nn::CrnnConfig cfg;
  try {
    cfg = ckpt.config.get<nn::CrnnConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint config: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint config: ") + e.what());
  }
  const std::set<char32_t> chars(ckpt.vocabulary.begin(), ckpt.vocabulary.end());
  if (chars.size() != ckpt.vocabulary.size()) throw DataError("checkpoint vocabulary has duplicates");
  LoadedModel out;
  out.vocab = Vocabulary(chars);
  if (out.vocab.chars() != ckpt.vocabulary) throw DataError("checkpoint vocabulary is not sorted");
  if (cfg.vocab_size != static_cast<int>(chars.size())) {
    throw DataError("checkpoint vocabulary size does not match its model config");
  }
  out.model = std::make_unique<nn::Crnn<float>>(cfg);
  nn::TensorList<float> tensors = out.model->parameters();
  const nn::TensorList<float> buffers = out.model->buffers();
  tensors.insert(tensors.end(), buffers.begin(), buffers.end());
  nn::import_tensors(ckpt, tensors);
  out.step = ckpt.step;
  return out;
}

namespace {

LoadOptions load_options(const nn::CrnnConfig& crnn, int max_width) {
  return {crnn.input_height, max_width, static_cast<int>(crnn.stage_channels.size()) - 1};
}

std::vector<LoadedSample> load_split(const Manifest& m, Split split, const DatasetRef& ds, const Vocabulary& vocab,
                                     const LoadOptions& opts) {
  const auto rows = m.indices_in(split);
  if (rows.empty()) {
    throw DataError("dataset '" + ds.id + "' has no " + std::string(split_name(split)) + " rows in '" +
                    m.source.string() + "'");
  }
  return load_samples(m, rows, ds.id, ds.rtl, vocab, opts);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::string format_real(double v) {
  std::ostringstream ss;
  ss << std::setprecision(9) << v;
  return ss.str();
}

}  // namespace

EvalResult evaluate_checkpoint(const fs::path& checkpoint, const DatasetRef& dataset, Split split, int max_width,
                               int threads) {
  const nn::Checkpoint ckpt = nn::load_checkpoint(checkpoint);
  const LoadedModel lm = model_from_checkpoint(ckpt);
  const Manifest m = read_manifest(dataset.manifest);
  const auto samples = load_split(m, split, dataset, lm.vocab, load_options(lm.model->config(), max_width));
  return evaluate_samples(*lm.model, samples, lm.vocab, dataset.rtl, threads);
}

RunResult run_training(const ExperimentConfig& cfg, int run_index, const fs::path& dir, const RunOptions& opts) {
  cfg.validate();
  fs::create_directories(dir);
  const std::uint64_t run_seed = cfg.seed + static_cast<std::uint64_t>(run_index);
  const int threads = cfg.deterministic ? 1 : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  // Data. Dataset 0 is the target; auxiliaries are used in full.
  std::vector<DatasetRef> datasets{cfg.target};
  datasets.insert(datasets.end(), cfg.auxiliaries.begin(), cfg.auxiliaries.end());
  std::vector<Manifest> manifests;
  for (const auto& d : datasets) manifests.push_back(read_manifest(d.manifest));
  const Vocabulary vocab = build_union_vocab(manifests);

  nn::CrnnConfig crnn_cfg = cfg.crnn;
  crnn_cfg.vocab_size = static_cast<int>(vocab.num_chars());
  const LoadOptions lo = load_options(crnn_cfg, cfg.max_width);

  const std::vector<std::size_t> k_rows = sample_k_subset(manifests[0], cfg.k, cfg.seed);
  std::vector<std::vector<LoadedSample>> pools;
  pools.push_back(load_samples(manifests[0], k_rows, cfg.target.id, cfg.target.rtl, vocab, lo));
  for (std::size_t d = 1; d < datasets.size(); ++d) {
    const auto rows = manifests[d].indices_in(Split::kTrain);
    if (rows.empty()) throw DataError("auxiliary dataset '" + datasets[d].id + "' has no train rows");
    pools.push_back(load_samples(manifests[d], rows, datasets[d].id, datasets[d].rtl, vocab, lo));
  }
  const auto val = load_split(manifests[0], Split::kVal, cfg.target, vocab, lo);

  {
    std::string text = "row\timage\n";
    for (std::size_t r : k_rows) text += std::to_string(r) + "\t" + manifests[0].rows[r].image_path + "\n";
    write_text(dir / "k_subset.tsv", text);
  }

  // Model and optimizer.
  nn::Crnn<float> model(crnn_cfg);
  model.init(derive_seed(run_seed, "init"));
  nn::TensorList<float> params = model.parameters();
  nn::AdamW<float> opt(params, {cfg.optimizer.beta1, cfg.optimizer.beta2, cfg.optimizer.eps,
                                cfg.optimizer.weight_decay});
  const nn::MultiStepLr lr{cfg.optimizer.lr, cfg.optimizer.milestones, cfg.optimizer.decay, cfg.iteration_budget};

  std::vector<std::size_t> sizes;
  for (const auto& p : pools) sizes.push_back(p.size());
  BatchSampler sampler(sizes, cfg.sampling_mode, run_seed);

  RunResult result;
  result.dir = dir;
  for (const auto& d : datasets) result.draws[d.id] = 0;

  std::ostringstream log;
  log << "step,lr,loss,val_cer\n";
  std::optional<nn::Checkpoint> best;
  double last_val = 1.0;
  std::uint64_t draw_counter = 0;

  auto write_summary = [&](const std::string& status) {
    nlohmann::json draws = nlohmann::json::object();
    for (const auto& [id, n] : result.draws) draws[id] = n;
    nlohmann::json s{{"status", status},
                     {"run_index", run_index},
                     {"run_seed", run_seed},
                     {"target", cfg.target.id},
                     {"J", cfg.j()},
                     {"K", cfg.k_label()},
                     {"k_subset_size", k_rows.size()},
                     {"vocab_size", vocab.num_chars()},
                     {"iteration_budget", cfg.iteration_budget},
                     {"best_step", result.best_step},
                     {"best_val_cer", result.best_val_cer},
                     {"final_val_cer", last_val},
                     {"test_cer", result.test_cer},
                     {"draws", draws},
                     {"config", experiment_config_to_json(cfg)}};
    write_text(dir / "summary.json", s.dump(2) + "\n");
  };

  try {
    nn::CrnnTape<float> tape;
    for (std::int64_t step = 0; step < cfg.iteration_budget; ++step) {
      const auto picks = sampler.next(cfg.batch_size);
      nn::Batch<float> images;
      std::vector<std::vector<int>> targets;
      images.reserve(picks.size());
      targets.reserve(picks.size());
      for (const auto& [d, i] : picks) {
        const LoadedSample& s = pools[static_cast<std::size_t>(d)][i];
        images.push_back(to_tensor(synth::augment(s.image, derive_seed(run_seed, "augment", draw_counter++),
                                                  cfg.augment)));
        targets.push_back(s.labels);
        ++result.draws[datasets[static_cast<std::size_t>(d)].id];
        if (opts.record_access_log) result.access_log.push_back(s.id);
      }

      model.zero_grad();
      const nn::LossBreakdown loss = nn::crnn_loss_and_backward(model, images, targets, tape);
      model.update_running_stats(tape);
      const double norm = nn::clip_grad_norm(params, cfg.optimizer.clip_norm);
      if (!std::isfinite(norm)) throw NumericError("non-finite gradient norm at step " + std::to_string(step + 1));
      const double rate = lr.at(step);
      opt.step(rate);

      const std::int64_t done = step + 1;
      log << done << ',' << format_real(rate) << ',' << format_real(loss.total) << ',';
      if (done % cfg.eval_every == 0 || done == cfg.iteration_budget) {
        last_val = evaluate_samples(model, val, vocab, cfg.target.rtl, threads).cer;
        log << format_real(last_val);
        if (!best || last_val < result.best_val_cer) {
          result.best_val_cer = last_val;
          result.best_step = done;
          const nn::TensorList<float> moments = opt.moments();
          best = make_checkpoint(model, vocab, done, &moments);
        }
        if (opts.verbose) {
          std::cerr << "[" << dir.filename().string() << "] step " << done << " loss " << loss.total << " val_cer "
                    << last_val << (result.best_step == done ? " *" : "") << "\n";
        }
      }
      log << '\n';
    }
  } catch (const NumericError&) {
    write_text(dir / "train_log.csv", log.str());
    write_summary("diverged");
    throw;
  }
  write_text(dir / "train_log.csv", log.str());

  // Test CER always comes from the best-validation checkpoint as stored on
  // disk, never from the in-memory final weights.
  const fs::path ckpt_path = dir / "checkpoint.bin";
  nn::save_checkpoint(*best, ckpt_path);
  const LoadedModel reloaded = model_from_checkpoint(nn::load_checkpoint(ckpt_path));
  const auto test = load_split(manifests[0], Split::kTest, cfg.target, reloaded.vocab, lo);
  EvalResult test_eval = evaluate_samples(*reloaded.model, test, reloaded.vocab, cfg.target.rtl, threads);
  result.test_cer = test_eval.cer;
  result.test_predictions = std::move(test_eval.predictions);
  metrics::write_predictions(dir / "predictions.tsv", result.test_predictions);
  write_summary("ok");
  return result;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  std::vector<RunResult> out;
  for (int r = 0; r < cfg.runs; ++r) {
    out.push_back(run_training(cfg, r, cfg.output_dir / ("run" + std::to_string(r)), opts));
  }
  return out;
}

}  // namespace xscript::exp
