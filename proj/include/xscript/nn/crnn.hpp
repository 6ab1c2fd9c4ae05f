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

// Convolutional-recurrent line recognizer with an auxiliary CTC head.
//
//   image 1 x H x W
//     -> stem conv 7x7/2 + BN + ReLU
//     -> residual stages (2x2 max pool after every stage but the last)
//     -> column max pool (W' x C)
//     -> BiLSTM stack -> linear      = main logits
//     -> 1-D conv over the sequence  = auxiliary logits (training only)

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "xscript/ctc.hpp"
#include "xscript/nn/layers.hpp"
#include "xscript/nn/lstm.hpp"

namespace xscript::nn {

struct CrnnConfig {
  int input_height = 48;
  int stem_channels = 16;
  std::vector<int> stage_blocks{2, 4, 4};
  std::vector<int> stage_channels{16, 32, 48};
  int lstm_layers = 3;
  int lstm_hidden = 64;
  int vocab_size = 1;  // characters, blank excluded
  double aux_loss_weight = 0.1;
  int aux_kernel = 3;
  double bn_momentum = 0.1;
  double bn_eps = 1e-5;

  int num_classes() const { return vocab_size + 1; }
  // Throws ConfigError on inconsistent or non-positive sizes.
  void validate() const;
};

void to_json(nlohmann::json& j, const CrnnConfig& c);
void from_json(const nlohmann::json& j, CrnnConfig& c);

// Length of the output sequence for an input of the given width after the
// stem and `pools` 2x2 max pools; 0 when the image is too narrow.
int crnn_sequence_length(int width, int pools = 2);

// ---------------------------------------------------------------------------

template <typename Real>
struct ResidualBlockParams {
  Conv2dParams<Real> conv1, conv2;
  BatchNormParams<Real> bn1, bn2;
  bool projection = false;
  Conv2dParams<Real> proj;  // 1x1, only when in != out

  ResidualBlockParams() = default;
  ResidualBlockParams(int in, int out);
  void init(Rng& rng);
  void set_bn(double momentum, double eps);
  void collect(const std::string& prefix, TensorList<Real>& params);
  void collect_buffers(const std::string& prefix, TensorList<Real>& buffers);
};

template <typename Real>
struct ResidualBlockCache {
  Conv2dCache<Real> c1, c2, proj;
  BatchNormCache<Real> b1, b2;
  ReluCache<Real> r1, out;
};

template <typename Real>
Batch<Real> residual_block_fwd(const ResidualBlockParams<Real>& p, const Batch<Real>& x, bool training,
                               ResidualBlockCache<Real>* cache);
template <typename Real>
Batch<Real> residual_block_bwd(ResidualBlockParams<Real>& p, const ResidualBlockCache<Real>& cache,
                               const Batch<Real>& dy);
template <typename Real>
void residual_block_update_running(ResidualBlockParams<Real>& p, const ResidualBlockCache<Real>& cache);

// ---------------------------------------------------------------------------

template <typename Real>
struct CrnnOutput {
  Batch<Real> main;  // per sample T x (V + 1)
  Batch<Real> aux;   // same shape; empty when the aux head was skipped
};

template <typename Real>
struct CrnnTape {
  Conv2dCache<Real> stem_conv;
  BatchNormCache<Real> stem_bn;
  ReluCache<Real> stem_relu;
  std::vector<ResidualBlockCache<Real>> blocks;
  std::vector<MaxPoolCache<Real>> pools;
  ColumnPoolCache<Real> column;
  BiLstmCache<Real> lstm;
  LinearCache<Real> head;
  SeqConvCache<Real> aux;
};

template <typename Real>
class Crnn {
 public:
  explicit Crnn(const CrnnConfig& cfg);

  const CrnnConfig& config() const { return cfg_; }

  // Seeded initialization of every trainable tensor; BN buffers reset.
  void init(std::uint64_t seed);

  // Pure forward. `training` selects batch statistics in BN; `with_aux`
  // evaluates the auxiliary head. A non-null tape records everything the
  // backward pass needs. Parameters and buffers are never modified, so
  // concurrent calls on a frozen model are safe.
  CrnnOutput<Real> forward(const Batch<Real>& images, bool training, bool with_aux,
                           CrnnTape<Real>* tape) const;

  int sequence_length(int width) const;

  // Inference path: eval-mode BN, auxiliary head skipped.
  Batch<Real> infer(const Batch<Real>& images) const;

  // Folds BN batch statistics of a training-mode tape into running buffers.
  void update_running_stats(const CrnnTape<Real>& tape);

  // Accumulates parameter gradients. `d_aux` may be empty when the tape was
  // recorded without the auxiliary head.
  void backward(const CrnnTape<Real>& tape, const Batch<Real>& d_main, const Batch<Real>& d_aux);

  TensorList<Real> parameters();
  TensorList<Real> buffers();
  void zero_grad();

 private:
  void check_input(const Batch<Real>& images) const;

  CrnnConfig cfg_;
  Conv2dParams<Real> stem_conv_;
  BatchNormParams<Real> stem_bn_;
  std::vector<std::vector<ResidualBlockParams<Real>>> stages_;
  BiLstmParams<Real> lstm_;
  LinearParams<Real> head_;
  SeqConvParams<Real> aux_head_;
};

// ---------------------------------------------------------------------------
// Multi-task CTC objective: mean over the batch of ctc(main) + lambda * ctc(aux).

struct LossBreakdown {
  double total = 0.0;
  double main = 0.0;  // batch mean
  double aux = 0.0;   // batch mean, before weighting
};

template <typename Real>
ctc::LogitsSeq to_logits(const Tensor<Real>& t);

// Runs a training-mode forward with the auxiliary head, the CTC losses and
// the backward pass; parameter gradients are accumulated (not zeroed).
// Throws NumericError when the loss is not finite.
template <typename Real>
LossBreakdown crnn_loss_and_backward(Crnn<Real>& model, const Batch<Real>& images,
                                     std::span<const std::vector<int>> targets, CrnnTape<Real>& tape);

// Loss only, on a training-mode forward with the auxiliary head.
template <typename Real>
LossBreakdown crnn_loss(const Crnn<Real>& model, const Batch<Real>& images,
                        std::span<const std::vector<int>> targets);

}  // namespace xscript::nn
