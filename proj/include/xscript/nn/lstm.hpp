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

// Stacked bidirectional LSTM over T x D sequences with exact
// backpropagation through time. Gate order in the packed weights is
// input, forget, cell, output.

#pragma once

#include <string>
#include <vector>

#include "xscript/nn/tensor.hpp"

namespace xscript::nn {

template <typename Real>
struct LstmDirectionParams {
  int input_size = 0;
  int hidden = 0;
  Tensor<Real> w_ih;  // 4H x D
  Tensor<Real> w_hh;  // 4H x H
  Tensor<Real> bias;  // 4H

  LstmDirectionParams() = default;
  LstmDirectionParams(int input_size, int hidden);
  void init_uniform(Rng& rng);
  void collect(const std::string& prefix, TensorList<Real>& params);
};

template <typename Real>
struct BiLstmParams {
  int hidden = 0;
  // forward[l] / backward[l] are the two directions of layer l.
  std::vector<LstmDirectionParams<Real>> forward;
  std::vector<LstmDirectionParams<Real>> backward;

  BiLstmParams() = default;
  BiLstmParams(int input_size, int hidden, int layers);
  int layers() const { return static_cast<int>(forward.size()); }
  int output_size() const { return 2 * hidden; }
  void init_uniform(Rng& rng);
  void collect(const std::string& prefix, TensorList<Real>& params);
};

// State of one direction over one sequence.
template <typename Real>
struct LstmTrace {
  Tensor<Real> input;   // T x D
  Tensor<Real> gates;   // T x 4H, post-activation
  Tensor<Real> cell;    // T x H
  Tensor<Real> tanh_cell;
  Tensor<Real> hidden;  // T x H
};

template <typename Real>
struct BiLstmCache {
  // [layer][sample]
  std::vector<std::vector<LstmTrace<Real>>> forward;
  std::vector<std::vector<LstmTrace<Real>>> backward;
};

// Single direction; `reverse` scans t = T-1 .. 0.
template <typename Real>
Tensor<Real> lstm_direction_fwd(const LstmDirectionParams<Real>& p, const Tensor<Real>& x, bool reverse,
                                LstmTrace<Real>* trace);
template <typename Real>
Tensor<Real> lstm_direction_bwd(LstmDirectionParams<Real>& p, const LstmTrace<Real>& trace, bool reverse,
                                const Tensor<Real>& dy);

// T x D -> T x 2H; per time step the forward direction comes first.
template <typename Real>
Batch<Real> bilstm_fwd(const BiLstmParams<Real>& p, const Batch<Real>& x, BiLstmCache<Real>* cache);
template <typename Real>
Batch<Real> bilstm_bwd(BiLstmParams<Real>& p, const BiLstmCache<Real>& cache, const Batch<Real>& dy);

}  // namespace xscript::nn
