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

// Layer kernels over ragged batches.
//
// Every layer is a pair of free functions. `*_fwd` reads its parameters
// and takes an optional cache; when the cache is null nothing is retained.
// `*_bwd` consumes the cache filled by the matching forward call,
// accumulates parameter gradients into the parameters' grad buffers and
// returns the input gradient.

#pragma once

#include <string>
#include <vector>

#include "xscript/common.hpp"
#include "xscript/nn/tensor.hpp"

namespace xscript::nn {

// ---------------------------------------------------------------------------
// 2-D convolution, square kernel, zero padding.

template <typename Real>
struct Conv2dParams {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 1;
  int stride = 1;
  int pad = 0;
  Tensor<Real> weight;  // out x in x k x k
  Tensor<Real> bias;    // out, or empty when the layer has no bias

  Conv2dParams() = default;
  Conv2dParams(int in, int out, int kernel, int stride, int pad, bool with_bias);
  void init_kaiming(Rng& rng);
  void collect(const std::string& prefix, TensorList<Real>& params);
};

template <typename Real>
struct Conv2dCache {
  Batch<Real> cols;  // per sample: (in * k * k) x (Ho * Wo)
  std::vector<int> in_h, in_w;
};

int conv_out_size(int in, int kernel, int stride, int pad);

template <typename Real>
Batch<Real> conv2d_fwd(const Conv2dParams<Real>& p, const Batch<Real>& x, Conv2dCache<Real>* cache);
template <typename Real>
Batch<Real> conv2d_bwd(Conv2dParams<Real>& p, const Conv2dCache<Real>& cache, const Batch<Real>& dy);

// ---------------------------------------------------------------------------
// Batch normalization over channels. Training mode normalizes with the
// statistics of all valid positions of the ragged batch.

template <typename Real>
struct BatchNormParams {
  int channels = 0;
  Real momentum = Real(0.1);
  Real eps = Real(1e-5);
  Tensor<Real> gamma;         // trainable
  Tensor<Real> beta;          // trainable
  Tensor<Real> running_mean;  // buffer
  Tensor<Real> running_var;   // buffer

  BatchNormParams() = default;
  explicit BatchNormParams(int channels);
  void collect(const std::string& prefix, TensorList<Real>& params);
  void collect_buffers(const std::string& prefix, TensorList<Real>& buffers);
};

template <typename Real>
struct BatchNormCache {
  Batch<Real> xhat;
  std::vector<Real> inv_std;
  std::vector<double> batch_mean;
  std::vector<double> batch_var_unbiased;
  std::size_t count = 0;
};

// Running statistics are not touched here; see batchnorm_update_running.
template <typename Real>
Batch<Real> batchnorm_fwd(const BatchNormParams<Real>& p, const Batch<Real>& x, bool training,
                          BatchNormCache<Real>* cache);
// Folds the batch statistics recorded by a training-mode forward into the
// running estimates (momentum-weighted, unbiased variance).
template <typename Real>
void batchnorm_update_running(BatchNormParams<Real>& p, const BatchNormCache<Real>& cache);
template <typename Real>
Batch<Real> batchnorm_bwd(BatchNormParams<Real>& p, const BatchNormCache<Real>& cache,
                          const Batch<Real>& dy);

// ---------------------------------------------------------------------------

template <typename Real>
struct ReluCache {
  Batch<Real> out;
};

template <typename Real>
Batch<Real> relu_fwd(const Batch<Real>& x, ReluCache<Real>* cache);
template <typename Real>
Batch<Real> relu_bwd(const ReluCache<Real>& cache, const Batch<Real>& dy);

// ---------------------------------------------------------------------------
// Max pooling with kernel == stride and no padding; output size floor(in / k).
// Gradients go to the first maximum in scan order.

template <typename Real>
struct MaxPoolCache {
  std::vector<std::vector<int>> argmax;
  std::vector<std::vector<int>> in_shape;
};

template <typename Real>
Batch<Real> maxpool2d_fwd(const Batch<Real>& x, int kernel, MaxPoolCache<Real>* cache);
template <typename Real>
Batch<Real> maxpool2d_bwd(const MaxPoolCache<Real>& cache, const Batch<Real>& dy);

// ---------------------------------------------------------------------------
// Column-wise max pooling: C x H x W -> W x C, max over H (first max wins).

template <typename Real>
struct ColumnPoolCache {
  std::vector<std::vector<int>> argmax_row;
  int channels = 0;
  int height = 0;
};

template <typename Real>
Batch<Real> column_max_pool_fwd(const Batch<Real>& x, ColumnPoolCache<Real>* cache);
template <typename Real>
Batch<Real> column_max_pool_bwd(const ColumnPoolCache<Real>& cache, const Batch<Real>& dy);

// ---------------------------------------------------------------------------
// Fully connected map applied per time step: T x in -> T x out.

template <typename Real>
struct LinearParams {
  int in_features = 0;
  int out_features = 0;
  Tensor<Real> weight;  // out x in
  Tensor<Real> bias;    // out

  LinearParams() = default;
  LinearParams(int in, int out);
  void init_uniform(Rng& rng);
  void collect(const std::string& prefix, TensorList<Real>& params);
};

template <typename Real>
struct LinearCache {
  Batch<Real> in;
};

template <typename Real>
Batch<Real> linear_fwd(const LinearParams<Real>& p, const Batch<Real>& x, LinearCache<Real>* cache);
template <typename Real>
Batch<Real> linear_bwd(LinearParams<Real>& p, const LinearCache<Real>& cache, const Batch<Real>& dy);

// ---------------------------------------------------------------------------
// 1-D convolution over the time axis of T x in sequences (zero padded,
// "same" length for odd kernels). Weight layout: out x (kernel * in), tap
// major.

template <typename Real>
struct SeqConvParams {
  int in_features = 0;
  int out_features = 0;
  int kernel = 3;
  Tensor<Real> weight;
  Tensor<Real> bias;

  SeqConvParams() = default;
  SeqConvParams(int in, int out, int kernel);
  void init_uniform(Rng& rng);
  void collect(const std::string& prefix, TensorList<Real>& params);
};

template <typename Real>
struct SeqConvCache {
  Batch<Real> cols;  // per sample: T x (kernel * in)
};

template <typename Real>
Batch<Real> seqconv_fwd(const SeqConvParams<Real>& p, const Batch<Real>& x, SeqConvCache<Real>* cache);
template <typename Real>
Batch<Real> seqconv_bwd(SeqConvParams<Real>& p, const SeqConvCache<Real>& cache, const Batch<Real>& dy);

// ---------------------------------------------------------------------------

template <typename Real>
Batch<Real> add(const Batch<Real>& a, const Batch<Real>& b);
template <typename Real>
void add_inplace(Batch<Real>& a, const Batch<Real>& b);

// Gaussian draw from two raw uniforms (portable across standard libraries).
double normal(Rng& rng);

}  // namespace xscript::nn
