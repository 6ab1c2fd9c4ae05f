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

// Central finite-difference checks of every layer at double precision.
// Each check draws `shapes` random small configurations, projects the
// layer output onto a fixed random tensor (loss = <w, y>) and compares the
// analytic gradients of inputs and parameters with central differences.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "xscript/nn/crnn.hpp"
#include "xscript/nn/layers.hpp"
#include "xscript/nn/lstm.hpp"

namespace gradcheck {

using xscript::Rng;
using Batch = xscript::nn::Batch<double>;
using Tensor = xscript::nn::Tensor<double>;
using TensorList = xscript::nn::TensorList<double>;

struct Result {
  std::string layer;
  int shapes = 0;
  std::size_t entries = 0;
  double worst = 0.0;
};

inline int rand_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(xscript::uniform_index(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

inline Tensor random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = scale * xscript::nn::normal(rng);
  return t;
}

inline Batch random_images(Rng& rng, int batch, int channels, int height, int wmin, int wmax) {
  Batch b;
  for (int i = 0; i < batch; ++i) b.push_back(random_tensor({channels, height, rand_int(rng, wmin, wmax)}, rng));
  return b;
}

inline Batch random_sequences(Rng& rng, int batch, int features, int tmin, int tmax) {
  Batch b;
  for (int i = 0; i < batch; ++i) b.push_back(random_tensor({rand_int(rng, tmin, tmax), features}, rng));
  return b;
}

inline void randomize(TensorList& params, Rng& rng, double scale = 0.5) {
  for (auto& p : params) {
    for (std::size_t i = 0; i < p.tensor->size(); ++i) (*p.tensor)[i] = scale * xscript::nn::normal(rng);
  }
}

inline double project(const Batch& y, const Batch& w) {
  double s = 0.0;
  for (std::size_t b = 0; b < y.size(); ++b) {
    for (std::size_t i = 0; i < y[b].size(); ++i) s += y[b][i] * w[b][i];
  }
  return s;
}

inline Batch like(const Batch& y, Rng& rng) {
  Batch w;
  for (const auto& t : y) w.push_back(random_tensor(t.shape(), rng));
  return w;
}

// Compares analytic gradients of `loss` with central differences over every
// input entry and every parameter entry.
inline void compare(Result& r, const std::function<double()>& loss, Batch& x, const Batch& dx, TensorList& params) {
  for (std::size_t b = 0; b < x.size(); ++b) {
    for (std::size_t i = 0; i < x[b].size(); ++i) {
      const double num = oracle::central_difference(loss, &x[b][i]);
      r.worst = std::max(r.worst, oracle::relative_error(dx[b][i], num));
      ++r.entries;
    }
  }
  for (auto& p : params) {
    for (std::size_t i = 0; i < p.tensor->size(); ++i) {
      const double num = oracle::central_difference(loss, &(*p.tensor)[i]);
      r.worst = std::max(r.worst, oracle::relative_error(p.tensor->grad()[i], num));
      ++r.entries;
    }
  }
}

inline void zero(TensorList& params) {
  for (auto& p : params) p.tensor->zero_grad();
}

inline Result conv2d(int shapes, std::uint64_t seed) {
  using namespace xscript::nn;
  Rng rng(seed);
  Result r{"conv2d", shapes};
  for (int s = 0; s < shapes; ++s) {
    const int k = rand_int(rng, 0, 1) ? 3 : 1;
    Conv2dParams<double> p(rand_int(rng, 1, 3), rand_int(rng, 1, 3), k, rand_int(rng, 1, 2), rand_int(rng, 0, k / 2 + 1),
                           rand_int(rng, 0, 1) == 1);
    TensorList params;
    p.collect("conv", params);
    randomize(params, rng);
    Batch x = random_images(rng, rand_int(rng, 1, 2), p.in_channels, rand_int(rng, 3, 5), 3, 6);
    Conv2dCache<double> cache;
    const Batch w = like(conv2d_fwd(p, x, &cache), rng);
    zero(params);
    const Batch dx = conv2d_bwd(p, cache, w);
    compare(r, [&] { return project(conv2d_fwd<double>(p, x, nullptr), w); }, x, dx, params);
  }
  return r;
}

inline Result batchnorm(int shapes, std::uint64_t seed) {
  using namespace xscript::nn;
  Rng rng(seed);
  Result r{"batchnorm", shapes};
  for (int s = 0; s < shapes; ++s) {
    BatchNormParams<double> p(rand_int(rng, 1, 3));
    TensorList params;
    p.collect("bn", params);
    randomize(params, rng);
    Batch x = random_images(rng, rand_int(rng, 1, 3), p.channels, rand_int(rng, 1, 3), 2, 4);
    BatchNormCache<double> cache;
    const Batch w = like(batchnorm_fwd(p, x, true, &cache), rng);
    zero(params);
    const Batch dx = batchnorm_bwd(p, cache, w);
    compare(r, [&] { return project(batchnorm_fwd<double>(p, x, true, nullptr), w); }, x, dx, params);
  }
  return r;
}

inline Result relu(int shapes, std::uint64_t seed) {
  using namespace xscript::nn;
  Rng rng(seed);
  Result r{"relu", shapes};
  for (int s = 0; s < shapes; ++s) {
    TensorList none;
    Batch x = random_images(rng, rand_int(rng, 1, 2), rand_int(rng, 1, 3), rand_int(rng, 1, 4), 1, 5);
    ReluCache<double> cache;
    const Batch w = like(relu_fwd(x, &cache), rng);
    const Batch dx = relu_bwd(cache, w);
    compare(r, [&] { return project(relu_fwd<double>(x, nullptr), w); }, x, dx, none);
  }
  return r;
}

inline Result maxpool(int shapes, std::uint64_t seed) {
  using namespace xscript::nn;
  Rng rng(seed);
  Result r{"maxpool2d", shapes};
  for (int s = 0; s < shapes; ++s) {
    TensorList none;
    Batch x = random_images(rng, rand_int(rng, 1, 2), rand_int(rng, 1, 3), rand_int(rng, 2, 5), 2, 7);
    MaxPoolCache<double> cache;
    const Batch w = like(maxpool2d_fwd(x, 2, &cache), rng);
    const Batch dx = maxpool2d_bwd(cache, w);
    compare(r, [&] { return project(maxpool2d_fwd<double>(x, 2, nullptr), w); }, x, dx, none);
  }
  return r;
}

inline Result column_max_pool(int shapes, std::uint64_t seed) {
  using namespace xscript::nn;
  Rng rng(seed);
  Result r{"column_max_pool", shapes};
  for (int s = 0; s < shapes; ++s) {
    TensorList none;
    Batch x = random_images(rng, rand_int(rng, 1, 2), rand_int(rng, 1, 3), rand_int(rng, 1, 4), 1, 5);
    ColumnPoolCache<double> cache;
    const Batch w = like(column_max_pool_fwd(x, &cache), rng);
    const Batch dx = column_max_pool_bwd(cache, w);
    compare(r, [&] { return project(column_max_pool_fwd<double>(x, nullptr), w); }, x, dx, none);
  }
  return r;
}

inline Result residual_block(int shapes, std::uint64_t seed) {
  using namespace xscript::nn;
  Rng rng(seed);
  Result r{"residual_block", shapes};
  for (int s = 0; s < shapes; ++s) {
    const int in = rand_int(rng, 1, 3);
    const int out = s % 2 == 0 ? in : rand_int(rng, 1, 3);  // identity and projection shortcuts
    ResidualBlockParams<double> p(in, out);
    TensorList params;
    p.collect("block", params);
    randomize(params, rng);
    Batch x = random_images(rng, rand_int(rng, 1, 2), in, rand_int(rng, 2, 3), 2, 4);
    ResidualBlockCache<double> cache;
    const Batch w = like(residual_block_fwd(p, x, true, &cache), rng);
    zero(params);
    const Batch dx = residual_block_bwd(p, cache, w);
    compare(r, [&] { return project(residual_block_fwd<double>(p, x, true, nullptr), w); }, x, dx, params);
  }
  return r;
}

inline Result bilstm(int shapes, std::uint64_t seed) {
  using namespace xscript::nn;
  Rng rng(seed);
  Result r{"bilstm", shapes};
  for (int s = 0; s < shapes; ++s) {
    const int d = rand_int(rng, 1, 3);
    BiLstmParams<double> p(d, rand_int(rng, 1, 3), rand_int(rng, 1, 2));
    TensorList params;
    p.collect("lstm", params);
    randomize(params, rng);
    Batch x = random_sequences(rng, rand_int(rng, 1, 2), d, 1, 5);
    BiLstmCache<double> cache;
    const Batch w = like(bilstm_fwd(p, x, &cache), rng);
    zero(params);
    const Batch dx = bilstm_bwd(p, cache, w);
    compare(r, [&] { return project(bilstm_fwd<double>(p, x, nullptr), w); }, x, dx, params);
  }
  return r;
}

inline Result linear(int shapes, std::uint64_t seed) {
  using namespace xscript::nn;
  Rng rng(seed);
  Result r{"linear", shapes};
  for (int s = 0; s < shapes; ++s) {
    LinearParams<double> p(rand_int(rng, 1, 4), rand_int(rng, 1, 4));
    TensorList params;
    p.collect("linear", params);
    randomize(params, rng);
    Batch x = random_sequences(rng, rand_int(rng, 1, 2), p.in_features, 1, 4);
    LinearCache<double> cache;
    const Batch w = like(linear_fwd(p, x, &cache), rng);
    zero(params);
    const Batch dx = linear_bwd(p, cache, w);
    compare(r, [&] { return project(linear_fwd<double>(p, x, nullptr), w); }, x, dx, params);
  }
  return r;
}

inline Result seqconv(int shapes, std::uint64_t seed) {
  using namespace xscript::nn;
  Rng rng(seed);
  Result r{"seqconv", shapes};
  for (int s = 0; s < shapes; ++s) {
    SeqConvParams<double> p(rand_int(rng, 1, 3), rand_int(rng, 1, 3), 2 * rand_int(rng, 0, 2) + 1);
    TensorList params;
    p.collect("seqconv", params);
    randomize(params, rng);
    Batch x = random_sequences(rng, rand_int(rng, 1, 2), p.in_features, 1, 5);
    SeqConvCache<double> cache;
    const Batch w = like(seqconv_fwd(p, x, &cache), rng);
    zero(params);
    const Batch dx = seqconv_bwd(p, cache, w);
    compare(r, [&] { return project(seqconv_fwd<double>(p, x, nullptr), w); }, x, dx, params);
  }
  return r;
}

// Whole recognizer with the main and auxiliary CTC losses; parameters only
// (the image is not a trainable input).
inline Result crnn_ctc(int shapes, std::uint64_t seed) {
  using namespace xscript::nn;
  Rng rng(seed);
  Result r{"crnn+ctc", shapes};
  for (int s = 0; s < shapes; ++s) {
    CrnnConfig cfg;
    cfg.input_height = 8;
    cfg.stem_channels = rand_int(rng, 1, 2);
    cfg.stage_blocks = {1, 1};
    cfg.stage_channels = {rand_int(rng, 1, 2), rand_int(rng, 2, 3)};
    cfg.lstm_layers = rand_int(rng, 1, 2);
    cfg.lstm_hidden = 2;
    cfg.vocab_size = rand_int(rng, 1, 3);
    cfg.aux_loss_weight = 0.3;
    Crnn<double> model(cfg);
    model.init(seed + static_cast<std::uint64_t>(s));
    TensorList params = model.parameters();
    randomize(params, rng, 0.4);

    const int batch = rand_int(rng, 1, 2);
    Batch images;
    std::vector<std::vector<int>> targets;
    for (int b = 0; b < batch; ++b) {
      const int len = rand_int(rng, 1, 2);
      std::vector<int> t;
      for (int i = 0; i < len; ++i) t.push_back(rand_int(rng, 1, cfg.vocab_size));
      targets.push_back(t);
      images.push_back(random_tensor({1, cfg.input_height, rand_int(rng, 4 * (2 * len + 1), 4 * (2 * len + 1) + 5)}, rng));
    }
    CrnnTape<double> tape;
    model.zero_grad();
    crnn_loss_and_backward(model, images, targets, tape);
    Batch no_input;
    compare(r, [&] { return crnn_loss(model, images, targets).total; }, no_input, {}, params);
  }
  return r;
}

inline std::vector<Result> all(int shapes, std::uint64_t seed) {
  return {conv2d(shapes, seed),         batchnorm(shapes, seed + 1), relu(shapes, seed + 2),
          maxpool(shapes, seed + 3),    column_max_pool(shapes, seed + 4), residual_block(shapes, seed + 5),
          bilstm(shapes, seed + 6),     linear(shapes, seed + 7),    seqconv(shapes, seed + 8),
          crnn_ctc(shapes, seed + 9)};
}

}  // namespace gradcheck
