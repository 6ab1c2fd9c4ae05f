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

#include "xscript/nn/layers.hpp"

#include <cmath>
#include <limits>

#include "eigen_maps.hpp"

namespace xscript::nn {

using detail::ConstMatMap;
using detail::MatMap;

double normal(Rng& rng) {
  // Box-Muller; u1 in (0, 1].
  const double u1 = 1.0 - uniform(rng, 0.0, 1.0);
  const double u2 = uniform(rng, 0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

namespace {

template <typename Real>
void fill_uniform(Tensor<Real>& t, Rng& rng, double bound) {
  for (auto& v : t.values()) v = static_cast<Real>(uniform(rng, -bound, bound));
}

void check_rank(int rank, int expected, const char* layer) {
  if (rank != expected) {
    throw ShapeError(std::string(layer) + ": expected rank " + std::to_string(expected) +
                     " input, got rank " + std::to_string(rank));
  }
}

template <typename Real>
Tensor<Real> with_grad(std::vector<int> shape) {
  Tensor<Real> t(std::move(shape));
  t.enable_grad();
  return t;
}

}  // namespace

int conv_out_size(int in, int kernel, int stride, int pad) {
  const int span = in + 2 * pad - kernel;
  return span < 0 ? 0 : span / stride + 1;
}

// ---------------------------------------------------------------------------
// Conv2d

template <typename Real>
Conv2dParams<Real>::Conv2dParams(int in, int out, int k, int s, int p, bool with_bias)
    : in_channels(in), out_channels(out), kernel(k), stride(s), pad(p) {
  if (in < 1 || out < 1 || k < 1 || s < 1 || p < 0) throw ShapeError("invalid conv2d geometry");
  weight = with_grad<Real>({out, in, k, k});
  if (with_bias) bias = with_grad<Real>({out});
}

template <typename Real>
void Conv2dParams<Real>::init_kaiming(Rng& rng) {
  const double fan_in = static_cast<double>(in_channels) * kernel * kernel;
  const double std = std::sqrt(2.0 / fan_in);
  for (auto& v : weight.values()) v = static_cast<Real>(std * normal(rng));
  bias.fill(Real(0));
}

template <typename Real>
void Conv2dParams<Real>::collect(const std::string& prefix, TensorList<Real>& params) {
  params.push_back({prefix + ".weight", &weight});
  if (!bias.empty()) params.push_back({prefix + ".bias", &bias});
}

template <typename Real>
Batch<Real> conv2d_fwd(const Conv2dParams<Real>& p, const Batch<Real>& x, Conv2dCache<Real>* cache) {
  const int k = p.kernel;
  const int kk = k * k;
  const int rows = p.in_channels * kk;
  Batch<Real> out;
  out.reserve(x.size());
  if (cache) {
    cache->cols.clear();
    cache->in_h.clear();
    cache->in_w.clear();
  }
  const ConstMatMap<Real> w(p.weight.data(), p.out_channels, rows);
  for (const auto& img : x) {
    check_rank(img.rank(), 3, "conv2d");
    if (img.dim(0) != p.in_channels) throw ShapeError("conv2d: channel mismatch");
    const int h = img.dim(1);
    const int wd = img.dim(2);
    const int ho = conv_out_size(h, k, p.stride, p.pad);
    const int wo = conv_out_size(wd, k, p.stride, p.pad);
    if (ho < 1 || wo < 1) throw ShapeError("conv2d: input smaller than kernel");
    const int n = ho * wo;

    Tensor<Real> col({rows, n});
    Real* c = col.data();
    for (int ch = 0; ch < p.in_channels; ++ch) {
      const Real* src = img.data() + static_cast<std::size_t>(ch) * h * wd;
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          Real* dst = c + static_cast<std::size_t>((ch * k + ky) * k + kx) * n;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * p.stride - p.pad + ky;
            Real* drow = dst + static_cast<std::size_t>(oy) * wo;
            if (iy < 0 || iy >= h) {
              std::fill(drow, drow + wo, Real(0));
              continue;
            }
            const Real* srow = src + static_cast<std::size_t>(iy) * wd;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * p.stride - p.pad + kx;
              drow[ox] = (ix >= 0 && ix < wd) ? srow[ix] : Real(0);
            }
          }
        }
      }
    }

    Tensor<Real> y({p.out_channels, ho, wo});
    MatMap<Real> ym(y.data(), p.out_channels, n);
    ym.noalias() = w * ConstMatMap<Real>(col.data(), rows, n);
    if (!p.bias.empty()) {
      for (int o = 0; o < p.out_channels; ++o) ym.row(o).array() += p.bias[static_cast<std::size_t>(o)];
    }
    out.push_back(std::move(y));
    if (cache) {
      cache->cols.push_back(std::move(col));
      cache->in_h.push_back(h);
      cache->in_w.push_back(wd);
    }
  }
  return out;
}

template <typename Real>
Batch<Real> conv2d_bwd(Conv2dParams<Real>& p, const Conv2dCache<Real>& cache, const Batch<Real>& dy) {
  const int k = p.kernel;
  const int rows = p.in_channels * k * k;
  MatMap<Real> dw(p.weight.grad(), p.out_channels, rows);
  const ConstMatMap<Real> w(p.weight.data(), p.out_channels, rows);
  Batch<Real> dx;
  dx.reserve(dy.size());
  for (std::size_t i = 0; i < dy.size(); ++i) {
    const int h = cache.in_h[i];
    const int wd = cache.in_w[i];
    const int ho = dy[i].dim(1);
    const int wo = dy[i].dim(2);
    const int n = ho * wo;
    const ConstMatMap<Real> g(dy[i].data(), p.out_channels, n);
    const ConstMatMap<Real> col(cache.cols[i].data(), rows, n);
    dw.noalias() += g * col.transpose();
    if (!p.bias.empty()) {
      for (int o = 0; o < p.out_channels; ++o) p.bias.grad()[o] += g.row(o).sum();
    }
    Tensor<Real> dcol({rows, n});
    MatMap<Real>(dcol.data(), rows, n).noalias() = w.transpose() * g;

    Tensor<Real> d({p.in_channels, h, wd});
    const Real* c = dcol.data();
    for (int ch = 0; ch < p.in_channels; ++ch) {
      Real* dst = d.data() + static_cast<std::size_t>(ch) * h * wd;
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          const Real* src = c + static_cast<std::size_t>((ch * k + ky) * k + kx) * n;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * p.stride - p.pad + ky;
            if (iy < 0 || iy >= h) continue;
            const Real* srow = src + static_cast<std::size_t>(oy) * wo;
            Real* drow = dst + static_cast<std::size_t>(iy) * wd;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * p.stride - p.pad + kx;
              if (ix >= 0 && ix < wd) drow[ix] += srow[ox];
            }
          }
        }
      }
    }
    dx.push_back(std::move(d));
  }
  return dx;
}

// ---------------------------------------------------------------------------
// BatchNorm

template <typename Real>
BatchNormParams<Real>::BatchNormParams(int c) : channels(c) {
  if (c < 1) throw ShapeError("batch norm needs at least one channel");
  gamma = with_grad<Real>({c});
  gamma.fill(Real(1));
  beta = with_grad<Real>({c});
  running_mean = Tensor<Real>({c}, Real(0));
  running_var = Tensor<Real>({c}, Real(1));
}

template <typename Real>
void BatchNormParams<Real>::collect(const std::string& prefix, TensorList<Real>& params) {
  params.push_back({prefix + ".gamma", &gamma});
  params.push_back({prefix + ".beta", &beta});
}

template <typename Real>
void BatchNormParams<Real>::collect_buffers(const std::string& prefix, TensorList<Real>& buffers) {
  buffers.push_back({prefix + ".running_mean", &running_mean});
  buffers.push_back({prefix + ".running_var", &running_var});
}

template <typename Real>
Batch<Real> batchnorm_fwd(const BatchNormParams<Real>& p, const Batch<Real>& x, bool training,
                          BatchNormCache<Real>* cache) {
  const int c_count = p.channels;
  for (const auto& t : x) {
    check_rank(t.rank(), 3, "batchnorm");
    if (t.dim(0) != c_count) throw ShapeError("batchnorm: channel mismatch");
  }
  Batch<Real> out;
  out.reserve(x.size());
  std::vector<Real> scale(static_cast<std::size_t>(c_count));
  std::vector<Real> shift(static_cast<std::size_t>(c_count));
  std::vector<Real> mean(static_cast<std::size_t>(c_count));
  std::vector<Real> inv_std(static_cast<std::size_t>(c_count));

  if (training) {
    std::size_t count = 0;
    for (const auto& t : x) count += static_cast<std::size_t>(t.dim(1)) * t.dim(2);
    if (count < 2) throw ShapeError("batchnorm: training mode needs at least two positions");
    if (cache) {
      cache->batch_mean.assign(static_cast<std::size_t>(c_count), 0.0);
      cache->batch_var_unbiased.assign(static_cast<std::size_t>(c_count), 0.0);
    }
    for (int c = 0; c < c_count; ++c) {
      double sum = 0.0;
      for (const auto& t : x) {
        const std::size_t hw = static_cast<std::size_t>(t.dim(1)) * t.dim(2);
        const Real* v = t.data() + c * hw;
        for (std::size_t i = 0; i < hw; ++i) sum += v[i];
      }
      const double m = sum / static_cast<double>(count);
      double sq = 0.0;
      for (const auto& t : x) {
        const std::size_t hw = static_cast<std::size_t>(t.dim(1)) * t.dim(2);
        const Real* v = t.data() + c * hw;
        for (std::size_t i = 0; i < hw; ++i) sq += (v[i] - m) * (v[i] - m);
      }
      const double var = sq / static_cast<double>(count);
      const auto ci = static_cast<std::size_t>(c);
      mean[ci] = static_cast<Real>(m);
      inv_std[ci] = static_cast<Real>(1.0 / std::sqrt(var + static_cast<double>(p.eps)));
      if (cache) {
        cache->batch_mean[ci] = m;
        cache->batch_var_unbiased[ci] = sq / static_cast<double>(count - 1);
      }
    }
    if (cache) {
      cache->xhat.clear();
      cache->count = count;
      cache->inv_std = inv_std;
    }
  } else {
    for (int c = 0; c < c_count; ++c) {
      const auto ci = static_cast<std::size_t>(c);
      mean[ci] = p.running_mean[ci];
      inv_std[ci] = static_cast<Real>(1.0 / std::sqrt(static_cast<double>(p.running_var[ci]) + p.eps));
    }
  }

  for (const auto& t : x) {
    const std::size_t hw = static_cast<std::size_t>(t.dim(1)) * t.dim(2);
    Tensor<Real> y(t.shape());
    Tensor<Real> xhat;
    if (training && cache) xhat = Tensor<Real>(t.shape());
    for (int c = 0; c < c_count; ++c) {
      const auto ci = static_cast<std::size_t>(c);
      const Real* v = t.data() + ci * hw;
      Real* o = y.data() + ci * hw;
      const Real g = p.gamma[ci];
      const Real b = p.beta[ci];
      for (std::size_t i = 0; i < hw; ++i) {
        const Real n = (v[i] - mean[ci]) * inv_std[ci];
        o[i] = g * n + b;
        if (!xhat.empty()) xhat.data()[ci * hw + i] = n;
      }
    }
    out.push_back(std::move(y));
    if (training && cache) cache->xhat.push_back(std::move(xhat));
  }
  return out;
}

template <typename Real>
void batchnorm_update_running(BatchNormParams<Real>& p, const BatchNormCache<Real>& cache) {
  if (cache.batch_mean.size() != static_cast<std::size_t>(p.channels)) {
    throw ShapeError("batchnorm_update_running: cache from a training-mode forward required");
  }
  const double m = static_cast<double>(p.momentum);
  for (std::size_t c = 0; c < cache.batch_mean.size(); ++c) {
    p.running_mean[c] = static_cast<Real>((1.0 - m) * p.running_mean[c] + m * cache.batch_mean[c]);
    p.running_var[c] = static_cast<Real>((1.0 - m) * p.running_var[c] + m * cache.batch_var_unbiased[c]);
  }
}

template <typename Real>
Batch<Real> batchnorm_bwd(BatchNormParams<Real>& p, const BatchNormCache<Real>& cache,
                          const Batch<Real>& dy) {
  if (cache.xhat.size() != dy.size()) throw ShapeError("batchnorm_bwd: cache from a training-mode forward required");
  const int c_count = p.channels;
  std::vector<double> sum_dy(static_cast<std::size_t>(c_count), 0.0);
  std::vector<double> sum_dy_xhat(static_cast<std::size_t>(c_count), 0.0);
  for (std::size_t i = 0; i < dy.size(); ++i) {
    const std::size_t hw = static_cast<std::size_t>(dy[i].dim(1)) * dy[i].dim(2);
    for (int c = 0; c < c_count; ++c) {
      const auto ci = static_cast<std::size_t>(c);
      const Real* g = dy[i].data() + ci * hw;
      const Real* xh = cache.xhat[i].data() + ci * hw;
      double s = 0.0;
      double sx = 0.0;
      for (std::size_t j = 0; j < hw; ++j) {
        s += g[j];
        sx += static_cast<double>(g[j]) * xh[j];
      }
      sum_dy[ci] += s;
      sum_dy_xhat[ci] += sx;
    }
  }
  for (int c = 0; c < c_count; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    p.beta.grad()[ci] += static_cast<Real>(sum_dy[ci]);
    p.gamma.grad()[ci] += static_cast<Real>(sum_dy_xhat[ci]);
  }
  const double inv_n = 1.0 / static_cast<double>(cache.count);
  Batch<Real> dx;
  dx.reserve(dy.size());
  for (std::size_t i = 0; i < dy.size(); ++i) {
    const std::size_t hw = static_cast<std::size_t>(dy[i].dim(1)) * dy[i].dim(2);
    Tensor<Real> d(dy[i].shape());
    for (int c = 0; c < c_count; ++c) {
      const auto ci = static_cast<std::size_t>(c);
      const Real* g = dy[i].data() + ci * hw;
      const Real* xh = cache.xhat[i].data() + ci * hw;
      Real* o = d.data() + ci * hw;
      const Real k = p.gamma[ci] * cache.inv_std[ci];
      const Real mdy = static_cast<Real>(sum_dy[ci] * inv_n);
      const Real mdx = static_cast<Real>(sum_dy_xhat[ci] * inv_n);
      for (std::size_t j = 0; j < hw; ++j) o[j] = k * (g[j] - mdy - xh[j] * mdx);
    }
    dx.push_back(std::move(d));
  }
  return dx;
}

// ---------------------------------------------------------------------------
// ReLU

template <typename Real>
Batch<Real> relu_fwd(const Batch<Real>& x, ReluCache<Real>* cache) {
  Batch<Real> out;
  out.reserve(x.size());
  for (const auto& t : x) {
    Tensor<Real> y(t.shape());
    for (std::size_t i = 0; i < t.size(); ++i) y[i] = t[i] > Real(0) ? t[i] : Real(0);
    out.push_back(std::move(y));
  }
  if (cache) cache->out = out;
  return out;
}

template <typename Real>
Batch<Real> relu_bwd(const ReluCache<Real>& cache, const Batch<Real>& dy) {
  Batch<Real> dx;
  dx.reserve(dy.size());
  for (std::size_t i = 0; i < dy.size(); ++i) {
    Tensor<Real> d(dy[i].shape());
    const auto& y = cache.out[i];
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = y[j] > Real(0) ? dy[i][j] : Real(0);
    dx.push_back(std::move(d));
  }
  return dx;
}

// ---------------------------------------------------------------------------
// MaxPool2d

template <typename Real>
Batch<Real> maxpool2d_fwd(const Batch<Real>& x, int k, MaxPoolCache<Real>* cache) {
  if (k < 1) throw ShapeError("maxpool kernel must be positive");
  Batch<Real> out;
  out.reserve(x.size());
  if (cache) {
    cache->argmax.clear();
    cache->in_shape.clear();
  }
  for (const auto& t : x) {
    check_rank(t.rank(), 3, "maxpool2d");
    const int c_count = t.dim(0);
    const int h = t.dim(1);
    const int w = t.dim(2);
    const int ho = h / k;
    const int wo = w / k;
    if (ho < 1 || wo < 1) throw ShapeError("maxpool2d: input smaller than the pooling window");
    Tensor<Real> y({c_count, ho, wo});
    std::vector<int> arg(y.size());
    for (int c = 0; c < c_count; ++c) {
      const Real* src = t.data() + static_cast<std::size_t>(c) * h * w;
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
          int best = (oy * k) * w + ox * k;
          for (int dy = 0; dy < k; ++dy) {
            for (int dx = 0; dx < k; ++dx) {
              const int idx = (oy * k + dy) * w + ox * k + dx;
              if (src[idx] > src[best]) best = idx;
            }
          }
          const std::size_t o = (static_cast<std::size_t>(c) * ho + oy) * wo + ox;
          y[o] = src[best];
          arg[o] = c * h * w + best;
        }
      }
    }
    out.push_back(std::move(y));
    if (cache) {
      cache->argmax.push_back(std::move(arg));
      cache->in_shape.push_back(t.shape());
    }
  }
  return out;
}

template <typename Real>
Batch<Real> maxpool2d_bwd(const MaxPoolCache<Real>& cache, const Batch<Real>& dy) {
  Batch<Real> dx;
  dx.reserve(dy.size());
  for (std::size_t i = 0; i < dy.size(); ++i) {
    Tensor<Real> d(cache.in_shape[i]);
    const auto& arg = cache.argmax[i];
    for (std::size_t j = 0; j < dy[i].size(); ++j) d[static_cast<std::size_t>(arg[j])] += dy[i][j];
    dx.push_back(std::move(d));
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Column max pool

template <typename Real>
Batch<Real> column_max_pool_fwd(const Batch<Real>& x, ColumnPoolCache<Real>* cache) {
  Batch<Real> out;
  out.reserve(x.size());
  if (cache) cache->argmax_row.clear();
  for (const auto& t : x) {
    check_rank(t.rank(), 3, "column_max_pool");
    const int c_count = t.dim(0);
    const int h = t.dim(1);
    const int w = t.dim(2);
    if (h < 1) throw ShapeError("column_max_pool: empty height");
    Tensor<Real> y({w, c_count});
    std::vector<int> arg(y.size());
    for (int c = 0; c < c_count; ++c) {
      const Real* src = t.data() + static_cast<std::size_t>(c) * h * w;
      for (int col = 0; col < w; ++col) {
        int best = 0;
        for (int r = 1; r < h; ++r) {
          if (src[r * w + col] > src[best * w + col]) best = r;
        }
        const std::size_t o = static_cast<std::size_t>(col) * c_count + c;
        y[o] = src[best * w + col];
        arg[o] = best;
      }
    }
    out.push_back(std::move(y));
    if (cache) {
      cache->argmax_row.push_back(std::move(arg));
      cache->channels = c_count;
      cache->height = h;
    }
  }
  return out;
}

template <typename Real>
Batch<Real> column_max_pool_bwd(const ColumnPoolCache<Real>& cache, const Batch<Real>& dy) {
  Batch<Real> dx;
  dx.reserve(dy.size());
  for (std::size_t i = 0; i < dy.size(); ++i) {
    const int w = dy[i].dim(0);
    const int c_count = cache.channels;
    const int h = cache.height;
    Tensor<Real> d({c_count, h, w});
    const auto& arg = cache.argmax_row[i];
    for (int col = 0; col < w; ++col) {
      for (int c = 0; c < c_count; ++c) {
        const std::size_t o = static_cast<std::size_t>(col) * c_count + c;
        d[(static_cast<std::size_t>(c) * h + arg[o]) * w + col] += dy[i][o];
      }
    }
    dx.push_back(std::move(d));
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Linear

template <typename Real>
LinearParams<Real>::LinearParams(int in, int out) : in_features(in), out_features(out) {
  if (in < 1 || out < 1) throw ShapeError("invalid linear geometry");
  weight = with_grad<Real>({out, in});
  bias = with_grad<Real>({out});
}

template <typename Real>
void LinearParams<Real>::init_uniform(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_features));
  fill_uniform(weight, rng, bound);
  fill_uniform(bias, rng, bound);
}

template <typename Real>
void LinearParams<Real>::collect(const std::string& prefix, TensorList<Real>& params) {
  params.push_back({prefix + ".weight", &weight});
  params.push_back({prefix + ".bias", &bias});
}

template <typename Real>
Batch<Real> linear_fwd(const LinearParams<Real>& p, const Batch<Real>& x, LinearCache<Real>* cache) {
  const ConstMatMap<Real> w(p.weight.data(), p.out_features, p.in_features);
  Batch<Real> out;
  out.reserve(x.size());
  for (const auto& t : x) {
    check_rank(t.rank(), 2, "linear");
    if (t.dim(1) != p.in_features) throw ShapeError("linear: feature mismatch");
    const int steps = t.dim(0);
    Tensor<Real> y({steps, p.out_features});
    MatMap<Real> ym(y.data(), steps, p.out_features);
    ym.noalias() = ConstMatMap<Real>(t.data(), steps, p.in_features) * w.transpose();
    for (int s = 0; s < steps; ++s) {
      for (int o = 0; o < p.out_features; ++o) ym(s, o) += p.bias[static_cast<std::size_t>(o)];
    }
    out.push_back(std::move(y));
  }
  if (cache) cache->in = x;
  return out;
}

template <typename Real>
Batch<Real> linear_bwd(LinearParams<Real>& p, const LinearCache<Real>& cache, const Batch<Real>& dy) {
  const ConstMatMap<Real> w(p.weight.data(), p.out_features, p.in_features);
  MatMap<Real> dw(p.weight.grad(), p.out_features, p.in_features);
  Batch<Real> dx;
  dx.reserve(dy.size());
  for (std::size_t i = 0; i < dy.size(); ++i) {
    const int steps = dy[i].dim(0);
    const ConstMatMap<Real> g(dy[i].data(), steps, p.out_features);
    const ConstMatMap<Real> xin(cache.in[i].data(), steps, p.in_features);
    dw.noalias() += g.transpose() * xin;
    for (int o = 0; o < p.out_features; ++o) p.bias.grad()[o] += g.col(o).sum();
    Tensor<Real> d({steps, p.in_features});
    MatMap<Real>(d.data(), steps, p.in_features).noalias() = g * w;
    dx.push_back(std::move(d));
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Sequence convolution

template <typename Real>
SeqConvParams<Real>::SeqConvParams(int in, int out, int k) : in_features(in), out_features(out), kernel(k) {
  if (in < 1 || out < 1 || k < 1 || k % 2 == 0) throw ShapeError("invalid sequence conv geometry");
  weight = with_grad<Real>({out, k * in});
  bias = with_grad<Real>({out});
}

template <typename Real>
void SeqConvParams<Real>::init_uniform(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_features) * kernel);
  fill_uniform(weight, rng, bound);
  fill_uniform(bias, rng, bound);
}

template <typename Real>
void SeqConvParams<Real>::collect(const std::string& prefix, TensorList<Real>& params) {
  params.push_back({prefix + ".weight", &weight});
  params.push_back({prefix + ".bias", &bias});
}

template <typename Real>
Batch<Real> seqconv_fwd(const SeqConvParams<Real>& p, const Batch<Real>& x, SeqConvCache<Real>* cache) {
  const int width = p.kernel * p.in_features;
  const int half = p.kernel / 2;
  const ConstMatMap<Real> w(p.weight.data(), p.out_features, width);
  Batch<Real> out;
  out.reserve(x.size());
  if (cache) cache->cols.clear();
  for (const auto& t : x) {
    check_rank(t.rank(), 2, "seqconv");
    if (t.dim(1) != p.in_features) throw ShapeError("seqconv: feature mismatch");
    const int steps = t.dim(0);
    Tensor<Real> col({steps, width});
    for (int s = 0; s < steps; ++s) {
      for (int j = 0; j < p.kernel; ++j) {
        const int src = s + j - half;
        if (src < 0 || src >= steps) continue;
        std::copy_n(t.data() + static_cast<std::size_t>(src) * p.in_features, p.in_features,
                    col.data() + static_cast<std::size_t>(s) * width + static_cast<std::size_t>(j) * p.in_features);
      }
    }
    Tensor<Real> y({steps, p.out_features});
    MatMap<Real> ym(y.data(), steps, p.out_features);
    ym.noalias() = ConstMatMap<Real>(col.data(), steps, width) * w.transpose();
    for (int s = 0; s < steps; ++s) {
      for (int o = 0; o < p.out_features; ++o) ym(s, o) += p.bias[static_cast<std::size_t>(o)];
    }
    out.push_back(std::move(y));
    if (cache) cache->cols.push_back(std::move(col));
  }
  return out;
}

template <typename Real>
Batch<Real> seqconv_bwd(SeqConvParams<Real>& p, const SeqConvCache<Real>& cache, const Batch<Real>& dy) {
  const int width = p.kernel * p.in_features;
  const int half = p.kernel / 2;
  const ConstMatMap<Real> w(p.weight.data(), p.out_features, width);
  MatMap<Real> dw(p.weight.grad(), p.out_features, width);
  Batch<Real> dx;
  dx.reserve(dy.size());
  for (std::size_t i = 0; i < dy.size(); ++i) {
    const int steps = dy[i].dim(0);
    const ConstMatMap<Real> g(dy[i].data(), steps, p.out_features);
    dw.noalias() += g.transpose() * ConstMatMap<Real>(cache.cols[i].data(), steps, width);
    for (int o = 0; o < p.out_features; ++o) p.bias.grad()[o] += g.col(o).sum();
    Tensor<Real> dcol({steps, width});
    MatMap<Real>(dcol.data(), steps, width).noalias() = g * w;
    Tensor<Real> d({steps, p.in_features});
    for (int s = 0; s < steps; ++s) {
      for (int j = 0; j < p.kernel; ++j) {
        const int dst = s + j - half;
        if (dst < 0 || dst >= steps) continue;
        const Real* src = dcol.data() + static_cast<std::size_t>(s) * width + static_cast<std::size_t>(j) * p.in_features;
        Real* o = d.data() + static_cast<std::size_t>(dst) * p.in_features;
        for (int f = 0; f < p.in_features; ++f) o[f] += src[f];
      }
    }
    dx.push_back(std::move(d));
  }
  return dx;
}

// ---------------------------------------------------------------------------

template <typename Real>
Batch<Real> add(const Batch<Real>& a, const Batch<Real>& b) {
  Batch<Real> out = a;
  add_inplace(out, b);
  return out;
}

template <typename Real>
void add_inplace(Batch<Real>& a, const Batch<Real>& b) {
  if (a.size() != b.size()) throw ShapeError("add: batch size mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].shape() != b[i].shape()) throw ShapeError("add: shape mismatch");
    for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] += b[i][j];
  }
}

#define XSCRIPT_INSTANTIATE_LAYERS(Real)                                                                  \
  template struct Conv2dParams<Real>;                                                                     \
  template Batch<Real> conv2d_fwd(const Conv2dParams<Real>&, const Batch<Real>&, Conv2dCache<Real>*);     \
  template Batch<Real> conv2d_bwd(Conv2dParams<Real>&, const Conv2dCache<Real>&, const Batch<Real>&);     \
  template struct BatchNormParams<Real>;                                                                  \
  template Batch<Real> batchnorm_fwd(const BatchNormParams<Real>&, const Batch<Real>&, bool,              \
                                     BatchNormCache<Real>*);                                              \
  template void batchnorm_update_running(BatchNormParams<Real>&, const BatchNormCache<Real>&);            \
  template Batch<Real> batchnorm_bwd(BatchNormParams<Real>&, const BatchNormCache<Real>&,                 \
                                     const Batch<Real>&);                                                 \
  template Batch<Real> relu_fwd(const Batch<Real>&, ReluCache<Real>*);                                    \
  template Batch<Real> relu_bwd(const ReluCache<Real>&, const Batch<Real>&);                              \
  template Batch<Real> maxpool2d_fwd(const Batch<Real>&, int, MaxPoolCache<Real>*);                       \
  template Batch<Real> maxpool2d_bwd(const MaxPoolCache<Real>&, const Batch<Real>&);                      \
  template Batch<Real> column_max_pool_fwd(const Batch<Real>&, ColumnPoolCache<Real>*);                   \
  template Batch<Real> column_max_pool_bwd(const ColumnPoolCache<Real>&, const Batch<Real>&);             \
  template struct LinearParams<Real>;                                                                     \
  template Batch<Real> linear_fwd(const LinearParams<Real>&, const Batch<Real>&, LinearCache<Real>*);     \
  template Batch<Real> linear_bwd(LinearParams<Real>&, const LinearCache<Real>&, const Batch<Real>&);     \
  template struct SeqConvParams<Real>;                                                                    \
  template Batch<Real> seqconv_fwd(const SeqConvParams<Real>&, const Batch<Real>&, SeqConvCache<Real>*);  \
  template Batch<Real> seqconv_bwd(SeqConvParams<Real>&, const SeqConvCache<Real>&, const Batch<Real>&);  \
  template Batch<Real> add(const Batch<Real>&, const Batch<Real>&);                                       \
  template void add_inplace(Batch<Real>&, const Batch<Real>&);

XSCRIPT_INSTANTIATE_LAYERS(float)
XSCRIPT_INSTANTIATE_LAYERS(double)

}  // namespace xscript::nn
