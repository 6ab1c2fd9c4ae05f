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

#include "xscript/nn/lstm.hpp"

#include <cmath>

#include "eigen_maps.hpp"

namespace xscript::nn {

using detail::ConstMatMap;
using detail::ConstVecMap;
using detail::MatMap;
using detail::VecMap;

namespace {

template <typename Real>
inline Real sigmoid(Real x) {
  return Real(1) / (Real(1) + std::exp(-x));
}

template <typename Real>
Tensor<Real> param(std::vector<int> shape) {
  Tensor<Real> t(std::move(shape));
  t.enable_grad();
  return t;
}

}  // namespace

template <typename Real>
LstmDirectionParams<Real>::LstmDirectionParams(int in, int h) : input_size(in), hidden(h) {
  if (in < 1 || h < 1) throw ShapeError("invalid LSTM geometry");
  w_ih = param<Real>({4 * h, in});
  w_hh = param<Real>({4 * h, h});
  bias = param<Real>({4 * h});
}

template <typename Real>
void LstmDirectionParams<Real>::init_uniform(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (auto* t : {&w_ih, &w_hh, &bias}) {
    for (auto& v : t->values()) v = static_cast<Real>(uniform(rng, -bound, bound));
  }
}

template <typename Real>
void LstmDirectionParams<Real>::collect(const std::string& prefix, TensorList<Real>& params) {
  params.push_back({prefix + ".w_ih", &w_ih});
  params.push_back({prefix + ".w_hh", &w_hh});
  params.push_back({prefix + ".bias", &bias});
}

template <typename Real>
BiLstmParams<Real>::BiLstmParams(int input_size, int h, int layers) : hidden(h) {
  if (layers < 1) throw ShapeError("BiLSTM needs at least one layer");
  for (int l = 0; l < layers; ++l) {
    const int in = l == 0 ? input_size : 2 * h;
    forward.emplace_back(in, h);
    backward.emplace_back(in, h);
  }
}

template <typename Real>
void BiLstmParams<Real>::init_uniform(Rng& rng) {
  for (int l = 0; l < layers(); ++l) {
    forward[static_cast<std::size_t>(l)].init_uniform(rng);
    backward[static_cast<std::size_t>(l)].init_uniform(rng);
  }
}

template <typename Real>
void BiLstmParams<Real>::collect(const std::string& prefix, TensorList<Real>& params) {
  for (int l = 0; l < layers(); ++l) {
    const std::string base = prefix + ".l" + std::to_string(l);
    forward[static_cast<std::size_t>(l)].collect(base + ".fwd", params);
    backward[static_cast<std::size_t>(l)].collect(base + ".bwd", params);
  }
}

template <typename Real>
Tensor<Real> lstm_direction_fwd(const LstmDirectionParams<Real>& p, const Tensor<Real>& x, bool reverse,
                                LstmTrace<Real>* trace) {
  if (x.rank() != 2 || x.dim(1) != p.input_size) throw ShapeError("lstm: input must be T x D");
  const int steps = x.dim(0);
  const int h = p.hidden;
  const int g4 = 4 * h;
  if (steps < 1) throw ShapeError("lstm: empty sequence");

  Tensor<Real> gates({steps, g4});
  MatMap<Real> gm(gates.data(), steps, g4);
  gm.noalias() = ConstMatMap<Real>(x.data(), steps, p.input_size) *
                 ConstMatMap<Real>(p.w_ih.data(), g4, p.input_size).transpose();
  const ConstMatMap<Real> whh(p.w_hh.data(), g4, h);

  Tensor<Real> cell({steps, h});
  Tensor<Real> tanh_cell({steps, h});
  Tensor<Real> hid({steps, h});
  Tensor<Real> zero_state({h});
  for (int k = 0; k < steps; ++k) {
    const int t = reverse ? steps - 1 - k : k;
    const int prev = reverse ? t + 1 : t - 1;
    const Real* h_prev = k == 0 ? zero_state.data() : hid.data() + static_cast<std::size_t>(prev) * h;
    const Real* c_prev = k == 0 ? zero_state.data() : cell.data() + static_cast<std::size_t>(prev) * h;
    Real* z = gates.data() + static_cast<std::size_t>(t) * g4;
    VecMap<Real>(z, g4).noalias() += whh * ConstVecMap<Real>(h_prev, h);
    Real* c = cell.data() + static_cast<std::size_t>(t) * h;
    Real* tc = tanh_cell.data() + static_cast<std::size_t>(t) * h;
    Real* ho = hid.data() + static_cast<std::size_t>(t) * h;
    for (int j = 0; j < h; ++j) {
      const Real ig = sigmoid(z[j] + p.bias[static_cast<std::size_t>(j)]);
      const Real fg = sigmoid(z[h + j] + p.bias[static_cast<std::size_t>(h + j)]);
      const Real cg = std::tanh(z[2 * h + j] + p.bias[static_cast<std::size_t>(2 * h + j)]);
      const Real og = sigmoid(z[3 * h + j] + p.bias[static_cast<std::size_t>(3 * h + j)]);
      z[j] = ig;
      z[h + j] = fg;
      z[2 * h + j] = cg;
      z[3 * h + j] = og;
      c[j] = fg * c_prev[j] + ig * cg;
      tc[j] = std::tanh(c[j]);
      ho[j] = og * tc[j];
    }
  }
  if (trace) {
    trace->input = x;
    trace->gates = gates;
    trace->cell = std::move(cell);
    trace->tanh_cell = std::move(tanh_cell);
    trace->hidden = hid;
  }
  return hid;
}

template <typename Real>
Tensor<Real> lstm_direction_bwd(LstmDirectionParams<Real>& p, const LstmTrace<Real>& tr, bool reverse,
                                const Tensor<Real>& dy) {
  const int steps = tr.hidden.dim(0);
  const int h = p.hidden;
  const int g4 = 4 * h;
  const ConstMatMap<Real> whh(p.w_hh.data(), g4, h);

  Tensor<Real> dz({steps, g4});
  Tensor<Real> h_prev_all({steps, h});  // h_{prev(t)} per t, zeros at the scan start
  Tensor<Real> dh_next({h});
  Tensor<Real> dc_next({h});
  Tensor<Real> zero_state({h});
  for (int k = steps - 1; k >= 0; --k) {
    const int t = reverse ? steps - 1 - k : k;
    const int prev = reverse ? t + 1 : t - 1;
    const Real* c_prev = k == 0 ? zero_state.data() : tr.cell.data() + static_cast<std::size_t>(prev) * h;
    if (k > 0) {
      std::copy_n(tr.hidden.data() + static_cast<std::size_t>(prev) * h, h,
                  h_prev_all.data() + static_cast<std::size_t>(t) * h);
    }
    const Real* gate = tr.gates.data() + static_cast<std::size_t>(t) * g4;
    const Real* tc = tr.tanh_cell.data() + static_cast<std::size_t>(t) * h;
    const Real* gy = dy.data() + static_cast<std::size_t>(t) * h;
    Real* d = dz.data() + static_cast<std::size_t>(t) * g4;
    for (int j = 0; j < h; ++j) {
      const Real ig = gate[j];
      const Real fg = gate[h + j];
      const Real cg = gate[2 * h + j];
      const Real og = gate[3 * h + j];
      const Real dh = gy[j] + dh_next[static_cast<std::size_t>(j)];
      const Real dc = dh * og * (Real(1) - tc[j] * tc[j]) + dc_next[static_cast<std::size_t>(j)];
      d[j] = dc * cg * ig * (Real(1) - ig);
      d[h + j] = dc * c_prev[j] * fg * (Real(1) - fg);
      d[2 * h + j] = dc * ig * (Real(1) - cg * cg);
      d[3 * h + j] = dh * tc[j] * og * (Real(1) - og);
      dc_next[static_cast<std::size_t>(j)] = dc * fg;
    }
    VecMap<Real>(dh_next.data(), h).noalias() = whh.transpose() * ConstVecMap<Real>(d, g4);
  }

  const ConstMatMap<Real> dzm(dz.data(), steps, g4);
  MatMap<Real>(p.w_ih.grad(), g4, p.input_size).noalias() +=
      dzm.transpose() * ConstMatMap<Real>(tr.input.data(), steps, p.input_size);
  MatMap<Real>(p.w_hh.grad(), g4, h).noalias() +=
      dzm.transpose() * ConstMatMap<Real>(h_prev_all.data(), steps, h);
  for (int j = 0; j < g4; ++j) p.bias.grad()[j] += dzm.col(j).sum();

  Tensor<Real> dx({steps, p.input_size});
  MatMap<Real>(dx.data(), steps, p.input_size).noalias() =
      dzm * ConstMatMap<Real>(p.w_ih.data(), g4, p.input_size);
  return dx;
}

template <typename Real>
Batch<Real> bilstm_fwd(const BiLstmParams<Real>& p, const Batch<Real>& x, BiLstmCache<Real>* cache) {
  const int h = p.hidden;
  if (cache) {
    cache->forward.assign(static_cast<std::size_t>(p.layers()), {});
    cache->backward.assign(static_cast<std::size_t>(p.layers()), {});
  }
  Batch<Real> cur = x;
  for (int l = 0; l < p.layers(); ++l) {
    const auto li = static_cast<std::size_t>(l);
    Batch<Real> next;
    next.reserve(cur.size());
    if (cache) {
      cache->forward[li].resize(cur.size());
      cache->backward[li].resize(cur.size());
    }
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const Tensor<Real> hf =
          lstm_direction_fwd(p.forward[li], cur[i], false, cache ? &cache->forward[li][i] : nullptr);
      const Tensor<Real> hb =
          lstm_direction_fwd(p.backward[li], cur[i], true, cache ? &cache->backward[li][i] : nullptr);
      const int steps = cur[i].dim(0);
      Tensor<Real> y({steps, 2 * h});
      for (int t = 0; t < steps; ++t) {
        std::copy_n(hf.data() + static_cast<std::size_t>(t) * h, h, y.data() + static_cast<std::size_t>(t) * 2 * h);
        std::copy_n(hb.data() + static_cast<std::size_t>(t) * h, h,
                    y.data() + static_cast<std::size_t>(t) * 2 * h + h);
      }
      next.push_back(std::move(y));
    }
    cur = std::move(next);
  }
  return cur;
}

template <typename Real>
Batch<Real> bilstm_bwd(BiLstmParams<Real>& p, const BiLstmCache<Real>& cache, const Batch<Real>& dy) {
  const int h = p.hidden;
  Batch<Real> grad = dy;
  for (int l = p.layers() - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    Batch<Real> below;
    below.reserve(grad.size());
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const int steps = grad[i].dim(0);
      Tensor<Real> gf({steps, h});
      Tensor<Real> gb({steps, h});
      for (int t = 0; t < steps; ++t) {
        const Real* src = grad[i].data() + static_cast<std::size_t>(t) * 2 * h;
        std::copy_n(src, h, gf.data() + static_cast<std::size_t>(t) * h);
        std::copy_n(src + h, h, gb.data() + static_cast<std::size_t>(t) * h);
      }
      Tensor<Real> dx = lstm_direction_bwd(p.forward[li], cache.forward[li][i], false, gf);
      const Tensor<Real> dxb = lstm_direction_bwd(p.backward[li], cache.backward[li][i], true, gb);
      for (std::size_t j = 0; j < dx.size(); ++j) dx[j] += dxb[j];
      below.push_back(std::move(dx));
    }
    grad = std::move(below);
  }
  return grad;
}

#define XSCRIPT_INSTANTIATE_LSTM(Real)                                                                     \
  template struct LstmDirectionParams<Real>;                                                               \
  template struct BiLstmParams<Real>;                                                                      \
  template Tensor<Real> lstm_direction_fwd(const LstmDirectionParams<Real>&, const Tensor<Real>&, bool,    \
                                           LstmTrace<Real>*);                                              \
  template Tensor<Real> lstm_direction_bwd(LstmDirectionParams<Real>&, const LstmTrace<Real>&, bool,       \
                                           const Tensor<Real>&);                                           \
  template Batch<Real> bilstm_fwd(const BiLstmParams<Real>&, const Batch<Real>&, BiLstmCache<Real>*);      \
  template Batch<Real> bilstm_bwd(BiLstmParams<Real>&, const BiLstmCache<Real>&, const Batch<Real>&);

XSCRIPT_INSTANTIATE_LSTM(float)
XSCRIPT_INSTANTIATE_LSTM(double)

}  // namespace xscript::nn
