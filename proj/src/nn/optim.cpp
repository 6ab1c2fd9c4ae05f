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

#include "xscript/nn/optim.hpp"

#include <cmath>

namespace xscript::nn {

double MultiStepLr::at(std::int64_t step) const {
  double lr = base_lr;
  for (double m : milestones) {
    const auto boundary = static_cast<std::int64_t>(std::llround(m * static_cast<double>(budget)));
    if (step >= boundary) lr *= factor;
  }
  return lr;
}

template <typename Real>
AdamW<Real>::AdamW(TensorList<Real> params, AdamWOptions opts) : params_(std::move(params)), opts_(opts) {
  for (const auto& p : params_) {
    if (!p.tensor->has_grad()) throw ShapeError("AdamW: parameter '" + p.name + "' has no gradient buffer");
    m_.emplace_back(p.tensor->shape());
    v_.emplace_back(p.tensor->shape());
  }
}

template <typename Real>
void AdamW<Real>::step(double lr) {
  ++step_;
  const double b1 = opts_.beta1;
  const double b2 = opts_.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double shrink = 1.0 - lr * opts_.weight_decay;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor<Real>& p = *params_[k].tensor;
    const Real* g = p.grad();
    Real* m = m_[k].data();
    Real* v = v_[k].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = static_cast<double>(g[i]);
      const double mi = b1 * static_cast<double>(m[i]) + (1.0 - b1) * gi;
      const double vi = b2 * static_cast<double>(v[i]) + (1.0 - b2) * gi * gi;
      m[i] = static_cast<Real>(mi);
      v[i] = static_cast<Real>(vi);
      const double update = (mi / bc1) / (std::sqrt(vi / bc2) + opts_.eps);
      p[i] = static_cast<Real>(static_cast<double>(p[i]) * shrink - lr * update);
    }
  }
}

template <typename Real>
TensorList<Real> AdamW<Real>::moments() {
  TensorList<Real> out;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    out.push_back({params_[k].name + ".m", &m_[k]});
    out.push_back({params_[k].name + ".v", &v_[k]});
  }
  return out;
}

template <typename Real>
double grad_norm(const TensorList<Real>& params) {
  double sq = 0.0;
  for (const auto& p : params) {
    for (Real g : p.tensor->grads()) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  return std::sqrt(sq);
}

template <typename Real>
double clip_grad_norm(TensorList<Real>& params, double max_norm) {
  const double norm = grad_norm(params);
  if (max_norm > 0.0 && norm > max_norm && std::isfinite(norm)) {
    const auto scale = static_cast<Real>(max_norm / (norm + 1e-6));
    for (auto& p : params) {
      for (Real& g : p.tensor->grads()) g *= scale;
    }
  }
  return norm;
}

template class AdamW<float>;
template class AdamW<double>;
template double grad_norm(const TensorList<float>&);
template double grad_norm(const TensorList<double>&);
template double clip_grad_norm(TensorList<float>&, double);
template double clip_grad_norm(TensorList<double>&, double);

}  // namespace xscript::nn
