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
#include <vector>

#include "xscript/nn/tensor.hpp"

namespace xscript::nn {

// Step-wise decay: lr(step) = base * factor^(number of milestones passed),
// where milestone m is passed once step >= round(m * budget).
struct MultiStepLr {
  double base_lr = 5e-4;
  std::vector<double> milestones{0.5, 0.75};  // fractions of the budget
  double factor = 0.1;
  std::int64_t budget = 1;

  double at(std::int64_t step) const;
};

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// AdamW with decoupled weight decay:
//   p <- p * (1 - lr * wd)
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
template <typename Real>
class AdamW {
 public:
  AdamW(TensorList<Real> params, AdamWOptions opts);

  // One update with the current parameter gradients at learning rate `lr`.
  void step(double lr);

  std::int64_t steps() const { return step_; }
  void set_steps(std::int64_t s) { step_ = s; }
  const AdamWOptions& options() const { return opts_; }

  // Moment tensors exposed as named lists ("<param>.m", "<param>.v") for
  // checkpointing.
  TensorList<Real> moments();

 private:
  TensorList<Real> params_;
  AdamWOptions opts_;
  std::vector<Tensor<Real>> m_, v_;
  std::int64_t step_ = 0;
};

// Global L2 norm of all gradients, accumulated in double in list order.
template <typename Real>
double grad_norm(const TensorList<Real>& params);

// Scales gradients so that their global norm is at most `max_norm`; returns
// the norm before clipping. max_norm <= 0 disables clipping.
template <typename Real>
double clip_grad_norm(TensorList<Real>& params, double max_norm);

}  // namespace xscript::nn
