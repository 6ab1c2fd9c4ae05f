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

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "xscript/common.hpp"

namespace xscript::nn {

// Storage is aligned so that vectorized kernels see identical memory layouts
// from run to run.
template <typename Real>
using AlignedVector = std::vector<Real, Eigen::aligned_allocator<Real>>;

// Dense row-major array with an optional gradient buffer of equal size.
template <typename Real>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, Real fill = Real(0)) : shape_(std::move(shape)) {
    for (int d : shape_) {
      if (d < 0) throw ShapeError("negative tensor dimension");
    }
    data_.assign(element_count(shape_), fill);
  }

  static std::size_t element_count(const std::vector<int>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           [](std::size_t a, int d) { return a * static_cast<std::size_t>(d); });
  }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(static_cast<std::size_t>(i)); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }
  std::span<Real> values() { return data_; }
  std::span<const Real> values() const { return data_; }
  Real& operator[](std::size_t i) { return data_[i]; }
  Real operator[](std::size_t i) const { return data_[i]; }

  bool has_grad() const { return !grad_.empty(); }
  void enable_grad() { grad_.assign(data_.size(), Real(0)); }
  void zero_grad() { std::fill(grad_.begin(), grad_.end(), Real(0)); }
  Real* grad() { return grad_.data(); }
  const Real* grad() const { return grad_.data(); }
  std::span<Real> grads() { return grad_; }
  std::span<const Real> grads() const { return grad_; }

  void fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

  // Same data under a different shape of equal element count.
  void reshape(std::vector<int> shape) {
    if (element_count(shape) != data_.size()) throw ShapeError("reshape changes element count");
    shape_ = std::move(shape);
  }

 private:
  std::vector<int> shape_;
  AlignedVector<Real> data_;
  AlignedVector<Real> grad_;
};

// Per-sample tensors of a ragged batch: images and feature maps are C x H x W
// with a shared C and H but per-sample W; sequences are T x D.
template <typename Real>
using Batch = std::vector<Tensor<Real>>;

// Non-owning handle to a trainable tensor or a persistent buffer.
template <typename Real>
struct NamedTensor {
  std::string name;
  Tensor<Real>* tensor;
};

template <typename Real>
using TensorList = std::vector<NamedTensor<Real>>;

}  // namespace xscript::nn
