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

#include "xscript/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xscript/common.hpp"

namespace xscript::ctc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

void check_logits(const LogitsSeq& logits) {
  if (logits.steps < 1 || logits.classes < 2) {
    throw DataError("CTC logits need T >= 1 and at least one non-blank class");
  }
  if (logits.values.size() != static_cast<std::size_t>(logits.steps) * logits.classes) {
    throw DataError("CTC logits: value count does not match T x C");
  }
  for (double v : logits.values) {
    if (!std::isfinite(v)) throw NumericError("CTC logits contain non-finite values");
  }
}

void check_target(const LogitsSeq& logits, std::span<const int> target) {
  // Each adjacent repeat needs a blank between its two frames.
  std::size_t needed = target.size();
  for (std::size_t i = 1; i < target.size(); ++i) needed += target[i] == target[i - 1];
  if (needed > static_cast<std::size_t>(logits.steps)) {
    throw DataError("CTC target of length " + std::to_string(target.size()) +
                    " does not fit " + std::to_string(logits.steps) + " time steps");
  }
  for (int id : target) {
    if (id < 1 || id >= logits.classes) {
      throw DataError("CTC target id " + std::to_string(id) + " outside [1, C-1]");
    }
  }
}

// Row-wise log-softmax.
std::vector<double> log_softmax(const LogitsSeq& logits) {
  const auto c = static_cast<std::size_t>(logits.classes);
  std::vector<double> out(logits.values.size());
  for (int t = 0; t < logits.steps; ++t) {
    const double* in = logits.values.data() + t * c;
    double* o = out.data() + t * c;
    const double m = *std::max_element(in, in + c);
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) sum += std::exp(in[k] - m);
    const double lse = m + std::log(sum);
    for (std::size_t k = 0; k < c; ++k) o[k] = in[k] - lse;
  }
  return out;
}

struct Lattice {
  std::vector<int> ext;        // blank-interleaved labels, size S = 2L + 1
  std::vector<double> logp;    // T x C log-softmax
  std::vector<double> alpha;   // T x S, includes emission at t
  double log_likelihood = 0.0;
};

Lattice forward(const LogitsSeq& logits, std::span<const int> target) {
  Lattice lat;
  const int steps = logits.steps;
  const auto c = static_cast<std::size_t>(logits.classes);
  const int s_len = 2 * static_cast<int>(target.size()) + 1;
  lat.ext.assign(static_cast<std::size_t>(s_len), 0);
  for (std::size_t i = 0; i < target.size(); ++i) lat.ext[2 * i + 1] = target[i];
  lat.logp = log_softmax(logits);
  lat.alpha.assign(static_cast<std::size_t>(steps) * s_len, kNegInf);

  auto a = [&](int t, int s) -> double& { return lat.alpha[static_cast<std::size_t>(t) * s_len + s]; };
  auto lp = [&](int t, int k) { return lat.logp[t * c + static_cast<std::size_t>(k)]; };

  a(0, 0) = lp(0, lat.ext[0]);
  if (s_len > 1) a(0, 1) = lp(0, lat.ext[1]);
  for (int t = 1; t < steps; ++t) {
    for (int s = 0; s < s_len; ++s) {
      double v = a(t - 1, s);
      if (s >= 1) v = log_add(v, a(t - 1, s - 1));
      if (s >= 2 && lat.ext[s] != 0 && lat.ext[s] != lat.ext[s - 2]) v = log_add(v, a(t - 1, s - 2));
      a(t, s) = v == kNegInf ? kNegInf : v + lp(t, lat.ext[s]);
    }
  }
  double ll = a(steps - 1, s_len - 1);
  if (s_len > 1) ll = log_add(ll, a(steps - 1, s_len - 2));
  lat.log_likelihood = ll;
  return lat;
}

}  // namespace

std::vector<int> collapse(std::span<const int> path) {
  std::vector<int> out;
  int prev = -1;
  for (int id : path) {
    if (id != prev && id != Vocabulary::kBlank) out.push_back(id);
    prev = id;
  }
  return out;
}

std::vector<int> best_path(const LogitsSeq& logits) {
  std::vector<int> path(static_cast<std::size_t>(logits.steps));
  for (int t = 0; t < logits.steps; ++t) {
    const auto row = logits.row(t);
    int best = 0;
    for (int k = 1; k < logits.classes; ++k) {
      if (row[static_cast<std::size_t>(k)] > row[static_cast<std::size_t>(best)]) best = k;
    }
    path[static_cast<std::size_t>(t)] = best;
  }
  return path;
}

std::u32string greedy_decode(const LogitsSeq& logits, const Vocabulary& vocab) {
  return vocab.decode(collapse(best_path(logits)));
}

double ctc_neg_log_likelihood(const LogitsSeq& logits, std::span<const int> target) {
  check_logits(logits);
  check_target(logits, target);
  const double ll = forward(logits, target).log_likelihood;
  if (!std::isfinite(ll)) throw NumericError("CTC log-likelihood is not finite");
  return -ll;
}

LossResult ctc_loss(const LogitsSeq& logits, std::span<const int> target) {
  check_logits(logits);
  check_target(logits, target);
  const Lattice lat = forward(logits, target);
  if (!std::isfinite(lat.log_likelihood)) throw NumericError("CTC log-likelihood is not finite");

  const int steps = logits.steps;
  const int classes = logits.classes;
  const auto c = static_cast<std::size_t>(classes);
  const int s_len = static_cast<int>(lat.ext.size());

  // beta(t, s): log-probability of completing the target from state s at t,
  // excluding the emission at t.
  std::vector<double> beta(static_cast<std::size_t>(steps) * s_len, kNegInf);
  auto b = [&](int t, int s) -> double& { return beta[static_cast<std::size_t>(t) * s_len + s]; };
  auto lp = [&](int t, int k) { return lat.logp[t * c + static_cast<std::size_t>(k)]; };
  b(steps - 1, s_len - 1) = 0.0;
  if (s_len > 1) b(steps - 1, s_len - 2) = 0.0;
  for (int t = steps - 2; t >= 0; --t) {
    for (int s = 0; s < s_len; ++s) {
      double v = b(t + 1, s) + lp(t + 1, lat.ext[s]);
      if (s + 1 < s_len) v = log_add(v, b(t + 1, s + 1) + lp(t + 1, lat.ext[s + 1]));
      if (s + 2 < s_len && lat.ext[s + 2] != 0 && lat.ext[s + 2] != lat.ext[s]) {
        v = log_add(v, b(t + 1, s + 2) + lp(t + 1, lat.ext[s + 2]));
      }
      b(t, s) = v;
    }
  }

  LossResult out;
  out.loss = -lat.log_likelihood;
  out.grad = LogitsSeq(steps, classes);
  std::vector<double> occupancy(c);
  for (int t = 0; t < steps; ++t) {
    std::fill(occupancy.begin(), occupancy.end(), kNegInf);
    for (int s = 0; s < s_len; ++s) {
      const double v = lat.alpha[static_cast<std::size_t>(t) * s_len + s] + b(t, s);
      auto& slot = occupancy[static_cast<std::size_t>(lat.ext[s])];
      slot = log_add(slot, v);
    }
    for (int k = 0; k < classes; ++k) {
      const double post = occupancy[static_cast<std::size_t>(k)] == kNegInf
                              ? 0.0
                              : std::exp(occupancy[static_cast<std::size_t>(k)] - lat.log_likelihood);
      out.grad.at(t, k) = std::exp(lp(t, k)) - post;
    }
  }
  return out;
}

}  // namespace xscript::ctc
