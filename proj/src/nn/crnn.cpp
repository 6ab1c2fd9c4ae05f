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

#include "xscript/nn/crnn.hpp"

#include <cmath>

namespace xscript::nn {

namespace {

constexpr int kStemKernel = 7;
constexpr int kStemStride = 2;
constexpr int kStemPad = 3;
constexpr int kPool = 2;

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("crnn config: " + what);
}

}  // namespace

void CrnnConfig::validate() const {
  require(input_height >= 1, "input_height must be >= 1");
  require(stem_channels >= 1, "stem_channels must be >= 1");
  require(!stage_blocks.empty(), "at least one stage required");
  require(stage_blocks.size() == stage_channels.size(), "stage_blocks and stage_channels differ in length");
  for (int b : stage_blocks) require(b >= 1, "stage_blocks entries must be >= 1");
  for (int c : stage_channels) require(c >= 1, "stage_channels entries must be >= 1");
  require(lstm_layers >= 1, "lstm_layers must be >= 1");
  require(lstm_hidden >= 1, "lstm_hidden must be >= 1");
  require(vocab_size >= 1, "vocab_size must be >= 1");
  require(aux_loss_weight >= 0.0 && aux_loss_weight <= 1.0, "aux_loss_weight must lie in [0, 1]");
  require(aux_kernel >= 1 && aux_kernel % 2 == 1, "aux_kernel must be odd and >= 1");
  require(bn_momentum > 0.0 && bn_momentum <= 1.0, "bn_momentum must lie in (0, 1]");
  require(bn_eps > 0.0, "bn_eps must be positive");
  int h = conv_out_size(input_height, kStemKernel, kStemStride, kStemPad);
  for (std::size_t s = 0; s + 1 < stage_blocks.size(); ++s) h /= kPool;
  require(h >= 1, "input_height too small for the pooling chain");
}

void to_json(nlohmann::json& j, const CrnnConfig& c) {
  j = nlohmann::json{{"input_height", c.input_height},       {"stem_channels", c.stem_channels},
                     {"stage_blocks", c.stage_blocks},       {"stage_channels", c.stage_channels},
                     {"lstm_layers", c.lstm_layers},         {"lstm_hidden", c.lstm_hidden},
                     {"vocab_size", c.vocab_size},           {"aux_loss_weight", c.aux_loss_weight},
                     {"aux_kernel", c.aux_kernel},           {"bn_momentum", c.bn_momentum},
                     {"bn_eps", c.bn_eps}};
}

void from_json(const nlohmann::json& j, CrnnConfig& c) {
  if (!j.is_object()) throw ConfigError("crnn config must be an object");
  static const char* const kKeys[] = {"input_height", "stem_channels", "stage_blocks", "stage_channels",
                                      "lstm_layers",  "lstm_hidden",   "vocab_size",   "aux_loss_weight",
                                      "aux_kernel",   "bn_momentum",   "bn_eps"};
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : kKeys) known = known || item.key() == k;
    if (!known) throw ConfigError("crnn config: unknown key '" + item.key() + "'");
  }
  try {
    c.input_height = j.value("input_height", c.input_height);
    c.stem_channels = j.value("stem_channels", c.stem_channels);
    c.stage_blocks = j.value("stage_blocks", c.stage_blocks);
    c.stage_channels = j.value("stage_channels", c.stage_channels);
    c.lstm_layers = j.value("lstm_layers", c.lstm_layers);
    c.lstm_hidden = j.value("lstm_hidden", c.lstm_hidden);
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.aux_loss_weight = j.value("aux_loss_weight", c.aux_loss_weight);
    c.aux_kernel = j.value("aux_kernel", c.aux_kernel);
    c.bn_momentum = j.value("bn_momentum", c.bn_momentum);
    c.bn_eps = j.value("bn_eps", c.bn_eps);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("crnn config: ") + e.what());
  }
}

int crnn_sequence_length(int width, int pools) {
  int w = conv_out_size(width, kStemKernel, kStemStride, kStemPad);
  for (int i = 0; i < pools; ++i) w /= kPool;
  return w;
}

// ---------------------------------------------------------------------------
// Residual block

template <typename Real>
ResidualBlockParams<Real>::ResidualBlockParams(int in, int out)
    : conv1(in, out, 3, 1, 1, false),
      conv2(out, out, 3, 1, 1, false),
      bn1(out),
      bn2(out),
      projection(in != out) {
  if (projection) proj = Conv2dParams<Real>(in, out, 1, 1, 0, true);
}

template <typename Real>
void ResidualBlockParams<Real>::init(Rng& rng) {
  conv1.init_kaiming(rng);
  conv2.init_kaiming(rng);
  if (projection) proj.init_kaiming(rng);
}

template <typename Real>
void ResidualBlockParams<Real>::set_bn(double momentum, double eps) {
  for (auto* bn : {&bn1, &bn2}) {
    bn->momentum = static_cast<Real>(momentum);
    bn->eps = static_cast<Real>(eps);
  }
}

template <typename Real>
void ResidualBlockParams<Real>::collect(const std::string& prefix, TensorList<Real>& params) {
  conv1.collect(prefix + ".conv1", params);
  bn1.collect(prefix + ".bn1", params);
  conv2.collect(prefix + ".conv2", params);
  bn2.collect(prefix + ".bn2", params);
  if (projection) proj.collect(prefix + ".proj", params);
}

template <typename Real>
void ResidualBlockParams<Real>::collect_buffers(const std::string& prefix, TensorList<Real>& buffers) {
  bn1.collect_buffers(prefix + ".bn1", buffers);
  bn2.collect_buffers(prefix + ".bn2", buffers);
}

template <typename Real>
Batch<Real> residual_block_fwd(const ResidualBlockParams<Real>& p, const Batch<Real>& x, bool training,
                               ResidualBlockCache<Real>* cache) {
  Batch<Real> y = conv2d_fwd(p.conv1, x, cache ? &cache->c1 : nullptr);
  y = batchnorm_fwd(p.bn1, y, training, cache ? &cache->b1 : nullptr);
  y = relu_fwd(y, cache ? &cache->r1 : nullptr);
  y = conv2d_fwd(p.conv2, y, cache ? &cache->c2 : nullptr);
  y = batchnorm_fwd(p.bn2, y, training, cache ? &cache->b2 : nullptr);
  if (p.projection) {
    add_inplace(y, conv2d_fwd(p.proj, x, cache ? &cache->proj : nullptr));
  } else {
    add_inplace(y, x);
  }
  return relu_fwd(y, cache ? &cache->out : nullptr);
}

template <typename Real>
Batch<Real> residual_block_bwd(ResidualBlockParams<Real>& p, const ResidualBlockCache<Real>& cache,
                               const Batch<Real>& dy) {
  const Batch<Real> dsum = relu_bwd(cache.out, dy);
  Batch<Real> d = batchnorm_bwd(p.bn2, cache.b2, dsum);
  d = conv2d_bwd(p.conv2, cache.c2, d);
  d = relu_bwd(cache.r1, d);
  d = batchnorm_bwd(p.bn1, cache.b1, d);
  d = conv2d_bwd(p.conv1, cache.c1, d);
  if (p.projection) {
    add_inplace(d, conv2d_bwd(p.proj, cache.proj, dsum));
  } else {
    add_inplace(d, dsum);
  }
  return d;
}

template <typename Real>
void residual_block_update_running(ResidualBlockParams<Real>& p, const ResidualBlockCache<Real>& cache) {
  batchnorm_update_running(p.bn1, cache.b1);
  batchnorm_update_running(p.bn2, cache.b2);
}

// ---------------------------------------------------------------------------
// Crnn

template <typename Real>
Crnn<Real>::Crnn(const CrnnConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  stem_conv_ = Conv2dParams<Real>(1, cfg_.stem_channels, kStemKernel, kStemStride, kStemPad, false);
  stem_bn_ = BatchNormParams<Real>(cfg_.stem_channels);
  stem_bn_.momentum = static_cast<Real>(cfg_.bn_momentum);
  stem_bn_.eps = static_cast<Real>(cfg_.bn_eps);
  int in = cfg_.stem_channels;
  for (std::size_t s = 0; s < cfg_.stage_blocks.size(); ++s) {
    std::vector<ResidualBlockParams<Real>> stage;
    const int out = cfg_.stage_channels[s];
    for (int b = 0; b < cfg_.stage_blocks[s]; ++b) {
      stage.emplace_back(b == 0 ? in : out, out);
      stage.back().set_bn(cfg_.bn_momentum, cfg_.bn_eps);
    }
    stages_.push_back(std::move(stage));
    in = out;
  }
  lstm_ = BiLstmParams<Real>(in, cfg_.lstm_hidden, cfg_.lstm_layers);
  head_ = LinearParams<Real>(lstm_.output_size(), cfg_.num_classes());
  aux_head_ = SeqConvParams<Real>(in, cfg_.num_classes(), cfg_.aux_kernel);
}

template <typename Real>
void Crnn<Real>::init(std::uint64_t seed) {
  Rng conv_rng = make_rng(seed, "init.conv");
  stem_conv_.init_kaiming(conv_rng);
  for (auto& stage : stages_) {
    for (auto& block : stage) block.init(conv_rng);
  }
  Rng seq_rng = make_rng(seed, "init.seq");
  lstm_.init_uniform(seq_rng);
  head_.init_uniform(seq_rng);
  aux_head_.init_uniform(seq_rng);
  for (auto& b : buffers()) {
    const bool is_var = b.name.size() >= 4 && b.name.compare(b.name.size() - 4, 4, "_var") == 0;
    b.tensor->fill(is_var ? Real(1) : Real(0));
  }
  for (auto& p : parameters()) {
    const auto& n = p.name;
    if (n.find(".bn") != std::string::npos || n.rfind("stem_bn", 0) == 0) {
      const bool gamma = n.size() >= 6 && n.compare(n.size() - 6, 6, ".gamma") == 0;
      p.tensor->fill(gamma ? Real(1) : Real(0));
    }
  }
  zero_grad();
}

template <typename Real>
void Crnn<Real>::check_input(const Batch<Real>& images) const {
  if (images.empty()) throw ShapeError("crnn: empty batch");
  for (const auto& img : images) {
    if (img.rank() != 3 || img.dim(0) != 1) throw ShapeError("crnn: images must be 1 x H x W");
    if (img.dim(1) != cfg_.input_height) {
      throw ShapeError("crnn: image height " + std::to_string(img.dim(1)) + " != configured " +
                       std::to_string(cfg_.input_height));
    }
    if (sequence_length(img.dim(2)) < 1) {
      throw DataError("crnn: image width " + std::to_string(img.dim(2)) + " too narrow for one time step");
    }
  }
}

template <typename Real>
CrnnOutput<Real> Crnn<Real>::forward(const Batch<Real>& images, bool training, bool with_aux,
                                     CrnnTape<Real>* tape) const {
  check_input(images);
  if (tape) {
    tape->blocks.clear();
    tape->blocks.reserve(64);
    tape->pools.assign(stages_.size() - 1, {});
  }
  Batch<Real> x = conv2d_fwd(stem_conv_, images, tape ? &tape->stem_conv : nullptr);
  x = batchnorm_fwd(stem_bn_, x, training, tape ? &tape->stem_bn : nullptr);
  x = relu_fwd(x, tape ? &tape->stem_relu : nullptr);
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    for (const auto& block : stages_[s]) {
      ResidualBlockCache<Real>* bc = nullptr;
      if (tape) bc = &tape->blocks.emplace_back();
      x = residual_block_fwd(block, x, training, bc);
    }
    if (s + 1 < stages_.size()) x = maxpool2d_fwd(x, kPool, tape ? &tape->pools[s] : nullptr);
  }
  const Batch<Real> seq = column_max_pool_fwd(x, tape ? &tape->column : nullptr);
  CrnnOutput<Real> out;
  out.main = linear_fwd(head_, bilstm_fwd(lstm_, seq, tape ? &tape->lstm : nullptr), tape ? &tape->head : nullptr);
  if (with_aux) out.aux = seqconv_fwd(aux_head_, seq, tape ? &tape->aux : nullptr);
  return out;
}

template <typename Real>
int Crnn<Real>::sequence_length(int width) const {
  return crnn_sequence_length(width, static_cast<int>(stages_.size()) - 1);
}

template <typename Real>
Batch<Real> Crnn<Real>::infer(const Batch<Real>& images) const {
  return forward(images, false, false, nullptr).main;
}

template <typename Real>
void Crnn<Real>::update_running_stats(const CrnnTape<Real>& tape) {
  batchnorm_update_running(stem_bn_, tape.stem_bn);
  std::size_t k = 0;
  for (auto& stage : stages_) {
    for (auto& block : stage) residual_block_update_running(block, tape.blocks.at(k++));
  }
}

template <typename Real>
void Crnn<Real>::backward(const CrnnTape<Real>& tape, const Batch<Real>& d_main, const Batch<Real>& d_aux) {
  Batch<Real> dseq = bilstm_bwd(lstm_, tape.lstm, linear_bwd(head_, tape.head, d_main));
  if (!d_aux.empty()) add_inplace(dseq, seqconv_bwd(aux_head_, tape.aux, d_aux));
  Batch<Real> d = column_max_pool_bwd(tape.column, dseq);
  std::size_t k = tape.blocks.size();
  for (std::size_t s = stages_.size(); s-- > 0;) {
    if (s + 1 < stages_.size()) d = maxpool2d_bwd(tape.pools[s], d);
    auto& stage = stages_[s];
    for (std::size_t b = stage.size(); b-- > 0;) d = residual_block_bwd(stage[b], tape.blocks.at(--k), d);
  }
  d = relu_bwd(tape.stem_relu, d);
  d = batchnorm_bwd(stem_bn_, tape.stem_bn, d);
  conv2d_bwd(stem_conv_, tape.stem_conv, d);
}

template <typename Real>
TensorList<Real> Crnn<Real>::parameters() {
  TensorList<Real> out;
  stem_conv_.collect("stem_conv", out);
  stem_bn_.collect("stem_bn", out);
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    for (std::size_t b = 0; b < stages_[s].size(); ++b) {
      stages_[s][b].collect("stage" + std::to_string(s) + ".block" + std::to_string(b), out);
    }
  }
  lstm_.collect("lstm", out);
  head_.collect("head", out);
  aux_head_.collect("aux_head", out);
  return out;
}

template <typename Real>
TensorList<Real> Crnn<Real>::buffers() {
  TensorList<Real> out;
  stem_bn_.collect_buffers("stem_bn", out);
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    for (std::size_t b = 0; b < stages_[s].size(); ++b) {
      stages_[s][b].collect_buffers("stage" + std::to_string(s) + ".block" + std::to_string(b), out);
    }
  }
  return out;
}

template <typename Real>
void Crnn<Real>::zero_grad() {
  for (auto& p : parameters()) p.tensor->zero_grad();
}

// ---------------------------------------------------------------------------
// Objective

template <typename Real>
ctc::LogitsSeq to_logits(const Tensor<Real>& t) {
  if (t.rank() != 2) throw ShapeError("to_logits: expected T x C");
  ctc::LogitsSeq out(t.dim(0), t.dim(1));
  for (std::size_t i = 0; i < t.size(); ++i) out.values[i] = static_cast<double>(t[i]);
  return out;
}

namespace {

template <typename Real>
Tensor<Real> scaled_grad(const ctc::LogitsSeq& g, double scale) {
  Tensor<Real> out({g.steps, g.classes});
  for (std::size_t i = 0; i < g.values.size(); ++i) out[i] = static_cast<Real>(g.values[i] * scale);
  return out;
}

void check_targets(std::size_t batch, std::size_t targets) {
  if (batch != targets) throw ShapeError("crnn loss: batch and target counts differ");
}

void check_finite(const LossBreakdown& l) {
  if (!std::isfinite(l.total)) {
    throw NumericError("non-finite training loss (main " + std::to_string(l.main) + ", aux " +
                       std::to_string(l.aux) + ")");
  }
}

}  // namespace

template <typename Real>
LossBreakdown crnn_loss_and_backward(Crnn<Real>& model, const Batch<Real>& images,
                                     std::span<const std::vector<int>> targets, CrnnTape<Real>& tape) {
  check_targets(images.size(), targets.size());
  const double lambda = model.config().aux_loss_weight;
  const CrnnOutput<Real> out = model.forward(images, true, true, &tape);
  const double inv_b = 1.0 / static_cast<double>(images.size());
  LossBreakdown loss;
  Batch<Real> d_main, d_aux;
  d_main.reserve(images.size());
  d_aux.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const ctc::LossResult m = ctc::ctc_loss(to_logits(out.main[i]), targets[i]);
    const ctc::LossResult a = ctc::ctc_loss(to_logits(out.aux[i]), targets[i]);
    loss.main += m.loss * inv_b;
    loss.aux += a.loss * inv_b;
    d_main.push_back(scaled_grad<Real>(m.grad, inv_b));
    d_aux.push_back(scaled_grad<Real>(a.grad, lambda * inv_b));
  }
  loss.total = loss.main + lambda * loss.aux;
  check_finite(loss);
  model.backward(tape, d_main, d_aux);
  return loss;
}

template <typename Real>
LossBreakdown crnn_loss(const Crnn<Real>& model, const Batch<Real>& images,
                        std::span<const std::vector<int>> targets) {
  check_targets(images.size(), targets.size());
  const double lambda = model.config().aux_loss_weight;
  const CrnnOutput<Real> out = model.forward(images, true, true, nullptr);
  const double inv_b = 1.0 / static_cast<double>(images.size());
  LossBreakdown loss;
  for (std::size_t i = 0; i < images.size(); ++i) {
    loss.main += ctc::ctc_neg_log_likelihood(to_logits(out.main[i]), targets[i]) * inv_b;
    loss.aux += ctc::ctc_neg_log_likelihood(to_logits(out.aux[i]), targets[i]) * inv_b;
  }
  loss.total = loss.main + lambda * loss.aux;
  return loss;
}

#define XSCRIPT_INSTANTIATE_CRNN(Real)                                                                     \
  template struct ResidualBlockParams<Real>;                                                               \
  template Batch<Real> residual_block_fwd(const ResidualBlockParams<Real>&, const Batch<Real>&, bool,      \
                                          ResidualBlockCache<Real>*);                                      \
  template Batch<Real> residual_block_bwd(ResidualBlockParams<Real>&, const ResidualBlockCache<Real>&,     \
                                          const Batch<Real>&);                                             \
  template void residual_block_update_running(ResidualBlockParams<Real>&, const ResidualBlockCache<Real>&); \
  template class Crnn<Real>;                                                                               \
  template ctc::LogitsSeq to_logits(const Tensor<Real>&);                                                  \
  template LossBreakdown crnn_loss_and_backward(Crnn<Real>&, const Batch<Real>&,                           \
                                                std::span<const std::vector<int>>, CrnnTape<Real>&);       \
  template LossBreakdown crnn_loss(const Crnn<Real>&, const Batch<Real>&, std::span<const std::vector<int>>);

XSCRIPT_INSTANTIATE_CRNN(float)
XSCRIPT_INSTANTIATE_CRNN(double)

}  // namespace xscript::nn
