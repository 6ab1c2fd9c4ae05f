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

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "gradient_suite.hpp"
#include "xscript/nn/checkpoint.hpp"
#include "xscript/nn/crnn.hpp"
#include "xscript/nn/optim.hpp"

using namespace xscript;
using namespace xscript::nn;

namespace {

constexpr int kShapes = 20;
constexpr double kTolerance = 1e-4;

void expect_passes(const gradcheck::Result& r) {
  INFO(r.layer << ": worst relative error " << r.worst << " over " << r.entries << " entries");
  CHECK(r.shapes >= kShapes);
  CHECK(r.entries > 0);
  CHECK(r.worst < kTolerance);
}

CrnnConfig tiny_config(int vocab) {
  CrnnConfig c;
  c.input_height = 16;
  c.stem_channels = 4;
  c.stage_blocks = {1, 1, 1};
  c.stage_channels = {4, 6, 8};
  c.lstm_layers = 2;
  c.lstm_hidden = 5;
  c.vocab_size = vocab;
  return c;
}

Batch<float> random_batch(Rng& rng, int height, std::vector<int> widths) {
  Batch<float> b;
  for (int w : widths) {
    Tensor<float> t({1, height, w});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(uniform(rng, 0.0, 1.0));
    b.push_back(std::move(t));
  }
  return b;
}

}  // namespace

TEST_CASE("gradients: conv2d") { expect_passes(gradcheck::conv2d(kShapes, 11)); }
TEST_CASE("gradients: batchnorm (training statistics)") { expect_passes(gradcheck::batchnorm(kShapes, 12)); }
TEST_CASE("gradients: relu") { expect_passes(gradcheck::relu(kShapes, 13)); }
TEST_CASE("gradients: maxpool2d") { expect_passes(gradcheck::maxpool(kShapes, 14)); }
TEST_CASE("gradients: column max pool") { expect_passes(gradcheck::column_max_pool(kShapes, 15)); }
TEST_CASE("gradients: residual block") { expect_passes(gradcheck::residual_block(kShapes, 16)); }
TEST_CASE("gradients: stacked bidirectional LSTM") { expect_passes(gradcheck::bilstm(kShapes, 17)); }
TEST_CASE("gradients: linear") { expect_passes(gradcheck::linear(kShapes, 18)); }
TEST_CASE("gradients: sequence conv (auxiliary head)") { expect_passes(gradcheck::seqconv(kShapes, 19)); }
TEST_CASE("gradients: end-to-end recognizer with both CTC losses") { expect_passes(gradcheck::crnn_ctc(kShapes, 20)); }

TEST_CASE("conv and sequence length arithmetic") {
  CHECK(conv_out_size(7, 3, 1, 1) == 7);
  CHECK(conv_out_size(8, 7, 2, 3) == 4);
  CHECK(conv_out_size(9, 7, 2, 3) == 5);
  // stem halves, then two 2x2 pools
  CHECK(crnn_sequence_length(64, 2) == 8);
  CHECK(crnn_sequence_length(67, 2) == 8);
  CHECK(crnn_sequence_length(7, 2) == 1);
}

TEST_CASE("maxpool floors odd sizes and routes gradient to the maximum") {
  Tensor<double> x({1, 3, 3});
  const double v[] = {1, 5, 0, 2, 3, 9, 7, 8, 4};
  std::copy(std::begin(v), std::end(v), x.data());
  MaxPoolCache<double> cache;
  const auto y = maxpool2d_fwd<double>({x}, 2, &cache);
  REQUIRE(y[0].shape() == std::vector<int>{1, 1, 1});
  CHECK(y[0][0] == 5.0);
  Tensor<double> dy({1, 1, 1}, 2.0);
  const auto dx = maxpool2d_bwd<double>(cache, {dy});
  CHECK(dx[0][1] == 2.0);
  CHECK(dx[0][5] == 0.0);  // 9 lies outside the pooled window
}

TEST_CASE("column max pool maps C x H x W to W x C") {
  Tensor<double> x({2, 2, 3});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i % 5);
  const auto y = column_max_pool_fwd<double>({x}, nullptr);
  REQUIRE(y[0].shape() == std::vector<int>{3, 2});
  // channel 0 rows: {0,1,2},{3,4,0}; channel 1 rows: {1,2,3},{4,0,1}
  CHECK(y[0][0] == 3.0);
  CHECK(y[0][1] == 4.0);
  CHECK(y[0][2] == 4.0);
  CHECK(y[0][3] == 2.0);
  CHECK(y[0][4] == 2.0);
  CHECK(y[0][5] == 3.0);
}

TEST_CASE("batchnorm running statistics follow the momentum rule") {
  BatchNormParams<double> p(1);
  p.momentum = 0.25;
  Tensor<double> a({1, 1, 2}), b({1, 1, 1});
  a[0] = 1.0, a[1] = 2.0, b[0] = 6.0;  // mean 3, unbiased var 7
  BatchNormCache<double> cache;
  batchnorm_fwd<double>(p, {a, b}, true, &cache);
  CHECK(p.running_mean[0] == 0.0);  // forward is pure
  batchnorm_update_running(p, cache);
  CHECK(p.running_mean[0] == doctest::Approx(0.75 * 0.0 + 0.25 * 3.0));
  CHECK(p.running_var[0] == doctest::Approx(0.75 * 1.0 + 0.25 * 7.0));
}

TEST_CASE("recognizer output shapes, eval determinism and const forward") {
  Crnn<float> model(tiny_config(5));
  model.init(3);
  Rng rng(4);
  const auto images = random_batch(rng, 16, {40, 57});
  const auto out = model.forward(images, false, true, nullptr);
  REQUIRE(out.main.size() == 2);
  CHECK(out.main[0].shape() == std::vector<int>{model.sequence_length(40), 6});
  CHECK(out.main[1].shape() == std::vector<int>{model.sequence_length(57), 6});
  CHECK(out.aux[1].shape() == out.main[1].shape());
  const auto again = model.infer(images);
  for (std::size_t b = 0; b < 2; ++b) {
    CHECK(std::equal(again[b].values().begin(), again[b].values().end(), out.main[b].values().begin()));
  }
  // eval mode is per-sample: batching does not change a sample's logits
  const auto single = model.infer({images[1]});
  CHECK(std::equal(single[0].values().begin(), single[0].values().end(), out.main[1].values().begin()));
}

TEST_CASE("recognizer rejects malformed inputs") {
  Crnn<float> model(tiny_config(3));
  Rng rng(5);
  CHECK_THROWS_AS(model.infer(random_batch(rng, 12, {40})), ShapeError);
  CHECK_THROWS_AS(model.infer(random_batch(rng, 16, {2})), DataError);
  CrnnConfig bad = tiny_config(3);
  bad.stage_channels = {4, 4};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("recognizer config json round trip rejects unknown keys") {
  const CrnnConfig c = tiny_config(7);
  nlohmann::json j = c;
  const CrnnConfig back = j.get<CrnnConfig>();
  CHECK(nlohmann::json(back) == j);
  j["dropout"] = 0.1;
  CHECK_THROWS_AS(j.get<CrnnConfig>(), ConfigError);
}

TEST_CASE("AdamW single step matches the decoupled update") {
  Tensor<double> w({2});
  w.enable_grad();
  w[0] = 1.0, w[1] = -2.0;
  w.grad()[0] = 0.5, w.grad()[1] = -0.25;
  AdamW<double> opt({{"w", &w}}, {0.9, 0.999, 1e-8, 0.01});
  opt.step(0.1);
  // step 1: m_hat = g, v_hat = g^2
  CHECK(w[0] == doctest::Approx(1.0 * (1 - 0.1 * 0.01) - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(-2.0 * (1 - 0.1 * 0.01) + 0.1 * 0.25 / (0.25 + 1e-8)).epsilon(1e-12));
  // step 2 with the same gradient, bias corrections applied by hand
  const double g = 0.5;
  const double m = 0.9 * (0.1 * g) + 0.1 * g, v = 0.999 * (0.001 * g * g) + 0.001 * g * g;
  const double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
  const double expected = w[0] * (1 - 0.05 * 0.01) - 0.05 * mh / (std::sqrt(vh) + 1e-8);
  opt.step(0.05);
  CHECK(w[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(opt.steps() == 2);
  const auto moments = opt.moments();
  REQUIRE(moments.size() == 2);
  CHECK(moments[0].name == "w.m");
  CHECK(moments[1].name == "w.v");
}

TEST_CASE("multi-step schedule decays at budget fractions") {
  const MultiStepLr lr{1e-3, {0.5, 0.75}, 0.1, 100};
  CHECK(lr.at(0) == doctest::Approx(1e-3));
  CHECK(lr.at(49) == doctest::Approx(1e-3));
  CHECK(lr.at(50) == doctest::Approx(1e-4));
  CHECK(lr.at(74) == doctest::Approx(1e-4));
  CHECK(lr.at(75) == doctest::Approx(1e-5));
  CHECK(lr.at(99) == doctest::Approx(1e-5));
}

TEST_CASE("gradient clipping scales to the requested norm") {
  Tensor<float> a({2});
  a.enable_grad();
  a.grad()[0] = 3.0f, a.grad()[1] = 4.0f;
  TensorList<float> list{{"a", &a}};
  CHECK(grad_norm(list) == doctest::Approx(5.0));
  CHECK(clip_grad_norm(list, 0.0) == doctest::Approx(5.0));
  CHECK(a.grad()[0] == 3.0f);
  CHECK(clip_grad_norm(list, 1.0) == doctest::Approx(5.0));
  CHECK(grad_norm(list) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("checkpoint bytes survive a read-write cycle") {
  Crnn<float> model(tiny_config(4));
  model.init(9);
  Checkpoint ckpt;
  ckpt.config = model.config();
  ckpt.vocabulary = {U'a', U'b', U'ب', U'ے'};
  ckpt.step = 1234;
  export_tensors(model.parameters(), ckpt);
  export_tensors(model.buffers(), ckpt);
  std::stringstream first;
  write_checkpoint(ckpt, first);
  const std::string bytes = first.str();
  std::stringstream in(bytes);
  const Checkpoint back = read_checkpoint(in);
  std::stringstream second;
  write_checkpoint(back, second);
  CHECK(second.str() == bytes);
  CHECK(back.step == 1234);
  CHECK(back.vocabulary == ckpt.vocabulary);

  Crnn<float> other(tiny_config(4));
  TensorList<float> tensors = other.parameters();
  import_tensors(back, tensors);
  const auto p0 = model.parameters(), p1 = other.parameters();
  for (std::size_t i = 0; i < p0.size(); ++i) {
    CHECK(std::equal(p0[i].tensor->values().begin(), p0[i].tensor->values().end(),
                     p1[i].tensor->values().begin()));
  }

  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_checkpoint(truncated), DataError);
  std::stringstream trailing(bytes + "x");
  CHECK_THROWS_AS(read_checkpoint(trailing), DataError);

  Crnn<float> wider(tiny_config(5));
  TensorList<float> mismatched = wider.parameters();
  CHECK_THROWS_AS(import_tensors(back, mismatched), DataError);
}

TEST_CASE("a few optimizer steps reduce the loss on a fixed batch") {
  Crnn<float> model(tiny_config(3));
  model.init(1);
  Rng rng(2);
  const auto images = random_batch(rng, 16, {48, 48});
  const std::vector<std::vector<int>> targets{{1, 2}, {3}};
  TensorList<float> params = model.parameters();
  AdamW<float> opt(params, {});
  CrnnTape<float> tape;
  model.zero_grad();
  const double first = crnn_loss_and_backward(model, images, targets, tape).total;
  double last = first;
  for (int i = 0; i < 30; ++i) {
    opt.step(1e-2);
    model.zero_grad();
    last = crnn_loss_and_backward(model, images, targets, tape).total;
  }
  CHECK(last < first);
}
