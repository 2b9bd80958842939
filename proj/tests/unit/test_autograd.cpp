// tests/unit/test_autograd.cpp

// Copyright 2026  The htse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>

#include "grad_check.hpp"
#include "htse/models.hpp"
#include "htse/nn/layers.hpp"
#include "htse/nn/ops.hpp"

namespace htse::nn {
namespace {

using testing::check_gradients;

Parameter random_param(const char* name, Eigen::Index r, Eigen::Index c, Rng& rng,
                       double lo = -1.0, double hi = 1.0) {
  Parameter p{name, Matrix(r, c)};
  for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = rng.uniform(lo, hi);
  return p;
}

// Weighted sum so that every output entry gets a distinct upstream gradient.
Var reduce(const Var& y, std::uint64_t seed) {
  Rng rng(seed);
  Matrix w(y.rows(), y.cols());
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-1.0, 1.0);
  Tape& t = y.tape();
  return sum(mul(y, t.constant(w)));
}

void expect_ok(const std::vector<Parameter*>& ps, const std::function<Var(Tape&)>& f,
               int samples = 40) {
  const auto r = check_gradients(ps, f, samples, 99);
  EXPECT_LT(r.max_rel_error, 1e-5) << "analytic " << r.worst_analytic << " numeric "
                                   << r.worst_numeric;
}

TEST(Autograd, ElementwiseOps) {
  Rng rng(1);
  auto a = random_param("a", 4, 3, rng);
  auto b = random_param("b", 4, 3, rng);
  auto row = random_param("row", 1, 3, rng);
  auto slope = random_param("slope", 1, 1, rng, 0.1, 0.4);
  expect_ok({&a, &b, &row, &slope}, [&](Tape& t) {
    const Var x = t.param(a), y = t.param(b);
    Var z = add(mul(x, y), t.param(row));
    z = sub(z, scale(y, 0.3));
    z = add(sigmoid(z), tanh(x));
    z = prelu(z, t.param(slope));
    z = add_constant(z, Matrix::Constant(4, 3, 0.1));
    return reduce(z, 5);
  });
}

TEST(Autograd, LinearAndNorm) {
  Rng rng(2);
  auto x = random_param("x", 5, 4, rng);
  auto w = random_param("w", 3, 4, rng);
  auto bias = random_param("bias", 1, 3, rng);
  auto g = random_param("g", 1, 3, rng);
  auto be = random_param("be", 1, 3, rng);
  expect_ok({&x, &w, &bias, &g, &be}, [&](Tape& t) {
    const Var y = linear(t.param(x), t.param(w), t.param(bias));
    return reduce(layer_norm(y, t.param(g), t.param(be)), 6);
  });
}

TEST(Autograd, FilmPerFrameAndBroadcast) {
  Rng rng(3);
  auto x = random_param("x", 6, 4, rng);
  auto g1 = random_param("g1", 1, 4, rng);
  auto b1 = random_param("b1", 1, 4, rng);
  auto g2 = random_param("g2", 6, 4, rng);
  auto b2 = random_param("b2", 6, 4, rng);
  expect_ok({&x, &g1, &b1, &g2, &b2}, [&](Tape& t) {
    const Var y = film(t.param(x), t.param(g1), t.param(b1));
    return reduce(film(y, t.param(g2), t.param(b2)), 7);
  });
}

TEST(Autograd, GroupedSelfAttention) {
  Rng rng(4);
  const int c = 4;
  auto x = random_param("x", 6, c, rng);
  auto w_in = random_param("w_in", 3 * c, c, rng, -0.5, 0.5);
  auto b_in = random_param("b_in", 1, 3 * c, rng);
  auto w_out = random_param("w_out", c, c, rng);
  auto b_out = random_param("b_out", 1, c, rng);
  expect_ok({&x, &w_in, &b_in, &w_out, &b_out}, [&](Tape& t) {
    return reduce(grouped_self_attention(t.param(x), t.param(w_in), t.param(b_in),
                                         t.param(w_out), t.param(b_out), 2, 3),
                  8);
  }, 80);
}

TEST(Autograd, GatherScatterConcat) {
  Rng rng(5);
  auto x = random_param("x", 4, 2, rng);
  auto y = random_param("y", 4, 1, rng);
  auto idx = std::make_shared<const std::vector<int>>(std::vector<int>{0, 2, -1, 2, 3, 1});
  expect_ok({&x, &y}, [&](Tape& t) {
    const Var g = gather_rows(t.param(x), idx);
    const Var s = scatter_add_rows(g, idx, 5);
    const Var c = concat_cols({resize_rows(s, 4), t.param(y), broadcast_rows(mean_rows(t.param(x)), 4)});
    return reduce(c, 9);
  });
}

TEST(Autograd, FramingAndOverlapAdd) {
  Rng rng(6);
  auto sig = random_param("sig", 20, 1, rng);
  expect_ok({&sig}, [&](Tape& t) {
    const Var f = frame_signal(t.param(sig), 8, 4);
    return reduce(overlap_add(mul(f, f), 4), 10);
  });
}

TEST(Autograd, L2NormalizeAndMean) {
  Rng rng(7);
  auto x = random_param("x", 2, 5, rng);
  expect_ok({&x}, [&](Tape& t) {
    return add(reduce(l2_normalize_rows(t.param(x)), 11), mean(t.param(x)));
  });
}

TEST(Autograd, NegSiSdr) {
  Rng rng(8);
  auto est = random_param("est", 64, 1, rng);
  Matrix ref(64, 1);
  for (Eigen::Index i = 0; i < 64; ++i) ref(i, 0) = rng.uniform(-1.0, 1.0);
  expect_ok({&est}, [&](Tape& t) { return neg_si_sdr(t.param(est), ref); });
}

TEST(Autograd, NegSiSdrValueMatchesMetric) {
  Rng rng(9);
  AudioSignal est = AudioSignal::zeros(100), ref = AudioSignal::zeros(100);
  Matrix e(100, 1), r(100, 1);
  for (int i = 0; i < 100; ++i) {
    ref.samples[i] = r(i, 0) = rng.uniform(-1.0, 1.0);
    est.samples[i] = e(i, 0) = r(i, 0) + 0.3 * rng.uniform(-1.0, 1.0);
  }
  Tape tape(false);
  const double v = neg_si_sdr(tape.constant(e), r, 0.0).value()(0, 0);
  EXPECT_NEAR(-v, si_sdr(est, ref), 1e-9);
}

TEST(Autograd, GradientsAccumulateAcrossUses) {
  Parameter p{"p", Matrix::Constant(1, 1, 3.0)};
  Tape tape;
  const Var x = tape.param(p);
  const Var y = sum(mul(x, x));  // x^2
  tape.backward(y);
  GradMap g;
  tape.collect_param_grads(g);
  EXPECT_DOUBLE_EQ(g.at(&p)(0, 0), 6.0);
}

TEST(Autograd, NoGradTapeRecordsNothing) {
  Parameter p{"p", Matrix::Ones(2, 2)};
  Tape tape(false);
  const Var y = sum(relu(tape.param(p)));
  EXPECT_FALSE(tape.requires_grad(y.id()));
  EXPECT_DOUBLE_EQ(y.value()(0, 0), 4.0);
}

TEST(Autograd, MiniatureTseModel) {
  TseModelConfig cfg = TseModelConfig::toy();
  cfg.encoder_kernel = 32;
  cfg.encoder_stride = 16;
  cfg.channels = 8;
  cfg.repeats = 1;
  cfg.chunk_size = 20;
  cfg.embedding_dim = 8;
  cfg.speaker_hidden = 16;
  cfg.ff_dim = 16;
  TseNetwork net(cfg, 3);
  Rng rng(11);
  AudioSignal mix = AudioSignal::zeros(1600), ref = AudioSignal::zeros(1600),
              enr = AudioSignal::zeros(1600);
  for (int i = 0; i < 1600; ++i) {
    ref.samples[i] = 0.3 * std::sin(0.05 * i) + 0.05 * rng.uniform(-1.0, 1.0);
    mix.samples[i] = ref.samples[i] + 0.3 * rng.uniform(-1.0, 1.0);
    enr.samples[i] = 0.3 * std::sin(0.07 * i) + 0.05 * rng.uniform(-1.0, 1.0);
  }
  Matrix r = padded_column(ref, 1, 1);
  auto params = net.params().all();
  ASSERT_GE(params.size(), 20u);
  const auto res = check_gradients(params, [&](Tape& t) {
    const auto out = net.forward(t, mix, net.embed(t, enr));
    return neg_si_sdr(out.signal, r);
  }, 60, 12);
  EXPECT_EQ(res.checked, 60);
  EXPECT_GE(res.nonzero, 50);
  std::printf("max rel error %.3g, nonzero %d\n", res.max_rel_error, res.nonzero);
  EXPECT_LT(res.max_rel_error, 1e-3) << res.worst_analytic << " vs " << res.worst_numeric;
}

}  // namespace
}  // namespace htse::nn
