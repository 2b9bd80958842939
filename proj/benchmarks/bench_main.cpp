// benchmarks/bench_main.cpp

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

#include <random>

#include <benchmark/benchmark.h>

#include "htse/edit_mask.hpp"
#include "htse/masking.hpp"
#include "htse/models.hpp"
#include "htse/signal.hpp"

namespace {

htse::AudioSignal noise(std::size_t n, std::uint64_t seed, double scale = 0.1) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<double> x(n);
  for (auto& v : x) v = nd(gen);
  return htse::AudioSignal(std::move(x), htse::kCanonicalSampleRate);
}

void BM_SiSdr(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = noise(n, 1), b = noise(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(htse::si_sdr(a, b));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SiSdr)->Arg(16000)->Arg(80000);

void BM_MaskingFunction(benchmark::State& state) {
  const auto kind = static_cast<htse::MaskingKind>(state.range(0));
  const auto y = noise(80000, 3), s = noise(80000, 4);
  auto spec = htse::MaskingFunctionSpec::defaults(kind);
  for (auto _ : state) benchmark::DoNotOptimize(htse::apply_masking_function(y, s, spec));
  state.SetLabel(std::string(htse::to_string(kind)));
}
BENCHMARK(BM_MaskingFunction)->DenseRange(0, 4);

void BM_Compose(benchmark::State& state) {
  const auto y = noise(80000, 5), r = noise(80000, 6);
  htse::EditMask m(80000, 0);
  m.fill(20000, 60000, 1);
  for (auto _ : state) benchmark::DoNotOptimize(htse::compose_output(y, r, m));
}
BENCHMARK(BM_Compose);

void BM_DownsampleMask(benchmark::State& state) {
  htse::EditMask m(80000, 0);
  m.fill(12345, 54321, 1);
  const auto frames = htse::encoder_frame_count(80000, 32, 16);
  for (auto _ : state) benchmark::DoNotOptimize(htse::downsample_mask(m, 16, 32, frames));
}
BENCHMARK(BM_DownsampleMask);

void BM_TseForwardToy(benchmark::State& state) {
  const htse::TseNetwork net(htse::TseModelConfig::toy(), 1);
  const auto mix = noise(32000, 7), enr = noise(32000, 8);
  const auto emb = htse::speaker_encode(net, enr);
  for (auto _ : state) benchmark::DoNotOptimize(htse::tse_forward(net, mix, emb));
  state.SetLabel("2 s mixture");
}
BENCHMARK(BM_TseForwardToy)->Unit(benchmark::kMillisecond);

void BM_RefineForwardToy(benchmark::State& state) {
  const htse::TseNetwork tse(htse::TseModelConfig::toy(), 1);
  const htse::RefineNetwork ref(htse::RefineModelConfig::toy(), htse::TseModelConfig::toy(), 2);
  const auto mix = noise(32000, 9), enr = noise(32000, 10);
  const auto emb = htse::speaker_encode(tse, enr);
  const auto t = htse::tse_forward(tse, mix, emb);
  const auto st = htse::adapt_state(ref, t.mask);
  htse::EditMask m(32000, 0);
  m.fill(8000, 16000, 1);
  for (auto _ : state) benchmark::DoNotOptimize(htse::refine_forward(ref, mix, emb, st, m));
  state.SetLabel("2 s mixture");
}
BENCHMARK(BM_RefineForwardToy)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
