// core/src/toy_corpus.cpp

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

#include "htse/toy_corpus.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "htse/error.hpp"
#include "htse/wav.hpp"

namespace htse {

namespace {

struct SpeakerTraits {
  double f0 = 120.0;
  double tract_scale = 1.0;
  double tilt = 1.0;       // harmonic amplitude ~ h^-tilt
  double breath = 0.02;    // aspiration noise relative level
  double rate = 1.0;       // syllable-rate multiplier
};

// F1..F3 (Hz) of five vowels for a reference vocal tract.
constexpr std::array<std::array<double, 3>, 5> kVowels = {{
    {730.0, 1090.0, 2440.0},
    {270.0, 2290.0, 3010.0},
    {300.0, 870.0, 2240.0},
    {530.0, 1840.0, 2480.0},
    {570.0, 840.0, 2410.0},
}};

SpeakerTraits traits_for(int speaker, const ToyCorpusConfig& cfg) {
  Rng rng(cfg.seed * 1000003ULL + static_cast<std::uint64_t>(speaker) * 7919ULL + 1);
  SpeakerTraits t;
  const double pos = cfg.speakers > 1 ? static_cast<double>(speaker) / (cfg.speakers - 1) : 0.5;
  // Interleave so neighbouring ids differ in pitch and timbre.
  const double pitch_pos = (speaker % 2 == 0) ? pos * 0.5 : 0.5 + pos * 0.5;
  t.f0 = 85.0 * std::pow(260.0 / 85.0, pitch_pos) * (1.0 + 0.04 * (rng.uniform() - 0.5));
  t.tract_scale = 0.82 + 0.4 * rng.uniform();
  t.tilt = 0.8 + 0.8 * rng.uniform();
  t.breath = 0.01 + 0.04 * rng.uniform();
  t.rate = 0.8 + 0.5 * rng.uniform();
  return t;
}

double formant_gain(double f, const std::array<double, 3>& formants, double scale) {
  constexpr std::array<double, 3> kWeights = {1.0, 0.6, 0.35};
  constexpr std::array<double, 3> kBandwidth = {80.0, 110.0, 150.0};
  double g = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double d = (f - formants[k] * scale) / kBandwidth[k];
    g += kWeights[k] / (1.0 + d * d);
  }
  return g;
}

void add_syllable(std::vector<double>& out, std::size_t start, std::size_t len,
                  const SpeakerTraits& spk, Rng& rng, int sample_rate) {
  const auto& vowel = kVowels[rng.below(kVowels.size())];
  const double f0_start = spk.f0 * (1.0 + 0.2 * (rng.uniform() - 0.5));
  const double f0_end = spk.f0 * (1.0 + 0.2 * (rng.uniform() - 0.5));
  const double f0_mean = 0.5 * (f0_start + f0_end);
  const int harmonics = static_cast<int>(5000.0 / f0_mean);
  std::vector<double> amp(harmonics + 1, 0.0);
  for (int h = 1; h <= harmonics; ++h) {
    amp[h] = formant_gain(h * f0_mean, vowel, spk.tract_scale) * std::pow(h, -spk.tilt);
  }
  const double sr = sample_rate;
  double phase = 2.0 * std::numbers::pi * rng.uniform();
  double lp = 0.0;
  for (std::size_t i = 0; i < len && start + i < out.size(); ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(len);
    const double f0 = f0_start + (f0_end - f0_start) * u;
    phase += 2.0 * std::numbers::pi * f0 / sr;
    if (phase > 2.0 * std::numbers::pi * 1024.0) phase -= 2.0 * std::numbers::pi * 1024.0;
    double v = 0.0;
    for (int h = 1; h <= harmonics; ++h) v += amp[h] * std::sin(h * phase);
    // Aspiration noise, lightly low-passed.
    lp = 0.7 * lp + 0.3 * (rng.uniform() - 0.5);
    v += spk.breath * 8.0 * lp;
    const double env = std::pow(std::sin(std::numbers::pi * u), 0.6);
    out[start + i] += env * v;
  }
}

void add_fricative(std::vector<double>& out, std::size_t start, std::size_t len, Rng& rng,
                   double level) {
  double prev = 0.0;
  for (std::size_t i = 0; i < len && start + i < out.size(); ++i) {
    const double w = rng.uniform() - 0.5;
    const double hp = w - prev;  // first difference: high-frequency tilt
    prev = w;
    const double u = static_cast<double>(i) / static_cast<double>(len);
    out[start + i] += level * hp * std::sin(std::numbers::pi * u);
  }
}

void normalize_rms(std::vector<double>& x, double target) {
  double e = 0.0;
  for (double v : x) e += v * v;
  if (e <= 0.0) return;
  const double g = target / std::sqrt(e / static_cast<double>(x.size()));
  for (double& v : x) v *= g;
}

}  // namespace

AudioSignal synthesize_toy_utterance(int speaker, std::uint64_t utterance_seed,
                                     const ToyCorpusConfig& cfg) {
  const SpeakerTraits spk = traits_for(speaker, cfg);
  Rng rng(utterance_seed * 2654435761ULL + static_cast<std::uint64_t>(speaker) + cfg.seed);
  const auto n = static_cast<std::size_t>(std::llround(cfg.utterance_s * cfg.sample_rate));
  std::vector<double> x(n, 0.0);
  const double sr = cfg.sample_rate;
  auto secs = [sr](double s) { return static_cast<std::size_t>(s * sr); };

  std::size_t t = secs(0.05 + 0.2 * rng.uniform());
  while (t < n) {
    if (rng.uniform() < 0.4) {
      const std::size_t flen = secs(0.02 + 0.03 * rng.uniform());
      add_fricative(x, t, flen, rng, 0.15);
      t += flen;
    }
    const std::size_t len = secs((0.12 + 0.22 * rng.uniform()) / spk.rate);
    add_syllable(x, t, len, spk, rng, cfg.sample_rate);
    t += len;
    const bool pause = rng.uniform() < 0.15;
    t += secs(pause ? 0.2 + 0.25 * rng.uniform() : 0.03 + 0.1 * rng.uniform());
  }
  normalize_rms(x, 0.05 * std::pow(10.0, (rng.uniform() - 0.5) * 6.0 / 20.0));
  return AudioSignal(std::move(x), cfg.sample_rate);
}

void generate_toy_corpus(const std::filesystem::path& root, const ToyCorpusConfig& cfg) {
  if (cfg.speakers < 1 || cfg.utterances_per_speaker < 2) {
    throw InvalidArgument("toy corpus needs >= 1 speaker and >= 2 utterances per speaker");
  }
  char name[64];
  for (int s = 0; s < cfg.speakers; ++s) {
    std::snprintf(name, sizeof(name), "spk%02d", s);
    const auto dir = root / name;
    for (int u = 0; u < cfg.utterances_per_speaker; ++u) {
      std::snprintf(name, sizeof(name), "utt%02d.wav", u);
      write_wav(dir / name, synthesize_toy_utterance(s, static_cast<std::uint64_t>(u), cfg));
    }
  }
  Rng rng(cfg.seed ^ 0x6e6f697365ULL);
  const auto n = static_cast<std::size_t>(std::llround(cfg.noise_s * cfg.sample_rate));
  for (int k = 0; k < cfg.noise_files; ++k) {
    std::vector<double> x(n);
    const double a = 0.5 + 0.45 * rng.uniform();
    const double hum_f = 50.0 + 150.0 * rng.uniform();
    double lp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      lp = a * lp + (1.0 - a) * (rng.uniform() - 0.5);
      x[i] = lp + 0.02 * std::sin(2.0 * std::numbers::pi * hum_f * i / cfg.sample_rate);
    }
    normalize_rms(x, 0.03);
    std::snprintf(name, sizeof(name), "noise%02d.wav", k);
    write_wav(root / "_noise" / name, AudioSignal(std::move(x), cfg.sample_rate));
  }
}

}  // namespace htse
