// core/src/mixer.cpp

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

#include "htse/mixer.hpp"

#include <algorithm>
#include <cmath>

#include "htse/error.hpp"

namespace htse {

std::size_t MixConfig::num_samples() const {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate));
}

nlohmann::json to_json(const MixConfig& c) {
  return {{"k_speakers", c.k_speakers},
          {"with_noise", c.with_noise},
          {"duration_s", c.duration_s},
          {"snr_lo_db", c.snr_lo_db},
          {"snr_hi_db", c.snr_hi_db},
          {"snr_mode", c.snr_mode == SnrMode::kGlobal ? "global" : "per-component"},
          {"sample_rate", c.sample_rate}};
}

MixConfig mix_config_from_json(const nlohmann::json& j, MixConfig c) {
  c.k_speakers = j.value("k_speakers", c.k_speakers);
  c.with_noise = j.value("with_noise", c.with_noise);
  c.duration_s = j.value("duration_s", c.duration_s);
  c.snr_lo_db = j.value("snr_lo_db", c.snr_lo_db);
  c.snr_hi_db = j.value("snr_hi_db", c.snr_hi_db);
  if (j.contains("snr_mode")) {
    const auto m = j.at("snr_mode").get<std::string>();
    if (m == "global") c.snr_mode = SnrMode::kGlobal;
    else if (m == "per-component") c.snr_mode = SnrMode::kPerComponent;
    else throw InvalidArgument("unknown snr_mode '" + m + "'");
  }
  c.sample_rate = j.value("sample_rate", c.sample_rate);
  return c;
}

void MixtureSample::rebuild_mixture() {
  mixture = target_clean;
  for (const auto& s : interferers) {
    for (std::size_t i = 0; i < mixture.size(); ++i) mixture.samples[i] += s.samples[i];
  }
  if (noise) {
    for (std::size_t i = 0; i < mixture.size(); ++i) mixture.samples[i] += noise->samples[i];
  }
}

void apply_common_gain(MixtureSample& sample, double gain) {
  auto scale = [gain](AudioSignal& s) {
    for (double& v : s.samples) v *= gain;
  };
  scale(sample.target_clean);
  for (auto& s : sample.interferers) scale(s);
  if (sample.noise) scale(*sample.noise);
  sample.rebuild_mixture();
}

namespace {

constexpr int kMaxCropAttempts = 16;

// Crops/pads until the excerpt has energy; silent excerpts cannot be scaled.
AudioSignal excerpt(const AudioSignal& src, std::size_t n, PadPlacement placement,
                    Rng& rng, const std::filesystem::path& path) {
  for (int attempt = 0; attempt < kMaxCropAttempts; ++attempt) {
    AudioSignal out = crop_or_pad(src, n, placement, rng);
    if (energy(out.samples) > 0.0) return out;
  }
  throw InvalidArgument("utterance " + path.string() + " yields only silent excerpts");
}

}  // namespace

MixtureSample make_mixture(const CorpusIndex& index, AudioCache& cache,
                           const MixConfig& config, std::uint64_t seed) {
  if (config.k_speakers < 1) throw InvalidArgument("make_mixture: k_speakers must be >= 1");
  if (config.snr_lo_db > config.snr_hi_db) throw InvalidArgument("make_mixture: empty SNR range");
  const auto ids = index.speaker_ids();
  if (ids.size() < static_cast<std::size_t>(config.k_speakers)) {
    throw InvalidArgument("make_mixture: corpus has " + std::to_string(ids.size()) +
                          " speakers, need " + std::to_string(config.k_speakers));
  }
  if (config.with_noise && index.noise.empty()) {
    throw InvalidArgument("make_mixture: noise requested but corpus has no noise files");
  }
  const std::size_t n = config.num_samples();
  if (n == 0) throw InvalidArgument("make_mixture: duration too short");

  Rng rng(seed);
  // Partial Fisher-Yates over speaker indices; the first pick is the target.
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int i = 0; i < config.k_speakers; ++i) {
    const std::size_t j = i + rng.below(order.size() - i);
    std::swap(order[i], order[j]);
  }

  MixtureSample out;
  out.seed = seed;
  out.target_speaker_id = ids[order[0]];
  const auto& target_utts = index.speakers.at(out.target_speaker_id);
  const std::size_t t_idx = rng.below(target_utts.size());
  std::size_t e_idx = rng.below(target_utts.size() - 1);
  if (e_idx >= t_idx) ++e_idx;
  out.sources.target = target_utts[t_idx];
  out.sources.enrollment = target_utts[e_idx];

  auto load = [&](const std::filesystem::path& p) {
    auto sig = cache.load(p);
    if (sig->sample_rate != config.sample_rate) {
      throw InvalidArgument("utterance " + p.string() + " has wrong sample rate");
    }
    return sig;
  };

  out.target_clean = excerpt(*load(out.sources.target), n, config.placement, rng,
                             out.sources.target);
  out.enrollment = excerpt(*load(out.sources.enrollment), n, config.placement, rng,
                           out.sources.enrollment);

  std::vector<AudioSignal> raw;
  for (int i = 1; i < config.k_speakers; ++i) {
    const auto& spk = ids[order[i]];
    const auto& utts = index.speakers.at(spk);
    const auto& p = utts[rng.below(utts.size())];
    out.sources.interferers.push_back(p);
    out.sources.interferer_speakers.push_back(spk);
    raw.push_back(excerpt(*load(p), n, config.placement, rng, p));
  }
  if (config.with_noise) {
    const auto& p = index.noise[rng.below(index.noise.size())];
    out.sources.noise = p;
    raw.push_back(excerpt(*load(p), n, config.placement, rng, p));
  }

  const double target_e = energy(out.target_clean.samples);
  std::vector<AudioSignal> scaled;
  if (config.snr_mode == SnrMode::kPerComponent) {
    for (const auto& comp : raw) {
      const double snr_db = rng.uniform(config.snr_lo_db, config.snr_hi_db);
      scaled.push_back(scale_to_snr(out.target_clean, comp, snr_db));
      out.mix_snrs.push_back(snr_db);
    }
  } else if (!raw.empty()) {
    const double snr_db = rng.uniform(config.snr_lo_db, config.snr_hi_db);
    // Equalize components to the target energy, then scale the sum.
    AudioSignal total = AudioSignal::zeros(n, config.sample_rate);
    for (auto& comp : raw) {
      comp = scale_to_snr(out.target_clean, comp, 0.0);
      for (std::size_t i = 0; i < n; ++i) total.samples[i] += comp.samples[i];
    }
    const double g = gain_for_snr(target_e, energy(total.samples), snr_db);
    for (auto& comp : raw) {
      for (double& v : comp.samples) v *= g;
      out.mix_snrs.push_back(10.0 * std::log10(target_e / energy(comp.samples)));
      scaled.push_back(std::move(comp));
    }
  }

  const std::size_t n_interf = out.sources.interferers.size();
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    if (i < n_interf) out.interferers.push_back(std::move(scaled[i]));
    else out.noise = std::move(scaled[i]);
  }
  out.rebuild_mixture();
  return out;
}

}  // namespace htse
