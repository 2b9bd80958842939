// core/src/eval_set.cpp

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

#include "htse/eval_set.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "htse/error.hpp"
#include "htse/wav.hpp"

namespace fs = std::filesystem;

namespace htse {

namespace {

constexpr double kPeakLimit = 0.98;

double peak(const AudioSignal& s) {
  double p = 0.0;
  for (double v : s.samples) p = std::max(p, std::abs(v));
  return p;
}

std::string rel(const fs::path& p) { return p.generic_string(); }

}  // namespace

std::string eval_item_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "s%05zu", index);
  return buf;
}

const EvalItem& EvalSet::find(const std::string& id) const {
  for (const auto& it : items) {
    if (it.id == id) return it;
  }
  throw InvalidArgument("eval set has no sample '" + id + "'");
}

std::vector<EvalItem> generate_eval_items(const CorpusIndex& index, AudioCache& cache,
                                          const MixConfig& config, std::size_t count,
                                          std::uint64_t seed) {
  std::vector<EvalItem> items;
  items.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    EvalItem item;
    item.id = eval_item_id(i);
    item.sample = make_mixture(index, cache, config, item_seed(seed, i));
    items.push_back(std::move(item));
  }
  return items;
}

nlohmann::json materialize_eval_set(const CorpusIndex& index, AudioCache& cache,
                                    const MixConfig& config, std::size_t count,
                                    std::uint64_t seed, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  nlohmann::json samples = nlohmann::json::array();
  for (std::size_t i = 0; i < count; ++i) {
    const std::string id = eval_item_id(i);
    MixtureSample s = make_mixture(index, cache, config, item_seed(seed, i));

    double p = std::max(peak(s.mixture), peak(s.target_clean));
    for (const auto& c : s.interferers) p = std::max(p, peak(c));
    if (s.noise) p = std::max(p, peak(*s.noise));
    const double gain = p > kPeakLimit ? kPeakLimit / p : 1.0;
    if (gain != 1.0) apply_common_gain(s, gain);

    s.target_clean = quantize_pcm16(s.target_clean);
    for (auto& c : s.interferers) c = quantize_pcm16(c);
    if (s.noise) s.noise = quantize_pcm16(*s.noise);
    s.enrollment = quantize_pcm16(s.enrollment);
    s.rebuild_mixture();  // exact: sum of values on the 1/32768 grid

    const fs::path dir = fs::path("samples") / id;
    nlohmann::json entry = {{"id", id},
                            {"seed", s.seed},
                            {"target_speaker", s.target_speaker_id},
                            {"snrs_db", s.mix_snrs},
                            {"gain", gain},
                            {"mixture", rel(dir / "mixture.wav")},
                            {"target", rel(dir / "target.wav")},
                            {"enrollment", rel(dir / "enrollment.wav")}};
    write_wav(out_dir / dir / "mixture.wav", s.mixture);
    write_wav(out_dir / dir / "target.wav", s.target_clean);
    write_wav(out_dir / dir / "enrollment.wav", s.enrollment);
    nlohmann::json interf = nlohmann::json::array();
    for (std::size_t k = 0; k < s.interferers.size(); ++k) {
      const fs::path f = dir / ("interferer_" + std::to_string(k) + ".wav");
      write_wav(out_dir / f, s.interferers[k]);
      interf.push_back(rel(f));
    }
    entry["interferers"] = interf;
    entry["noise"] = nullptr;
    if (s.noise) {
      write_wav(out_dir / dir / "noise.wav", *s.noise);
      entry["noise"] = rel(dir / "noise.wav");
    }
    nlohmann::json src = {{"target", s.sources.target.generic_string()},
                          {"enrollment", s.sources.enrollment.generic_string()},
                          {"interferer_speakers", s.sources.interferer_speakers},
                          {"noise", nullptr}};
    nlohmann::json src_interf = nlohmann::json::array();
    for (const auto& pth : s.sources.interferers) src_interf.push_back(pth.generic_string());
    src["interferers"] = src_interf;
    if (s.sources.noise) src["noise"] = s.sources.noise->generic_string();
    entry["sources"] = src;
    samples.push_back(std::move(entry));
  }
  nlohmann::json manifest = {{"format", "htse-eval-set"},
                             {"version", 1},
                             {"seed", seed},
                             {"count", count},
                             {"config", to_json(config)},
                             {"samples", samples}};
  std::ofstream out(out_dir / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("cannot write " + (out_dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + (out_dir / "manifest.json").string());
  return manifest;
}

EvalSet load_eval_set(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  std::ifstream in(mpath);
  if (!in) throw IoError("cannot open eval-set manifest " + mpath.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(mpath.string() + ": " + e.what());
  }
  EvalSet set;
  set.dir = dir;
  try {
    set.seed = m.at("seed").get<std::uint64_t>();
    set.config = mix_config_from_json(m.at("config"));
    for (const auto& e : m.at("samples")) {
      EvalItem item;
      item.id = e.at("id").get<std::string>();
      item.mixture_file = e.at("mixture").get<std::string>();
      item.target_file = e.at("target").get<std::string>();
      item.enrollment_file = e.at("enrollment").get<std::string>();
      auto& s = item.sample;
      s.seed = e.at("seed").get<std::uint64_t>();
      s.target_speaker_id = e.at("target_speaker").get<std::string>();
      s.mix_snrs = e.at("snrs_db").get<std::vector<double>>();
      s.mixture = read_wav(dir / item.mixture_file, set.config.sample_rate);
      s.target_clean = read_wav(dir / item.target_file, set.config.sample_rate);
      s.enrollment = read_wav(dir / item.enrollment_file, set.config.sample_rate);
      for (const auto& f : e.at("interferers")) {
        s.interferers.push_back(read_wav(dir / f.get<std::string>(), set.config.sample_rate));
      }
      if (!e.at("noise").is_null()) {
        s.noise = read_wav(dir / e.at("noise").get<std::string>(), set.config.sample_rate);
      }
      const auto& src = e.at("sources");
      s.sources.target = src.at("target").get<std::string>();
      s.sources.enrollment = src.at("enrollment").get<std::string>();
      for (const auto& f : src.at("interferers")) s.sources.interferers.emplace_back(f.get<std::string>());
      s.sources.interferer_speakers =
          src.at("interferer_speakers").get<std::vector<std::string>>();
      if (!src.at("noise").is_null()) s.sources.noise = src.at("noise").get<std::string>();
      set.items.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(mpath.string() + ": malformed manifest: " + e.what());
  }
  return set;
}

}  // namespace htse
