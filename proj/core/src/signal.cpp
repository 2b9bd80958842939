// core/src/signal.cpp

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

#include "htse/signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "htse/error.hpp"

namespace htse {

AudioSignal::AudioSignal(std::vector<double> s, int rate)
    : samples(std::move(s)), sample_rate(rate) {
  if (rate <= 0) throw InvalidArgument("sample_rate must be positive");
}

AudioSignal AudioSignal::zeros(std::size_t n, int rate) {
  return AudioSignal(std::vector<double>(n, 0.0), rate);
}

void check_same_length(std::span<const double> a, std::span<const double> b,
                       const char* what) {
  if (a.size() != b.size()) {
    throw InvalidArgument(std::string(what) + ": length mismatch (" +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
}

void check_finite(std::span<const double> x, const char* what) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw InvalidArgument(std::string(what) + ": non-finite sample");
    }
  }
}

namespace {

void check_rates(const AudioSignal& a, const AudioSignal& b, const char* what) {
  if (a.sample_rate != b.sample_rate) {
    throw InvalidArgument(std::string(what) + ": sample rate mismatch");
  }
}

// Ratios beyond +/-250 dB are at the level of double rounding noise, so they
// saturate to the sentinels.
constexpr double kSaturationDb = 250.0;

double ratio_db(double num, double den) {
  if (den <= 0.0) return kPosInfDb;
  if (num <= 0.0) return kNegInfDb;
  const double db = 10.0 * std::log10(num / den);
  if (db >= kSaturationDb) return kPosInfDb;
  if (db <= -kSaturationDb) return kNegInfDb;
  return db;
}

}  // namespace

double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

double snr(std::span<const double> estimate, std::span<const double> reference) {
  check_same_length(estimate, reference, "snr");
  if (reference.empty()) throw InvalidArgument("snr: empty signals");
  const double ref_e = energy(reference);
  if (ref_e == 0.0) throw InvalidArgument("snr: zero-energy reference");
  double noise_e = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference[i] - estimate[i];
    noise_e += d * d;
  }
  return ratio_db(ref_e, noise_e);
}

double snr(const AudioSignal& estimate, const AudioSignal& reference) {
  check_rates(estimate, reference, "snr");
  return snr(estimate.view(), reference.view());
}

double si_sdr(std::span<const double> estimate,
              std::span<const double> reference, SiSdrOptions opts) {
  check_same_length(estimate, reference, "si_sdr");
  if (reference.empty()) throw InvalidArgument("si_sdr: empty signals");
  const std::size_t n = reference.size();
  double est_mean = 0.0, ref_mean = 0.0;
  if (opts.zero_mean) {
    for (std::size_t i = 0; i < n; ++i) {
      est_mean += estimate[i];
      ref_mean += reference[i];
    }
    est_mean /= static_cast<double>(n);
    ref_mean /= static_cast<double>(n);
  }
  double dot = 0.0, ref_e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = reference[i] - ref_mean;
    dot += (estimate[i] - est_mean) * r;
    ref_e += r * r;
  }
  if (ref_e == 0.0) throw InvalidArgument("si_sdr: zero-energy reference");
  const double alpha = dot / ref_e;
  double target_e = 0.0, resid_e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = alpha * (reference[i] - ref_mean);
    const double e = (estimate[i] - est_mean) - t;
    target_e += t * t;
    resid_e += e * e;
  }
  return ratio_db(target_e, resid_e);
}

double si_sdr(const AudioSignal& estimate, const AudioSignal& reference,
              SiSdrOptions opts) {
  check_rates(estimate, reference, "si_sdr");
  return si_sdr(estimate.view(), reference.view(), opts);
}

double dbfs_power(std::span<const double> residual) {
  if (residual.empty()) throw InvalidArgument("dbfs_power: empty input");
  const double mean_sq = energy(residual) / static_cast<double>(residual.size());
  if (mean_sq == 0.0) return kNegInfDb;
  return std::max(10.0 * std::log10(mean_sq), kNegInfDb);
}

double gain_for_snr(double source_energy, double interference_energy,
                    double target_snr_db) {
  if (source_energy <= 0.0 || interference_energy <= 0.0) {
    throw InvalidArgument("scale_to_snr: zero-energy input");
  }
  return std::sqrt(source_energy /
                   (interference_energy * std::pow(10.0, target_snr_db / 10.0)));
}

AudioSignal scale_to_snr(const AudioSignal& source,
                         const AudioSignal& interference, double target_snr_db) {
  const double g = gain_for_snr(energy(source.samples),
                                energy(interference.samples), target_snr_db);
  AudioSignal out = interference;
  for (double& v : out.samples) v *= g;
  return out;
}

AudioSignal crop_or_pad(const AudioSignal& signal, std::size_t target_len,
                        PadPlacement placement, Rng& rng) {
  if (target_len == 0) throw InvalidArgument("crop_or_pad: target_len must be > 0");
  const std::size_t n = signal.size();
  AudioSignal out = AudioSignal::zeros(target_len, signal.sample_rate);
  if (n == target_len) return signal;
  if (n > target_len) {
    const std::size_t slack = n - target_len;
    std::size_t offset = 0;
    switch (placement) {
      case PadPlacement::kRandom: offset = rng.below(slack + 1); break;
      case PadPlacement::kTail: offset = 0; break;
      case PadPlacement::kHead: offset = slack; break;
    }
    std::copy_n(signal.samples.begin() + static_cast<std::ptrdiff_t>(offset),
                target_len, out.samples.begin());
    return out;
  }
  const std::size_t pad = target_len - n;
  std::size_t head = 0;
  switch (placement) {
    case PadPlacement::kRandom: head = rng.below(pad + 1); break;
    case PadPlacement::kTail: head = 0; break;
    case PadPlacement::kHead: head = pad; break;
  }
  std::copy(signal.samples.begin(), signal.samples.end(),
            out.samples.begin() + static_cast<std::ptrdiff_t>(head));
  return out;
}

}  // namespace htse
