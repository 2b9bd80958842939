// core/include/htse/signal.hpp

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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "htse/rng.hpp"

namespace htse {

inline constexpr int kCanonicalSampleRate = 16000;

/// Finite stand-ins for +inf / -inf dB so reports and comparisons stay total.
/// Level ratios beyond +/-250 dB (double rounding noise) saturate to these.
inline constexpr double kPosInfDb = 300.0;
inline constexpr double kNegInfDb = -300.0;

/// Mono waveform. Samples are nominally in [-1, 1] full scale.
struct AudioSignal {
  std::vector<double> samples;
  int sample_rate = kCanonicalSampleRate;

  AudioSignal() = default;
  explicit AudioSignal(std::vector<double> s, int rate = kCanonicalSampleRate);

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  std::span<const double> view() const { return samples; }

  static AudioSignal zeros(std::size_t n, int rate = kCanonicalSampleRate);

  friend bool operator==(const AudioSignal&, const AudioSignal&) = default;
};

double energy(std::span<const double> x);

/// 10*log10(|reference|^2 / |reference - estimate|^2).
/// Returns kPosInfDb for a perfect estimate; throws for a silent reference.
double snr(std::span<const double> estimate, std::span<const double> reference);
double snr(const AudioSignal& estimate, const AudioSignal& reference);

struct SiSdrOptions {
  /// Subtract per-signal means before projecting. Off by default.
  bool zero_mean = false;
};

/// Scale-invariant SDR. The optimal scale of the reference is unconstrained
/// (may be negative), so si_sdr(-x, r) == si_sdr(x, r).
double si_sdr(std::span<const double> estimate,
              std::span<const double> reference, SiSdrOptions opts = {});
double si_sdr(const AudioSignal& estimate, const AudioSignal& reference,
              SiSdrOptions opts = {});

/// 10*log10(mean(residual^2)); kNegInfDb for an all-zero residual.
double dbfs_power(std::span<const double> residual);

/// Returns `interference` scaled so that 10*log10(|source|^2/|out|^2) equals
/// target_snr_db.
AudioSignal scale_to_snr(const AudioSignal& source,
                         const AudioSignal& interference, double target_snr_db);

/// Gain that scale_to_snr would apply.
double gain_for_snr(double source_energy, double interference_energy,
                    double target_snr_db);

enum class PadPlacement {
  kRandom,  // zeros split randomly between head and tail; random crop offset
  kTail,    // signal first, zeros appended; crop keeps the head
  kHead,    // zeros first; crop keeps the tail
};

/// Crops a contiguous segment or zero-pads to exactly target_len samples.
AudioSignal crop_or_pad(const AudioSignal& signal, std::size_t target_len,
                        PadPlacement placement, Rng& rng);

void check_same_length(std::span<const double> a, std::span<const double> b,
                       const char* what);
void check_finite(std::span<const double> x, const char* what);

}  // namespace htse
