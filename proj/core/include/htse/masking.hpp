// core/include/htse/masking.hpp

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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "htse/edit_mask.hpp"
#include "htse/signal.hpp"

namespace htse {

enum class MaskingKind { kMeanAE, kMaxAE, kDbfs, kDbfsProb, kGlobalSnr };

std::string_view to_string(MaskingKind kind);
/// Accepts "meanAE", "meanae", "dbfs-prob", "dBFS-prob", "GlobalSNR", ...
MaskingKind parse_masking_kind(std::string_view name);

/// Window length that corresponds to 0.25 s at 16 kHz.
inline constexpr std::size_t kDefaultMaskWindow = 4000;

struct MaskingFunctionSpec {
  MaskingKind kind = MaskingKind::kDbfsProb;
  /// Fixed threshold, or the mean of the threshold distribution for dBFS-prob.
  double threshold = -40.0;
  /// Standard deviation of the per-window threshold (dBFS-prob only).
  double threshold_sigma = 3.0;
  std::size_t window_len = kDefaultMaskWindow;
  std::uint64_t rng_seed = 0;

  /// meanAE 0.03, maxAE 0.1, dBFS -40, dBFS-prob N(-40, 3), GlobalSNR -5.
  static MaskingFunctionSpec defaults(MaskingKind kind);
};

/// Splits [0, total_len) into consecutive windows of `window_len`; the final
/// window holds the remainder. Empty input gives no windows.
std::vector<SampleRange> segment_windows(std::size_t total_len,
                                         std::size_t window_len);
std::vector<std::span<const double>> segment_windows(std::span<const double> signal,
                                                     std::size_t window_len);

/// Dissimilarity g(A, B) of one window for the fine-grained kinds, computed over
/// the actual window length (tails are not zero-padded).
double window_dissimilarity(MaskingKind kind, std::span<const double> tse_out,
                            std::span<const double> clean);

/// E_synthetic = f(tse_out, clean). A window is marked iff g > tau (strict).
/// GlobalSNR evaluates g = -SNR over the whole signal and marks all or nothing.
/// dBFS-prob draws an independent tau ~ N(threshold, sigma) per window from an
/// Rng seeded with spec.rng_seed.
EditMask apply_masking_function(const AudioSignal& tse_out, const AudioSignal& clean,
                                const MaskingFunctionSpec& spec);

/// Average of mask samples under each encoder frame's receptive field
/// [j*stride, j*stride + kernel) clipped to the mask length. frame_count must
/// equal the encoder frame count for this length.
std::vector<double> downsample_mask(const EditMask& mask, std::size_t frame_stride,
                                    std::size_t frame_kernel, std::size_t frame_count);

/// Frame count of a strided encoder after the internal right-padding rule:
/// the input is zero-padded to the smallest length L >= max(T, kernel) with
/// (L - kernel) divisible by stride.
std::size_t encoder_frame_count(std::size_t total_len, std::size_t kernel,
                                std::size_t stride);

struct MaskAgreement {
  double iou = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

/// Sample-level agreement of `a` (prediction) against `b` (reference). Two
/// all-zero masks agree perfectly (iou = precision = recall = 1).
MaskAgreement mask_agreement(const EditMask& a, const EditMask& b);

}  // namespace htse
