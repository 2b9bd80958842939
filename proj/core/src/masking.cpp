// core/src/masking.cpp

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

#include "htse/masking.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "htse/error.hpp"

namespace htse {

std::string_view to_string(MaskingKind kind) {
  switch (kind) {
    case MaskingKind::kMeanAE: return "meanAE";
    case MaskingKind::kMaxAE: return "maxAE";
    case MaskingKind::kDbfs: return "dBFS";
    case MaskingKind::kDbfsProb: return "dBFS-prob";
    case MaskingKind::kGlobalSnr: return "GlobalSNR";
  }
  return "?";
}

MaskingKind parse_masking_kind(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c == '-' || c == '_') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (key == "meanae") return MaskingKind::kMeanAE;
  if (key == "maxae") return MaskingKind::kMaxAE;
  if (key == "dbfs") return MaskingKind::kDbfs;
  if (key == "dbfsprob") return MaskingKind::kDbfsProb;
  if (key == "globalsnr") return MaskingKind::kGlobalSnr;
  throw InvalidArgument("unknown masking function '" + std::string(name) + "'");
}

MaskingFunctionSpec MaskingFunctionSpec::defaults(MaskingKind kind) {
  MaskingFunctionSpec s;
  s.kind = kind;
  s.threshold_sigma = 0.0;
  switch (kind) {
    case MaskingKind::kMeanAE: s.threshold = 0.03; break;
    case MaskingKind::kMaxAE: s.threshold = 0.1; break;
    case MaskingKind::kDbfs: s.threshold = -40.0; break;
    case MaskingKind::kDbfsProb:
      s.threshold = -40.0;
      s.threshold_sigma = 3.0;
      break;
    case MaskingKind::kGlobalSnr: s.threshold = -5.0; break;
  }
  return s;
}

std::vector<SampleRange> segment_windows(std::size_t total_len, std::size_t window_len) {
  if (window_len == 0) throw InvalidArgument("segment_windows: window_len must be > 0");
  std::vector<SampleRange> out;
  out.reserve((total_len + window_len - 1) / window_len);
  for (std::size_t b = 0; b < total_len; b += window_len) {
    out.push_back({b, std::min(b + window_len, total_len)});
  }
  return out;
}

std::vector<std::span<const double>> segment_windows(std::span<const double> signal,
                                                     std::size_t window_len) {
  std::vector<std::span<const double>> out;
  for (const auto& r : segment_windows(signal.size(), window_len)) {
    out.push_back(signal.subspan(r.begin, r.end - r.begin));
  }
  return out;
}

double window_dissimilarity(MaskingKind kind, std::span<const double> tse_out,
                            std::span<const double> clean) {
  check_same_length(tse_out, clean, "window_dissimilarity");
  if (tse_out.empty()) throw InvalidArgument("window_dissimilarity: empty window");
  const auto n = static_cast<double>(tse_out.size());
  switch (kind) {
    case MaskingKind::kMeanAE: {
      double s = 0.0;
      for (std::size_t i = 0; i < tse_out.size(); ++i) s += std::abs(tse_out[i] - clean[i]);
      return s / n;
    }
    case MaskingKind::kMaxAE: {
      double m = 0.0;
      for (std::size_t i = 0; i < tse_out.size(); ++i) {
        m = std::max(m, std::abs(tse_out[i] - clean[i]));
      }
      return m;
    }
    case MaskingKind::kDbfs:
    case MaskingKind::kDbfsProb: {
      std::vector<double> residual(tse_out.size());
      for (std::size_t i = 0; i < tse_out.size(); ++i) residual[i] = tse_out[i] - clean[i];
      return dbfs_power(residual);
    }
    case MaskingKind::kGlobalSnr:
      return -snr(tse_out, clean);
  }
  throw InvalidArgument("window_dissimilarity: unknown kind");
}

EditMask apply_masking_function(const AudioSignal& tse_out, const AudioSignal& clean,
                                const MaskingFunctionSpec& spec) {
  check_same_length(tse_out.samples, clean.samples, "apply_masking_function");
  if (tse_out.sample_rate != clean.sample_rate) {
    throw InvalidArgument("apply_masking_function: sample rate mismatch");
  }
  EditMask mask(tse_out.size(), 0, tse_out.sample_rate);
  if (tse_out.empty()) return mask;

  if (spec.kind == MaskingKind::kGlobalSnr) {
    const double g = -snr(tse_out, clean);
    if (g > spec.threshold) mask.fill(0, mask.size(), 1);
    return mask;
  }

  Rng rng(spec.rng_seed);
  for (const auto& w : segment_windows(tse_out.size(), spec.window_len)) {
    const std::size_t len = w.end - w.begin;
    const double g = window_dissimilarity(
        spec.kind, tse_out.view().subspan(w.begin, len), clean.view().subspan(w.begin, len));
    const double tau = spec.kind == MaskingKind::kDbfsProb
                           ? rng.normal(spec.threshold, spec.threshold_sigma)
                           : spec.threshold;
    if (g > tau) mask.fill(w.begin, w.end, 1);
  }
  return mask;
}

std::size_t encoder_frame_count(std::size_t total_len, std::size_t kernel,
                                std::size_t stride) {
  if (kernel == 0 || stride == 0) throw InvalidArgument("encoder_frame_count: zero kernel/stride");
  if (total_len <= kernel) return 1;
  return (total_len - kernel + stride - 1) / stride + 1;
}

std::vector<double> downsample_mask(const EditMask& mask, std::size_t frame_stride,
                                    std::size_t frame_kernel, std::size_t frame_count) {
  if (mask.size() == 0) throw InvalidArgument("downsample_mask: empty mask");
  const std::size_t expected = encoder_frame_count(mask.size(), frame_kernel, frame_stride);
  if (frame_count != expected) {
    throw InvalidArgument("downsample_mask: frame_count " + std::to_string(frame_count) +
                          " inconsistent with mask length " + std::to_string(mask.size()) +
                          " (expected " + std::to_string(expected) + ")");
  }
  // Prefix sums make every frame O(1).
  std::vector<std::size_t> prefix(mask.size() + 1, 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    prefix[i + 1] = prefix[i] + (mask.values[i] ? 1 : 0);
  }
  std::vector<double> out(frame_count);
  for (std::size_t j = 0; j < frame_count; ++j) {
    const std::size_t b = j * frame_stride;
    const std::size_t e = std::min(b + frame_kernel, mask.size());
    out[j] = static_cast<double>(prefix[e] - prefix[b]) / static_cast<double>(e - b);
  }
  return out;
}

MaskAgreement mask_agreement(const EditMask& a, const EditMask& b) {
  if (a.size() != b.size()) throw InvalidArgument("mask_agreement: length mismatch");
  std::size_t inter = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a.values[i] != 0, y = b.values[i] != 0;
    inter += (x && y);
    na += x;
    nb += y;
  }
  const std::size_t uni = na + nb - inter;
  MaskAgreement r;
  r.iou = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  r.precision = na == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(na);
  r.recall = nb == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(nb);
  return r;
}

}  // namespace htse
