// core/include/htse/models.hpp

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

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "htse/edit_mask.hpp"
#include "htse/nn/layers.hpp"
#include "htse/signal.hpp"

namespace htse {

using nn::Matrix;

/// Unit-norm speaker conditioning vector.
struct SpeakerEmbedding {
  std::vector<double> values;
};

/// Refinement state S, stored frame-major: frames x C_R.
struct RefinementState {
  Matrix frames;
};

struct TseModelConfig {
  int encoder_kernel = 32;
  int encoder_stride = 16;
  int channels = 64;
  int chunk_size = 250;
  int layers = 2;
  int attn_heads = 8;
  int repeats = 4;
  int ff_dim = 256;
  /// Transformer width inside the masker; 0 uses `channels`.
  int masker_dim = 0;
  int embedding_dim = 64;
  int speaker_kernel = 256;
  int speaker_stride = 128;
  int speaker_hidden = 128;

  static TseModelConfig paper();
  /// C=16, one dual-path repeat, chunk 50, kernel 256 / stride 128.
  static TseModelConfig toy();
  void validate() const;
};

nlohmann::json to_json(const TseModelConfig& c);
TseModelConfig tse_config_from_json(const nlohmann::json& j, TseModelConfig base = {});

enum class MaskDownsampler {
  kAveragePool,    // mean of the mask under each frame's receptive field
  kStridedConv,    // learned 1-channel strided convolution (same kernel/stride)
};

struct RefineModelConfig {
  int channels = 64;  // C_R
  int chunk_size = 250;
  int layers = 2;
  int attn_heads = 8;
  int repeats = 4;
  int ff_dim = 256;
  int masker_dim = 0;
  MaskDownsampler downsampler = MaskDownsampler::kAveragePool;

  static RefineModelConfig paper();
  static RefineModelConfig toy();
  void validate() const;
};

nlohmann::json to_json(const RefineModelConfig& c);
RefineModelConfig refine_config_from_json(const nlohmann::json& j, RefineModelConfig base = {});

/// Zero-pads a signal so that a (kernel, stride) encoder tiles it exactly.
nn::Matrix padded_column(const AudioSignal& signal, int kernel, int stride);

/// Desk-scale substitute for a d-vector extractor: learned filterbank frames,
/// ReLU MLP, mean pooling over time, projection and L2 normalization.
class SpeakerEncoder {
 public:
  SpeakerEncoder() = default;
  SpeakerEncoder(nn::ParameterStore& store, const TseModelConfig& cfg, Rng& rng);
  /// Returns a 1 x D unit-norm row.
  nn::Var operator()(nn::Tape& tape, const AudioSignal& enrollment) const;

 private:
  int kernel_ = 0, stride_ = 0;
  nn::Linear frame_proj_, hidden_, out_proj_;
};

/// Target speech extractor: strided conv encoder + ReLU, FiLM on the speaker
/// embedding, dual-path masker, mask * encoding, transposed-conv decoder.
class TseNetwork {
 public:
  explicit TseNetwork(const TseModelConfig& config, std::uint64_t seed = 0);

  struct Outputs {
    nn::Var signal;  // T x 1
    nn::Var mask;    // T' x C (M_tse)
    nn::Var latent;  // T' x C encoder output
  };

  nn::Var embed(nn::Tape& tape, const AudioSignal& enrollment) const;
  Outputs forward(nn::Tape& tape, const AudioSignal& mixture, const nn::Var& embedding) const;

  const TseModelConfig& config() const { return config_; }
  nn::ParameterStore& params() { return params_; }
  const nn::ParameterStore& params() const { return params_; }

 private:
  TseModelConfig config_;
  nn::ParameterStore params_;
  SpeakerEncoder speaker_;
  nn::Linear encoder_, film_gamma_, film_beta_, decoder_;
  nn::DualPathMasker masker_;
};

/// Adaptation layer + refinement network. The adaptation layer maps M_tse
/// (C_tse per frame) to the refinement state S (C_R per frame).
class RefineNetwork {
 public:
  RefineNetwork(const RefineModelConfig& config, const TseModelConfig& tse_config,
                std::uint64_t seed = 0);

  nn::Var adapt(const nn::Var& tse_mask) const;
  /// Downsampled edit mask E' (T' x 1).
  nn::Var downsample(nn::Tape& tape, const EditMask& mask, std::size_t frames) const;
  nn::Var forward(nn::Tape& tape, const AudioSignal& mixture, const nn::Var& embedding,
                  const nn::Var& state, const EditMask& mask) const;

  const RefineModelConfig& config() const { return config_; }
  const TseModelConfig& tse_config() const { return tse_config_; }
  nn::ParameterStore& params() { return params_; }
  const nn::ParameterStore& params() const { return params_; }

 private:
  RefineModelConfig config_;
  TseModelConfig tse_config_;
  nn::ParameterStore params_;
  nn::Linear adaptation_, encoder_, mask_conv_, fusion_, film_gamma_, film_beta_, decoder_;
  nn::DualPathMasker masker_;
};

// Inference entry points (no gradient recording). Waveform outputs are
// rescaled by the least-squares gain against the mixture, so y_tse and
// y_refine share scale and sign before composition. SI-SDR is unaffected.

/// y * (<y, mixture> / <y, y>); returned unchanged when y is all zeros.
AudioSignal mixture_consistent(const AudioSignal& y, const AudioSignal& mixture);

/// Throws InvalidArgument for a silent or empty enrollment.
SpeakerEmbedding speaker_encode(const TseNetwork& net, const AudioSignal& enrollment);

struct TseResult {
  AudioSignal y_tse;
  Matrix mask;    // T' x C_tse
  Matrix latent;  // T' x C_tse
};

TseResult tse_forward(const TseNetwork& net, const AudioSignal& mixture,
                      const SpeakerEmbedding& embedding);

RefinementState adapt_state(const RefineNetwork& net, const Matrix& tse_mask);

AudioSignal refine_forward(const RefineNetwork& net, const AudioSignal& mixture,
                           const SpeakerEmbedding& embedding, const RefinementState& state,
                           const EditMask& mask);

}  // namespace htse
