// core/include/htse/nn/layers.hpp

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
#include <deque>
#include <string>
#include <vector>

#include "htse/nn/ops.hpp"
#include "htse/nn/tape.hpp"
#include "htse/rng.hpp"

namespace htse::nn {

/// Owns named parameters with stable addresses.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;

  Parameter& create(std::string name, Eigen::Index rows, Eigen::Index cols);
  /// Uniform(-bound, bound) initialization.
  Parameter& create_uniform(std::string name, Eigen::Index rows, Eigen::Index cols,
                            double bound, Rng& rng);

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  const Parameter* find(const std::string& name) const;
  Parameter* find(const std::string& name);
  std::size_t scalar_count() const;

 private:
  std::deque<Parameter> params_;
};

/// Fully connected layer applied to every row (frame).
class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, int in, int out, Rng& rng,
         bool bias = true);
  Var operator()(const Var& x) const;
  int in_features() const { return in_; }
  int out_features() const { return out_; }

 private:
  const Parameter* weight_ = nullptr;
  const Parameter* bias_ = nullptr;
  int in_ = 0, out_ = 0;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterStore& store, const std::string& name, int dim);
  Var operator()(const Var& x) const;

 private:
  const Parameter* gamma_ = nullptr;
  const Parameter* beta_ = nullptr;
};

/// Pre-norm transformer encoder layer over groups of consecutive rows.
class TransformerLayer {
 public:
  TransformerLayer() = default;
  TransformerLayer(ParameterStore& store, const std::string& name, int dim, int heads,
                   int ff_dim, Rng& rng);
  Var operator()(const Var& x, int group) const;

 private:
  LayerNorm norm1_, norm2_;
  const Parameter* in_w_ = nullptr;
  const Parameter* in_b_ = nullptr;
  const Parameter* out_w_ = nullptr;
  const Parameter* out_b_ = nullptr;
  Linear ff1_, ff2_;
  int heads_ = 1;
};

/// Sinusoidal positional encoding for positions 0..group-1 repeated for
/// every group: (rows x dim).
Matrix positional_encoding(Eigen::Index rows, int group, int dim);

/// Positional encoding, `layers` transformer layers, final layer norm.
class TransformerStack {
 public:
  TransformerStack() = default;
  TransformerStack(ParameterStore& store, const std::string& name, int dim, int heads,
                   int ff_dim, int layers, Rng& rng);
  Var operator()(const Var& x, int group) const;

 private:
  std::vector<TransformerLayer> layers_;
  LayerNorm final_norm_;
  int dim_ = 0;
};

struct DualPathConfig {
  int channels = 64;
  int chunk_size = 250;
  int layers = 2;      // transformer layers inside each intra/inter stack
  int heads = 8;
  int ff_dim = 256;
  int repeats = 4;     // dual-path (intra + inter) blocks
  int model_dim = 0;   // transformer width; 0 means `channels`

  int width() const { return model_dim > 0 ? model_dim : channels; }
};

/// Chunk layout of T' frames into 50%-overlapping chunks of size K.
struct ChunkLayout {
  int frames = 0;
  int chunk = 0;
  int hop = 0;
  int num_chunks = 0;
  RowIndex to_intra;   // chunked rows (chunk-major) -> source frame or -1
  RowIndex intra_to_inter;  // permutation chunk-major -> position-major
  RowIndex inter_to_intra;

  static ChunkLayout build(int frames, int chunk);
};

/// SepFormer-style masking network: norm + linear, chunking, repeated
/// intra-/inter-chunk transformer blocks with residuals, overlap-add, gated
/// output and a ReLU mask of the same shape as the input (T' x C).
class DualPathMasker {
 public:
  DualPathMasker() = default;
  DualPathMasker(ParameterStore& store, const std::string& name, const DualPathConfig& cfg,
                 Rng& rng);
  Var operator()(const Var& x) const;
  const DualPathConfig& config() const { return cfg_; }

 private:
  DualPathConfig cfg_;
  LayerNorm in_norm_;
  Linear in_proj_;
  std::vector<TransformerStack> intra_, inter_;
  std::vector<LayerNorm> intra_norm_, inter_norm_;
  const Parameter* prelu_ = nullptr;
  Linear out_proj_, gate_tanh_, gate_sigmoid_, mask_proj_;
};

}  // namespace htse::nn
