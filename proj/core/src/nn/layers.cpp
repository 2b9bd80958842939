// core/src/nn/layers.cpp

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

#include "htse/nn/layers.hpp"

#include <cmath>

#include "htse/error.hpp"

namespace htse::nn {

Parameter& ParameterStore::create(std::string name, Eigen::Index rows, Eigen::Index cols) {
  if (find(name) != nullptr) throw InvalidArgument("duplicate parameter '" + name + "'");
  params_.push_back(Parameter{std::move(name), Matrix::Zero(rows, cols)});
  return params_.back();
}

Parameter& ParameterStore::create_uniform(std::string name, Eigen::Index rows,
                                          Eigen::Index cols, double bound, Rng& rng) {
  Parameter& p = create(std::move(name), rows, cols);
  for (Eigen::Index i = 0; i < p.value.size(); ++i) {
    p.value.data()[i] = rng.uniform(-bound, bound);
  }
  return p;
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

const Parameter* ParameterStore::find(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

Parameter* ParameterStore::find(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

Linear::Linear(ParameterStore& store, const std::string& name, int in, int out, Rng& rng,
               bool bias)
    : in_(in), out_(out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight_ = &store.create_uniform(name + ".weight", out, in, bound, rng);
  if (bias) bias_ = &store.create_uniform(name + ".bias", 1, out, bound, rng);
}

Var Linear::operator()(const Var& x) const {
  Tape& t = x.tape();
  return linear(x, t.param(*weight_), bias_ ? t.param(*bias_) : Var{});
}

LayerNorm::LayerNorm(ParameterStore& store, const std::string& name, int dim) {
  Parameter& g = store.create(name + ".gamma", 1, dim);
  g.value.setOnes();
  gamma_ = &g;
  beta_ = &store.create(name + ".beta", 1, dim);
}

Var LayerNorm::operator()(const Var& x) const {
  Tape& t = x.tape();
  return layer_norm(x, t.param(*gamma_), t.param(*beta_));
}

TransformerLayer::TransformerLayer(ParameterStore& store, const std::string& name, int dim,
                                   int heads, int ff_dim, Rng& rng)
    : norm1_(store, name + ".norm1", dim),
      norm2_(store, name + ".norm2", dim),
      heads_(heads) {
  if (dim % heads != 0) throw InvalidArgument("channels must be divisible by attention heads");
  const double bound = std::sqrt(6.0 / (dim + 3.0 * dim));
  in_w_ = &store.create_uniform(name + ".attn.in_proj.weight", 3 * dim, dim, bound, rng);
  in_b_ = &store.create(name + ".attn.in_proj.bias", 1, 3 * dim);
  out_w_ = &store.create_uniform(name + ".attn.out_proj.weight", dim, dim,
                                 1.0 / std::sqrt(static_cast<double>(dim)), rng);
  out_b_ = &store.create(name + ".attn.out_proj.bias", 1, dim);
  ff1_ = Linear(store, name + ".ff1", dim, ff_dim, rng);
  ff2_ = Linear(store, name + ".ff2", ff_dim, dim, rng);
}

Var TransformerLayer::operator()(const Var& x, int group) const {
  Tape& t = x.tape();
  const Var a = grouped_self_attention(norm1_(x), t.param(*in_w_), t.param(*in_b_),
                                       t.param(*out_w_), t.param(*out_b_), heads_, group);
  const Var h = add(x, a);
  return add(h, ff2_(relu(ff1_(norm2_(h)))));
}

Matrix positional_encoding(Eigen::Index rows, int group, int dim) {
  Matrix pe(rows, dim);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double pos = static_cast<double>(r % group);
    for (int i = 0; i < dim; ++i) {
      const double freq = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / dim);
      pe(r, i) = (i % 2 == 0) ? std::sin(pos * freq) : std::cos(pos * freq);
    }
  }
  return pe;
}

TransformerStack::TransformerStack(ParameterStore& store, const std::string& name, int dim,
                                   int heads, int ff_dim, int layers, Rng& rng)
    : final_norm_(store, name + ".norm", dim), dim_(dim) {
  for (int l = 0; l < layers; ++l) {
    layers_.emplace_back(store, name + ".layer" + std::to_string(l), dim, heads, ff_dim, rng);
  }
}

Var TransformerStack::operator()(const Var& x, int group) const {
  Var h = add_constant(x, positional_encoding(x.rows(), group, dim_));
  for (const auto& layer : layers_) h = layer(h, group);
  return final_norm_(h);
}

ChunkLayout ChunkLayout::build(int frames, int chunk) {
  if (frames <= 0 || chunk < 2) throw InvalidArgument("ChunkLayout: bad frames/chunk");
  ChunkLayout c;
  c.frames = frames;
  c.chunk = chunk;
  c.hop = chunk / 2;
  // Pad by `hop` on both sides plus a gap so chunks tile the padded sequence.
  const int gap = chunk - (c.hop + frames % chunk) % chunk;
  const int padded = frames + gap + 2 * c.hop;
  c.num_chunks = (padded - chunk) / c.hop + 1;
  auto to_intra = std::make_shared<std::vector<int>>();
  to_intra->reserve(static_cast<std::size_t>(c.num_chunks * chunk));
  for (int s = 0; s < c.num_chunks; ++s) {
    for (int k = 0; k < chunk; ++k) {
      const int src = s * c.hop + k - c.hop;
      to_intra->push_back(src >= 0 && src < frames ? src : -1);
    }
  }
  auto i2j = std::make_shared<std::vector<int>>(to_intra->size());
  auto j2i = std::make_shared<std::vector<int>>(to_intra->size());
  for (int s = 0; s < c.num_chunks; ++s) {
    for (int k = 0; k < chunk; ++k) {
      const int intra_row = s * chunk + k;
      const int inter_row = k * c.num_chunks + s;
      (*i2j)[static_cast<std::size_t>(inter_row)] = intra_row;
      (*j2i)[static_cast<std::size_t>(intra_row)] = inter_row;
    }
  }
  c.to_intra = std::move(to_intra);
  c.intra_to_inter = std::move(i2j);
  c.inter_to_intra = std::move(j2i);
  return c;
}

DualPathMasker::DualPathMasker(ParameterStore& store, const std::string& name,
                               const DualPathConfig& cfg, Rng& rng)
    : cfg_(cfg),
      in_norm_(store, name + ".in_norm", cfg.channels),
      in_proj_(store, name + ".in_proj", cfg.channels, cfg.width(), rng) {
  const int d = cfg.width();
  for (int r = 0; r < cfg.repeats; ++r) {
    const std::string b = name + ".block" + std::to_string(r);
    intra_.emplace_back(store, b + ".intra", d, cfg.heads, cfg.ff_dim, cfg.layers, rng);
    intra_norm_.emplace_back(store, b + ".intra_norm", d);
    inter_.emplace_back(store, b + ".inter", d, cfg.heads, cfg.ff_dim, cfg.layers, rng);
    inter_norm_.emplace_back(store, b + ".inter_norm", d);
  }
  Parameter& a = store.create(name + ".prelu", 1, 1);
  a.value(0, 0) = 0.25;
  prelu_ = &a;
  out_proj_ = Linear(store, name + ".out_proj", d, cfg.channels, rng);
  gate_tanh_ = Linear(store, name + ".gate_tanh", cfg.channels, cfg.channels, rng);
  gate_sigmoid_ = Linear(store, name + ".gate_sigmoid", cfg.channels, cfg.channels, rng);
  mask_proj_ = Linear(store, name + ".mask_proj", cfg.channels, cfg.channels, rng, false);
}

Var DualPathMasker::operator()(const Var& x) const {
  if (x.cols() != cfg_.channels) throw InvalidArgument("DualPathMasker: channel mismatch");
  const auto frames = static_cast<int>(x.rows());
  const ChunkLayout layout = ChunkLayout::build(frames, cfg_.chunk_size);
  Var h = gather_rows(in_proj_(in_norm_(x)), layout.to_intra);
  for (std::size_t r = 0; r < intra_.size(); ++r) {
    h = add(h, intra_norm_[r](intra_[r](h, layout.chunk)));
    Var hi = gather_rows(h, layout.intra_to_inter);
    hi = add(hi, inter_norm_[r](inter_[r](hi, layout.num_chunks)));
    h = gather_rows(hi, layout.inter_to_intra);
  }
  h = out_proj_(prelu(h, x.tape().param(*prelu_)));
  h = scatter_add_rows(h, layout.to_intra, frames);
  h = mul(tanh(gate_tanh_(h)), sigmoid(gate_sigmoid_(h)));
  return relu(mask_proj_(h));
}

}  // namespace htse::nn
