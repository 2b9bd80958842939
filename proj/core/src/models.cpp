// core/src/models.cpp

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

#include "htse/models.hpp"

#include <algorithm>

#include "htse/error.hpp"
#include "htse/masking.hpp"

namespace htse {

using nn::Var;

namespace {

void check_positive(int v, const char* name) {
  if (v <= 0) throw InvalidArgument(std::string(name) + " must be positive");
}

void validate_dual_path(int channels, int chunk, int layers, int heads, int repeats,
                        int ff_dim, int masker_dim) {
  check_positive(channels, "channels");
  check_positive(layers, "layers");
  check_positive(heads, "attn_heads");
  check_positive(repeats, "repeats");
  check_positive(ff_dim, "ff_dim");
  if (chunk < 2 || chunk % 2 != 0) throw InvalidArgument("chunk_size must be even and >= 2");
  if (masker_dim < 0) throw InvalidArgument("masker_dim must be >= 0");
  const int width = masker_dim > 0 ? masker_dim : channels;
  if (width % heads != 0) throw InvalidArgument("masker width must be divisible by attn_heads");
}

nn::DualPathConfig dual_path(int channels, int chunk, int layers, int heads, int ff_dim,
                             int repeats, int masker_dim) {
  nn::DualPathConfig c;
  c.channels = channels;
  c.chunk_size = chunk;
  c.layers = layers;
  c.heads = heads;
  c.ff_dim = ff_dim;
  c.repeats = repeats;
  c.model_dim = masker_dim;
  return c;
}

Matrix ones_row(Eigen::Index n) { return Matrix::Ones(1, n); }

}  // namespace

TseModelConfig TseModelConfig::paper() { return TseModelConfig{}; }

TseModelConfig TseModelConfig::toy() {
  TseModelConfig c;
  c.encoder_kernel = 256;
  c.encoder_stride = 128;
  c.channels = 16;
  c.chunk_size = 50;
  c.layers = 1;
  c.attn_heads = 2;
  c.repeats = 1;
  c.ff_dim = 64;
  c.embedding_dim = 32;
  c.speaker_hidden = 64;
  return c;
}

void TseModelConfig::validate() const {
  check_positive(encoder_kernel, "encoder_kernel");
  check_positive(encoder_stride, "encoder_stride");
  if (encoder_kernel % encoder_stride != 0) {
    throw InvalidArgument("encoder_stride must divide encoder_kernel");
  }
  validate_dual_path(channels, chunk_size, layers, attn_heads, repeats, ff_dim, masker_dim);
  check_positive(embedding_dim, "embedding_dim");
  check_positive(speaker_kernel, "speaker_kernel");
  check_positive(speaker_stride, "speaker_stride");
  check_positive(speaker_hidden, "speaker_hidden");
}

nlohmann::json to_json(const TseModelConfig& c) {
  return {{"encoder_kernel", c.encoder_kernel}, {"encoder_stride", c.encoder_stride},
          {"channels", c.channels},             {"chunk_size", c.chunk_size},
          {"layers", c.layers},                 {"attn_heads", c.attn_heads},
          {"repeats", c.repeats},               {"ff_dim", c.ff_dim},
          {"masker_dim", c.masker_dim},
          {"embedding_dim", c.embedding_dim},   {"speaker_kernel", c.speaker_kernel},
          {"speaker_stride", c.speaker_stride}, {"speaker_hidden", c.speaker_hidden}};
}

TseModelConfig tse_config_from_json(const nlohmann::json& j, TseModelConfig c) {
  if (j.is_string()) {
    const auto preset = j.get<std::string>();
    if (preset == "toy") return TseModelConfig::toy();
    if (preset == "paper") return TseModelConfig::paper();
    throw InvalidArgument("unknown TSE model preset '" + preset + "'");
  }
  if (j.contains("preset")) c = tse_config_from_json(j.at("preset"));
  c.encoder_kernel = j.value("encoder_kernel", c.encoder_kernel);
  c.encoder_stride = j.value("encoder_stride", c.encoder_stride);
  c.channels = j.value("channels", c.channels);
  c.chunk_size = j.value("chunk_size", c.chunk_size);
  c.layers = j.value("layers", c.layers);
  c.attn_heads = j.value("attn_heads", c.attn_heads);
  c.repeats = j.value("repeats", c.repeats);
  c.ff_dim = j.value("ff_dim", c.ff_dim);
  c.masker_dim = j.value("masker_dim", c.masker_dim);
  c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
  c.speaker_kernel = j.value("speaker_kernel", c.speaker_kernel);
  c.speaker_stride = j.value("speaker_stride", c.speaker_stride);
  c.speaker_hidden = j.value("speaker_hidden", c.speaker_hidden);
  c.validate();
  return c;
}

RefineModelConfig RefineModelConfig::paper() { return RefineModelConfig{}; }

RefineModelConfig RefineModelConfig::toy() {
  RefineModelConfig c;
  c.channels = 16;
  c.chunk_size = 50;
  c.layers = 1;
  c.attn_heads = 2;
  c.repeats = 1;
  c.ff_dim = 64;
  return c;
}

void RefineModelConfig::validate() const {
  validate_dual_path(channels, chunk_size, layers, attn_heads, repeats, ff_dim, masker_dim);
}

nlohmann::json to_json(const RefineModelConfig& c) {
  return {{"channels", c.channels},
          {"chunk_size", c.chunk_size},
          {"layers", c.layers},
          {"attn_heads", c.attn_heads},
          {"repeats", c.repeats},
          {"ff_dim", c.ff_dim},
          {"masker_dim", c.masker_dim},
          {"downsampler", c.downsampler == MaskDownsampler::kStridedConv ? "conv" : "avgpool"}};
}

RefineModelConfig refine_config_from_json(const nlohmann::json& j, RefineModelConfig c) {
  if (j.is_string()) {
    const auto preset = j.get<std::string>();
    if (preset == "toy") return RefineModelConfig::toy();
    if (preset == "paper") return RefineModelConfig::paper();
    throw InvalidArgument("unknown refinement model preset '" + preset + "'");
  }
  if (j.contains("preset")) c = refine_config_from_json(j.at("preset"));
  c.channels = j.value("channels", c.channels);
  c.chunk_size = j.value("chunk_size", c.chunk_size);
  c.layers = j.value("layers", c.layers);
  c.attn_heads = j.value("attn_heads", c.attn_heads);
  c.repeats = j.value("repeats", c.repeats);
  c.ff_dim = j.value("ff_dim", c.ff_dim);
  c.masker_dim = j.value("masker_dim", c.masker_dim);
  if (j.contains("downsampler")) {
    const auto d = j.at("downsampler").get<std::string>();
    if (d == "avgpool") c.downsampler = MaskDownsampler::kAveragePool;
    else if (d == "conv") c.downsampler = MaskDownsampler::kStridedConv;
    else throw InvalidArgument("unknown downsampler '" + d + "'");
  }
  c.validate();
  return c;
}

Matrix padded_column(const AudioSignal& signal, int kernel, int stride) {
  const auto t = static_cast<Eigen::Index>(signal.size());
  const std::size_t frames = encoder_frame_count(signal.size(), static_cast<std::size_t>(kernel),
                                                 static_cast<std::size_t>(stride));
  const auto len = static_cast<Eigen::Index>((frames - 1) * static_cast<std::size_t>(stride) +
                                             static_cast<std::size_t>(kernel));
  Matrix col = Matrix::Zero(len, 1);
  for (Eigen::Index i = 0; i < t; ++i) col(i, 0) = signal.samples[static_cast<std::size_t>(i)];
  return col;
}

SpeakerEncoder::SpeakerEncoder(nn::ParameterStore& store, const TseModelConfig& cfg, Rng& rng)
    : kernel_(cfg.speaker_kernel),
      stride_(cfg.speaker_stride),
      frame_proj_(store, "speaker.frame_proj", cfg.speaker_kernel, cfg.speaker_hidden, rng),
      hidden_(store, "speaker.hidden", cfg.speaker_hidden, cfg.speaker_hidden, rng),
      out_proj_(store, "speaker.out_proj", cfg.speaker_hidden, cfg.embedding_dim, rng) {}

Var SpeakerEncoder::operator()(nn::Tape& tape, const AudioSignal& enrollment) const {
  if (enrollment.empty()) throw InvalidArgument("speaker_encode: empty enrollment");
  const Var frames =
      nn::frame_signal(tape.constant(padded_column(enrollment, kernel_, stride_)), kernel_, stride_);
  const Var h = nn::relu(hidden_(nn::relu(frame_proj_(frames))));
  return nn::l2_normalize_rows(out_proj_(nn::mean_rows(h)));
}

TseNetwork::TseNetwork(const TseModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  speaker_ = SpeakerEncoder(params_, config_, rng);
  encoder_ = nn::Linear(params_, "tse.encoder", config_.encoder_kernel, config_.channels, rng);
  film_gamma_ = nn::Linear(params_, "tse.film.gamma", config_.embedding_dim, config_.channels, rng);
  film_beta_ = nn::Linear(params_, "tse.film.beta", config_.embedding_dim, config_.channels, rng);
  masker_ = nn::DualPathMasker(
      params_, "tse.masker",
      dual_path(config_.channels, config_.chunk_size, config_.layers, config_.attn_heads,
                config_.ff_dim, config_.repeats, config_.masker_dim),
      rng);
  decoder_ = nn::Linear(params_, "tse.decoder", config_.channels, config_.encoder_kernel, rng,
                        false);
}

Var TseNetwork::embed(nn::Tape& tape, const AudioSignal& enrollment) const {
  return speaker_(tape, enrollment);
}

TseNetwork::Outputs TseNetwork::forward(nn::Tape& tape, const AudioSignal& mixture,
                                        const Var& embedding) const {
  if (mixture.empty()) throw InvalidArgument("tse_forward: empty mixture");
  if (embedding.rows() != 1 || embedding.cols() != config_.embedding_dim) {
    throw InvalidArgument("tse_forward: embedding must be 1 x " +
                          std::to_string(config_.embedding_dim));
  }
  const int k = config_.encoder_kernel, s = config_.encoder_stride;
  const Var frames = nn::frame_signal(tape.constant(padded_column(mixture, k, s)), k, s);
  const Var latent = nn::relu(encoder_(frames));
  const Var gamma = nn::add_constant(film_gamma_(embedding), ones_row(config_.channels));
  const Var conditioned = nn::film(latent, gamma, film_beta_(embedding));
  const Var mask = masker_(conditioned);
  const Var decoded = nn::overlap_add(decoder_(nn::mul(mask, latent)), s);
  return {nn::resize_rows(decoded, static_cast<Eigen::Index>(mixture.size())), mask, latent};
}

RefineNetwork::RefineNetwork(const RefineModelConfig& config, const TseModelConfig& tse_config,
                             std::uint64_t seed)
    : config_(config), tse_config_(tse_config) {
  config_.validate();
  tse_config_.validate();
  Rng rng(seed);
  const int c = config_.channels;
  const int k = tse_config_.encoder_kernel;
  adaptation_ = nn::Linear(params_, "adapt", tse_config_.channels, c, rng);
  encoder_ = nn::Linear(params_, "refine.encoder", k, c, rng);
  if (config_.downsampler == MaskDownsampler::kStridedConv) {
    mask_conv_ = nn::Linear(params_, "refine.mask_conv", k, 1, rng);
  }
  fusion_ = nn::Linear(params_, "refine.fusion", 2 * c + 1, c, rng);
  const int cond = 1 + c + tse_config_.embedding_dim;
  film_gamma_ = nn::Linear(params_, "refine.film.gamma", cond, c, rng);
  film_beta_ = nn::Linear(params_, "refine.film.beta", cond, c, rng);
  masker_ = nn::DualPathMasker(params_, "refine.masker",
                               dual_path(c, config_.chunk_size, config_.layers,
                                         config_.attn_heads, config_.ff_dim, config_.repeats,
                                         config_.masker_dim),
                               rng);
  decoder_ = nn::Linear(params_, "refine.decoder", c, k, rng, false);
}

Var RefineNetwork::adapt(const Var& tse_mask) const {
  if (tse_mask.cols() != tse_config_.channels) {
    throw InvalidArgument("adapt_state: expected " + std::to_string(tse_config_.channels) +
                          " channels, got " + std::to_string(tse_mask.cols()));
  }
  return adaptation_(tse_mask);
}

Var RefineNetwork::downsample(nn::Tape& tape, const EditMask& mask, std::size_t frames) const {
  const int k = tse_config_.encoder_kernel, s = tse_config_.encoder_stride;
  if (config_.downsampler == MaskDownsampler::kAveragePool) {
    const auto pooled = downsample_mask(mask, static_cast<std::size_t>(s),
                                        static_cast<std::size_t>(k), frames);
    Matrix m(static_cast<Eigen::Index>(pooled.size()), 1);
    for (std::size_t i = 0; i < pooled.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = pooled[i];
    return tape.constant(std::move(m));
  }
  AudioSignal as_signal = AudioSignal::zeros(mask.size(), mask.sample_rate);
  for (std::size_t i = 0; i < mask.size(); ++i) as_signal.samples[i] = mask.values[i] ? 1.0 : 0.0;
  const Var f = nn::frame_signal(tape.constant(padded_column(as_signal, k, s)), k, s);
  if (static_cast<std::size_t>(f.rows()) != frames) {
    throw InvalidArgument("refine: mask frame count mismatch");
  }
  return mask_conv_(f);
}

Var RefineNetwork::forward(nn::Tape& tape, const AudioSignal& mixture, const Var& embedding,
                           const Var& state, const EditMask& mask) const {
  if (mixture.empty()) throw InvalidArgument("refine_forward: empty mixture");
  if (mask.size() != mixture.size()) {
    throw InvalidArgument("refine_forward: mask length " + std::to_string(mask.size()) +
                          " != mixture length " + std::to_string(mixture.size()));
  }
  if (embedding.rows() != 1 || embedding.cols() != tse_config_.embedding_dim) {
    throw InvalidArgument("refine_forward: embedding dimension mismatch");
  }
  const int k = tse_config_.encoder_kernel, s = tse_config_.encoder_stride;
  const Var frames = nn::frame_signal(tape.constant(padded_column(mixture, k, s)), k, s);
  const Var x = nn::relu(encoder_(frames));
  const Eigen::Index n = x.rows();
  if (state.rows() != n || state.cols() != config_.channels) {
    throw InvalidArgument("refine_forward: refinement state is " + std::to_string(state.rows()) +
                          "x" + std::to_string(state.cols()) + ", expected " +
                          std::to_string(n) + "x" + std::to_string(config_.channels));
  }
  const Var e = downsample(tape, mask, static_cast<std::size_t>(n));
  const Var fused = fusion_(nn::concat_cols({x, e, state}));
  const Var cond = nn::concat_cols({e, state, nn::broadcast_rows(embedding, n)});
  const Var gamma = nn::add_constant(film_gamma_(cond), Matrix::Ones(n, config_.channels));
  const Var conditioned = nn::film(fused, gamma, film_beta_(cond));
  const Var m = masker_(conditioned);
  const Var decoded = nn::overlap_add(decoder_(nn::mul(m, x)), s);
  return nn::resize_rows(decoded, static_cast<Eigen::Index>(mixture.size()));
}

namespace {

AudioSignal to_signal(const Matrix& col, int rate) {
  AudioSignal out = AudioSignal::zeros(static_cast<std::size_t>(col.rows()), rate);
  for (Eigen::Index i = 0; i < col.rows(); ++i) out.samples[static_cast<std::size_t>(i)] = col(i, 0);
  return out;
}

Matrix to_row(const SpeakerEmbedding& e) {
  Matrix m(1, static_cast<Eigen::Index>(e.values.size()));
  for (std::size_t i = 0; i < e.values.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = e.values[i];
  return m;
}

}  // namespace

AudioSignal mixture_consistent(const AudioSignal& y, const AudioSignal& mixture) {
  check_same_length(y.samples, mixture.samples, "mixture_consistent");
  double yy = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    yy += y.samples[i] * y.samples[i];
    ym += y.samples[i] * mixture.samples[i];
  }
  if (yy == 0.0) return y;
  AudioSignal out = y;
  const double g = ym / yy;
  for (double& v : out.samples) v *= g;
  return out;
}

SpeakerEmbedding speaker_encode(const TseNetwork& net, const AudioSignal& enrollment) {
  if (enrollment.empty() || energy(enrollment.samples) == 0.0) {
    throw InvalidArgument("speaker_encode: silent enrollment");
  }
  nn::Tape tape(false);
  const Var e = net.embed(tape, enrollment);
  SpeakerEmbedding out;
  out.values.assign(e.value().data(), e.value().data() + e.value().size());
  return out;
}

TseResult tse_forward(const TseNetwork& net, const AudioSignal& mixture,
                      const SpeakerEmbedding& embedding) {
  nn::Tape tape(false);
  const auto out = net.forward(tape, mixture, tape.constant(to_row(embedding)));
  return {mixture_consistent(to_signal(out.signal.value(), mixture.sample_rate), mixture),
          out.mask.value(),
          out.latent.value()};
}

RefinementState adapt_state(const RefineNetwork& net, const Matrix& tse_mask) {
  nn::Tape tape(false);
  return {net.adapt(tape.constant(tse_mask)).value()};
}

AudioSignal refine_forward(const RefineNetwork& net, const AudioSignal& mixture,
                           const SpeakerEmbedding& embedding, const RefinementState& state,
                           const EditMask& mask) {
  nn::Tape tape(false);
  const Var y = net.forward(tape, mixture, tape.constant(to_row(embedding)),
                            tape.constant(state.frames), mask);
  return mixture_consistent(to_signal(y.value(), mixture.sample_rate), mixture);
}

}  // namespace htse
