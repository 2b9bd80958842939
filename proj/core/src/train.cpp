// core/src/train.cpp

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

#include "htse/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include <spdlog/spdlog.h>

#include "htse/checkpoint.hpp"
#include "htse/error.hpp"
#include "htse/eval_set.hpp"
#include "htse/parallel.hpp"

namespace fs = std::filesystem;

namespace htse {

// ---------------------------------------------------------------- optimizer

AdamW::AdamW(std::vector<nn::Parameter*> params, AdamWOptions options)
    : params_(std::move(params)), opt_(options) {
  for (nn::Parameter* p : params_) {
    state_[p] = {nn::Matrix::Zero(p->value.rows(), p->value.cols()),
                 nn::Matrix::Zero(p->value.rows(), p->value.cols())};
  }
}

void AdamW::step(const nn::GradMap& grads, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (nn::Parameter* p : params_) {
    p->value *= 1.0 - lr * opt_.weight_decay;
    const auto it = grads.find(p);
    if (it == grads.end()) continue;
    Moments& s = state_.at(p);
    const nn::Matrix& g = it->second;
    s.m = opt_.beta1 * s.m + (1.0 - opt_.beta1) * g;
    s.v = opt_.beta2 * s.v + (1.0 - opt_.beta2) * g.cwiseProduct(g);
    p->value.array() -=
        lr * (s.m.array() / bc1) / ((s.v.array() / bc2).sqrt() + opt_.eps);
  }
}

double global_grad_norm(const nn::GradMap& grads) {
  // Summed in name order; map iteration order is not stable across runs.
  std::vector<std::pair<const std::string*, double>> terms;
  terms.reserve(grads.size());
  for (const auto& [p, g] : grads) terms.emplace_back(&p->name, g.squaredNorm());
  std::sort(terms.begin(), terms.end(),
            [](const auto& a, const auto& b) { return *a.first < *b.first; });
  double sq = 0.0;
  for (const auto& t : terms) sq += t.second;
  return std::sqrt(sq);
}

double clip_grad_norm(nn::GradMap& grads, double max_norm) {
  const double norm = global_grad_norm(grads);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto& [p, g] : grads) g *= s;
  }
  return norm;
}

// ---------------------------------------------------------------- schedule

PlateauScheduler::PlateauScheduler(int patience, double factor, double min_delta)
    : patience_(patience), factor_(factor), min_delta_(min_delta) {
  if (patience <= 0) throw InvalidArgument("plateau patience must be positive");
  if (!(factor > 0.0 && factor <= 1.0)) throw InvalidArgument("plateau factor must be in (0, 1]");
}

bool PlateauScheduler::observe(double val_loss) {
  if (val_loss < best_ - min_delta_) {
    best_ = val_loss;
    stale_ = 0;
    return false;
  }
  if (++stale_ >= patience_) {
    multiplier_ *= factor_;
    stale_ = 0;
    return true;
  }
  return false;
}

double plateau_multiplier(const std::vector<double>& history, int patience, double factor,
                          double min_delta) {
  PlateauScheduler s(patience, factor, min_delta);
  for (double v : history) s.observe(v);
  return s.multiplier();
}

// ---------------------------------------------------------------- config

std::string_view to_string(TrainStage s) { return s == TrainStage::kTse ? "tse" : "refine"; }

TrainStage parse_train_stage(std::string_view s) {
  if (s == "tse") return TrainStage::kTse;
  if (s == "refine") return TrainStage::kRefine;
  throw InvalidArgument("unknown training stage '" + std::string(s) + "'");
}

TrainConfig TrainConfig::defaults(TrainStage stage) {
  TrainConfig c;
  c.stage = stage;
  if (stage == TrainStage::kRefine) {
    c.lr0 = 0.001;
    c.plateau_patience = 6;
  }
  return c;
}

void TrainConfig::validate() const {
  if (!(lr0 > 0.0)) throw InvalidArgument("lr0 must be positive");
  if (plateau_patience <= 0) throw InvalidArgument("plateau_patience must be positive");
  if (epochs <= 0) throw InvalidArgument("epochs must be positive");
  if (mixtures_per_epoch == 0) throw InvalidArgument("mixtures_per_epoch must be positive");
  if (batch_size == 0) throw InvalidArgument("batch_size must be positive");
  if (val_count == 0) throw InvalidArgument("val_count must be positive");
  if (threads <= 0) throw InvalidArgument("threads must be positive");
  if (!(grad_clip_norm > 0.0)) throw InvalidArgument("grad_clip_norm must be positive");
  tse_model.validate();
  if (stage == TrainStage::kRefine) refine_model.validate();
}

namespace {

nlohmann::json masking_to_json(const MaskingFunctionSpec& m) {
  return {{"kind", std::string(to_string(m.kind))},
          {"threshold", m.threshold},
          {"threshold_sigma", m.threshold_sigma},
          {"window_len", m.window_len},
          {"rng_seed", m.rng_seed}};
}

MaskingFunctionSpec masking_from_json(const nlohmann::json& j, MaskingFunctionSpec m) {
  if (j.contains("kind")) {
    const auto kind = parse_masking_kind(j.at("kind").get<std::string>());
    if (kind != m.kind) m = MaskingFunctionSpec::defaults(kind);
  }
  m.threshold = j.value("threshold", m.threshold);
  m.threshold_sigma = j.value("threshold_sigma", m.threshold_sigma);
  m.window_len = j.value("window_len", m.window_len);
  m.rng_seed = j.value("rng_seed", m.rng_seed);
  return m;
}

}  // namespace

nlohmann::json to_json(const TrainConfig& c) {
  return {{"stage", std::string(to_string(c.stage))},
          {"lr0", c.lr0},
          {"plateau_patience", c.plateau_patience},
          {"lr_decay", c.lr_decay},
          {"min_delta", c.min_delta},
          {"weight_decay", c.adamw.weight_decay},
          {"beta1", c.adamw.beta1},
          {"beta2", c.adamw.beta2},
          {"adam_eps", c.adamw.eps},
          {"grad_clip_norm", c.grad_clip_norm},
          {"epochs", c.epochs},
          {"mixtures_per_epoch", c.mixtures_per_epoch},
          {"batch_size", c.batch_size},
          {"val_count", c.val_count},
          {"threads", c.threads},
          {"masking", masking_to_json(c.masking)},
          {"mix", to_json(c.mix)},
          {"tse_model", to_json(c.tse_model)},
          {"refine_model", to_json(c.refine_model)},
          {"seed", c.seed},
          {"out_dir", c.out_dir.generic_string()},
          {"tse_checkpoint", c.tse_checkpoint.generic_string()}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  const auto stage = parse_train_stage(j.value("stage", std::string("tse")));
  return train_config_from_json(j, TrainConfig::defaults(stage));
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
  if (j.contains("stage")) c.stage = parse_train_stage(j.at("stage").get<std::string>());
  c.lr0 = j.value("lr0", c.lr0);
  c.plateau_patience = j.value("plateau_patience", c.plateau_patience);
  c.lr_decay = j.value("lr_decay", c.lr_decay);
  c.min_delta = j.value("min_delta", c.min_delta);
  c.adamw.weight_decay = j.value("weight_decay", c.adamw.weight_decay);
  c.adamw.beta1 = j.value("beta1", c.adamw.beta1);
  c.adamw.beta2 = j.value("beta2", c.adamw.beta2);
  c.adamw.eps = j.value("adam_eps", c.adamw.eps);
  c.grad_clip_norm = j.value("grad_clip_norm", c.grad_clip_norm);
  c.epochs = j.value("epochs", c.epochs);
  c.mixtures_per_epoch = j.value("mixtures_per_epoch", c.mixtures_per_epoch);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.val_count = j.value("val_count", c.val_count);
  c.threads = j.value("threads", c.threads);
  if (j.contains("masking")) c.masking = masking_from_json(j.at("masking"), c.masking);
  if (j.contains("mix")) c.mix = mix_config_from_json(j.at("mix"), c.mix);
  if (j.contains("tse_model")) c.tse_model = tse_config_from_json(j.at("tse_model"), c.tse_model);
  if (j.contains("refine_model")) {
    c.refine_model = refine_config_from_json(j.at("refine_model"), c.refine_model);
  }
  c.seed = j.value("seed", c.seed);
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("tse_checkpoint")) c.tse_checkpoint = j.at("tse_checkpoint").get<std::string>();
  c.validate();
  return c;
}

std::uint64_t training_mask_seed(std::uint64_t spec_seed, int epoch, std::size_t item) {
  return spec_seed ^ (static_cast<std::uint64_t>(epoch) << 32) ^ static_cast<std::uint64_t>(item);
}

// ---------------------------------------------------------------- loops

namespace {

constexpr std::uint64_t kValStream = 0x76616c;   // "val"
constexpr std::uint64_t kInitStream = 0x696e6974;  // "init"

nn::Matrix column(const AudioSignal& s) {
  return Eigen::Map<const nn::Matrix>(s.samples.data(), static_cast<Eigen::Index>(s.size()), 1);
}

struct ItemOutcome {
  double loss = 0.0;
  nn::GradMap grads;
};

template <typename Fn>
std::vector<ItemOutcome> run_items(std::size_t n, int threads, Fn&& fn) {
  std::vector<ItemOutcome> out(n);
  parallel_for(n, threads, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

class RunLog {
 public:
  explicit RunLog(const fs::path& path) : path_(path), os_(path, std::ios::trunc) {
    if (!os_) throw IoError("cannot open training log " + path.string());
  }
  void write(const nlohmann::json& j) {
    os_ << j.dump() << '\n';
    os_.flush();
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  std::ofstream os_;
};

void check_finite_loss(double loss, int epoch, std::size_t item, std::uint64_t seed) {
  if (!std::isfinite(loss)) {
    throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch) + ", item " +
                           std::to_string(item) + " (mixture seed " + std::to_string(seed) +
                           ")");
  }
}

/// Shared epoch driver: `item_step(epoch, i, seed)` returns loss + gradients
/// for training item i; `validate(epoch)` returns val loss and an optional
/// secondary loss; `save(path, meta)` writes a checkpoint.
struct Stage {
  std::function<ItemOutcome(int, std::size_t, std::uint64_t)> item_step;
  std::function<std::pair<double, std::optional<double>>()> validate;
  std::function<void(const fs::path&, const nlohmann::json&)> save;
  std::function<void(int)> after_epoch;
};

TrainResult run_stage(const TrainConfig& cfg, std::vector<nn::Parameter*> params,
                      const Stage& stage, const EpochCallback& on_epoch) {
  fs::create_directories(cfg.out_dir);
  {
    std::ofstream snap(cfg.out_dir / "train_config.json", std::ios::trunc);
    snap << to_json(cfg).dump(2) << '\n';
  }
  RunLog log(cfg.out_dir / "train_log.jsonl");
  AdamW opt(std::move(params), cfg.adamw);
  PlateauScheduler sched(cfg.plateau_patience, cfg.lr_decay, cfg.min_delta);
  TrainResult result;
  result.best_checkpoint = cfg.out_dir / "best.ckpt";
  result.last_checkpoint = cfg.out_dir / "last.ckpt";
  result.log_path = log.path();
  const auto t0 = std::chrono::steady_clock::now();
  auto wall = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  const std::string stage_name(to_string(cfg.stage));

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr = cfg.lr0 * sched.multiplier();
    const std::uint64_t epoch_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch));
    double loss_sum = 0.0;
    double max_norm = 0.0;
    for (std::size_t start = 0; start < cfg.mixtures_per_epoch; start += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, cfg.mixtures_per_epoch - start);
      auto outcomes = run_items(n, cfg.threads, [&](std::size_t k) {
        const std::size_t i = start + k;
        const std::uint64_t seed = item_seed(epoch_seed, i);
        ItemOutcome o = stage.item_step(epoch, i, seed);
        check_finite_loss(o.loss, epoch, i, seed);
        return o;
      });
      nn::GradMap grads;
      for (auto& o : outcomes) {
        loss_sum += o.loss;
        for (auto& [p, g] : o.grads) {
          auto it = grads.find(p);
          if (it == grads.end()) grads.emplace(p, std::move(g));
          else it->second += g;
        }
      }
      for (auto& [p, g] : grads) g /= static_cast<double>(n);
      const double norm = clip_grad_norm(grads, cfg.grad_clip_norm);
      if (!std::isfinite(norm)) {
        throw TrainingDiverged("non-finite gradient norm at epoch " + std::to_string(epoch));
      }
      max_norm = std::max(max_norm, norm);
      opt.step(grads, lr);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.max_grad_norm = max_norm;
    rec.train_loss = loss_sum / static_cast<double>(cfg.mixtures_per_epoch);
    log.write({{"stage", stage_name}, {"epoch", epoch}, {"split", "train"},
               {"loss", rec.train_loss}, {"lr", lr}, {"grad_norm_max", max_norm},
               {"wall_time", wall()}});
    const auto [val, secondary] = stage.validate();
    if (!std::isfinite(val)) {
      throw TrainingDiverged("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    rec.val_loss = val;
    rec.val_loss_output = secondary;
    rec.wall_time_s = wall();
    log.write({{"stage", stage_name}, {"epoch", epoch}, {"split", "val"}, {"loss", val},
               {"lr", lr}, {"wall_time", rec.wall_time_s}});
    if (secondary) {
      log.write({{"stage", stage_name}, {"epoch", epoch}, {"split", "val_output"},
                 {"loss", *secondary}, {"lr", lr}, {"wall_time", rec.wall_time_s}});
    }
    const nlohmann::json meta{{"epoch", epoch}, {"val_loss", val}, {"seed", cfg.seed}};
    if (val < result.best_val_loss) {
      result.best_val_loss = val;
      result.best_epoch = epoch;
      stage.save(result.best_checkpoint, meta);
    }
    stage.save(result.last_checkpoint, meta);
    if (sched.observe(val)) {
      spdlog::info("{} epoch {}: validation plateau, lr -> {}", stage_name, epoch,
                   cfg.lr0 * sched.multiplier());
    }
    spdlog::info("{} epoch {}/{}: train {:.3f} val {:.3f} lr {:.2e} ({:.1f}s)", stage_name, epoch,
                 cfg.epochs, rec.train_loss, val, lr, rec.wall_time_s);
    if (stage.after_epoch) stage.after_epoch(epoch);
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

double item_loss(nn::Tape& tape, const nn::Var& est, const AudioSignal& ref, nn::GradMap& g) {
  const nn::Var loss = nn::neg_si_sdr(est, column(ref));
  const double v = loss.value()(0, 0);
  if (tape.grad_enabled()) {
    tape.backward(loss);
    tape.collect_param_grads(g);
  }
  return v;
}

double eval_loss(const AudioSignal& est, const AudioSignal& ref) {
  nn::Tape tape(false);
  return nn::neg_si_sdr(tape.constant(column(est)), column(ref)).value()(0, 0);
}

}  // namespace

TrainResult train_tse(const TrainConfig& config, const CorpusIndex& index,
                      const EpochCallback& on_epoch) {
  TseNetwork net(config.tse_model, derive_seed(config.seed, kInitStream));
  return train_tse(config, index, net, on_epoch);
}

TrainResult train_tse(const TrainConfig& config, const CorpusIndex& index, TseNetwork& net,
                      const EpochCallback& on_epoch) {
  config.validate();
  if (config.stage != TrainStage::kTse) throw InvalidArgument("train_tse needs stage 'tse'");
  AudioCache cache(config.mix.sample_rate);
  const auto val = generate_eval_items(index, cache, config.mix, config.val_count,
                                       derive_seed(config.seed, kValStream));
  Stage stage;
  stage.item_step = [&](int, std::size_t, std::uint64_t seed) {
    const MixtureSample s = make_mixture(index, cache, config.mix, seed);
    nn::Tape tape(true);
    const auto out = net.forward(tape, s.mixture, net.embed(tape, s.enrollment));
    ItemOutcome o;
    o.loss = item_loss(tape, out.signal, s.target_clean, o.grads);
    return o;
  };
  stage.validate = [&] {
    double sum = 0.0;
    for (const auto& it : val) {
      const auto emb = speaker_encode(net, it.sample.enrollment);
      sum += eval_loss(tse_forward(net, it.sample.mixture, emb).y_tse, it.sample.target_clean);
    }
    return std::pair<double, std::optional<double>>{sum / static_cast<double>(val.size()),
                                                    std::nullopt};
  };
  stage.save = [&](const fs::path& p, const nlohmann::json& meta) { save_tse(p, net, meta); };
  return run_stage(config, net.params().all(), stage, on_epoch);
}

TrainResult train_refinement(const TrainConfig& config, const CorpusIndex& index,
                             const EpochCallback& on_epoch) {
  if (config.tse_checkpoint.empty()) {
    throw InvalidArgument("refinement training needs tse_checkpoint");
  }
  const auto tse = load_tse(config.tse_checkpoint);
  return train_refinement(config, index, *tse, on_epoch);
}

TrainResult train_refinement(const TrainConfig& config, const CorpusIndex& index,
                             const TseNetwork& tse, const EpochCallback& on_epoch) {
  RefineNetwork net(config.refine_model, tse.config(), derive_seed(config.seed, kInitStream));
  return train_refinement(config, index, tse, net, on_epoch);
}

TrainResult train_refinement(const TrainConfig& config, const CorpusIndex& index,
                             const TseNetwork& tse, RefineNetwork& net,
                             const EpochCallback& on_epoch) {
  config.validate();
  if (config.stage != TrainStage::kRefine) {
    throw InvalidArgument("train_refinement needs stage 'refine'");
  }
  if (to_json(net.tse_config()) != to_json(tse.config())) {
    throw InvalidArgument("refinement network was built for a different TSE config");
  }
  const std::uint64_t frozen = params_checksum(tse.params());
  AudioCache cache(config.mix.sample_rate);

  struct Prepared {
    MixtureSample sample;
    SpeakerEmbedding emb;
    TseResult tse;
    EditMask mask;
  };
  auto prepare = [&](MixtureSample s, std::uint64_t mask_seed) {
    Prepared p;
    p.emb = speaker_encode(tse, s.enrollment);
    p.tse = tse_forward(tse, s.mixture, p.emb);
    MaskingFunctionSpec spec = config.masking;
    spec.rng_seed = mask_seed;
    p.mask = apply_masking_function(p.tse.y_tse, s.target_clean, spec);
    p.sample = std::move(s);
    return p;
  };

  // The TSE is frozen, so validation inputs and masks are computed once.
  std::vector<Prepared> val;
  {
    auto items = generate_eval_items(index, cache, config.mix, config.val_count,
                                     derive_seed(config.seed, kValStream));
    for (std::size_t i = 0; i < items.size(); ++i) {
      val.push_back(prepare(std::move(items[i].sample), item_seed(config.masking.rng_seed, i)));
    }
  }

  auto run = [&](nn::Tape& tape, const Prepared& p) {
    const nn::Var emb = tape.constant(
        Eigen::Map<const nn::Matrix>(p.emb.values.data(), 1,
                                     static_cast<Eigen::Index>(p.emb.values.size())));
    const nn::Var state = net.adapt(tape.constant(p.tse.mask));
    return net.forward(tape, p.sample.mixture, emb, state, p.mask);
  };

  Stage stage;
  stage.item_step = [&](int epoch, std::size_t i, std::uint64_t seed) {
    const Prepared p = prepare(make_mixture(index, cache, config.mix, seed),
                               training_mask_seed(config.masking.rng_seed, epoch, i));
    nn::Tape tape(true);
    ItemOutcome o;
    o.loss = item_loss(tape, run(tape, p), p.sample.target_clean, o.grads);
    return o;
  };
  stage.validate = [&] {
    double refine_sum = 0.0, output_sum = 0.0;
    for (const auto& p : val) {
      nn::Tape tape(false);
      const nn::Var y = run(tape, p);
      const AudioSignal y_refine = mixture_consistent(
          AudioSignal(std::vector<double>(y.value().data(), y.value().data() + y.rows()),
                      p.sample.mixture.sample_rate),
          p.sample.mixture);
      refine_sum += eval_loss(y_refine, p.sample.target_clean);
      output_sum +=
          eval_loss(compose_output(p.tse.y_tse, y_refine, p.mask), p.sample.target_clean);
    }
    const auto n = static_cast<double>(val.size());
    return std::pair<double, std::optional<double>>{refine_sum / n, output_sum / n};
  };
  stage.save = [&](const fs::path& path, nlohmann::json meta) {
    meta["tse_checksum"] = checksum_hex(frozen);
    meta["masking"] = masking_to_json(config.masking);
    save_refine(path, net, meta);
  };
  stage.after_epoch = [&](int epoch) {
    if (params_checksum(tse.params()) != frozen) {
      throw Error("TSE weights changed during refinement training (epoch " +
                  std::to_string(epoch) + ")");
    }
  };
  return run_stage(config, net.params().all(), stage, on_epoch);
}

}  // namespace htse
