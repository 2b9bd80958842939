// tools/src/cli.cpp

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

#include "htse/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "htse/checkpoint.hpp"
#include "htse/corpus.hpp"
#include "htse/error.hpp"
#include "htse/eval.hpp"
#include "htse/eval_set.hpp"
#include "htse/masking.hpp"
#include "htse/stats.hpp"
#include "htse/toy_corpus.hpp"
#include "htse/train.hpp"
#include "htse/wav.hpp"
#include "htse/service/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace htse::cli {

namespace {

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string config;
  std::string out;
  std::string log_level = "info";
  json file = json::object();
};

json read_json(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw IoError("cannot read " + p.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw IoError("invalid JSON in " + p.string() + ": " + e.what());
  }
}

void write_json(const fs::path& p, const json& j) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::trunc);
  if (!os) throw IoError("cannot write " + p.string());
  os << j.dump(2) << '\n';
}

/// `--config` must be known before the option tree is built so that file
/// values can become option defaults (flags > file > defaults).
std::optional<std::string> prescan_config(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

/// Section `name` of the config file if present, else the whole file.
json section(const json& file, const char* name) {
  if (file.contains(name) && file.at(name).is_object()) return file.at(name);
  return file;
}

template <typename T>
void from_file(const json& j, const char* key, T& v) {
  if (j.contains(key) && !j.at(key).is_null()) v = j.at(key).get<T>();
}

/// Snapshot of the resolved configuration next to the outputs of a run.
void snapshot(const fs::path& out, const std::string& command, json resolved,
              const Globals& g) {
  resolved["command"] = command;
  resolved["seed"] = g.seed;
  fs::path p;
  if (fs::is_directory(out)) p = out / "resolved_config.json";
  else p = fs::path(out.string() + ".config.json");
  write_json(p, resolved);
}

CorpusIndex index_corpus(const std::string& root, const std::string& layout) {
  return build_index(root, parse_corpus_layout(layout));
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw CLI::ValidationError(msg);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Globals g;
  CLI::App app{"htse: human-in-the-loop target speech extraction", "htse"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", g.seed, "Global random seed");
  app.add_option("--config", g.config, "JSON config file (flags override file values)");
  app.add_option("--out,-o", g.out, "Output path");
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  try {
    if (auto cfg = prescan_config(args)) g.file = read_json(*cfg);
  } catch (const Error& e) {
    err << json{{"error", e.what()}, {"kind", "config"}}.dump() << '\n';
    return kExitUsage;
  }
  from_file(g.file, "seed", g.seed);

  // ------------------------------------------------------------ mix
  auto* mix = app.add_subcommand("mix", "Corpus indexing, toy corpus and eval-set generation");
  mix->require_subcommand(1);

  ToyCorpusConfig toy;
  auto* toy_cmd = mix->add_subcommand("toy-corpus", "Write a synthetic toy corpus");
  {
    const json s = section(g.file, "toy_corpus");
    from_file(s, "speakers", toy.speakers);
    from_file(s, "utterances_per_speaker", toy.utterances_per_speaker);
    from_file(s, "utterance_s", toy.utterance_s);
    from_file(s, "noise_files", toy.noise_files);
  }
  toy_cmd->add_option("--speakers", toy.speakers);
  toy_cmd->add_option("--utterances", toy.utterances_per_speaker);
  toy_cmd->add_option("--seconds", toy.utterance_s);
  toy_cmd->add_option("--noise-files", toy.noise_files);

  std::string corpus, layout = "speaker-dirs";
  from_file(g.file, "corpus", corpus);
  from_file(g.file, "layout", layout);
  auto* index_cmd = mix->add_subcommand("index", "Index a corpus and print a summary");
  index_cmd->add_option("--corpus", corpus, "Corpus root");
  index_cmd->add_option("--layout", layout, "speaker-dirs|manifest");

  MixConfig mixcfg;
  std::size_t eval_count = 100;
  {
    const json s = section(g.file, "mix");
    mixcfg = mix_config_from_json(s, mixcfg);
    from_file(s, "count", eval_count);
  }
  auto* make_eval = mix->add_subcommand("make-eval", "Materialize a fixed evaluation set");
  make_eval->add_option("--corpus", corpus);
  make_eval->add_option("--layout", layout);
  make_eval->add_option("--count", eval_count);
  make_eval->add_option("--k", mixcfg.k_speakers, "Speakers per mixture (target included)");
  make_eval->add_flag("--noise", mixcfg.with_noise, "Add a noise component");
  make_eval->add_option("--duration", mixcfg.duration_s, "Mixture length in seconds");
  make_eval->add_option("--snr-lo", mixcfg.snr_lo_db);
  make_eval->add_option("--snr-hi", mixcfg.snr_hi_db);

  // ------------------------------------------------------------ mask
  auto* mask = app.add_subcommand("mask", "Synthetic edit masks");
  mask->require_subcommand(1);
  std::string kind = "dbfs-prob", tse_wav, clean_wav;
  std::optional<double> threshold, sigma;
  std::size_t window = kDefaultMaskWindow;
  auto* synth = mask->add_subcommand("synth", "Apply a masking function to a TSE output");
  synth->add_option("--kind", kind, "meanAE|maxAE|dBFS|dBFS-prob|GlobalSNR");
  synth->add_option("--tse", tse_wav, "TSE output WAV")->required();
  synth->add_option("--clean", clean_wav, "Clean reference WAV")->required();
  synth->add_option("--threshold", threshold);
  synth->add_option("--sigma", sigma);
  synth->add_option("--window", window);

  // ------------------------------------------------------------ train
  auto* train = app.add_subcommand("train", "Two-stage training");
  train->require_subcommand(1);
  std::optional<int> epochs;
  std::optional<std::size_t> per_epoch, val_count, batch;
  std::optional<int> threads;
  std::string tse_ckpt, model_preset, masking_kind;
  std::optional<double> duration;
  auto add_train_opts = [&](CLI::App* c) {
    c->add_option("--corpus", corpus);
    c->add_option("--layout", layout);
    c->add_option("--epochs", epochs);
    c->add_option("--mixtures-per-epoch", per_epoch);
    c->add_option("--val-count", val_count);
    c->add_option("--batch-size", batch);
    c->add_option("--threads", threads);
    c->add_option("--model", model_preset, "toy|paper");
    c->add_option("--duration", duration, "Mixture length in seconds");
  };
  auto* train_tse_cmd = train->add_subcommand("tse", "Stage 1: TSE + speaker encoder");
  add_train_opts(train_tse_cmd);
  auto* train_ref_cmd = train->add_subcommand("refine", "Stage 2: adaptation + refinement");
  add_train_opts(train_ref_cmd);
  train_ref_cmd->add_option("--tse-checkpoint", tse_ckpt, "Frozen TSE checkpoint");
  train_ref_cmd->add_option("--masking", masking_kind, "Masking function for edit masks");

  // ------------------------------------------------------------ eval
  auto* eval = app.add_subcommand("eval", "Evaluation harness");
  eval->require_subcommand(1);
  std::string eval_dir, tse_path, refine_path, strategies = "tse-only,refine",
                                                mask_source = "dbfs-prob", save_masks_dir;
  int eval_threads = 1;
  {
    const json s = section(g.file, "eval");
    from_file(s, "eval_set", eval_dir);
    from_file(s, "tse", tse_path);
    from_file(s, "refine", refine_path);
    from_file(s, "strategy", strategies);
    from_file(s, "mask_source", mask_source);
    from_file(s, "threads", eval_threads);
  }
  auto* eval_run = eval->add_subcommand("run", "Score strategies on an eval set");
  eval_run->add_option("--eval-set", eval_dir);
  eval_run->add_option("--tse", tse_path, "TSE checkpoint");
  eval_run->add_option("--refine", refine_path, "Refinement checkpoint");
  eval_run->add_option("--strategy", strategies,
                       "Comma list of tse-only|refine|successive-tse|refine-replace");
  eval_run->add_option("--mask-source", mask_source, "none | <masking kind> | human:<dir>");
  eval_run->add_option("--save-masks", save_masks_dir, "Also write the masks used");
  eval_run->add_option("--threads", eval_threads);

  std::string report_path, cfg_a = "refine", cfg_b = "tse-only";
  bool flagged_only = false;
  auto* ttest = eval->add_subcommand("ttest", "Paired t-test between two configs of a report");
  ttest->add_option("--report", report_path)->required();
  ttest->add_option("--a", cfg_a);
  ttest->add_option("--b", cfg_b);
  ttest->add_flag("--flagged-only", flagged_only);

  std::size_t subset_count = 20;
  std::string subset_cfg = "tse-only";
  auto* subset = eval->add_subcommand("subset", "SI-SDR-stratified item subset for studies");
  subset->add_option("--report", report_path)->required();
  subset->add_option("--by", subset_cfg, "Config whose SI-SDR is stratified");
  subset->add_option("--count", subset_count);
  StratifyOptions strat;
  subset->add_option("--lo", strat.lo_db, "Lowest eligible SI-SDR (dB)");
  subset->add_option("--hi", strat.hi_db, "Upper bound of eligible SI-SDR (dB, exclusive)");
  subset->add_option("--bin-width", strat.bin_width_db);

  // ------------------------------------------------------------ serve
  service::ServiceConfig svc = service::service_config_from_json(section(g.file, "serve"));
  std::optional<int> svc_port;
  std::string svc_eval, svc_tse, svc_refine, svc_data, svc_static;
  auto* serve = app.add_subcommand("serve", "Run the annotation service");
  serve->add_option("--port", svc_port);
  serve->add_option("--eval-set", svc_eval);
  serve->add_option("--tse", svc_tse);
  serve->add_option("--refine", svc_refine);
  serve->add_option("--data-dir", svc_data);
  serve->add_option("--static-dir", svc_static);

  // ------------------------------------------------------------ model
  auto* model = app.add_subcommand("model", "Checkpoint utilities");
  model->require_subcommand(1);
  std::string model_kind = "tse", ckpt_path, preset = "toy";
  auto* init = model->add_subcommand("init", "Write a freshly initialized checkpoint");
  init->add_option("--kind", model_kind)->check(CLI::IsMember({"tse", "refine"}));
  init->add_option("--preset", preset)->check(CLI::IsMember({"toy", "paper"}));
  auto* exp = model->add_subcommand("export", "Export a checkpoint as JSON (config + arrays)");
  exp->add_option("--checkpoint", ckpt_path)->required();
  auto* load = model->add_subcommand("load", "Load a checkpoint and print a summary");
  load->add_option("--checkpoint", ckpt_path)->required();

  // ------------------------------------------------------------ parse
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  g.seed_given = app.get_option("--seed")->count() > 0 || g.file.contains("seed");
  spdlog::set_level(spdlog::level::from_str(g.log_level));

  try {
    // ---------------------------------------------------------- mix
    if (*toy_cmd) {
      require(!g.out.empty(), "--out is required");
      if (g.seed_given) toy.seed = g.seed;
      generate_toy_corpus(g.out, toy);
      const json resolved{{"speakers", toy.speakers},
                          {"utterances_per_speaker", toy.utterances_per_speaker},
                          {"utterance_s", toy.utterance_s},
                          {"noise_files", toy.noise_files},
                          {"toy_seed", toy.seed}};
      snapshot(g.out, "mix toy-corpus", resolved, g);
      out << json{{"corpus", g.out}, {"speakers", toy.speakers}}.dump() << '\n';
    } else if (*index_cmd) {
      require(!corpus.empty(), "--corpus is required");
      const auto idx = index_corpus(corpus, layout);
      json speakers = json::object();
      for (const auto& [id, utts] : idx.speakers) speakers[id] = utts.size();
      const json summary{{"root", idx.root.generic_string()},
                         {"speakers", speakers},
                         {"noise_files", idx.noise.size()},
                         {"excluded_speakers", idx.excluded_speakers},
                         {"duplicate_entries", idx.duplicate_entries}};
      if (!g.out.empty()) write_json(g.out, summary);
      out << summary.dump() << '\n';
    } else if (*make_eval) {
      require(!corpus.empty(), "--corpus is required");
      require(!g.out.empty(), "--out is required");
      const auto idx = index_corpus(corpus, layout);
      AudioCache cache(mixcfg.sample_rate);
      const json manifest = materialize_eval_set(idx, cache, mixcfg, eval_count, g.seed, g.out);
      snapshot(g.out, "mix make-eval",
               {{"corpus", corpus}, {"layout", layout}, {"count", eval_count},
                {"mix", to_json(mixcfg)}},
               g);
      out << json{{"eval_set", g.out}, {"count", manifest.at("count")}}.dump() << '\n';
    }
    // ---------------------------------------------------------- mask
    else if (*synth) {
      require(!g.out.empty(), "--out is required");
      const AudioSignal y = read_wav(tse_wav);
      const AudioSignal s = read_wav(clean_wav);
      MaskingFunctionSpec spec = MaskingFunctionSpec::defaults(parse_masking_kind(kind));
      if (threshold) spec.threshold = *threshold;
      if (sigma) spec.threshold_sigma = *sigma;
      spec.window_len = window;
      spec.rng_seed = g.seed;
      const EditMask m = apply_masking_function(y, s, spec);
      save_mask(g.out, m);
      snapshot(g.out, "mask synth",
               {{"kind", std::string(to_string(spec.kind))},
                {"threshold", spec.threshold},
                {"threshold_sigma", spec.threshold_sigma},
                {"window_len", spec.window_len},
                {"tse", tse_wav},
                {"clean", clean_wav}},
               g);
      out << json{{"mask", g.out}, {"marked_samples", m.count()}, {"total", m.size()}}.dump()
          << '\n';
    }
    // ---------------------------------------------------------- train
    else if (*train_tse_cmd || *train_ref_cmd) {
      const bool refine = static_cast<bool>(*train_ref_cmd);
      const TrainStage stage = refine ? TrainStage::kRefine : TrainStage::kTse;
      json file = section(g.file, "train");
      file["stage"] = std::string(to_string(stage));
      if (!model_preset.empty()) {
        file["tse_model"] = model_preset;
        file["refine_model"] = model_preset;
      }
      TrainConfig cfg = train_config_from_json(file);
      if (epochs) cfg.epochs = *epochs;
      if (per_epoch) cfg.mixtures_per_epoch = *per_epoch;
      if (val_count) cfg.val_count = *val_count;
      if (batch) cfg.batch_size = *batch;
      if (threads) cfg.threads = *threads;
      if (duration) cfg.mix.duration_s = *duration;
      if (g.seed_given) cfg.seed = g.seed;
      if (!g.out.empty()) cfg.out_dir = g.out;
      if (!tse_ckpt.empty()) cfg.tse_checkpoint = tse_ckpt;
      if (!masking_kind.empty()) {
        const auto seed = cfg.masking.rng_seed;
        cfg.masking = MaskingFunctionSpec::defaults(parse_masking_kind(masking_kind));
        cfg.masking.rng_seed = seed;
      }
      cfg.validate();
      require(!corpus.empty(), "--corpus is required");
      const auto idx = index_corpus(corpus, layout);
      TrainResult r;
      if (refine) {
        require(!cfg.tse_checkpoint.empty(), "--tse-checkpoint is required");
        r = train_refinement(cfg, idx);
      } else {
        r = train_tse(cfg, idx);
      }
      json resolved = to_json(cfg);
      resolved["corpus"] = corpus;
      resolved["layout"] = layout;
      snapshot(cfg.out_dir, std::string("train ") + std::string(to_string(stage)), resolved, g);
      out << json{{"best_checkpoint", r.best_checkpoint.generic_string()},
                  {"best_val_loss", r.best_val_loss},
                  {"best_epoch", r.best_epoch},
                  {"log", r.log_path.generic_string()}}
                 .dump()
          << '\n';
    }
    // ---------------------------------------------------------- eval
    else if (*eval_run) {
      require(!eval_dir.empty(), "--eval-set is required");
      require(!tse_path.empty(), "--tse is required");
      require(!g.out.empty(), "--out is required");
      std::vector<Strategy> strats;
      std::stringstream ss(strategies);
      for (std::string tok; std::getline(ss, tok, ',');) {
        if (!tok.empty()) strats.push_back(parse_strategy(tok));
      }
      require(!strats.empty(), "--strategy is empty");
      MaskSource src = parse_mask_source(mask_source);
      if (src.kind == MaskSource::Kind::kMaskingFunction) src.spec.rng_seed = g.seed;
      const EvalSet set = load_eval_set(eval_dir);
      const auto tse_net = load_tse(tse_path);
      std::unique_ptr<RefineNetwork> ref_net;
      if (!refine_path.empty()) ref_net = load_refine(refine_path);
      const auto pesq = ExternalMetric::from_env(MetricName::kPesq);
      const auto dnsmos = ExternalMetric::from_env(MetricName::kDnsmos);
      EvalOptions opt;
      opt.threads = eval_threads;
      opt.pesq = pesq ? &*pesq : nullptr;
      opt.dnsmos = dnsmos ? &*dnsmos : nullptr;
      if (!save_masks_dir.empty()) {
        save_masks(save_masks_dir, compute_masks(set.items, *tse_net, src, eval_threads));
      }
      const EvalReport report =
          evaluate_strategies(set.items, {tse_net.get(), ref_net.get()}, src, strats, opt);
      write_report(g.out, report);
      snapshot(g.out, "eval run",
               {{"eval_set", eval_dir},
                {"tse", tse_path},
                {"refine", refine_path},
                {"strategy", strategies},
                {"mask_source", mask_source},
                {"threads", eval_threads}},
               g);
      out << json{{"report", g.out}, {"aggregates", to_json(report).at("aggregates")}}.dump()
          << '\n';
    } else if (*ttest) {
      const EvalReport r = report_from_json(read_json(report_path));
      const auto ra = r.rows_for(cfg_a), rb = r.rows_for(cfg_b);
      std::map<std::string, double> b_scores;
      for (const auto* row : rb) {
        if (row->si_sdr) b_scores[row->id] = *row->si_sdr;
      }
      std::vector<double> xa, xb;
      for (const auto* row : ra) {
        if (!row->si_sdr || (flagged_only && !row->flagged)) continue;
        const auto it = b_scores.find(row->id);
        if (it == b_scores.end()) continue;
        xa.push_back(*row->si_sdr);
        xb.push_back(it->second);
      }
      const TTestResult t = paired_t_test(xa, xb);
      const json result{{"a", cfg_a}, {"b", cfg_b}, {"n", xa.size()}, {"t", t.t},
                        {"p", t.p}, {"df", t.df}, {"mean_diff", t.mean_diff}};
      if (!g.out.empty()) write_json(g.out, result);
      out << result.dump() << '\n';
    } else if (*subset) {
      const EvalReport r = report_from_json(read_json(report_path));
      std::vector<double> scores;
      std::vector<std::string> ids;
      for (const auto* row : r.rows_for(subset_cfg)) {
        if (!row->si_sdr) continue;
        scores.push_back(*row->si_sdr);
        ids.push_back(row->id);
      }
      strat.seed = g.seed;
      json picked = json::array();
      for (std::size_t i : stratified_subset(scores, subset_count, strat)) picked.push_back(ids[i]);
      const json result{{"config", subset_cfg}, {"ids", picked}};
      if (!g.out.empty()) write_json(g.out, result);
      out << result.dump() << '\n';
    }
    // ---------------------------------------------------------- serve
    else if (*serve) {
      service::apply_env_overrides(svc);
      if (svc_port) svc.port = *svc_port;
      if (!svc_eval.empty()) svc.eval_set_dir = svc_eval;
      if (!svc_tse.empty()) svc.tse_checkpoint = svc_tse;
      if (!svc_refine.empty()) svc.refine_checkpoint = svc_refine;
      if (!svc_data.empty()) svc.data_dir = svc_data;
      if (!svc_static.empty()) svc.static_dir = svc_static;
      fs::create_directories(svc.data_dir);
      snapshot(svc.data_dir, "serve", service::to_json(svc), g);
      service::AnnotationService s(svc);
      s.run();
    }
    // ---------------------------------------------------------- model
    else if (*init) {
      require(!g.out.empty(), "--out is required");
      const std::uint64_t seed = g.seed;
      if (model_kind == "tse") {
        const TseNetwork net(preset == "toy" ? TseModelConfig::toy() : TseModelConfig::paper(),
                             seed);
        save_tse(g.out, net, {{"init_seed", seed}});
      } else {
        const auto tcfg = preset == "toy" ? TseModelConfig::toy() : TseModelConfig::paper();
        const auto rcfg = preset == "toy" ? RefineModelConfig::toy() : RefineModelConfig::paper();
        const RefineNetwork net(rcfg, tcfg, seed);
        save_refine(g.out, net, {{"init_seed", seed}});
      }
      snapshot(g.out, "model init", {{"kind", model_kind}, {"preset", preset}}, g);
      out << json{{"checkpoint", g.out}, {"kind", model_kind}}.dump() << '\n';
    } else if (*exp || *load) {
      const auto h = read_checkpoint_header(ckpt_path);
      std::unique_ptr<TseNetwork> t;
      std::unique_ptr<RefineNetwork> rf;
      const nn::ParameterStore* params = nullptr;
      if (h.kind == "tse") {
        t = load_tse(ckpt_path);
        params = &t->params();
      } else {
        rf = load_refine(ckpt_path);
        params = &rf->params();
      }
      json summary{{"kind", h.kind},
                   {"config", h.config},
                   {"meta", h.meta},
                   {"parameters", params->scalar_count()},
                   {"checksum", checksum_hex(params_checksum(*params))}};
      if (*exp) {
        require(!g.out.empty(), "--out is required");
        json arrays = json::object();
        for (const nn::Parameter* p : params->all()) {
          arrays[p->name] = {{"shape", {p->value.rows(), p->value.cols()}},
                             {"data", std::vector<double>(p->value.data(),
                                                          p->value.data() + p->value.size())}};
        }
        json doc = summary;
        doc["arrays"] = std::move(arrays);
        write_json(g.out, doc);
      }
      out << summary.dump() << '\n';
    }
    return kExitOk;
  } catch (const CLI::ValidationError& e) {
    err << json{{"error", e.what()}, {"kind", "usage"}}.dump() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << json{{"error", e.what()}, {"kind", "invalid_argument"}}.dump() << '\n';
    return kExitRuntime;
  } catch (const IoError& e) {
    err << json{{"error", e.what()}, {"kind", "io"}}.dump() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << json{{"error", e.what()}, {"kind", "runtime"}}.dump() << '\n';
    return kExitRuntime;
  }
}

}  // namespace htse::cli
