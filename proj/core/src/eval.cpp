// core/src/eval.cpp

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

#include "htse/eval.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "htse/error.hpp"
#include "htse/parallel.hpp"

namespace fs = std::filesystem;

namespace htse {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kTseOnly: return "tse-only";
    case Strategy::kRefine: return "refine";
    case Strategy::kSuccessiveTse: return "successive-tse";
    case Strategy::kRefineReplace: return "refine-replace";
  }
  return "?";
}

Strategy parse_strategy(std::string_view s) {
  for (Strategy k : {Strategy::kTseOnly, Strategy::kRefine, Strategy::kSuccessiveTse,
                     Strategy::kRefineReplace}) {
    if (s == to_string(k)) return k;
  }
  if (s == "tse") return Strategy::kTseOnly;
  throw InvalidArgument("unknown strategy '" + std::string(s) + "'");
}

MaskSource MaskSource::function(const MaskingFunctionSpec& spec) {
  MaskSource m;
  m.kind = Kind::kMaskingFunction;
  m.spec = spec;
  return m;
}

MaskSource MaskSource::human(fs::path dir) {
  MaskSource m;
  m.kind = Kind::kHuman;
  m.dir = std::move(dir);
  return m;
}

std::string MaskSource::label() const {
  switch (kind) {
    case Kind::kNone: return "none";
    case Kind::kHuman: return "human";
    case Kind::kMaskingFunction: return std::string(to_string(spec.kind));
  }
  return "?";
}

MaskSource parse_mask_source(std::string_view s) {
  if (s == "none") return MaskSource::none();
  if (s.substr(0, 6) == "human:") return MaskSource::human(std::string(s.substr(6)));
  return MaskSource::function(MaskingFunctionSpec::defaults(parse_masking_kind(s)));
}

// ---------------------------------------------------------------- report

const EvalAggregate& EvalReport::aggregate(std::string_view config) const {
  for (const auto& a : aggregates) {
    if (a.config == config) return a;
  }
  throw InvalidArgument("report has no config '" + std::string(config) + "'");
}

std::vector<const EvalRow*> EvalReport::rows_for(std::string_view config) const {
  std::vector<const EvalRow*> out;
  for (const auto& r : rows) {
    if (r.config == config) out.push_back(&r);
  }
  return out;
}

void summarize(EvalReport& report) {
  report.aggregates.clear();
  struct Acc {
    EvalAggregate agg;
    double sum = 0.0, sum_flagged = 0.0, pesq = 0.0, dnsmos = 0.0;
    std::size_t n_pesq = 0, n_dnsmos = 0, n_flagged_scored = 0;
  };
  std::vector<Acc> accs;
  for (const auto& r : report.rows) {
    auto it = std::find_if(accs.begin(), accs.end(),
                           [&](const Acc& a) { return a.agg.config == r.config; });
    if (it == accs.end()) {
      accs.push_back({});
      accs.back().agg.config = r.config;
      it = accs.end() - 1;
    }
    if (!r.error.empty() || !r.si_sdr) {
      ++it->agg.errors;
      continue;
    }
    ++it->agg.count;
    it->sum += *r.si_sdr;
    if (r.flagged) {
      ++it->agg.flagged;
      it->sum_flagged += *r.si_sdr;
      ++it->n_flagged_scored;
    }
    if (r.pesq) {
      it->pesq += *r.pesq;
      ++it->n_pesq;
    }
    if (r.dnsmos) {
      it->dnsmos += *r.dnsmos;
      ++it->n_dnsmos;
    }
  }
  for (auto& a : accs) {
    if (a.agg.count > 0) a.agg.mean_si_sdr = a.sum / static_cast<double>(a.agg.count);
    if (a.n_flagged_scored > 0) {
      a.agg.mean_si_sdr_flagged = a.sum_flagged / static_cast<double>(a.n_flagged_scored);
    }
    if (a.n_pesq > 0) a.agg.mean_pesq = a.pesq / static_cast<double>(a.n_pesq);
    if (a.n_dnsmos > 0) a.agg.mean_dnsmos = a.dnsmos / static_cast<double>(a.n_dnsmos);
    report.aggregates.push_back(a.agg);
  }
}

namespace {

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> opt_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json j{{"id", row.id},
                     {"config", row.config},
                     {"mask_source", row.mask_source},
                     {"si_sdr", opt_json(row.si_sdr)},
                     {"flagged", row.flagged},
                     {"marked_samples", row.marked_samples}};
    if (row.pesq) j["pesq"] = *row.pesq;
    if (row.dnsmos) j["dnsmos"] = *row.dnsmos;
    if (!row.error.empty()) j["error"] = row.error;
    rows.push_back(std::move(j));
  }
  nlohmann::json aggs = nlohmann::json::array();
  for (const auto& a : r.aggregates) {
    nlohmann::json j{{"config", a.config},
                     {"count", a.count},
                     {"flagged", a.flagged},
                     {"errors", a.errors},
                     {"mean_si_sdr", a.mean_si_sdr},
                     {"mean_si_sdr_flagged", a.mean_si_sdr_flagged}};
    if (a.mean_pesq) j["mean_pesq"] = *a.mean_pesq;
    if (a.mean_dnsmos) j["mean_dnsmos"] = *a.mean_dnsmos;
    aggs.push_back(std::move(j));
  }
  return {{"format", "htse-eval-report"}, {"version", 1}, {"rows", rows},
          {"aggregates", aggs}, {"metrics", r.metrics}};
}

EvalReport report_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "htse-eval-report") throw IoError("not an htse eval report");
  EvalReport r;
  for (const auto& row : j.at("rows")) {
    EvalRow e;
    e.id = row.at("id").get<std::string>();
    e.config = row.at("config").get<std::string>();
    e.mask_source = row.value("mask_source", "");
    e.si_sdr = opt_from(row, "si_sdr");
    e.pesq = opt_from(row, "pesq");
    e.dnsmos = opt_from(row, "dnsmos");
    e.flagged = row.value("flagged", false);
    e.marked_samples = row.value("marked_samples", std::size_t{0});
    e.error = row.value("error", "");
    r.rows.push_back(std::move(e));
  }
  r.metrics = j.value("metrics", nlohmann::json::object());
  summarize(r);
  return r;
}

std::string to_csv(const EvalReport& r) {
  bool pesq = false, dnsmos = false;
  for (const auto& row : r.rows) {
    pesq = pesq || row.pesq.has_value();
    dnsmos = dnsmos || row.dnsmos.has_value();
  }
  auto num = [](const std::optional<double>& v) {
    if (!v) return std::string();
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", *v);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "id,config,mask_source,si_sdr";
  if (pesq) os << ",pesq";
  if (dnsmos) os << ",dnsmos";
  os << ",flagged,error\n";
  for (const auto& row : r.rows) {
    os << row.id << ',' << row.config << ',' << row.mask_source << ',' << num(row.si_sdr);
    if (pesq) os << ',' << num(row.pesq);
    if (dnsmos) os << ',' << num(row.dnsmos);
    std::string err = row.error;
    std::replace(err.begin(), err.end(), ',', ';');
    os << ',' << (row.flagged ? 1 : 0) << ',' << err << '\n';
  }
  return os.str();
}

void write_report(const fs::path& json_path, const EvalReport& r) {
  if (json_path.has_parent_path()) fs::create_directories(json_path.parent_path());
  std::ofstream js(json_path, std::ios::trunc);
  if (!js) throw IoError("cannot write report " + json_path.string());
  js << to_json(r).dump(2) << '\n';
  fs::path csv = json_path;
  csv.replace_extension(".csv");
  std::ofstream cs(csv, std::ios::trunc);
  if (!cs) throw IoError("cannot write report " + csv.string());
  cs << to_csv(r);
}

// ---------------------------------------------------------------- evaluation

namespace {

fs::path human_mask_path(const fs::path& dir, const std::string& id) {
  return dir / (id + ".json");
}

std::map<std::string, EditMask> load_human_masks(std::span<const EvalItem> items,
                                                 const fs::path& dir) {
  std::vector<std::string> missing;
  for (const auto& it : items) {
    if (!fs::exists(human_mask_path(dir, it.id))) missing.push_back(it.id);
  }
  if (!missing.empty()) {
    std::string msg = "missing human masks in " + dir.string() + " for:";
    for (const auto& id : missing) msg += " " + id;
    throw InvalidArgument(msg);
  }
  std::map<std::string, EditMask> out;
  for (const auto& it : items) out.emplace(it.id, load_mask(human_mask_path(dir, it.id)));
  return out;
}

EditMask mask_for(const EvalItem& item, std::size_t index, const AudioSignal& y_tse,
                  const MaskSource& source, const std::map<std::string, EditMask>& human) {
  switch (source.kind) {
    case MaskSource::Kind::kNone:
      return EditMask(item.sample.mixture.size(), 0, item.sample.mixture.sample_rate);
    case MaskSource::Kind::kHuman:
      return human.at(item.id);
    case MaskSource::Kind::kMaskingFunction: {
      MaskingFunctionSpec spec = source.spec;
      spec.rng_seed = item_seed(source.spec.rng_seed, index);
      return apply_masking_function(y_tse, item.sample.target_clean, spec);
    }
  }
  throw InvalidArgument("bad mask source");
}

// The second pass sees only the first-pass estimate and the embedding.
AudioSignal successive_tse(const TseNetwork& tse, const AudioSignal& y_tse,
                           const SpeakerEmbedding& emb) {
  return tse_forward(tse, y_tse, emb).y_tse;
}

}  // namespace

std::map<std::string, EditMask> compute_masks(std::span<const EvalItem> items,
                                              const TseNetwork& tse, const MaskSource& source,
                                              int threads) {
  std::map<std::string, EditMask> human;
  if (source.kind == MaskSource::Kind::kHuman) return load_human_masks(items, source.dir);
  std::vector<EditMask> masks(items.size());
  parallel_for(items.size(), threads, [&](std::size_t i) {
    const auto& s = items[i].sample;
    AudioSignal y;
    if (source.kind == MaskSource::Kind::kMaskingFunction) {
      y = tse_forward(tse, s.mixture, speaker_encode(tse, s.enrollment)).y_tse;
    }
    masks[i] = mask_for(items[i], i, y, source, human);
  });
  std::map<std::string, EditMask> out;
  for (std::size_t i = 0; i < items.size(); ++i) out.emplace(items[i].id, std::move(masks[i]));
  return out;
}

void save_masks(const fs::path& dir, const std::map<std::string, EditMask>& masks) {
  fs::create_directories(dir);
  for (const auto& [id, m] : masks) save_mask(human_mask_path(dir, id), m);
}

EvalReport evaluate_strategies(std::span<const EvalItem> items, const EvalModels& models,
                               const MaskSource& source, std::span<const Strategy> strategies,
                               const EvalOptions& options) {
  if (models.tse == nullptr) throw InvalidArgument("evaluation needs a TSE model");
  bool needs_refine = false;
  for (Strategy s : strategies) {
    needs_refine = needs_refine || s == Strategy::kRefine || s == Strategy::kRefineReplace;
  }
  if (needs_refine && models.refine == nullptr) {
    throw InvalidArgument("strategy needs a refinement model");
  }
  const auto human = source.kind == MaskSource::Kind::kHuman
                         ? load_human_masks(items, source.dir)
                         : std::map<std::string, EditMask>{};
  const std::string label = source.label();
  const std::size_t n = items.size();
  std::vector<EvalRow> rows(n * strategies.size());

  parallel_for(n, options.threads, [&](std::size_t i) {
    const EvalItem& item = items[i];
    const MixtureSample& s = item.sample;
    auto row_at = [&](std::size_t k) -> EvalRow& { return rows[k * n + i]; };
    for (std::size_t k = 0; k < strategies.size(); ++k) {
      row_at(k).id = item.id;
      row_at(k).config = std::string(to_string(strategies[k]));
      row_at(k).mask_source = label;
    }
    try {
      const SpeakerEmbedding emb = speaker_encode(*models.tse, s.enrollment);
      const TseResult tse = tse_forward(*models.tse, s.mixture, emb);
      const EditMask mask = mask_for(item, i, tse.y_tse, source, human);
      if (mask.size() != s.mixture.size()) {
        throw InvalidArgument("mask length " + std::to_string(mask.size()) +
                              " != audio length " + std::to_string(s.mixture.size()));
      }
      const bool flagged = mask.any();
      std::optional<AudioSignal> y_refine;
      auto refined = [&]() -> const AudioSignal& {
        if (!y_refine) {
          const RefinementState st = adapt_state(*models.refine, tse.mask);
          y_refine = refine_forward(*models.refine, s.mixture, emb, st, mask);
        }
        return *y_refine;
      };
      for (std::size_t k = 0; k < strategies.size(); ++k) {
        AudioSignal est;
        switch (strategies[k]) {
          case Strategy::kTseOnly:
            est = tse.y_tse;
            break;
          case Strategy::kRefine:
            est = compose_output(tse.y_tse, refined(), mask);
            break;
          case Strategy::kSuccessiveTse:
            if (flagged) {
              if (options.on_successive_input) options.on_successive_input(item.id, tse.y_tse);
              est = successive_tse(*models.tse, tse.y_tse, emb);
            } else {
              est = tse.y_tse;
            }
            break;
          case Strategy::kRefineReplace:
            est = flagged ? refined() : tse.y_tse;
            break;
        }
        EvalRow& row = row_at(k);
        row.flagged = flagged;
        row.marked_samples = mask.count();
        row.si_sdr = si_sdr(est, s.target_clean);
        if (options.pesq != nullptr) row.pesq = options.pesq->score(est, &s.target_clean);
        if (options.dnsmos != nullptr) row.dnsmos = options.dnsmos->score(est);
      }
    } catch (const Error& e) {
      for (std::size_t k = 0; k < strategies.size(); ++k) row_at(k).error = e.what();
    }
  });

  EvalReport report;
  report.rows = std::move(rows);
  for (const ExternalMetric* m : {options.pesq, options.dnsmos}) {
    if (m != nullptr) {
      report.metrics[std::string(to_string(m->name()))] = {{"tool", m->provenance().tool},
                                                           {"version", m->provenance().version}};
    }
  }
  summarize(report);
  return report;
}

EvalReport evaluate_config(std::span<const EvalItem> items, const EvalModels& models,
                           const MaskSource& source, Strategy strategy,
                           const EvalOptions& options) {
  const Strategy s[] = {strategy};
  return evaluate_strategies(items, models, source, s, options);
}

EvalReport replay_human_masks(const fs::path& mask_dir, std::span<const EvalItem> items,
                              const EvalModels& models, const EvalOptions& options) {
  return evaluate_config(items, models, MaskSource::human(mask_dir), Strategy::kRefine, options);
}

}  // namespace htse
