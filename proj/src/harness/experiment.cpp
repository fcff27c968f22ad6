#include "stutterbias/harness/experiment.hpp"

#include <atomic>
#include <set>

#include <fmt/format.h>

#include "stutterbias/error.hpp"
#include "stutterbias/harness/hashing.hpp"
#include "stutterbias/metrics.hpp"
#include "stutterbias/parallel.hpp"

namespace stutterbias::harness {

using nlohmann::json;
namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
  std::set<std::string> names;
  for (const auto& c : corpora) {
    if (c.name.empty()) throw Error("corpus needs a name");
    if (!names.insert(c.name).second) throw Error(fmt::format("duplicate corpus '{}'", c.name));
  }
  names.clear();
  for (const auto& p : providers) {
    p.validate();
    if (!names.insert(p.name).second) throw Error(fmt::format("duplicate provider '{}'", p.name));
  }
  for (const auto& m : metrics) {
    if (m != "wer" && m != "cer" && m != "semantic") throw Error(fmt::format("unknown metric '{}'", m));
  }
  normalization.validate();
  if (stats.methods.empty()) throw Error("at least one correlation method is required");
  if (!(stats.alpha > 0 && stats.alpha < 1)) throw Error("alpha must lie in (0, 1)");
  if (!(semantic_baseline >= 0 && semantic_baseline < 1)) throw Error("semantic baseline must lie in [0, 1)");
  if (parallelism == 0) throw Error("parallelism must be at least 1");
  similarity.params.validate();
}

bool ExperimentConfig::wants(std::string_view metric) const {
  return std::find(metrics.begin(), metrics.end(), metric) != metrics.end();
}

ExperimentConfig experiment_config_from_json(const json& j, const fs::path& base_dir) {
  ExperimentConfig c;
  auto path_of = [&](const json& v) -> fs::path {
    fs::path p = v.get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  try {
    if (!j.is_object()) throw Error("experiment config must be a JSON object");
    for (const auto& entry : j.value("corpora", json::array())) {
      c.corpora.push_back({entry.at("name").get<std::string>(), path_of(entry.at("y")),
                           path_of(entry.at("n"))});
    }
    for (const auto& p : j.value("providers", json::array())) c.providers.push_back(provider_from_json(p));
    if (j.contains("metrics")) c.metrics = j.at("metrics").get<std::vector<std::string>>();
    if (j.contains("normalization")) c.normalization = textnorm::config_from_json(j.at("normalization"));
    if (j.contains("stats")) {
      const auto& s = j.at("stats");
      if (s.contains("methods")) {
        c.stats.methods.clear();
        for (const auto& m : s.at("methods")) {
          c.stats.methods.push_back(stats::parse_correlation_method(m.get<std::string>()));
        }
      }
      if (s.contains("p_value")) c.stats.p_value = stats::parse_p_value_mode(s.at("p_value").get<std::string>());
      c.stats.alpha = s.value("alpha", c.stats.alpha);
    }
    c.seed = j.value("seed", c.seed);
    c.output_dir = path_of(j.value("output_dir", json("report")));
    c.store = path_of(j.value("store", json("results.jsonl")));
    if (j.contains("embeddings_dir")) c.embeddings_dir = path_of(j.at("embeddings_dir"));
    c.semantic_baseline = j.value("semantic_baseline", c.semantic_baseline);
    if (j.contains("similarity")) {
      const auto& s = j.at("similarity");
      if (s.contains("synthetic")) c.similarity.synthetic = path_of(s.at("synthetic"));
      if (s.contains("stuttered")) c.similarity.stuttered = path_of(s.at("stuttered"));
      if (s.contains("fluent")) c.similarity.fluent = path_of(s.at("fluent"));
      if (s.contains("params")) c.similarity.params = spectrogram_params_from_json(s.at("params"));
    }
    if (j.contains("sidecar")) {
      c.sidecar = sidecar_config_from_json(j.at("sidecar"));
      if (!c.sidecar.command.empty() && c.sidecar.command[0].find('/') != std::string::npos &&
          fs::path(c.sidecar.command[0]).is_relative()) {
        c.sidecar.command[0] = (base_dir / c.sidecar.command[0]).string();
      }
    }
    c.parallelism = j.value("parallelism", c.parallelism);
    c.strict = j.value("strict", c.strict);
    if (j.contains("generation")) {
      const auto& g = j.at("generation");
      GenerationSettings gs;
      gs.source = path_of(g.at("source"));
      gs.output_dir = path_of(g.at("output_dir"));
      gs.options.name = g.value("name", gs.options.name);
      if (g.contains("types")) {
        gs.options.types.clear();
        for (const auto& t : g.at("types")) gs.options.types.push_back(parse_disfluency_type(t.get<std::string>()));
      }
      gs.options.fraction = g.value("fraction", gs.options.fraction);
      gs.options.speaker_id = g.value("speaker_id", gs.options.speaker_id);
      c.generation = gs;
    }
  } catch (const json::exception& e) {
    throw Error(fmt::format("invalid experiment config: {}", e.what()));
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".toml") throw Error("TOML configs are not supported; use JSON");
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
  return experiment_config_from_json(j, path.parent_path());
}

CorpusPair load_corpus_pair(const CorpusSpec& spec) {
  CorpusPair pair{spec.name, load_manifest(spec.y), load_manifest(spec.n)};
  if (pair.y.condition != Condition::Y) throw Error(fmt::format("{}: manifest {} is not condition Y", spec.name, spec.y.string()));
  if (pair.n.condition != Condition::N) throw Error(fmt::format("{}: manifest {} is not condition N", spec.name, spec.n.string()));
  std::set<std::string> ys, ns;
  for (const auto& u : pair.y.utterances) ys.insert(u.id);
  for (const auto& u : pair.n.utterances) ns.insert(u.id);
  for (const auto& id : ys) {
    if (!ns.contains(id)) throw Error(fmt::format("{}: utterance {} is in Y but not in N", spec.name, id));
  }
  for (const auto& id : ns) {
    if (!ys.contains(id)) throw Error(fmt::format("{}: utterance {} is in N but not in Y", spec.name, id));
  }
  return pair;
}

namespace {

json identity_settings(const ProviderConfig& p) {
  if (p.kind == ProviderKind::Stub) return {{"behavior", to_string(p.stub)}, {"settings", p.settings}};
  return p.settings;
}

std::vector<CorpusPair> load_pairs(const ExperimentConfig& config) {
  std::vector<CorpusPair> pairs;
  for (const auto& spec : config.corpora) pairs.push_back(load_corpus_pair(spec));
  return pairs;
}

std::vector<const Utterance*> sorted_utterances(const Manifest& m) {
  std::vector<const Utterance*> out;
  for (const auto& u : m.utterances) out.push_back(&u);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->id < b->id; });
  return out;
}

}  // namespace

TranscribeSummary transcribe_all(const ExperimentConfig& config, ResultStore& store,
                                 std::vector<std::unique_ptr<Provider>>* providers) {
  std::vector<std::unique_ptr<Provider>> owned;
  if (providers == nullptr) {
    for (const auto& p : config.providers) {
      owned.push_back(make_provider(p, config.sidecar, config.output_dir / "sidecar-work"));
    }
    providers = &owned;
  }
  const auto pairs = load_pairs(config);

  struct Task {
    const CorpusPair* pair;
    Provider* provider;
    Condition condition;
    const Utterance* utterance;
  };
  std::vector<Task> tasks;
  for (const auto& pair : pairs) {
    for (auto& provider : *providers) {
      for (const Condition cond : {Condition::Y, Condition::N}) {
        const Manifest& m = cond == Condition::Y ? pair.y : pair.n;
        for (const Utterance* u : sorted_utterances(m)) tasks.push_back({&pair, provider.get(), cond, u});
      }
    }
  }

  std::atomic<std::size_t> requests{0}, cached{0}, failures{0};
  parallel_for(tasks.size(), config.parallelism, [&](std::size_t i) {
    const Task& t = tasks[i];
    const Manifest& m = t.condition == Condition::Y ? t.pair->y : t.pair->n;
    const ProviderConfig& pc = t.provider->config();
    const std::string audio = read_file(m.resolve(t.utterance->audio_path));
    const std::string key = cache_key(audio, pc.name, identity_settings(pc));

    const auto existing = store.find(t.pair->name, pc.name, t.condition, t.utterance->id);
    if (existing && existing->cache_key == key) {
      ++cached;
      return;
    }
    if (auto hit = store.find_by_cache_key(key)) {
      hit->corpus = t.pair->name;
      hit->condition = t.condition;
      hit->utterance_id = t.utterance->id;
      store.append(*hit);
      ++cached;
      return;
    }
    const std::string time = utc_timestamp();
    const auto outcome = t.provider->transcribe(*t.utterance, audio);
    requests += static_cast<std::size_t>(outcome.attempts);
    if (outcome.ok()) {
      TranscriptionRecord r;
      r.corpus = t.pair->name;
      r.provider = pc.name;
      r.condition = t.condition;
      r.utterance_id = t.utterance->id;
      r.hypothesis_raw = *outcome.transcript;
      r.hypothesis_normalized = textnorm::normalize(r.hypothesis_raw, config.normalization);
      r.request_time = time;
      r.cache_key = key;
      r.attempts = outcome.attempts;
      store.append(r);
    } else {
      ++failures;
      store.append(FailureRecord{t.pair->name, pc.name, t.condition, t.utterance->id, key,
                                 outcome.error, outcome.attempts, time});
    }
  });
  return {requests.load(), cached.load(), failures.load()};
}

namespace {

std::optional<EmbeddingSequence> find_embedding(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / (embedding_key(text) + ".json");
  if (!fs::exists(p)) return std::nullopt;
  return load_embeddings(p);
}

void request_missing_embeddings(const ExperimentConfig& config, const std::set<std::string>& texts) {
  std::vector<std::string> missing;
  for (const auto& t : texts) {
    if (!t.empty() && !fs::exists(config.embeddings_dir / (embedding_key(t) + ".json"))) missing.push_back(t);
  }
  if (missing.empty()) return;
  if (!sidecar_available(config.sidecar)) {
    fmt::print(stderr, "warning: {} sentences lack embeddings and no sidecar is available\n", missing.size());
    return;
  }
  const fs::path work = config.output_dir / "sidecar-work" / "embed";
  std::string lines;
  for (const auto& t : missing) lines += json({{"key", embedding_key(t)}, {"text", t}}).dump() + "\n";
  write_file(work / "embed_requests.jsonl", lines);
  run_sidecar(config.sidecar, {"embed", work / "embed_requests.jsonl", config.embeddings_dir,
                               config.sidecar.models, config.sidecar.device});
}

struct ConditionScores {
  std::map<std::string, double> values;
  std::string problem;
};

ConditionScores score_condition(const ExperimentConfig& config, const Utterance& u,
                                const TranscriptionRecord& rec) {
  ConditionScores out;
  const std::string ref = textnorm::normalize(u.reference, config.normalization);
  if (textnorm::tokenize(ref).empty()) {
    out.problem = "reference is empty after normalization";
    return out;
  }
  const std::string& hyp = rec.hypothesis_normalized;
  if (config.wants("wer")) out.values["wer"] = wer(ref, hyp);
  if (config.wants("cer")) out.values["cer"] = cer(ref, hyp);
  if (config.wants("semantic") && !config.embeddings_dir.empty()) {
    const auto ref_e = find_embedding(config.embeddings_dir, ref);
    std::optional<EmbeddingSequence> hyp_e;
    if (textnorm::tokenize(hyp).empty()) {
      hyp_e = EmbeddingSequence{};
    } else {
      hyp_e = find_embedding(config.embeddings_dir, hyp);
    }
    if (ref_e && hyp_e) {
      auto s = semantic_f(*ref_e, *hyp_e);
      if (config.semantic_baseline > 0) s = rescale(s, config.semantic_baseline);
      out.values["semantic_f"] = s.f1;
      out.values["semantic_p"] = s.precision;
      out.values["semantic_r"] = s.recall;
    }
  }
  return out;
}

}  // namespace

ScoreSummary score_all(const ExperimentConfig& config, ResultStore& store) {
  const auto pairs = load_pairs(config);
  ScoreSummary summary;

  if (config.wants("semantic") && !config.embeddings_dir.empty()) {
    std::set<std::string> texts;
    for (const auto& pair : pairs) {
      for (const auto& u : pair.y.utterances) texts.insert(textnorm::normalize(u.reference, config.normalization));
    }
    for (const auto& r : store.transcriptions()) texts.insert(r.hypothesis_normalized);
    request_missing_embeddings(config, texts);
  }

  std::map<std::tuple<std::string, std::string, std::string>, ScoreRow> existing;
  for (auto& r : store.scores()) existing[{r.corpus, r.provider, r.utterance_id}] = r;

  for (const auto& pair : pairs) {
    for (const auto& provider : config.providers) {
      for (const Utterance* uy : sorted_utterances(pair.y)) {
        const Utterance* un = pair.n.find(uy->id);
        const auto ty = store.find(pair.name, provider.name, Condition::Y, uy->id);
        const auto tn = store.find(pair.name, provider.name, Condition::N, uy->id);
        if (!ty || !tn) {
          summary.unscored.push_back({pair.name, provider.name, uy->id,
                                      !ty ? "no Y transcription" : "no N transcription"});
          continue;
        }
        auto sy = score_condition(config, *uy, *ty);
        auto sn = score_condition(config, *un, *tn);
        if (!sy.problem.empty() || !sn.problem.empty()) {
          summary.unscored.push_back({pair.name, provider.name, uy->id,
                                      sy.problem.empty() ? sn.problem : sy.problem});
          continue;
        }
        // Keep only metrics defined under both conditions.
        for (auto it = sy.values.begin(); it != sy.values.end();) {
          if (!sn.values.contains(it->first)) {
            it = sy.values.erase(it);
          } else {
            ++it;
          }
        }
        for (auto it = sn.values.begin(); it != sn.values.end();) {
          if (!sy.values.contains(it->first)) {
            it = sn.values.erase(it);
          } else {
            ++it;
          }
        }
        ScoreRow row{pair.name, provider.name, uy->id, std::move(sy.values), std::move(sn.values)};
        ++summary.rows;
        const auto it = existing.find({row.corpus, row.provider, row.utterance_id});
        if (it == existing.end() || !(it->second == row)) {
          store.append(row);
          ++summary.appended;
        }
      }
    }
  }
  return summary;
}

std::string similarity_audit(const ExperimentConfig& config) {
  const auto& s = config.similarity;
  if (!s.enabled()) throw Error("similarity audit needs synthetic, stuttered and fluent manifests");
  const Manifest a = load_manifest(s.synthetic);
  const Manifest b1 = load_manifest(s.stuttered);
  const Manifest b2 = load_manifest(s.fluent);
  const auto r1 = cross_dataset_similarity(a, b1, s.params, config.parallelism);
  const auto r2 = cross_dataset_similarity(a, b2, s.params, config.parallelism);
  return similarity_report_csv(r1, b1.corpus_name, r2, b2.corpus_name);
}

ReportBundle build_experiment_report(const ExperimentConfig& config, const ResultStore& store,
                                     const std::vector<Unscored>& unscored) {
  ReportInputs in;
  std::set<std::string> corpora, providers;
  for (const auto& c : config.corpora) {
    in.corpora.push_back(c.name);
    corpora.insert(c.name);
  }
  for (const auto& p : config.providers) {
    in.providers.push_back(p.name);
    providers.insert(p.name);
  }
  for (auto& r : store.scores()) {
    if (corpora.contains(r.corpus) && providers.contains(r.provider)) in.scores.push_back(std::move(r));
  }
  for (auto& f : store.failures()) {
    if (corpora.contains(f.corpus) && providers.contains(f.provider)) in.failures.push_back(std::move(f));
  }
  in.unscored = unscored;
  for (const auto& spec : config.corpora) {
    const Manifest y = load_manifest(spec.y);
    const auto plans = y.provenance.find("plans");
    if (plans == y.provenance.end() || !plans->is_object()) continue;
    auto& types = in.event_types[spec.name];
    for (const auto& [id, plan] : plans->items()) {
      types[id] = parse_disfluency_type(plan.at("type").get<std::string>());
    }
  }
  in.stats = config.stats;
  in.seed = config.seed;
  if (config.similarity.enabled()) in.similarity_csv = similarity_audit(config);
  return build_report(in);
}

RunSummary run_experiment(const ExperimentConfig& config) {
  ResultStore store(config.store);
  RunSummary out;
  out.transcribe = transcribe_all(config, store);
  out.score = score_all(config, store);
  out.report = build_experiment_report(config, store, out.score.unscored);
  write_report(out.report, config.output_dir);
  return out;
}

}  // namespace stutterbias::harness
