#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stutterbias/corpus.hpp"
#include "stutterbias/harness/provider.hpp"
#include "stutterbias/harness/report.hpp"
#include "stutterbias/harness/result_store.hpp"
#include "stutterbias/harness/sidecar.hpp"
#include "stutterbias/harness/synthesis.hpp"
#include "stutterbias/similarity.hpp"
#include "stutterbias/textnorm.hpp"

namespace stutterbias::harness {

struct CorpusSpec {
  std::string name;  // e.g. "LS"; the pair is <name>-Y / <name>-N
  std::filesystem::path y;
  std::filesystem::path n;
};

struct SimilaritySettings {
  std::filesystem::path synthetic;  // A side, e.g. LS-Y
  std::filesystem::path stuttered;  // first B side, e.g. FB-Y
  std::filesystem::path fluent;     // second B side, e.g. FB-N
  SpectrogramParams params;

  bool enabled() const { return !synthetic.empty() && !stuttered.empty() && !fluent.empty(); }
};

struct GenerationSettings {
  std::filesystem::path source;
  std::filesystem::path output_dir;
  GenerationOptions options;
};

// JSON document; relative paths resolve against the config file's directory.
//
//   {
//     "seed": 7, "parallelism": 4, "strict": false,
//     "output_dir": "report", "store": "results.jsonl",
//     "corpora": [{"name": "LS", "y": "LS/Y/manifest.jsonl", "n": "LS/N/manifest.jsonl"}],
//     "providers": [{"name": "echo", "kind": "stub", "behavior": "echo"}, ...],
//     "metrics": ["wer", "cer", "semantic"],
//     "normalization": {"lowercase": true, ...},
//     "stats": {"methods": ["paired"], "p_value": "permutation", "alpha": 0.05},
//     "embeddings_dir": "embeddings", "semantic_baseline": 0.0,
//     "similarity": {"synthetic": ..., "stuttered": ..., "fluent": ..., "params": {...}},
//     "sidecar": {"command": ["python3", "sidecar.py"]},
//     "generation": {"source": ..., "output_dir": ..., "name": "LS",
//                    "types": [...], "fraction": 0.1, "speaker_id": "..."}
//   }
struct ExperimentConfig {
  std::vector<CorpusSpec> corpora;
  std::vector<ProviderConfig> providers;
  std::vector<std::string> metrics{"wer", "cer", "semantic"};
  textnorm::NormalizationConfig normalization;
  StatsSettings stats;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "report";
  std::filesystem::path store = "results.jsonl";
  std::filesystem::path embeddings_dir;
  double semantic_baseline = 0.0;
  SimilaritySettings similarity;
  SidecarConfig sidecar;
  std::optional<GenerationSettings> generation;
  std::size_t parallelism = 1;
  bool strict = false;

  void validate() const;
  bool wants(std::string_view metric) const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct CorpusPair {
  std::string name;
  Manifest y;
  Manifest n;
};

// Loads both halves and checks conditions and identical id sets.
CorpusPair load_corpus_pair(const CorpusSpec& spec);

struct TranscribeSummary {
  std::size_t requests = 0;  // provider calls made
  std::size_t cached = 0;
  std::size_t failures = 0;
};

// Transcribes every (corpus, provider, condition, utterance) not already in
// the store. Providers are created from the config unless supplied.
TranscribeSummary transcribe_all(const ExperimentConfig& config, ResultStore& store,
                                 std::vector<std::unique_ptr<Provider>>* providers = nullptr);

struct ScoreSummary {
  std::size_t rows = 0;      // utterances scored under both conditions
  std::size_t appended = 0;  // rows written because they were new or changed
  std::vector<Unscored> unscored;
};

// Scores every utterance transcribed under both conditions; appends rows that
// are new or changed.
ScoreSummary score_all(const ExperimentConfig& config, ResultStore& store);

// Y and N halves of the similarity audit as one CSV, one row per disfluency type plus All.
std::string similarity_audit(const ExperimentConfig& config);

ReportBundle build_experiment_report(const ExperimentConfig& config, const ResultStore& store,
                                     const std::vector<Unscored>& unscored = {});

struct RunSummary {
  TranscribeSummary transcribe;
  ScoreSummary score;
  ReportBundle report;
};

// transcribe_all, score_all, then the report written to output_dir.
RunSummary run_experiment(const ExperimentConfig& config);

}  // namespace stutterbias::harness
