#include <gtest/gtest.h>

#include <chrono>

#include "stutterbias/error.hpp"
#include "stutterbias/fixture.hpp"
#include "stutterbias/harness/experiment.hpp"
#include "test_util.hpp"

using namespace stutterbias;
using namespace stutterbias::harness;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Tone fixture plus a generated audio-type Y/N pair under dir.
void make_pair(const fs::path& dir, std::size_t count = 16) {
  fixture::FixtureOptions fo;
  fo.utterances = count;
  const Manifest src = fixture::make_tone_corpus(dir / "src", fo);
  GenerationOptions go;
  go.types.assign(kAudioTypes.begin(), kAudioTypes.end());
  go.fraction = 1.0;
  go.seed = 9;
  generate_synthetic_corpus(src, go, dir / "LS");
}

json base_config() {
  return json::parse(R"({
    "seed": 1,
    "corpora": [{"name": "LS", "y": "LS/Y/manifest.jsonl", "n": "LS/N/manifest.jsonl"}],
    "providers": [
      {"name": "echo", "kind": "stub", "behavior": "echo"},
      {"name": "dropper", "kind": "stub", "behavior": "word-dropper", "settings": {"drop_modulus": 5}}
    ],
    "metrics": ["wer", "cer"]
  })");
}

}  // namespace

TEST(ExperimentConfig, ParsesAndResolvesPaths) {
  testutil::TempDir dir;
  const auto c = experiment_config_from_json(base_config(), dir.path());
  ASSERT_EQ(c.corpora.size(), 1u);
  EXPECT_EQ(c.corpora[0].y, dir / "LS/Y/manifest.jsonl");
  EXPECT_EQ(c.store, dir / "results.jsonl");
  EXPECT_EQ(c.output_dir, dir / "report");
  EXPECT_EQ(c.providers[1].settings.at("drop_modulus"), 5);
  EXPECT_TRUE(c.wants("wer"));
  EXPECT_FALSE(c.wants("semantic"));
}

TEST(ExperimentConfig, Rejections) {
  testutil::TempDir dir;
  auto j = base_config();
  j["metrics"] = {"bleu"};
  EXPECT_THROW(experiment_config_from_json(j, dir.path()), Error);
  j = base_config();
  j["providers"].push_back(j["providers"][0]);
  EXPECT_THROW(experiment_config_from_json(j, dir.path()), Error);
  j = base_config();
  j["stats"] = {{"alpha", 1.5}};
  EXPECT_THROW(experiment_config_from_json(j, dir.path()), Error);
  write_file(dir / "c.toml", "seed = 1\n");
  EXPECT_THROW(load_experiment_config(dir / "c.toml"), Error);
  write_file(dir / "c.json", base_config().dump());
  EXPECT_EQ(load_experiment_config(dir / "c.json").seed, 1u);
}

TEST(CorpusPair, IdSetsMustMatch) {
  testutil::TempDir dir;
  make_pair(dir.path(), 8);
  CorpusSpec spec{"LS", dir / "LS/Y/manifest.jsonl", dir / "LS/N/manifest.jsonl"};
  EXPECT_EQ(load_corpus_pair(spec).y.utterances.size(), 8u);
  Manifest n = load_manifest(spec.n);
  n.utterances.pop_back();
  save_manifest(n, dir / "LS/N/short.jsonl");
  EXPECT_THROW(load_corpus_pair({"LS", spec.y, dir / "LS/N/short.jsonl"}), Error);
  EXPECT_THROW(load_corpus_pair({"LS", spec.n, spec.n}), Error);
}

TEST(Experiment, EndToEndStubsAndCaching) {
  testutil::TempDir dir;
  make_pair(dir.path());
  const auto config = experiment_config_from_json(base_config(), dir.path());
  const auto start = std::chrono::steady_clock::now();
  const auto run = run_experiment(config);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 60.0);
  EXPECT_EQ(run.transcribe.requests, 64u);
  EXPECT_EQ(run.score.rows, 32u);
  EXPECT_EQ(run.score.appended, 32u);
  for (const char* f : {"summary_LS.csv", "bias_LS.csv", "stats.csv", "stats.json", "events_LS.csv",
                        "events_bias_LS.csv", "violin.json", "failures.json"}) {
    EXPECT_TRUE(fs::exists(config.output_dir / f)) << f;
  }

  ResultStore store(config.store);
  double wy = 0, wn = 0;
  for (const auto& r : store.scores()) {
    if (r.provider != "dropper") continue;
    wy += r.y.at("wer");
    wn += r.n.at("wer");
  }
  EXPECT_GT(wy, wn);

  const auto again = run_experiment(config);
  EXPECT_EQ(again.transcribe.requests, 0u);
  EXPECT_EQ(again.transcribe.cached, 64u);
  EXPECT_EQ(again.score.rows, 32u);
  EXPECT_EQ(again.score.appended, 0u);
  EXPECT_EQ(again.report, run.report);
}

TEST(Experiment, BlankTranscriptsAreRetainedAsScores) {
  testutil::TempDir dir;
  make_pair(dir.path(), 8);
  auto j = base_config();
  j["providers"] = json::parse(R"([{"name": "silent", "behavior": "blank"}])");
  const auto config = experiment_config_from_json(j, dir.path());
  const auto run = run_experiment(config);
  EXPECT_EQ(run.transcribe.failures, 0u);
  ResultStore store(config.store);
  ASSERT_EQ(store.scores().size(), 8u);
  for (const auto& r : store.scores()) {
    EXPECT_EQ(r.y.at("wer"), 1.0);
    EXPECT_EQ(r.n.at("wer"), 1.0);
  }
  EXPECT_TRUE(store.failures().empty());
}

TEST(Experiment, CacheKeyReuseAcrossCorpusNames) {
  testutil::TempDir dir;
  make_pair(dir.path(), 6);
  auto j = base_config();
  j["providers"] = json::parse(R"([{"name": "echo", "behavior": "echo"}])");
  auto config = experiment_config_from_json(j, dir.path());
  ResultStore store(config.store);
  EXPECT_EQ(transcribe_all(config, store).requests, 12u);
  config.corpora[0].name = "LS2";
  const auto s = transcribe_all(config, store);
  EXPECT_EQ(s.requests, 0u);
  EXPECT_EQ(s.cached, 12u);
  EXPECT_TRUE(store.find("LS2", "echo", Condition::Y, store.transcriptions()[0].utterance_id));
}

TEST(Experiment, SemanticScoresViaSidecarEmbeddings) {
  testutil::TempDir dir;
  make_pair(dir.path(), 6);
  auto j = base_config();
  j["metrics"] = {"wer", "semantic"};
  j["embeddings_dir"] = "emb";
  j["sidecar"] = {{"command", {PYTHON3_EXECUTABLE, std::string(TEST_DATA_DIR) + "/fake_sidecar.py"}}};
  const auto config = experiment_config_from_json(j, dir.path());
  run_experiment(config);
  ResultStore store(config.store);
  ASSERT_EQ(store.scores().size(), 12u);
  for (const auto& r : store.scores()) {
    ASSERT_TRUE(r.y.contains("semantic_f"));
    if (r.provider == "echo") {
      EXPECT_NEAR(r.y.at("semantic_f"), 1.0, 1e-9);
    }
    EXPECT_LE(r.y.at("semantic_f"), 1.0 + 1e-9);
  }
  EXPECT_FALSE(fs::is_empty(dir / "emb"));
}

TEST(Experiment, SimilarityAuditLayout) {
  testutil::TempDir dir;
  make_pair(dir.path(), 8);
  auto j = base_config();
  j["similarity"] = {{"synthetic", "LS/Y/manifest.jsonl"}, {"stuttered", "LS/Y/manifest.jsonl"},
                     {"fluent", "LS/N/manifest.jsonl"}};
  const auto config = experiment_config_from_json(j, dir.path());
  const std::string csv = similarity_audit(config);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "event,LS-Y_mu,LS-Y_sigma,LS-N_mu,LS-N_sigma");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);
  EXPECT_TRUE(run_experiment(config).report.contains("similarity.csv"));
}
