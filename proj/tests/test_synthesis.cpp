#include <gtest/gtest.h>

#include <map>

#include "stutterbias/error.hpp"
#include "stutterbias/fixture.hpp"
#include "stutterbias/harness/sidecar.hpp"
#include "stutterbias/harness/synthesis.hpp"
#include "stutterbias/textnorm.hpp"
#include "test_util.hpp"

using namespace stutterbias;
using namespace stutterbias::harness;
namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file(e.path());
  }
  return out;
}

SidecarConfig fake_sidecar() {
  SidecarConfig sc;
  sc.command = {PYTHON3_EXECUTABLE, std::string(TEST_DATA_DIR) + "/fake_sidecar.py"};
  return sc;
}

GenerationOptions audio_only(std::uint64_t seed) {
  GenerationOptions o;
  o.types.assign(kAudioTypes.begin(), kAudioTypes.end());
  o.fraction = 1.0;
  o.seed = seed;
  return o;
}

}  // namespace

TEST(Fixture, ToneCorpusIsConsistent) {
  testutil::TempDir dir;
  const Manifest m = fixture::make_tone_corpus(dir.path(), {});
  EXPECT_EQ(m.utterances.size(), 16u);
  EXPECT_TRUE(validate_manifest_files(m).empty());
  for (const auto& u : m.utterances) {
    const auto a = load_utterance_alignment(m, u);
    ASSERT_TRUE(a);
    EXPECT_TRUE(validate_alignment(u, *a).empty()) << u.id;
    const auto n = textnorm::tokenize(textnorm::normalize(u.reference)).size();
    EXPECT_GE(n, 5u);
    EXPECT_LE(n, 12u);
  }
  testutil::TempDir again;
  fixture::make_tone_corpus(again.path(), {});
  EXPECT_EQ(tree(dir.path()), tree(again.path()));
}

TEST(Generate, BitIdenticalAcrossRuns) {
  testutil::TempDir src, a, b;
  const Manifest m = fixture::make_tone_corpus(src.path(), {});
  auto first = generate_synthetic_corpus(m, audio_only(21), a.path());
  auto o = audio_only(21);
  o.parallelism = 4;
  generate_synthetic_corpus(m, o, b.path());
  EXPECT_EQ(tree(a.path()), tree(b.path()));
  testutil::TempDir c;
  generate_synthetic_corpus(m, audio_only(22), c.path());
  EXPECT_NE(tree(a.path()), tree(c.path()));
  EXPECT_EQ(first.receipts.size(), 16u);
}

TEST(Generate, ReferencesMatchSourceAndN) {
  testutil::TempDir src, out;
  const Manifest m = fixture::make_tone_corpus(src.path(), {});
  const auto r = generate_synthetic_corpus(m, audio_only(3), out.path());
  const Manifest y = load_manifest(r.y_manifest), n = load_manifest(r.n_manifest);
  EXPECT_EQ(y.condition, Condition::Y);
  EXPECT_EQ(n.condition, Condition::N);
  EXPECT_EQ(y.corpus_name, "LS-Y");
  EXPECT_EQ(n.corpus_name, "LS-N");
  EXPECT_EQ(y.seed, 3u);
  ASSERT_EQ(y.utterances.size(), n.utterances.size());
  for (std::size_t i = 0; i < y.utterances.size(); ++i) {
    EXPECT_EQ(y.utterances[i].id, n.utterances[i].id);
    EXPECT_EQ(y.utterances[i].reference, n.utterances[i].reference);
    EXPECT_EQ(y.utterances[i].reference, m.find(y.utterances[i].id)->reference);
    EXPECT_GT(y.utterances[i].duration_s, n.utterances[i].duration_s);
  }
  EXPECT_TRUE(validate_manifest_files(y).empty());
  EXPECT_TRUE(validate_manifest_files(n).empty());
  EXPECT_EQ(read_audio(n.resolve(n.utterances[0].audio_path)),
            read_audio(m.resolve(m.find(n.utterances[0].id)->audio_path)));
}

TEST(Generate, ProvenanceRecordsPlansAndTypes) {
  testutil::TempDir src, out;
  const Manifest m = fixture::make_tone_corpus(src.path(), {});
  const auto r = generate_synthetic_corpus(m, audio_only(3), out.path());
  const auto& plans = r.y.provenance.at("plans");
  EXPECT_EQ(plans.size(), 16u);
  std::map<std::string, int> types;
  for (const auto& [id, p] : plans.items()) {
    ++types[p.at("type").get<std::string>()];
    EXPECT_TRUE(fs::exists(out / ("Y/plans/" + id + ".json")));
  }
  EXPECT_EQ(types.size(), 5u);
  EXPECT_TRUE(fs::exists(out / "Y/receipts.jsonl"));
  EXPECT_EQ(read_jsonl(out / "Y/receipts.jsonl").size(), 16u);
  EXPECT_EQ(r.n.provenance.at("paired_with"), "LS-Y");
}

TEST(Generate, TextTypesSkippedWithoutSidecar) {
  testutil::TempDir src, out;
  const Manifest m = fixture::make_tone_corpus(src.path(), {});
  GenerationOptions o;
  o.fraction = 1.0;
  o.seed = 5;
  const auto r = generate_synthetic_corpus(m, o, out.path());
  EXPECT_EQ(r.skipped.size(), 6u);  // 16 round-robin over 8 types: 2 per text type
  EXPECT_EQ(r.y.utterances.size(), 10u);
  EXPECT_EQ(r.n.utterances.size(), 10u);
  o.strict = true;
  testutil::TempDir out2;
  EXPECT_THROW(generate_synthetic_corpus(m, o, out2.path()), Error);
}

TEST(Generate, TextTypesThroughSidecar) {
  testutil::TempDir src, out;
  const Manifest m = fixture::make_tone_corpus(src.path(), {});
  GenerationOptions o;
  o.fraction = 1.0;
  o.seed = 5;
  o.sidecar = fake_sidecar();
  const auto r = generate_synthetic_corpus(m, o, out.path());
  EXPECT_TRUE(r.skipped.empty());
  EXPECT_EQ(r.y.utterances.size(), 16u);
  const auto requests = read_jsonl(out / "Y/tts_requests.jsonl");
  EXPECT_EQ(requests.size(), 6u);
  for (const auto& req : requests) {
    const Utterance* u = r.y.find(req.at("id").get<std::string>());
    ASSERT_NE(u, nullptr);
    ASSERT_TRUE(u->verbatim);
    EXPECT_GT(textnorm::tokenize(*u->verbatim).size(), textnorm::tokenize(textnorm::normalize(u->reference)).size());
    EXPECT_EQ(req.at("speaker_id"), "default");
  }
  EXPECT_TRUE(validate_manifest_files(load_manifest(r.y_manifest)).empty());
}

TEST(Generate, AudioTypesRequireAlignments) {
  testutil::TempDir src, out;
  Manifest m = fixture::make_tone_corpus(src.path(), {});
  for (auto& u : m.utterances) u.alignment_path.reset();
  EXPECT_THROW(generate_synthetic_corpus(m, audio_only(1), out.path()), Error);
  m.condition = Condition::Y;
  EXPECT_THROW(generate_synthetic_corpus(m, audio_only(1), out.path()), Error);
}
