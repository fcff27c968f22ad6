#include <gtest/gtest.h>

#include <cmath>

#include "stutterbias/corpus.hpp"
#include "stutterbias/error.hpp"
#include "test_util.hpp"

using namespace stutterbias;

namespace {

Manifest sample_manifest() {
  Manifest m;
  m.corpus_name = "demo";
  m.condition = Condition::N;
  m.provenance = {{"source", "unit"}};
  m.utterances.push_back({"u1", "a.wav", "How are you?", std::nullopt, "a.json", 0.5});
  m.utterances.push_back({"u2", "b.wav", "Fine thanks.", std::string("fine fine thanks"), std::nullopt, 1.25});
  return m;
}

}  // namespace

TEST(Manifest, RoundTrip) {
  testutil::TempDir dir;
  const Manifest m = sample_manifest();
  save_manifest(m, dir / "m.jsonl");
  const Manifest back = load_manifest(dir / "m.jsonl");
  EXPECT_EQ(back, m);
  EXPECT_EQ(back.base_dir, dir.path());
  EXPECT_EQ(back.resolve("a.wav"), dir / "a.wav");
  ASSERT_NE(back.find("u2"), nullptr);
  EXPECT_EQ(*back.find("u2")->verbatim, "fine fine thanks");
  EXPECT_EQ(back.find("zz"), nullptr);
}

TEST(Manifest, SaveIsByteStable) {
  testutil::TempDir dir;
  save_manifest(sample_manifest(), dir / "a.jsonl");
  save_manifest(load_manifest(dir / "a.jsonl"), dir / "b.jsonl");
  EXPECT_EQ(read_file(dir / "a.jsonl"), read_file(dir / "b.jsonl"));
}

TEST(Manifest, RejectsBadRows) {
  testutil::TempDir dir;
  const std::string header = R"({"corpus_name":"x","condition":"N","seed":null,"provenance":{}})";
  auto expect_error = [&](const std::string& body) {
    write_file(dir / "m.jsonl", header + "\n" + body + "\n");
    EXPECT_THROW(load_manifest(dir / "m.jsonl"), Error) << body;
  };
  expect_error(R"({"id":"a","audio":"a.wav","duration_s":1})");
  expect_error(R"({"id":"a","audio":"a.wav","reference":"","duration_s":1})");
  expect_error(R"({"id":"a","audio":"a.wav","reference":"x"})");
  expect_error(R"({"id":"a","audio":"a.wav","reference":"x","duration_s":-1})");
  expect_error(R"({"id":"a","audio":"a.wav","reference":"x","duration_s":1}
{"id":"a","audio":"b.wav","reference":"y","duration_s":1})");
  expect_error("not json");
  write_file(dir / "m.jsonl", "");
  EXPECT_THROW(load_manifest(dir / "m.jsonl"), Error);
}

TEST(Manifest, SyntheticYNeedsSeed) {
  testutil::TempDir dir;
  Manifest m = sample_manifest();
  m.condition = Condition::Y;
  m.provenance = {{"synthetic", true}};
  save_manifest(m, dir / "m.jsonl");
  EXPECT_THROW(load_manifest(dir / "m.jsonl"), Error);
  m.seed = 3;
  save_manifest(m, dir / "m.jsonl");
  EXPECT_EQ(load_manifest(dir / "m.jsonl").seed, 3u);
}

TEST(Condition, Parse) {
  EXPECT_EQ(parse_condition("Y"), Condition::Y);
  EXPECT_EQ(parse_condition("N"), Condition::N);
  EXPECT_THROW(parse_condition("y?"), Error);
  EXPECT_EQ(to_string(Condition::Y), "Y");
}

TEST(Wav, EncodeDecodeRoundTripWithinQuantization) {
  AudioBuffer a;
  for (int i = 0; i < 1600; ++i) a.samples.push_back(0.9f * std::sin(0.01f * i));
  const AudioBuffer b = decode_wav(encode_wav(a));
  ASSERT_EQ(b.samples.size(), a.samples.size());
  EXPECT_EQ(b.sample_rate, 16000);
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_NEAR(a.samples[i], b.samples[i], 1.0 / 32768);
  EXPECT_EQ(encode_wav(b), encode_wav(decode_wav(encode_wav(b))));
}

TEST(Wav, FileRoundTripAndProbe) {
  testutil::TempDir dir;
  AudioBuffer a;
  a.samples.assign(800, 0.25f);
  write_audio(a, dir / "x.wav");
  const WavInfo info = probe_wav(dir / "x.wav");
  EXPECT_EQ(info.sample_rate, 16000);
  EXPECT_EQ(info.frames, 800u);
  EXPECT_EQ(read_audio(dir / "x.wav"), a);
}

TEST(Wav, RejectsMalformed) {
  EXPECT_THROW(decode_wav("RIFF"), Error);
  EXPECT_THROW(decode_wav(std::string(44, '\0')), Error);
  AudioBuffer a;
  a.samples.assign(10, 0.0f);
  std::string bytes = encode_wav(a);
  EXPECT_THROW(decode_wav(bytes.substr(0, bytes.size() - 3)), Error);
  std::string stereo = bytes;
  stereo[22] = 2;
  EXPECT_THROW(decode_wav(stereo), Error);
}

TEST(AudioBuffer, Validate) {
  AudioBuffer a;
  a.samples = {0.0f, 1.0f, -1.0f};
  EXPECT_NO_THROW(a.validate());
  a.samples.push_back(1.5f);
  EXPECT_THROW(a.validate(), Error);
  a.samples.pop_back();
  a.sample_rate = 0;
  EXPECT_THROW(a.validate(), Error);
}

TEST(Alignment, RoundTripAndValidation) {
  testutil::TempDir dir;
  const WordAlignment a{{"how", 0.0, 0.2}, {"are", 0.25, 0.4}, {"you", 0.4, 0.5}};
  save_alignment(a, dir / "a.json");
  EXPECT_EQ(load_alignment(dir / "a.json"), a);

  Utterance u{"u", "a.wav", "How are you?", std::nullopt, std::nullopt, 0.5};
  EXPECT_TRUE(validate_alignment(u, a).empty());

  using Kind = AlignmentViolation::Kind;
  auto kinds = [&](const WordAlignment& w) {
    std::vector<Kind> k;
    for (const auto& v : validate_alignment(u, w)) k.push_back(v.kind);
    return k;
  };
  EXPECT_EQ(kinds({{"how", 0.0, 0.2}, {"are", 0.1, 0.3}, {"you", 0.4, 0.5}}), std::vector{Kind::NonMonotone});
  EXPECT_EQ(kinds({{"how", 0.2, 0.2}, {"are", 0.25, 0.4}, {"you", 0.4, 0.5}}), std::vector{Kind::InvalidSpan});
  EXPECT_EQ(kinds({{"how", 0.0, 0.2}, {"are", 0.25, 0.4}, {"you", 0.4, 0.6}}), std::vector{Kind::ExceedsDuration});
  EXPECT_EQ(kinds({{"how", 0.0, 0.2}, {"are", 0.25, 0.4}}), std::vector{Kind::TokenCountMismatch});
  EXPECT_EQ(kinds({{"how", 0.0, 0.2}, {"is", 0.25, 0.4}, {"you", 0.4, 0.5}}), std::vector{Kind::TokenMismatch});
}

TEST(Manifest, ValidateFilesReportsDurationMismatch) {
  testutil::TempDir dir;
  AudioBuffer a;
  a.samples.assign(8000, 0.0f);
  write_audio(a, dir / "a.wav");
  Manifest m;
  m.corpus_name = "x";
  m.utterances.push_back({"u1", "a.wav", "x", std::nullopt, std::nullopt, 0.5});
  m.utterances.push_back({"u2", "missing.wav", "x", std::nullopt, std::nullopt, 0.5});
  save_manifest(m, dir / "m.jsonl");
  m = load_manifest(dir / "m.jsonl");
  EXPECT_EQ(validate_manifest_files(m).size(), 1u);
  m.utterances[0].duration_s = 0.6;
  EXPECT_EQ(validate_manifest_files(m).size(), 2u);
}
