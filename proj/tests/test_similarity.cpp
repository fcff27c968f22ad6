#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stutterbias/fixture.hpp"
#include "stutterbias/harness/synthesis.hpp"
#include "stutterbias/similarity.hpp"
#include "test_util.hpp"

using namespace stutterbias;

namespace {

AudioBuffer sine(double hz, double seconds, float amp = 0.5f) {
  AudioBuffer a;
  a.samples.resize(static_cast<std::size_t>(seconds * a.sample_rate));
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    a.samples[i] = amp * static_cast<float>(std::sin(2 * std::numbers::pi * hz * static_cast<double>(i) / a.sample_rate));
  return a;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Mel, ScaleRoundTrip) {
  EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-9);
  for (double hz : {0.0, 100.0, 440.0, 4000.0, 8000.0}) EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9);
}

TEST(Mel, FilterbankShape) {
  const SpectrogramParams p;
  const auto fb = mel_filterbank(p, 16000);
  ASSERT_EQ(fb.center_hz.size(), 80u);
  EXPECT_EQ(fb.weights.rows, 80u);
  EXPECT_EQ(fb.weights.cols, 512u / 2 + 1);
  EXPECT_NEAR(fb.lower_hz.front(), 0.0, 1e-9);
  EXPECT_NEAR(fb.upper_hz.back(), 8000.0, 1e-6);
  for (std::size_t b = 1; b < 80; ++b) {
    EXPECT_GT(fb.center_hz[b], fb.center_hz[b - 1]);
    EXPECT_DOUBLE_EQ(fb.lower_hz[b], fb.center_hz[b - 1]);
  }
  for (double w : fb.weights.data) {
    EXPECT_GE(w, 0.0);
    EXPECT_LE(w, 1.0);
  }
}

TEST(Spectrogram, FrameCountAndSilenceFloor) {
  SpectrogramParams p;
  AudioBuffer silence;
  silence.samples.assign(16000, 0.0f);
  const auto m = log_mel_spectrogram(silence, p);
  EXPECT_EQ(m.rows, 98u);
  EXPECT_EQ(m.cols, 80u);
  for (double v : m.data) ASSERT_DOUBLE_EQ(v, std::log(p.log_floor));
  AudioBuffer tiny;
  tiny.samples.assign(100, 0.0f);
  EXPECT_THROW(log_mel_spectrogram(tiny, p), Error);
}

TEST(Spectrogram, SinePeaksInBandContainingItsFrequency) {
  const SpectrogramParams p;
  const auto fb = mel_filterbank(p, 16000);
  for (double hz : {440.0, 1000.0, 3000.0}) {
    const auto e = pooled_embedding(log_mel_spectrogram(sine(hz, 1.0), p));
    const std::size_t b = argmax(e);
    EXPECT_LE(fb.lower_hz[b], hz) << hz;
    EXPECT_GE(fb.upper_hz[b], hz) << hz;
  }
}

TEST(Cosine, SelfSimilarityAndBounds) {
  const SpectrogramParams p;
  const auto e = pooled_embedding(log_mel_spectrogram(sine(440, 0.5), p));
  EXPECT_NEAR(cosine(e, e), 1.0, 1e-6);
  EXPECT_NEAR(cosine({1, 0}, {0, 1}), 0.0, 1e-15);
  EXPECT_NEAR(cosine({1, 2}, {-1, -2}), -1.0, 1e-15);
  EXPECT_THROW(cosine({0, 0}, {1, 0}), Error);
  EXPECT_THROW(cosine({1}, {1, 0}), Error);
}

TEST(SpectrogramParams, ValidateAndJson) {
  SpectrogramParams p;
  EXPECT_NO_THROW(p.validate(16000));
  p.fmax_hz = 9000;
  EXPECT_THROW(p.validate(16000), Error);
  p = {};
  p.hop_s = 0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.mel_bands = 40;
  const auto back = spectrogram_params_from_json(spectrogram_params_to_json(p));
  EXPECT_EQ(back.mel_bands, 40u);
  EXPECT_EQ(p.fft_samples(16000), 512u);
}

TEST(CrossDataset, ReportLayoutFromFixtures) {
  testutil::TempDir dir;
  fixture::FixtureOptions fo;
  fo.utterances = 10;
  const Manifest src = fixture::make_tone_corpus(dir / "src", fo);
  harness::GenerationOptions go;
  go.types.assign(kAudioTypes.begin(), kAudioTypes.end());
  go.fraction = 1.0;
  go.seed = 4;
  const auto gen = harness::generate_synthetic_corpus(src, go, dir / "gen");

  fo.seed = 2;
  fo.corpus_name = "other";
  const Manifest other = fixture::make_tone_corpus(dir / "other", fo);

  const auto stuttered = cross_dataset_similarity(gen.y, gen.y, {}, 2);
  const auto fluent = cross_dataset_similarity(gen.y, other, {}, 2);
  ASSERT_EQ(stuttered.size(), 9u);
  for (std::size_t i = 0; i < kReportTypeOrder.size(); ++i) EXPECT_EQ(stuttered[i].label, report_label(kReportTypeOrder[i]));
  EXPECT_EQ(stuttered.back().label, "All");
  ASSERT_TRUE(stuttered.back().summary);
  EXPECT_EQ(stuttered.back().summary->n, 100u);
  for (std::size_t i = 5; i < 8; ++i) EXPECT_FALSE(stuttered[i].summary) << stuttered[i].label;

  const auto csv = lines(similarity_report_csv(stuttered, "FB-Y", fluent, "FB-N"));
  ASSERT_EQ(csv.size(), 10u);
  EXPECT_EQ(csv[0], "event,FB-Y_mu,FB-Y_sigma,FB-N_mu,FB-N_sigma");
  EXPECT_EQ(csv[6].substr(0, csv[6].find(',')), report_label(DisfluencyType::Interjection));
  EXPECT_EQ(csv[6].substr(csv[6].find(',')), ",,,,");
  EXPECT_EQ(csv[9].rfind("All,", 0), 0u);
  EXPECT_EQ(std::count(csv[9].begin(), csv[9].end(), ','), 4);
}

TEST(CrossDataset, DeterministicAcrossParallelism) {
  testutil::TempDir dir;
  fixture::FixtureOptions fo;
  fo.utterances = 6;
  const Manifest a = fixture::make_tone_corpus(dir / "a", fo);
  const auto one = cross_dataset_similarity(a, a, {}, 1);
  const auto four = cross_dataset_similarity(a, a, {}, 4);
  ASSERT_EQ(one.size(), four.size());
  EXPECT_EQ(one.back().summary->mean, four.back().summary->mean);
  EXPECT_EQ(one.back().summary->sd, four.back().summary->sd);
}
