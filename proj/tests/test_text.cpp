#include <gtest/gtest.h>

#include "stutterbias/disfluency_text.hpp"
#include "stutterbias/error.hpp"

using namespace stutterbias;

namespace {

TokenSequence seq(std::string_view s) { return TokenSequence::from_text(s); }

DisfluencyPlan plan(DisfluencyType t, std::vector<PlanEvent> events) { return {"u", t, std::move(events), 0}; }

}  // namespace

TEST(TokenSequence, FromText) {
  EXPECT_EQ(seq("  how are   you ").tokens(), (std::vector<std::string>{"how", "are", "you"}));
  EXPECT_EQ(seq("how are you").text(), "how are you");
  EXPECT_TRUE(seq("").empty());
  EXPECT_THROW(TokenSequence({"a b"}), Error);
  EXPECT_THROW(TokenSequence({""}), Error);
}

TEST(TextDisfluency, WordRepetition) {
  const auto p = plan(DisfluencyType::WordRepetitionText, {{0, 1, 2, 0, 0, ""}, {2, 1, 1, 0, 0, ""}});
  EXPECT_EQ(insert_word_repetition(seq("how are you"), p).text(), "how how how are you you");
}

TEST(TextDisfluency, PhraseRepetitionBeforeOriginal) {
  const auto p = plan(DisfluencyType::PhraseRepetitionText, {{1, 2, 1, 0, 0, ""}});
  EXPECT_EQ(insert_phrase_repetition(seq("how are you"), p).text(), "how are you are you");
  const auto p3 = plan(DisfluencyType::PhraseRepetitionText, {{0, 2, 3, 0, 0, ""}});
  EXPECT_EQ(insert_phrase_repetition(seq("i want it"), p3).text(), "i want i want i want i want it");
}

TEST(TextDisfluency, InterjectionSites) {
  const auto p = plan(DisfluencyType::Interjection, {{0, 0, 1, 0, 0, "um"}, {2, 0, 2, 0, 0, "uh"}, {3, 0, 1, 0, 0, "um"}});
  EXPECT_EQ(insert_interjections(seq("how are you"), p).text(), "um how are uh uh you um");
}

TEST(TextDisfluency, LengthGrowthMatchesPlan) {
  RandomSource rng(17);
  const auto base = seq("the quick brown fox jumps over the lazy dog today");
  for (int i = 0; i < 1000; ++i) {
    for (auto t : {DisfluencyType::WordRepetitionText, DisfluencyType::PhraseRepetitionText, DisfluencyType::Interjection}) {
      const auto p = sample_plan("u", base.size(), t, rng);
      std::size_t extra = 0;
      for (const auto& e : p.events) extra += static_cast<std::size_t>(e.repeats) * std::max<std::size_t>(e.length, 1);
      ASSERT_EQ(apply_text_disfluency(base, p).size(), base.size() + extra);
    }
  }
}

TEST(TextDisfluency, AudioOnlyTypesLeaveWordsAlone) {
  const auto p = plan(DisfluencyType::Prolongation, {{1, 1, 0, 0, 10.0, ""}});
  EXPECT_EQ(apply_text_disfluency(seq("how are you"), p), seq("how are you"));
}

TEST(TextDisfluency, RejectsPlansThatDoNotFit) {
  const auto p = plan(DisfluencyType::WordRepetitionText, {{5, 1, 1, 0, 0, ""}});
  EXPECT_THROW(insert_word_repetition(seq("how are you"), p), Error);
}

TEST(TtsRequest, Rendering) {
  const auto r = render_tts_request(seq("how how are you"), "u1", "spk");
  EXPECT_EQ(r.text, "How how are you.");
  EXPECT_EQ(r.utterance_id, "u1");
  EXPECT_EQ(tts_request_to_json(r).at("speaker_id"), "spk");
}
