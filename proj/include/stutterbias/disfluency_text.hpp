#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stutterbias/disfluency_plan.hpp"

namespace stutterbias {

// Ordered text tokens; no token is empty or contains whitespace.
class TokenSequence {
 public:
  TokenSequence() = default;
  explicit TokenSequence(std::vector<std::string> tokens);

  // Whitespace split of already-normalized text.
  static TokenSequence from_text(std::string_view text);

  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }
  std::string text() const;

  bool operator==(const TokenSequence&) const = default;

 private:
  std::vector<std::string> tokens_;
};

struct TTSRequest {
  std::string utterance_id;
  std::string text;
  std::string speaker_id;

  bool operator==(const TTSRequest&) const = default;
};

nlohmann::json tts_request_to_json(const TTSRequest& r);

// Each targeted token with k extra copies becomes k + 1 consecutive copies.
// Accepts text and audio word-repetition plans.
TokenSequence insert_word_repetition(const TokenSequence& tokens, const DisfluencyPlan& plan);

// The phrase p is emitted r extra times directly before its original
// occurrence: "how are you" with p = "are you", r = 1 reads "how are you are you".
TokenSequence insert_phrase_repetition(const TokenSequence& tokens, const DisfluencyPlan& plan);

// Insertion point i places fillers between tokens i-1 and i (0 = before the
// first token, size() = after the last).
TokenSequence insert_interjections(const TokenSequence& tokens, const DisfluencyPlan& plan);

// Dispatches on plan type. Block and prolongation plans do not change the
// word sequence and return the input unchanged.
TokenSequence apply_text_disfluency(const TokenSequence& tokens, const DisfluencyPlan& plan);

// Space-joined tokens, first letter capitalized, terminated with a period.
TTSRequest render_tts_request(const TokenSequence& tokens, std::string_view utterance_id,
                              std::string_view speaker_id);

}  // namespace stutterbias
