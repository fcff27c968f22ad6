#include "stutterbias/disfluency_text.hpp"

#include <cctype>

#include <fmt/format.h>

#include "stutterbias/error.hpp"
#include "stutterbias/textnorm.hpp"

namespace stutterbias {

TokenSequence::TokenSequence(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (const auto& t : tokens_) {
    if (t.empty()) throw Error("empty token");
    if (t.find_first_of(" \t\r\n\f\v") != std::string::npos) {
      throw Error(fmt::format("token '{}' contains whitespace", t));
    }
  }
}

TokenSequence TokenSequence::from_text(std::string_view text) {
  return TokenSequence(textnorm::tokenize(text));
}

std::string TokenSequence::text() const { return textnorm::join(tokens_); }

nlohmann::json tts_request_to_json(const TTSRequest& r) {
  return {{"id", r.utterance_id}, {"text", r.text}, {"speaker_id", r.speaker_id}};
}

namespace {

void require_type(const DisfluencyPlan& plan, std::initializer_list<DisfluencyType> allowed,
                  std::string_view op) {
  for (auto t : allowed) {
    if (plan.type == t) return;
  }
  throw Error(fmt::format("{} cannot apply a {} plan", op, to_string(plan.type)));
}

}  // namespace

TokenSequence insert_word_repetition(const TokenSequence& tokens, const DisfluencyPlan& plan) {
  require_type(plan, {DisfluencyType::WordRepetitionText, DisfluencyType::WordRepetitionAudio},
               "insert_word_repetition");
  std::vector<std::string> out;
  std::size_t next = 0;
  for (const auto& e : plan.events) {
    if (e.index >= tokens.size()) {
      throw Error(fmt::format("word index {} out of bounds for {} tokens", e.index, tokens.size()));
    }
    if (e.index < next) throw Error("word repetition targets must be strictly increasing");
    if (e.repeats < 1) throw Error(fmt::format("repeat count {} must be at least 1", e.repeats));
    for (; next < e.index; ++next) out.push_back(tokens[next]);
    for (int k = 0; k < e.repeats; ++k) out.push_back(tokens[e.index]);
  }
  for (; next < tokens.size(); ++next) out.push_back(tokens[next]);
  return TokenSequence(std::move(out));
}

TokenSequence insert_phrase_repetition(const TokenSequence& tokens, const DisfluencyPlan& plan) {
  require_type(plan, {DisfluencyType::PhraseRepetitionText, DisfluencyType::PhraseRepetitionAudio},
               "insert_phrase_repetition");
  std::vector<std::string> out;
  std::size_t next = 0;
  for (const auto& e : plan.events) {
    if (e.length == 0 || e.index + e.length > tokens.size() || e.index < next) {
      throw Error(fmt::format("phrase span [{}, {}) out of bounds for {} tokens", e.index,
                              e.index + e.length, tokens.size()));
    }
    if (e.repeats < 1) throw Error(fmt::format("repeat count {} must be at least 1", e.repeats));
    for (; next < e.index; ++next) out.push_back(tokens[next]);
    for (int k = 0; k < e.repeats; ++k) {
      for (std::size_t w = e.index; w < e.index + e.length; ++w) out.push_back(tokens[w]);
    }
  }
  for (; next < tokens.size(); ++next) out.push_back(tokens[next]);
  return TokenSequence(std::move(out));
}

TokenSequence insert_interjections(const TokenSequence& tokens, const DisfluencyPlan& plan) {
  require_type(plan, {DisfluencyType::Interjection}, "insert_interjections");
  std::vector<std::string> out;
  std::size_t next = 0;
  for (const auto& e : plan.events) {
    if (e.index > tokens.size()) {
      throw Error(fmt::format("insertion point {} out of bounds [0, {}]", e.index, tokens.size()));
    }
    if (e.index < next) throw Error("insertion points must be increasing");
    if (e.filler.empty()) throw Error("interjection without filler");
    for (; next < e.index; ++next) out.push_back(tokens[next]);
    for (int k = 0; k < e.repeats; ++k) out.push_back(e.filler);
  }
  for (; next < tokens.size(); ++next) out.push_back(tokens[next]);
  return TokenSequence(std::move(out));
}

TokenSequence apply_text_disfluency(const TokenSequence& tokens, const DisfluencyPlan& plan) {
  switch (plan.type) {
    case DisfluencyType::WordRepetitionText:
    case DisfluencyType::WordRepetitionAudio:
      return insert_word_repetition(tokens, plan);
    case DisfluencyType::PhraseRepetitionText:
    case DisfluencyType::PhraseRepetitionAudio:
      return insert_phrase_repetition(tokens, plan);
    case DisfluencyType::Interjection:
      return insert_interjections(tokens, plan);
    default:
      return tokens;
  }
}

TTSRequest render_tts_request(const TokenSequence& tokens, std::string_view utterance_id,
                              std::string_view speaker_id) {
  if (tokens.empty()) throw Error("cannot render an empty token sequence");
  if (speaker_id.empty()) throw Error("speaker id must be non-empty");
  std::string text = tokens.text();
  text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  text.push_back('.');
  return {std::string(utterance_id), std::move(text), std::string(speaker_id)};
}

}  // namespace stutterbias
