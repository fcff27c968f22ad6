#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "stutterbias/corpus.hpp"

namespace stutterbias::fixture {

// A synthetic condition-N corpus whose "words" are harmonic tones separated
// by silence, so alignments are exact by construction.
struct FixtureOptions {
  std::string corpus_name = "fixture";
  std::size_t utterances = 16;
  std::size_t min_words = 5;
  std::size_t max_words = 12;
  std::uint64_t seed = 1;
  int sample_rate = kStandardSampleRate;
};

// Tone for one token: fundamental 120-420 Hz and length 0.20-0.45 s, both
// fixed by the token's hash.
AudioBuffer tone_word(std::string_view token, int sample_rate = kStandardSampleRate);

// Writes audio/<id>.wav, align/<id>.json and manifest.jsonl under dir and
// returns the loaded manifest.
Manifest make_tone_corpus(const std::filesystem::path& dir, const FixtureOptions& options);

}  // namespace stutterbias::fixture
