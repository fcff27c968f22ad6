#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "stutterbias/corpus.hpp"
#include "stutterbias/disfluency_plan.hpp"

namespace stutterbias {

inline constexpr double kSilenceRampSeconds = 0.005;
inline constexpr double kSpliceCrossfadeSeconds = 0.005;
inline constexpr double kLoopCrossfadeSeconds = 0.010;
inline constexpr double kProlongSegmentFraction = 0.25;
inline constexpr double kProlongSegmentMaxSeconds = 0.080;
inline constexpr double kProlongMinWordSeconds = 0.020;

// Sample range of a word or phrase in the input audio.
struct SpliceRegion {
  std::size_t start = 0;  // first sample
  std::size_t end = 0;    // one past the last sample
  std::size_t token_index = 0;
};

struct AppliedEvent {
  std::size_t index = 0;
  std::size_t cut_sample = 0;          // blocks: insertion point in the input
  std::size_t inserted_samples = 0;
  std::size_t nominal_samples = 0;     // requested growth: pause, (stretch - 1) * segment, copies * span
  double pause_s = 0.0;                // blocks: rounded to whole samples
  double stretch = 0.0;               // prolongation: requested factor
  double segment_s = 0.0;             // prolongation: stretched segment length
  int copies = 0;                      // repetitions
  double crossfade_s = 0.0;
  bool skipped = false;
  std::string note;
};

struct InjectionReceipt {
  std::string utterance_id;
  DisfluencyType type = DisfluencyType::InterwordBlock;
  double inserted_duration_s = 0.0;
  std::size_t inserted_samples = 0;
  std::size_t nominal_samples = 0;
  std::vector<AppliedEvent> events;
};

nlohmann::json receipt_to_json(const InjectionReceipt& r);

struct InjectionResult {
  AudioBuffer audio;
  InjectionReceipt receipt;
};

// Digital silence at each targeted word's end, with 5 ms raised-cosine fades
// on both sides of the cut.
InjectionResult insert_interword_block(const AudioBuffer& audio, const WordAlignment& alignment,
                                       const DisfluencyPlan& plan);

// Same as the interword block, cut at the word's temporal midpoint.
InjectionResult insert_intraword_block(const AudioBuffer& audio, const WordAlignment& alignment,
                                       const DisfluencyPlan& plan);

// Loops the word-initial segment (the first min(25 %, 80 ms) of the word)
// until it is `stretch` times its original length, joining loops with 10 ms
// equal-power crossfades. The last loop is shortened so the stretched segment
// ends exactly where the original did. Words shorter than 20 ms are skipped.
InjectionResult apply_prolongation(const AudioBuffer& audio, const WordAlignment& alignment,
                                   const DisfluencyPlan& plan);

// Inserts k copies of the word's aligned span before the original, joined
// with 5 ms equal-power crossfades. Each copy is extended by the crossfade
// length into the following audio, so the output grows by exactly k * span
// unless the span ends within 5 ms of the clip end.
InjectionResult splice_word_repetition(const AudioBuffer& audio, const WordAlignment& alignment,
                                       const DisfluencyPlan& plan);

// Inserts r copies of the span from the phrase's first word start to its
// last word end before the original.
InjectionResult splice_phrase_repetition(const AudioBuffer& audio, const WordAlignment& alignment,
                                         const DisfluencyPlan& plan);

// Dispatches on plan type; throws for text-only types.
InjectionResult apply_audio_disfluency(const AudioBuffer& audio, const WordAlignment& alignment,
                                       const DisfluencyPlan& plan);

// Stretches `segment` to exactly `target` samples by crossfaded looping.
// Exposed for unit tests.
std::vector<float> loop_stretch(const std::vector<float>& segment, std::size_t target,
                                std::size_t crossfade);

}  // namespace stutterbias
