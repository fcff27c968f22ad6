#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stutterbias/corpus.hpp"
#include "stutterbias/random.hpp"

namespace stutterbias {

enum class DisfluencyType {
  WordRepetitionText,
  PhraseRepetitionText,
  Interjection,
  WordRepetitionAudio,
  PhraseRepetitionAudio,
  Prolongation,
  InterwordBlock,
  IntrawordBlock,
};

// Column order used by every per-event report.
inline constexpr std::array<DisfluencyType, 8> kReportTypeOrder = {
    DisfluencyType::WordRepetitionAudio, DisfluencyType::PhraseRepetitionAudio,
    DisfluencyType::Prolongation,        DisfluencyType::InterwordBlock,
    DisfluencyType::IntrawordBlock,      DisfluencyType::Interjection,
    DisfluencyType::WordRepetitionText,  DisfluencyType::PhraseRepetitionText,
};

inline constexpr std::array<DisfluencyType, 5> kAudioTypes = {
    DisfluencyType::WordRepetitionAudio, DisfluencyType::PhraseRepetitionAudio,
    DisfluencyType::Prolongation, DisfluencyType::InterwordBlock, DisfluencyType::IntrawordBlock};

// Stable identifier, e.g. "interword_block".
std::string_view to_string(DisfluencyType t);
// Short column label, e.g. "InterWB".
std::string_view report_label(DisfluencyType t);
DisfluencyType parse_disfluency_type(std::string_view s);

// True for types realized by rewriting the transcript and synthesizing speech.
bool is_text_type(DisfluencyType t);

// Sampling ranges, all inclusive.
namespace ranges {
inline constexpr int kWordRepTargetsMin = 1, kWordRepTargetsMax = 3;
inline constexpr int kWordRepCopiesMin = 1, kWordRepCopiesMax = 4;
inline constexpr int kPhraseLenMin = 2, kPhraseLenMax = 4;
inline constexpr int kPhraseCopiesMin = 1, kPhraseCopiesMax = 3;
inline constexpr int kInterjectionSitesMin = 1, kInterjectionSitesMax = 4;
inline constexpr int kInterjectionCopiesMin = 1, kInterjectionCopiesMax = 4;
inline constexpr int kInterwordTargetsMin = 1, kInterwordTargetsMax = 4;
inline constexpr int kIntrawordTargetsMin = 1, kIntrawordTargetsMax = 3;
inline constexpr int kProlongTargetsMin = 1, kProlongTargetsMax = 3;
inline constexpr double kPauseMin = 1.0, kPauseMax = 3.0;
inline constexpr double kStretchMin = 5.0, kStretchMax = 25.0;
}  // namespace ranges

// One resolved event. Which fields are meaningful depends on the plan type:
//
//   word repetition     index = word, repeats = extra copies
//   phrase repetition   index = first word, length = words, repeats = extra copies
//   interjection        index = insertion point in [0, n], length = 0,
//                       filler = "uh"/"um", repeats = consecutive fillers
//   inter/intraword     index = word, pause_s
//   prolongation        index = word, stretch
struct PlanEvent {
  std::size_t index = 0;
  std::size_t length = 1;
  int repeats = 0;
  double pause_s = 0.0;
  double stretch = 0.0;
  std::string filler;

  bool operator==(const PlanEvent&) const = default;
};

struct DisfluencyPlan {
  std::string utterance_id;
  DisfluencyType type = DisfluencyType::WordRepetitionText;
  std::vector<PlanEvent> events;  // sorted by index
  std::uint64_t seed = 0;

  bool operator==(const DisfluencyPlan&) const = default;
};

nlohmann::json plan_to_json(const DisfluencyPlan& plan);
DisfluencyPlan plan_from_json(const nlohmann::json& j);

// Throws Error when a parameter leaves its range, indices are not strictly
// increasing, or spans overlap or exceed token_count.
void validate_plan(const DisfluencyPlan& plan, std::size_t token_count);

// Draws a plan for an utterance with token_count alignment tokens.
//
// Draw order: the type's count (targets, sites, or phrase length), then the
// locations (distinct, by partial Fisher-Yates over the candidate slots,
// then sorted), then per-event magnitudes in location order. For
// interjections the magnitude is the filler (uh/um) followed by its repeat
// count.
//
// Count upper bounds are clamped to the number of candidate slots, so a
// 3-token utterance can still host a phrase repetition of length 2 or 3. If
// even the minimum does not fit, an Error names the required and available
// token counts.
DisfluencyPlan sample_plan(std::string_view utterance_id, std::size_t token_count,
                           DisfluencyType type, RandomSource& rng);

// Minimum number of tokens an utterance needs to host the type.
std::size_t min_tokens_for(DisfluencyType type);

// Selects floor(fraction * N) utterances without replacement (a full
// Fisher-Yates shuffle of manifest order; the first M are taken) and assigns
// the k-th selected utterance to types[k % types.size()].
std::map<std::string, DisfluencyType> partition_dataset(const Manifest& manifest,
                                                        const std::vector<DisfluencyType>& types,
                                                        double fraction, RandomSource& rng);

// Seed of the per-utterance planning stream.
inline std::uint64_t plan_seed(std::uint64_t seed, std::string_view utterance_id) {
  return derive_seed(seed, utterance_id);
}

}  // namespace stutterbias
