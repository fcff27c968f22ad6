#include "stutterbias/disfluency_audio.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>

#include <fmt/format.h>

#include "stutterbias/error.hpp"

namespace stutterbias {

using nlohmann::json;

json receipt_to_json(const InjectionReceipt& r) {
  json events = json::array();
  for (const auto& e : r.events) {
    json j{{"index", e.index},
           {"inserted_samples", e.inserted_samples},
           {"nominal_samples", e.nominal_samples}};
    switch (r.type) {
      case DisfluencyType::InterwordBlock:
      case DisfluencyType::IntrawordBlock:
        j["cut_sample"] = e.cut_sample;
        j["pause_s"] = e.pause_s;
        j["ramp_s"] = kSilenceRampSeconds;
        break;
      case DisfluencyType::Prolongation:
        j["stretch"] = e.stretch;
        j["segment_s"] = e.segment_s;
        j["crossfade_s"] = e.crossfade_s;
        break;
      default:
        j["copies"] = e.copies;
        j["crossfade_s"] = e.crossfade_s;
        break;
    }
    if (e.skipped) j["skipped"] = true;
    if (!e.note.empty()) j["note"] = e.note;
    events.push_back(std::move(j));
  }
  return {{"id", r.utterance_id},
          {"type", std::string(to_string(r.type))},
          {"inserted_duration_s", r.inserted_duration_s},
          {"inserted_samples", r.inserted_samples},
          {"nominal_samples", r.nominal_samples},
          {"events", std::move(events)}};
}

namespace {

std::size_t to_samples(double seconds, int rate) {
  return static_cast<std::size_t>(std::max(0L, std::lround(seconds * rate)));
}

std::size_t time_to_index(double t, const AudioBuffer& a) {
  return std::min(to_samples(t, a.sample_rate), a.samples.size());
}

float clamp_sample(double v) { return static_cast<float>(std::clamp(v, -1.0, 1.0)); }

// Overlaps the last `xf` samples of `out` with the head of `piece` using an
// equal-power (sin/cos) crossfade, then appends the rest of `piece`.
void crossfade_append(std::vector<float>& out, std::span<const float> piece, std::size_t xf) {
  xf = std::min({xf, out.size(), piece.size()});
  const std::size_t base = out.size() - xf;
  for (std::size_t i = 0; i < xf; ++i) {
    const double theta = std::numbers::pi / 2 * (static_cast<double>(i) + 0.5) / static_cast<double>(xf);
    out[base + i] = clamp_sample(out[base + i] * std::cos(theta) + piece[i] * std::sin(theta));
  }
  out.insert(out.end(), piece.begin() + static_cast<std::ptrdiff_t>(xf), piece.end());
}

void check_alignment(const WordAlignment& alignment, const DisfluencyPlan& plan) {
  if (alignment.empty()) throw Error(fmt::format("alignment missing for '{}'", plan.utterance_id));
  for (const auto& e : plan.events) {
    if (e.index + std::max<std::size_t>(e.length, 1) > alignment.size()) {
      throw Error(fmt::format("target index {} invalid for {} aligned words", e.index,
                              alignment.size()));
    }
  }
}

void require(const DisfluencyPlan& plan, std::initializer_list<DisfluencyType> allowed,
             std::string_view op) {
  if (std::find(allowed.begin(), allowed.end(), plan.type) == allowed.end()) {
    throw Error(fmt::format("{} cannot apply a {} plan", op, to_string(plan.type)));
  }
}

// Events sorted by descending index; editing later positions first keeps the
// sample positions of earlier targets valid.
std::vector<const PlanEvent*> descending(const DisfluencyPlan& plan) {
  std::vector<const PlanEvent*> ev;
  for (const auto& e : plan.events) ev.push_back(&e);
  std::sort(ev.begin(), ev.end(), [](auto* a, auto* b) { return a->index > b->index; });
  return ev;
}

void finish(InjectionResult& r, const DisfluencyPlan& plan, std::vector<AppliedEvent> applied) {
  std::reverse(applied.begin(), applied.end());
  r.receipt.utterance_id = plan.utterance_id;
  r.receipt.type = plan.type;
  for (const auto& a : applied) {
    r.receipt.inserted_samples += a.inserted_samples;
    r.receipt.nominal_samples += a.nominal_samples;
  }
  r.receipt.inserted_duration_s =
      static_cast<double>(r.receipt.inserted_samples) / r.audio.sample_rate;
  r.receipt.events = std::move(applied);
}

std::vector<float> insert_silence(const std::vector<float>& in, std::size_t cut, std::size_t length,
                                  std::size_t ramp) {
  std::vector<float> out;
  out.reserve(in.size() + length);
  out.assign(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(cut));
  const std::size_t before = std::min(ramp, cut);
  for (std::size_t i = 0; i < before; ++i) {
    // Fade-out reaches zero at the cut.
    const double x = static_cast<double>(before - i) / static_cast<double>(before + 1);
    const double g = 0.5 * (1.0 - std::cos(std::numbers::pi * x));
    out[cut - before + i] = static_cast<float>(out[cut - before + i] * g);
  }
  out.insert(out.end(), length, 0.0f);
  const std::size_t resume = out.size();
  out.insert(out.end(), in.begin() + static_cast<std::ptrdiff_t>(cut), in.end());
  const std::size_t after = std::min(ramp, in.size() - cut);
  for (std::size_t i = 0; i < after; ++i) {
    const double x = static_cast<double>(i + 1) / static_cast<double>(after + 1);
    const double g = 0.5 * (1.0 - std::cos(std::numbers::pi * x));
    out[resume + i] = static_cast<float>(out[resume + i] * g);
  }
  return out;
}

InjectionResult insert_block(const AudioBuffer& audio, const WordAlignment& alignment,
                             const DisfluencyPlan& plan, bool midpoint) {
  audio.validate();
  check_alignment(alignment, plan);
  InjectionResult r;
  r.audio = audio;
  const std::size_t ramp = to_samples(kSilenceRampSeconds, audio.sample_rate);
  std::vector<AppliedEvent> applied;
  for (const PlanEvent* e : descending(plan)) {
    const auto& w = alignment[e->index];
    const double t = midpoint ? w.start_s + (w.end_s - w.start_s) / 2 : w.end_s;
    AppliedEvent a;
    a.index = e->index;
    a.cut_sample = time_to_index(t, audio);
    a.inserted_samples = to_samples(e->pause_s, audio.sample_rate);
    a.nominal_samples = a.inserted_samples;
    a.pause_s = static_cast<double>(a.inserted_samples) / audio.sample_rate;
    r.audio.samples = insert_silence(r.audio.samples, a.cut_sample, a.inserted_samples, ramp);
    applied.push_back(a);
  }
  finish(r, plan, std::move(applied));
  return r;
}

InjectionResult splice_region(const AudioBuffer& audio, const DisfluencyPlan& plan,
                              const std::vector<std::pair<SpliceRegion, int>>& regions) {
  InjectionResult r;
  r.audio = audio;
  const std::size_t xf_nominal = to_samples(kSpliceCrossfadeSeconds, audio.sample_rate);
  std::vector<AppliedEvent> applied;
  // regions arrive in descending order
  for (const auto& [region, copies] : regions) {
    const auto& in = r.audio.samples;
    const std::size_t span = region.end - region.start;
    const std::size_t xf = std::min(xf_nominal, span / 2);
    // Each copy carries the xf samples that follow the span, so the overlap
    // of every join is paid for and the audio grows by exactly copies * span.
    const std::size_t ext = std::min(xf, in.size() - region.end);
    std::vector<float> piece(in.begin() + static_cast<std::ptrdiff_t>(region.start),
                             in.begin() + static_cast<std::ptrdiff_t>(region.end + ext));
    std::vector<float> out(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(region.start));
    out.reserve(in.size() + span * static_cast<std::size_t>(copies));
    for (int c = 0; c < copies; ++c) {
      if (c == 0) {
        out.insert(out.end(), piece.begin(), piece.end());
      } else {
        crossfade_append(out, piece, xf);
      }
    }
    const std::span<const float> tail(in.data() + region.start, in.size() - region.start);
    if (copies > 0) {
      crossfade_append(out, tail, xf);
    } else {
      out.insert(out.end(), tail.begin(), tail.end());
    }
    AppliedEvent a;
    a.index = region.token_index;
    a.copies = copies;
    a.crossfade_s = static_cast<double>(xf) / audio.sample_rate;
    a.inserted_samples = out.size() - in.size();
    a.nominal_samples = span * static_cast<std::size_t>(copies);
    r.audio.samples = std::move(out);
    applied.push_back(a);
  }
  finish(r, plan, std::move(applied));
  return r;
}

SpliceRegion region_of(const AudioBuffer& audio, const WordAlignment& alignment, std::size_t first,
                       std::size_t count) {
  SpliceRegion reg;
  reg.token_index = first;
  reg.start = time_to_index(alignment[first].start_s, audio);
  reg.end = time_to_index(alignment[first + count - 1].end_s, audio);
  if (reg.end <= reg.start) {
    throw Error(fmt::format("empty aligned span for word {}", first));
  }
  return reg;
}

}  // namespace

std::vector<float> loop_stretch(const std::vector<float>& segment, std::size_t target,
                                std::size_t crossfade) {
  const std::size_t len = segment.size();
  if (target <= len || len == 0) return segment;
  crossfade = std::min(crossfade, len / 2);
  std::vector<float> out = segment;
  out.reserve(target);
  const std::size_t step = len - crossfade;
  while (out.size() < target) {
    const std::size_t remaining = target - out.size();
    if (remaining >= step) {
      crossfade_append(out, segment, crossfade);
    } else {
      // Partial loop taken from the end of the segment, so the stretched
      // segment still ends on the original segment's last sample.
      const std::size_t from = len - remaining - crossfade;
      crossfade_append(out, std::span<const float>(segment).subspan(from), crossfade);
    }
  }
  return out;
}

InjectionResult insert_interword_block(const AudioBuffer& audio, const WordAlignment& alignment,
                                       const DisfluencyPlan& plan) {
  require(plan, {DisfluencyType::InterwordBlock}, "insert_interword_block");
  return insert_block(audio, alignment, plan, false);
}

InjectionResult insert_intraword_block(const AudioBuffer& audio, const WordAlignment& alignment,
                                       const DisfluencyPlan& plan) {
  require(plan, {DisfluencyType::IntrawordBlock}, "insert_intraword_block");
  return insert_block(audio, alignment, plan, true);
}

InjectionResult apply_prolongation(const AudioBuffer& audio, const WordAlignment& alignment,
                                   const DisfluencyPlan& plan) {
  require(plan, {DisfluencyType::Prolongation}, "apply_prolongation");
  audio.validate();
  check_alignment(alignment, plan);
  InjectionResult r;
  r.audio = audio;
  const int rate = audio.sample_rate;
  const std::size_t xf_nominal = to_samples(kLoopCrossfadeSeconds, rate);
  std::vector<AppliedEvent> applied;
  for (const PlanEvent* e : descending(plan)) {
    const auto& w = alignment[e->index];
    AppliedEvent a;
    a.index = e->index;
    a.stretch = e->stretch;
    const std::size_t ws = time_to_index(w.start_s, audio);
    const std::size_t we = time_to_index(w.end_s, audio);
    const double word_s = static_cast<double>(we > ws ? we - ws : 0) / rate;
    if (word_s < kProlongMinWordSeconds) {
      a.skipped = true;
      a.note = fmt::format("word shorter than {} s", kProlongMinWordSeconds);
      applied.push_back(a);
      continue;
    }
    const std::size_t seg_len =
        to_samples(std::min(kProlongSegmentFraction * word_s, kProlongSegmentMaxSeconds), rate);
    const std::size_t target = to_samples(e->stretch * static_cast<double>(seg_len) / rate, rate);
    const std::size_t xf = std::min(xf_nominal, seg_len / 2);
    auto& s = r.audio.samples;
    const std::vector<float> seg(s.begin() + static_cast<std::ptrdiff_t>(ws),
                                 s.begin() + static_cast<std::ptrdiff_t>(ws + seg_len));
    const std::vector<float> stretched = loop_stretch(seg, target, xf);
    std::vector<float> out(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(ws));
    out.reserve(s.size() + stretched.size());
    out.insert(out.end(), stretched.begin(), stretched.end());
    out.insert(out.end(), s.begin() + static_cast<std::ptrdiff_t>(ws + seg_len), s.end());
    a.segment_s = static_cast<double>(seg_len) / rate;
    a.crossfade_s = static_cast<double>(xf) / rate;
    a.inserted_samples = out.size() - s.size();
    a.nominal_samples = static_cast<std::size_t>(
        std::lround((e->stretch - 1.0) * static_cast<double>(seg_len)));
    s = std::move(out);
    applied.push_back(a);
  }
  finish(r, plan, std::move(applied));
  return r;
}

InjectionResult splice_word_repetition(const AudioBuffer& audio, const WordAlignment& alignment,
                                       const DisfluencyPlan& plan) {
  require(plan, {DisfluencyType::WordRepetitionAudio}, "splice_word_repetition");
  audio.validate();
  check_alignment(alignment, plan);
  std::vector<std::pair<SpliceRegion, int>> regions;
  for (const PlanEvent* e : descending(plan)) {
    regions.emplace_back(region_of(audio, alignment, e->index, 1), e->repeats);
  }
  return splice_region(audio, plan, regions);
}

InjectionResult splice_phrase_repetition(const AudioBuffer& audio, const WordAlignment& alignment,
                                         const DisfluencyPlan& plan) {
  require(plan, {DisfluencyType::PhraseRepetitionAudio}, "splice_phrase_repetition");
  audio.validate();
  check_alignment(alignment, plan);
  std::vector<std::pair<SpliceRegion, int>> regions;
  for (const PlanEvent* e : descending(plan)) {
    if (e->length < 2) throw Error("phrase repetition needs at least two contiguous words");
    regions.emplace_back(region_of(audio, alignment, e->index, e->length), e->repeats);
  }
  return splice_region(audio, plan, regions);
}

InjectionResult apply_audio_disfluency(const AudioBuffer& audio, const WordAlignment& alignment,
                                       const DisfluencyPlan& plan) {
  switch (plan.type) {
    case DisfluencyType::InterwordBlock:
      return insert_interword_block(audio, alignment, plan);
    case DisfluencyType::IntrawordBlock:
      return insert_intraword_block(audio, alignment, plan);
    case DisfluencyType::Prolongation:
      return apply_prolongation(audio, alignment, plan);
    case DisfluencyType::WordRepetitionAudio:
      return splice_word_repetition(audio, alignment, plan);
    case DisfluencyType::PhraseRepetitionAudio:
      return splice_phrase_repetition(audio, alignment, plan);
    default:
      throw Error(fmt::format("{} is not an audio disfluency", to_string(plan.type)));
  }
}

}  // namespace stutterbias
