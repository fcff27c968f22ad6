#include "stutterbias/disfluency_plan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "stutterbias/error.hpp"

namespace stutterbias {

using nlohmann::json;

namespace {

struct TypeInfo {
  DisfluencyType type;
  std::string_view id;
  std::string_view label;
};

constexpr std::array<TypeInfo, 8> kTypes = {{
    {DisfluencyType::WordRepetitionText, "word_repetition_text", "Txt-WR"},
    {DisfluencyType::PhraseRepetitionText, "phrase_repetition_text", "Txt-PR"},
    {DisfluencyType::Interjection, "interjection", "Interject."},
    {DisfluencyType::WordRepetitionAudio, "word_repetition_audio", "Aud-WR"},
    {DisfluencyType::PhraseRepetitionAudio, "phrase_repetition_audio", "Aud-PR"},
    {DisfluencyType::Prolongation, "prolongation", "Prolong."},
    {DisfluencyType::InterwordBlock, "interword_block", "InterWB"},
    {DisfluencyType::IntrawordBlock, "intraword_block", "IntraWB"},
}};

const TypeInfo& info(DisfluencyType t) {
  return kTypes[static_cast<std::size_t>(t)];
}

// Picks `count` distinct values from [0, slots), returned sorted.
std::vector<std::size_t> pick_distinct(std::size_t slots, std::size_t count, RandomSource& rng) {
  std::vector<std::size_t> pool(slots);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.uniform_index(slots - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::size_t draw_count(int lo, int hi, std::size_t slots, RandomSource& rng) {
  const auto upper = std::min<std::int64_t>(hi, static_cast<std::int64_t>(slots));
  return static_cast<std::size_t>(rng.uniform_int(lo, upper));
}

void require_tokens(DisfluencyType type, std::size_t available) {
  const std::size_t need = min_tokens_for(type);
  if (available < need) {
    throw Error(fmt::format("utterance too short for {}: requires at least {} tokens, has {}",
                            to_string(type), need, available));
  }
}

bool in_range(int v, int lo, int hi) { return v >= lo && v <= hi; }
bool in_range(double v, double lo, double hi) { return v >= lo && v <= hi; }

}  // namespace

std::string_view to_string(DisfluencyType t) { return info(t).id; }
std::string_view report_label(DisfluencyType t) { return info(t).label; }

DisfluencyType parse_disfluency_type(std::string_view s) {
  for (const auto& ti : kTypes) {
    if (ti.id == s || ti.label == s) return ti.type;
  }
  throw Error(fmt::format("unknown disfluency type '{}'", s));
}

bool is_text_type(DisfluencyType t) {
  return t == DisfluencyType::WordRepetitionText || t == DisfluencyType::PhraseRepetitionText ||
         t == DisfluencyType::Interjection;
}

std::size_t min_tokens_for(DisfluencyType type) {
  switch (type) {
    case DisfluencyType::PhraseRepetitionText:
    case DisfluencyType::PhraseRepetitionAudio:
      return ranges::kPhraseLenMin;
    case DisfluencyType::InterwordBlock:
      return 2;  // the pause has to sit between two words
    default:
      return 1;
  }
}

json plan_to_json(const DisfluencyPlan& plan) {
  json events = json::array();
  for (const auto& e : plan.events) {
    json je{{"index", e.index}};
    switch (plan.type) {
      case DisfluencyType::WordRepetitionText:
      case DisfluencyType::WordRepetitionAudio:
        je["repeats"] = e.repeats;
        break;
      case DisfluencyType::PhraseRepetitionText:
      case DisfluencyType::PhraseRepetitionAudio:
        je["length"] = e.length;
        je["repeats"] = e.repeats;
        break;
      case DisfluencyType::Interjection:
        je["filler"] = e.filler;
        je["repeats"] = e.repeats;
        break;
      case DisfluencyType::InterwordBlock:
      case DisfluencyType::IntrawordBlock:
        je["pause_s"] = e.pause_s;
        break;
      case DisfluencyType::Prolongation:
        je["stretch"] = e.stretch;
        break;
    }
    events.push_back(std::move(je));
  }
  return {{"utterance_id", plan.utterance_id},
          {"type", std::string(to_string(plan.type))},
          {"seed", plan.seed},
          {"events", std::move(events)}};
}

DisfluencyPlan plan_from_json(const json& j) {
  DisfluencyPlan p;
  try {
    p.utterance_id = j.at("utterance_id").get<std::string>();
    p.type = parse_disfluency_type(j.at("type").get<std::string>());
    p.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& je : j.at("events")) {
      PlanEvent e;
      e.index = je.at("index").get<std::size_t>();
      e.length = p.type == DisfluencyType::Interjection ? 0 : je.value("length", std::size_t{1});
      e.repeats = je.value("repeats", 0);
      e.pause_s = je.value("pause_s", 0.0);
      e.stretch = je.value("stretch", 0.0);
      e.filler = je.value("filler", std::string());
      p.events.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(fmt::format("malformed plan: {}", e.what()));
  }
  return p;
}

void validate_plan(const DisfluencyPlan& plan, std::size_t n) {
  using namespace ranges;
  auto fail = [&](const std::string& what) {
    throw Error(fmt::format("invalid {} plan for '{}': {}", to_string(plan.type), plan.utterance_id,
                            what));
  };
  const auto count = static_cast<int>(plan.events.size());
  switch (plan.type) {
    case DisfluencyType::WordRepetitionText:
    case DisfluencyType::WordRepetitionAudio:
      if (!in_range(count, kWordRepTargetsMin, kWordRepTargetsMax)) fail("target count out of range");
      break;
    case DisfluencyType::PhraseRepetitionText:
    case DisfluencyType::PhraseRepetitionAudio:
      if (count != 1) fail("exactly one phrase expected");
      break;
    case DisfluencyType::Interjection:
      if (!in_range(count, kInterjectionSitesMin, kInterjectionSitesMax)) fail("site count out of range");
      break;
    case DisfluencyType::InterwordBlock:
      if (!in_range(count, kInterwordTargetsMin, kInterwordTargetsMax)) fail("target count out of range");
      break;
    case DisfluencyType::IntrawordBlock:
      if (!in_range(count, kIntrawordTargetsMin, kIntrawordTargetsMax)) fail("target count out of range");
      break;
    case DisfluencyType::Prolongation:
      if (!in_range(count, kProlongTargetsMin, kProlongTargetsMax)) fail("target count out of range");
      break;
  }

  std::size_t covered_end = 0;
  for (std::size_t k = 0; k < plan.events.size(); ++k) {
    const auto& e = plan.events[k];
    if (k > 0 && e.index <= plan.events[k - 1].index) fail("indices not strictly increasing");
    if (plan.type == DisfluencyType::Interjection) {
      if (e.index > n) fail(fmt::format("insertion point {} out of bounds [0, {}]", e.index, n));
      if (e.filler != "uh" && e.filler != "um") fail("filler must be 'uh' or 'um'");
      if (!in_range(e.repeats, kInterjectionCopiesMin, kInterjectionCopiesMax)) fail("repeat count out of range");
      continue;
    }
    if (e.length == 0 || e.index + e.length > n) {
      fail(fmt::format("span [{}, {}) out of bounds for {} tokens", e.index, e.index + e.length, n));
    }
    if (k > 0 && e.index < covered_end) fail("overlapping spans");
    covered_end = e.index + e.length;
    switch (plan.type) {
      case DisfluencyType::WordRepetitionText:
      case DisfluencyType::WordRepetitionAudio:
        if (e.length != 1) fail("word repetition spans one word");
        if (!in_range(e.repeats, kWordRepCopiesMin, kWordRepCopiesMax)) fail("repeat count out of range");
        break;
      case DisfluencyType::PhraseRepetitionText:
      case DisfluencyType::PhraseRepetitionAudio:
        if (!in_range(static_cast<int>(e.length), kPhraseLenMin, kPhraseLenMax)) fail("phrase length out of range");
        if (!in_range(e.repeats, kPhraseCopiesMin, kPhraseCopiesMax)) fail("repeat count out of range");
        break;
      case DisfluencyType::InterwordBlock:
        if (e.index + 1 >= n) fail("interword pause must precede another word");
        [[fallthrough]];
      case DisfluencyType::IntrawordBlock:
        if (!in_range(e.pause_s, kPauseMin, kPauseMax)) fail("pause duration out of range");
        break;
      case DisfluencyType::Prolongation:
        if (!in_range(e.stretch, kStretchMin, kStretchMax)) fail("stretch factor out of range");
        break;
      case DisfluencyType::Interjection:
        break;
    }
  }
}

DisfluencyPlan sample_plan(std::string_view utterance_id, std::size_t n, DisfluencyType type,
                           RandomSource& rng) {
  using namespace ranges;
  require_tokens(type, n);
  DisfluencyPlan plan;
  plan.utterance_id = std::string(utterance_id);
  plan.type = type;
  plan.seed = rng.seed();

  auto word_events = [&](int lo, int hi, std::size_t slots) {
    const std::size_t count = draw_count(lo, hi, slots, rng);
    for (std::size_t idx : pick_distinct(slots, count, rng)) {
      PlanEvent e;
      e.index = idx;
      plan.events.push_back(e);
    }
  };

  switch (type) {
    case DisfluencyType::WordRepetitionText:
    case DisfluencyType::WordRepetitionAudio:
      word_events(kWordRepTargetsMin, kWordRepTargetsMax, n);
      for (auto& e : plan.events) e.repeats = static_cast<int>(rng.uniform_int(kWordRepCopiesMin, kWordRepCopiesMax));
      break;
    case DisfluencyType::PhraseRepetitionText:
    case DisfluencyType::PhraseRepetitionAudio: {
      PlanEvent e;
      e.length = draw_count(kPhraseLenMin, kPhraseLenMax, n, rng);
      e.index = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n - e.length)));
      e.repeats = static_cast<int>(rng.uniform_int(kPhraseCopiesMin, kPhraseCopiesMax));
      plan.events.push_back(e);
      break;
    }
    case DisfluencyType::Interjection:
      word_events(kInterjectionSitesMin, kInterjectionSitesMax, n + 1);
      for (auto& e : plan.events) {
        e.length = 0;
        e.filler = rng.uniform_index(2) == 0 ? "uh" : "um";
        e.repeats = static_cast<int>(rng.uniform_int(kInterjectionCopiesMin, kInterjectionCopiesMax));
      }
      break;
    case DisfluencyType::InterwordBlock:
      word_events(kInterwordTargetsMin, kInterwordTargetsMax, n - 1);
      for (auto& e : plan.events) e.pause_s = rng.uniform_real(kPauseMin, kPauseMax);
      break;
    case DisfluencyType::IntrawordBlock:
      word_events(kIntrawordTargetsMin, kIntrawordTargetsMax, n);
      for (auto& e : plan.events) e.pause_s = rng.uniform_real(kPauseMin, kPauseMax);
      break;
    case DisfluencyType::Prolongation:
      word_events(kProlongTargetsMin, kProlongTargetsMax, n);
      for (auto& e : plan.events) e.stretch = rng.uniform_real(kStretchMin, kStretchMax);
      break;
  }
  return plan;
}

std::map<std::string, DisfluencyType> partition_dataset(const Manifest& manifest,
                                                        const std::vector<DisfluencyType>& types,
                                                        double fraction, RandomSource& rng) {
  const std::size_t n = manifest.utterances.size();
  if (n == 0) throw Error("cannot partition an empty manifest");
  if (types.empty()) throw Error("no disfluency types requested");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(fmt::format("fraction {} out of range (0, 1]", fraction));
  }
  // The epsilon absorbs binary rounding, e.g. 0.1 * 90 = 9.000000000000002.
  const auto selected = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  if (selected < types.size()) {
    throw Error(fmt::format("fraction selects {} utterances, fewer than the {} requested types",
                            selected, types.size()));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.uniform_index(i + 1)]);
  }
  std::map<std::string, DisfluencyType> out;
  for (std::size_t k = 0; k < selected; ++k) {
    out.emplace(manifest.utterances[order[k]].id, types[k % types.size()]);
  }
  return out;
}

}  // namespace stutterbias
