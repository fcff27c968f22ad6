#include "stutterbias/fixture.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "stutterbias/error.hpp"
#include "stutterbias/random.hpp"
#include "stutterbias/textnorm.hpp"

namespace stutterbias::fixture {

namespace {

constexpr std::array<std::string_view, 40> kVocabulary = {
    "the",    "quick",  "brown",  "fox",    "jumps", "over",   "lazy",   "dog",
    "how",    "are",    "you",    "today",  "we",    "went",   "to",     "market",
    "she",    "said",   "that",   "it",     "was",   "very",   "cold",   "outside",
    "please", "call",   "stella", "ask",    "her",   "bring",  "these",  "things",
    "with",   "from",   "store",  "snow",   "peas",  "slabs",  "blue",   "cheese",
};

constexpr double kEdgeSilence = 0.10;
constexpr double kRamp = 0.010;

}  // namespace

AudioBuffer tone_word(std::string_view token, int sample_rate) {
  const std::uint64_t h = fnv1a64(token);
  const double f0 = 120.0 + static_cast<double>(h % 301);
  const double length = 0.20 + 0.01 * static_cast<double>((h >> 16) % 26);
  const auto n = static_cast<std::size_t>(std::lround(length * sample_rate));
  const auto ramp = static_cast<std::size_t>(std::lround(kRamp * sample_rate));
  AudioBuffer out;
  out.sample_rate = sample_rate;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    double v = 0.0;
    double amp = 0.25;
    for (int k = 1; k <= 3; ++k, amp *= 0.5) v += amp * std::sin(2.0 * std::numbers::pi * k * f0 * t);
    double env = 1.0;
    if (i < ramp) env = static_cast<double>(i) / ramp;
    if (n - 1 - i < ramp) env = std::min(env, static_cast<double>(n - 1 - i) / ramp);
    out.samples[i] = static_cast<float>(v * env);
  }
  return out;
}

Manifest make_tone_corpus(const std::filesystem::path& dir, const FixtureOptions& options) {
  if (options.utterances == 0) throw Error("fixture needs at least one utterance");
  if (options.min_words == 0 || options.min_words > options.max_words) {
    throw Error("fixture word range is invalid");
  }
  RandomSource rng(options.seed);
  Manifest m;
  m.corpus_name = options.corpus_name;
  m.condition = Condition::N;
  m.provenance = {{"fixture", "tone-words"}, {"seed", options.seed}};
  const int sr = options.sample_rate;
  const auto silence = [&](double s) { return static_cast<std::size_t>(std::lround(s * sr)); };

  for (std::size_t u = 0; u < options.utterances; ++u) {
    const auto words = static_cast<std::size_t>(rng.uniform_int(
        static_cast<std::int64_t>(options.min_words), static_cast<std::int64_t>(options.max_words)));
    std::vector<std::string> tokens;
    while (tokens.size() < words) {
      std::string w(kVocabulary[rng.uniform_index(kVocabulary.size())]);
      if (!tokens.empty() && tokens.back() == w) continue;
      tokens.push_back(std::move(w));
    }

    AudioBuffer audio;
    audio.sample_rate = sr;
    audio.samples.assign(silence(kEdgeSilence), 0.0f);
    WordAlignment alignment;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i > 0) audio.samples.resize(audio.samples.size() + silence(rng.uniform_real(0.05, 0.12)), 0.0f);
      const auto tone = tone_word(tokens[i], sr);
      const double start = static_cast<double>(audio.samples.size()) / sr;
      audio.samples.insert(audio.samples.end(), tone.samples.begin(), tone.samples.end());
      alignment.push_back({tokens[i], start, static_cast<double>(audio.samples.size()) / sr});
    }
    audio.samples.resize(audio.samples.size() + silence(kEdgeSilence), 0.0f);

    Utterance utt;
    utt.id = fmt::format("{}-{:04d}", options.corpus_name, u);
    utt.audio_path = fmt::format("audio/{}.wav", utt.id);
    utt.alignment_path = fmt::format("align/{}.json", utt.id);
    std::string text = textnorm::join(tokens);
    text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
    utt.reference = text + ".";
    utt.duration_s = audio.duration();
    write_audio(audio, dir / utt.audio_path);
    save_alignment(alignment, dir / *utt.alignment_path);
    m.utterances.push_back(std::move(utt));
  }
  save_manifest(m, dir / "manifest.jsonl");
  return load_manifest(dir / "manifest.jsonl");
}

}  // namespace stutterbias::fixture
