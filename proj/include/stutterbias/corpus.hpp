#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace stutterbias {

inline constexpr int kStandardSampleRate = 16000;

// Mono waveform with samples normalized to [-1, 1].
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = kStandardSampleRate;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  // Throws Error when the rate is not positive or a sample is out of range.
  void validate() const;

  bool operator==(const AudioBuffer&) const = default;
};

struct AlignedWord {
  std::string token;
  double start_s = 0.0;
  double end_s = 0.0;

  bool operator==(const AlignedWord&) const = default;
};

using WordAlignment = std::vector<AlignedWord>;

enum class Condition { Y, N };

std::string_view to_string(Condition c);
Condition parse_condition(std::string_view s);

struct Utterance {
  std::string id;
  std::string audio_path;       // as written in the manifest, relative to it
  std::string reference;        // intended, disfluency-free text
  std::optional<std::string> verbatim;
  std::optional<std::string> alignment_path;
  double duration_s = 0.0;

  bool operator==(const Utterance&) const = default;
};

struct Manifest {
  std::string corpus_name;
  Condition condition = Condition::N;
  std::optional<std::uint64_t> seed;
  nlohmann::json provenance = nlohmann::json::object();
  std::vector<Utterance> utterances;

  // Directory the manifest was loaded from; relative paths resolve against it.
  // Not serialized and not part of equality.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& relative) const;
  const Utterance* find(std::string_view id) const;

  bool operator==(const Manifest& other) const {
    return corpus_name == other.corpus_name && condition == other.condition &&
           seed == other.seed && provenance == other.provenance &&
           utterances == other.utterances;
  }
};

// JSON Lines manifest: a header object followed by one utterance per line.
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

// Checks everything that needs the filesystem: audio files exist, are
// readable 16-bit mono WAV, and match duration_s within one sample.
// Returns one message per problem.
std::vector<std::string> validate_manifest_files(const Manifest& manifest);

// 16-bit PCM mono RIFF/WAVE.
AudioBuffer read_audio(const std::filesystem::path& path);
AudioBuffer decode_wav(std::string_view bytes);
void write_audio(const AudioBuffer& buffer, const std::filesystem::path& path);
std::string encode_wav(const AudioBuffer& buffer);

struct WavInfo {
  int sample_rate = 0;
  std::size_t frames = 0;
};
WavInfo probe_wav(const std::filesystem::path& path);

WordAlignment load_alignment(const std::filesystem::path& path);
void save_alignment(const WordAlignment& alignment, const std::filesystem::path& path);
WordAlignment alignment_from_json(const nlohmann::json& j);
nlohmann::json alignment_to_json(const WordAlignment& alignment);

struct AlignmentViolation {
  enum class Kind { InvalidSpan, NonMonotone, ExceedsDuration, TokenCountMismatch, TokenMismatch };
  Kind kind;
  std::string message;
};

// Empty result means the alignment is consistent with the utterance.
std::vector<AlignmentViolation> validate_alignment(const Utterance& utterance,
                                                   const WordAlignment& alignment);

// Loads the utterance's alignment file, resolved against the manifest.
std::optional<WordAlignment> load_utterance_alignment(const Manifest& manifest,
                                                      const Utterance& utterance);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace stutterbias
