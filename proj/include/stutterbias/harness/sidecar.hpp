#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace stutterbias::harness {

// Command prefix; the job path is appended as the final argument.
struct SidecarConfig {
  std::vector<std::string> command;
  double timeout_s = 3600.0;
  nlohmann::json models = nlohmann::json::object();
  std::string device = "cpu";
};

SidecarConfig sidecar_config_from_json(const nlohmann::json& j);

// Job kinds: tts, align, embed, asr.
//
//   tts    input: JSONL of {id, text, speaker_id}
//          output: one WAV per request, manifest.jsonl rows {id, audio}
//   align  input: manifest; output: <id>.json per utterance, manifest.jsonl rows {id, alignment}
//   embed  input: JSONL of {key, text}; output: <key>.json EmbeddingSequence files
//   asr    input: manifest; output: transcripts.jsonl rows {id, text}
//
// Every job writes result.json {"counts": {...}, "failures": [{"id", "error"}]}.
struct SidecarJob {
  std::string kind;
  std::filesystem::path input;
  std::filesystem::path output_dir;
  nlohmann::json models = nlohmann::json::object();
  std::string device = "cpu";
};

nlohmann::json job_to_json(const SidecarJob& job);

struct SidecarFailure {
  std::string id;
  std::string error;
};

struct SidecarResult {
  nlohmann::json counts = nlohmann::json::object();
  std::vector<SidecarFailure> failures;
};

// True when a command is configured and its executable can be found.
bool sidecar_available(const SidecarConfig& config);

// Writes <output_dir>/job.json, runs `command... job.json`, and reads
// <output_dir>/result.json. Throws on spawn failure, timeout, non-zero exit,
// or a missing or malformed result.
SidecarResult run_sidecar(const SidecarConfig& config, const SidecarJob& job);

// Reads a JSONL file of objects; blank lines are skipped.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

}  // namespace stutterbias::harness
