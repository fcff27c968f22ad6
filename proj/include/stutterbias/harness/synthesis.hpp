#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stutterbias/corpus.hpp"
#include "stutterbias/disfluency_audio.hpp"
#include "stutterbias/disfluency_plan.hpp"
#include "stutterbias/harness/sidecar.hpp"

namespace stutterbias::harness {

struct GenerationOptions {
  std::string name = "LS";  // output corpora are <name>-Y and <name>-N
  std::vector<DisfluencyType> types{kReportTypeOrder.begin(), kReportTypeOrder.end()};
  double fraction = 0.1;
  std::uint64_t seed = 0;
  bool strict = false;
  std::string speaker_id = "default";
  SidecarConfig sidecar;  // no command: text-type events cannot be synthesized
  std::size_t parallelism = 1;
};

struct GenerationResult {
  Manifest y;
  Manifest n;
  std::vector<InjectionReceipt> receipts;  // audio-type utterances, by id
  std::vector<std::string> skipped;        // "<id>: <reason>", by id
  std::filesystem::path y_manifest;
  std::filesystem::path n_manifest;
};

// Writes under out_dir:
//
//   Y/manifest.jsonl       condition Y, references copied from the source
//   Y/audio/<id>.wav
//   Y/plans/<id>.json
//   Y/receipts.jsonl       one InjectionReceipt per audio-type utterance
//   Y/tts_requests.jsonl   text-type utterances (when any)
//   N/manifest.jsonl       the same ids, source audio and alignments copied
//   N/audio/<id>.wav, N/align/<id>.json
//
// Utterances that cannot host their assigned type, or text-type utterances
// without a sidecar in lenient mode, are skipped from both manifests with a
// warning; strict mode throws instead.
GenerationResult generate_synthetic_corpus(const Manifest& source, const GenerationOptions& options,
                                           const std::filesystem::path& out_dir);

}  // namespace stutterbias::harness
