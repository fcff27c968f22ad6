#include "stutterbias/harness/synthesis.hpp"

#include <map>
#include <optional>

#include <fmt/format.h>

#include "stutterbias/disfluency_text.hpp"
#include "stutterbias/error.hpp"
#include "stutterbias/parallel.hpp"
#include "stutterbias/textnorm.hpp"

namespace stutterbias::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Job {
  const Utterance* source = nullptr;
  DisfluencyPlan plan;
  std::string verbatim;
  std::optional<InjectionReceipt> receipt;
  double duration_s = 0.0;
  std::string error;  // non-empty: skipped
};

void write_jsonl(const fs::path& path, const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump() + "\n";
  write_file(path, out);
}

}  // namespace

GenerationResult generate_synthetic_corpus(const Manifest& source, const GenerationOptions& options,
                                           const fs::path& out_dir) {
  if (source.condition != Condition::N) {
    throw Error(fmt::format("source corpus {} must be condition N", source.corpus_name));
  }
  if (options.name.empty()) throw Error("generated corpus needs a name");
  const fs::path y_dir = out_dir / "Y";
  const fs::path n_dir = out_dir / "N";

  RandomSource partition_rng(options.seed);
  const auto assignment = partition_dataset(source, options.types, options.fraction, partition_rng);

  auto skip_or_throw = [&](Job& job, std::string reason) {
    if (options.strict) throw Error(fmt::format("{}: {}", job.source->id, reason));
    job.error = std::move(reason);
  };

  std::vector<Job> jobs;
  for (const auto& [id, type] : assignment) {
    Job job;
    job.source = source.find(id);
    const auto tokens = textnorm::tokenize(textnorm::normalize(job.source->reference));
    RandomSource rng(plan_seed(options.seed, id));
    try {
      job.plan = sample_plan(id, tokens.size(), type, rng);
      job.verbatim = apply_text_disfluency(TokenSequence(tokens), job.plan).text();
    } catch (const Error& e) {
      skip_or_throw(job, e.what());
    }
    jobs.push_back(std::move(job));
  }

  const bool sidecar_ok = sidecar_available(options.sidecar);
  std::vector<std::size_t> audio_jobs;
  std::vector<std::size_t> text_jobs;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!jobs[i].error.empty()) continue;
    if (is_text_type(jobs[i].plan.type)) {
      if (sidecar_ok) {
        text_jobs.push_back(i);
      } else {
        skip_or_throw(jobs[i], fmt::format("{} needs the TTS sidecar, which is not available",
                                           to_string(jobs[i].plan.type)));
      }
    } else {
      audio_jobs.push_back(i);
    }
  }

  parallel_for(audio_jobs.size(), options.parallelism, [&](std::size_t k) {
    Job& job = jobs[audio_jobs[k]];
    const Utterance& u = *job.source;
    const auto alignment = load_utterance_alignment(source, u);
    if (!alignment) throw Error(fmt::format("{}: audio-type events need an alignment", u.id));
    if (const auto v = validate_alignment(u, *alignment); !v.empty()) {
      throw Error(fmt::format("{}: invalid alignment: {}", u.id, v.front().message));
    }
    const auto result = apply_audio_disfluency(read_audio(source.resolve(u.audio_path)), *alignment,
                                               job.plan);
    write_audio(result.audio, y_dir / "audio" / (u.id + ".wav"));
    job.receipt = result.receipt;
    job.duration_s = result.audio.duration();
  });

  if (!text_jobs.empty()) {
    std::vector<json> requests;
    for (std::size_t i : text_jobs) {
      requests.push_back(tts_request_to_json(render_tts_request(
          TokenSequence::from_text(jobs[i].verbatim), jobs[i].source->id, options.speaker_id)));
    }
    write_jsonl(y_dir / "tts_requests.jsonl", requests);
    const fs::path tts_dir = y_dir / "tts";
    const auto result = run_sidecar(options.sidecar, {"tts", y_dir / "tts_requests.jsonl", tts_dir,
                                                      options.sidecar.models, options.sidecar.device});
    std::map<std::string, std::string> failures;
    for (const auto& f : result.failures) failures[f.id] = f.error;
    std::map<std::string, std::string> produced;
    const fs::path fragment = tts_dir / "manifest.jsonl";
    if (fs::exists(fragment)) {
      for (const auto& row : read_jsonl(fragment)) {
        produced[row.at("id").get<std::string>()] = row.at("audio").get<std::string>();
      }
    }
    for (std::size_t i : text_jobs) {
      Job& job = jobs[i];
      const std::string& id = job.source->id;
      const auto it = produced.find(id);
      if (it == produced.end()) {
        const auto f = failures.find(id);
        skip_or_throw(job, f != failures.end() ? "TTS failed: " + f->second : "TTS produced no audio");
        continue;
      }
      AudioBuffer audio;
      try {
        audio = read_audio(tts_dir / it->second);
      } catch (const Error& e) {
        skip_or_throw(job, fmt::format("TTS output unreadable: {}", e.what()));
        continue;
      }
      if (audio.sample_rate != kStandardSampleRate || audio.samples.empty()) {
        skip_or_throw(job, "TTS output is not non-empty 16 kHz audio");
        continue;
      }
      write_audio(audio, y_dir / "audio" / (id + ".wav"));
      job.duration_s = audio.duration();
    }
  }

  GenerationResult out;
  out.y.corpus_name = options.name + "-Y";
  out.y.condition = Condition::Y;
  out.y.seed = options.seed;
  out.n.corpus_name = options.name + "-N";
  out.n.condition = Condition::N;

  json plans = json::object();
  json type_names = json::array();
  for (auto t : options.types) type_names.push_back(to_string(t));
  std::vector<json> receipts;
  json skipped = json::array();
  for (const Job& job : jobs) {
    const Utterance& src = *job.source;
    if (!job.error.empty()) {
      fmt::print(stderr, "warning: skipping {}: {}\n", src.id, job.error);
      out.skipped.push_back(fmt::format("{}: {}", src.id, job.error));
      skipped.push_back({{"id", src.id}, {"reason", job.error}});
      continue;
    }
    const json plan_json = plan_to_json(job.plan);
    plans[src.id] = plan_json;
    write_file(y_dir / "plans" / (src.id + ".json"), plan_json.dump(2) + "\n");
    if (job.receipt) {
      receipts.push_back(receipt_to_json(*job.receipt));
      out.receipts.push_back(*job.receipt);
    }

    Utterance y;
    y.id = src.id;
    y.audio_path = "audio/" + src.id + ".wav";
    y.reference = src.reference;
    y.verbatim = job.verbatim;
    y.duration_s = job.duration_s;
    out.y.utterances.push_back(std::move(y));

    Utterance n = src;
    n.audio_path = "audio/" + src.id + ".wav";
    write_file(n_dir / n.audio_path, read_file(source.resolve(src.audio_path)));
    if (src.alignment_path) {
      n.alignment_path = "align/" + src.id + ".json";
      write_file(n_dir / *n.alignment_path, read_file(source.resolve(*src.alignment_path)));
    }
    out.n.utterances.push_back(std::move(n));
  }

  out.y.provenance = {{"synthetic", true},
                      {"source", source.corpus_name},
                      {"fraction", options.fraction},
                      {"types", type_names},
                      {"speaker_id", options.speaker_id},
                      {"plans", plans},
                      {"receipts", "receipts.jsonl"},
                      {"skipped", skipped}};
  out.n.provenance = {{"source", source.corpus_name}, {"paired_with", out.y.corpus_name}};
  if (out.y.utterances.empty()) throw Error("no utterance could be generated");

  write_jsonl(y_dir / "receipts.jsonl", receipts);
  out.y_manifest = y_dir / "manifest.jsonl";
  out.n_manifest = n_dir / "manifest.jsonl";
  save_manifest(out.y, out.y_manifest);
  save_manifest(out.n, out.n_manifest);
  out.y.base_dir = y_dir;
  out.n.base_dir = n_dir;
  return out;
}

}  // namespace stutterbias::harness
