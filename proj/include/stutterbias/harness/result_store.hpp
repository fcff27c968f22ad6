#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "stutterbias/corpus.hpp"

namespace stutterbias::harness {

struct TranscriptionRecord {
  std::string corpus;
  std::string provider;
  Condition condition = Condition::N;
  std::string utterance_id;
  std::string hypothesis_raw;
  std::string hypothesis_normalized;
  std::string request_time;  // UTC, ISO 8601
  std::string cache_key;
  int attempts = 1;
};

struct FailureRecord {
  std::string corpus;
  std::string provider;
  Condition condition = Condition::N;
  std::string utterance_id;
  std::string cache_key;
  std::string error;
  int attempts = 0;
  std::string request_time;
};

// Metric values of one utterance under both conditions.
struct ScoreRow {
  std::string corpus;
  std::string provider;
  std::string utterance_id;
  std::map<std::string, double> y;  // metric name -> value
  std::map<std::string, double> n;

  bool operator==(const ScoreRow&) const = default;
};

nlohmann::json to_json(const TranscriptionRecord& r);
nlohmann::json to_json(const FailureRecord& r);
nlohmann::json to_json(const ScoreRow& r);

std::string utc_timestamp();

// Append-only JSONL log. Each line is an object tagged with "record":
// "transcription", "failure" or "score". Every append is flushed before the
// call returns; a torn final line left by a crash is ignored on load. Later
// records supersede earlier ones with the same key.
class ResultStore {
 public:
  explicit ResultStore(std::filesystem::path path);

  const std::filesystem::path& path() const { return path_; }

  std::optional<TranscriptionRecord> find_by_cache_key(const std::string& cache_key) const;
  std::optional<TranscriptionRecord> find(const std::string& corpus, const std::string& provider,
                                          Condition condition, const std::string& utterance_id) const;

  void append(const TranscriptionRecord& r);
  void append(const FailureRecord& r);
  void append(const ScoreRow& r);

  // Current views, sorted by (corpus, provider, condition, id).
  std::vector<TranscriptionRecord> transcriptions() const;
  // Failures without a later success for the same cache key.
  std::vector<FailureRecord> failures() const;
  // Sorted by (corpus, provider, id).
  std::vector<ScoreRow> scores() const;

  bool empty() const;

  // Rewrites the log with only current records, via a temporary file renamed
  // over the original.
  void compact();

 private:
  using Key = std::tuple<std::string, std::string, int, std::string>;
  using ScoreKey = std::tuple<std::string, std::string, std::string>;

  void ingest(const nlohmann::json& j);
  void write_line(const nlohmann::json& j);

  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<Key, TranscriptionRecord> records_;
  std::map<std::string, Key> key_by_cache_key_;
  std::map<Key, FailureRecord> failures_;
  std::map<ScoreKey, ScoreRow> scores_;
};

}  // namespace stutterbias::harness
