#include "stutterbias/harness/result_store.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "stutterbias/error.hpp"

namespace stutterbias::harness {

using nlohmann::json;
namespace fs = std::filesystem;

json to_json(const TranscriptionRecord& r) {
  return {{"record", "transcription"},
          {"corpus", r.corpus},
          {"provider", r.provider},
          {"condition", to_string(r.condition)},
          {"id", r.utterance_id},
          {"hypothesis_raw", r.hypothesis_raw},
          {"hypothesis_normalized", r.hypothesis_normalized},
          {"request_time", r.request_time},
          {"cache_key", r.cache_key},
          {"attempts", r.attempts}};
}

json to_json(const FailureRecord& r) {
  return {{"record", "failure"},       {"corpus", r.corpus},
          {"provider", r.provider},    {"condition", to_string(r.condition)},
          {"id", r.utterance_id},      {"cache_key", r.cache_key},
          {"error", r.error},          {"attempts", r.attempts},
          {"request_time", r.request_time}};
}

json to_json(const ScoreRow& r) {
  return {{"record", "score"}, {"corpus", r.corpus}, {"provider", r.provider},
          {"id", r.utterance_id}, {"Y", r.y},        {"N", r.n}};
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ResultStore::ResultStore(fs::path path) : path_(std::move(path)) {
  if (!fs::exists(path_)) return;
  std::ifstream in(path_, std::ios::binary);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  std::uintmax_t valid_bytes = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t\r") != std::string::npos) {
      json j;
      try {
        j = json::parse(lines[i]);
      } catch (const json::parse_error& e) {
        if (i + 1 == lines.size()) {
          // Torn tail from an interrupted append.
          fs::resize_file(path_, valid_bytes);
          break;
        }
        throw Error(fmt::format("{}:{}: corrupt store record: {}", path_.string(), i + 1, e.what()));
      }
      try {
        ingest(j);
      } catch (const json::exception& e) {
        throw Error(fmt::format("{}:{}: invalid store record: {}", path_.string(), i + 1, e.what()));
      }
    }
    valid_bytes += lines[i].size() + 1;
  }
}

void ResultStore::ingest(const json& j) {
  const std::string kind = j.at("record").get<std::string>();
  if (kind == "transcription") {
    TranscriptionRecord r;
    r.corpus = j.at("corpus").get<std::string>();
    r.provider = j.at("provider").get<std::string>();
    r.condition = parse_condition(j.at("condition").get<std::string>());
    r.utterance_id = j.at("id").get<std::string>();
    r.hypothesis_raw = j.at("hypothesis_raw").get<std::string>();
    r.hypothesis_normalized = j.at("hypothesis_normalized").get<std::string>();
    r.request_time = j.value("request_time", "");
    r.cache_key = j.at("cache_key").get<std::string>();
    r.attempts = j.value("attempts", 1);
    const Key key{r.corpus, r.provider, static_cast<int>(r.condition), r.utterance_id};
    failures_.erase(key);
    key_by_cache_key_[r.cache_key] = key;
    records_[key] = std::move(r);
  } else if (kind == "failure") {
    FailureRecord r;
    r.corpus = j.at("corpus").get<std::string>();
    r.provider = j.at("provider").get<std::string>();
    r.condition = parse_condition(j.at("condition").get<std::string>());
    r.utterance_id = j.at("id").get<std::string>();
    r.cache_key = j.value("cache_key", "");
    r.error = j.at("error").get<std::string>();
    r.attempts = j.value("attempts", 0);
    r.request_time = j.value("request_time", "");
    const Key key{r.corpus, r.provider, static_cast<int>(r.condition), r.utterance_id};
    if (!records_.contains(key)) failures_[key] = std::move(r);
  } else if (kind == "score") {
    ScoreRow r;
    r.corpus = j.at("corpus").get<std::string>();
    r.provider = j.at("provider").get<std::string>();
    r.utterance_id = j.at("id").get<std::string>();
    r.y = j.at("Y").get<std::map<std::string, double>>();
    r.n = j.at("N").get<std::map<std::string, double>>();
    scores_[{r.corpus, r.provider, r.utterance_id}] = std::move(r);
  } else {
    throw Error(fmt::format("unknown store record kind '{}'", kind));
  }
}

void ResultStore::write_line(const json& j) {
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  out << j.dump() << '\n';
  out.flush();
  if (!out) throw Error(fmt::format("cannot append to {}", path_.string()));
}

std::optional<TranscriptionRecord> ResultStore::find_by_cache_key(const std::string& cache_key) const {
  std::lock_guard lock(mu_);
  const auto it = key_by_cache_key_.find(cache_key);
  if (it == key_by_cache_key_.end()) return std::nullopt;
  return records_.at(it->second);
}

std::optional<TranscriptionRecord> ResultStore::find(const std::string& corpus,
                                                     const std::string& provider,
                                                     Condition condition,
                                                     const std::string& utterance_id) const {
  std::lock_guard lock(mu_);
  const auto it = records_.find({corpus, provider, static_cast<int>(condition), utterance_id});
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void ResultStore::append(const TranscriptionRecord& r) {
  std::lock_guard lock(mu_);
  const json j = to_json(r);
  write_line(j);
  ingest(j);
}

void ResultStore::append(const FailureRecord& r) {
  std::lock_guard lock(mu_);
  const json j = to_json(r);
  write_line(j);
  ingest(j);
}

void ResultStore::append(const ScoreRow& r) {
  std::lock_guard lock(mu_);
  const json j = to_json(r);
  write_line(j);
  ingest(j);
}

std::vector<TranscriptionRecord> ResultStore::transcriptions() const {
  std::lock_guard lock(mu_);
  std::vector<TranscriptionRecord> out;
  for (const auto& [k, r] : records_) out.push_back(r);
  return out;
}

std::vector<FailureRecord> ResultStore::failures() const {
  std::lock_guard lock(mu_);
  std::vector<FailureRecord> out;
  for (const auto& [k, r] : failures_) out.push_back(r);
  return out;
}

std::vector<ScoreRow> ResultStore::scores() const {
  std::lock_guard lock(mu_);
  std::vector<ScoreRow> out;
  for (const auto& [k, r] : scores_) out.push_back(r);
  return out;
}

bool ResultStore::empty() const {
  std::lock_guard lock(mu_);
  return records_.empty() && failures_.empty() && scores_.empty();
}

void ResultStore::compact() {
  std::lock_guard lock(mu_);
  fs::path tmp = path_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    for (const auto& [k, r] : records_) out << to_json(r).dump() << '\n';
    for (const auto& [k, r] : failures_) out << to_json(r).dump() << '\n';
    for (const auto& [k, r] : scores_) out << to_json(r).dump() << '\n';
    out.flush();
    if (!out) throw Error(fmt::format("cannot write {}", tmp.string()));
  }
  fs::rename(tmp, path_);
}

}  // namespace stutterbias::harness
