#include "stutterbias/harness/provider.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <fmt/format.h>

#include "httplib.h"
#include "stutterbias/error.hpp"
#include "stutterbias/harness/hashing.hpp"
#include "stutterbias/random.hpp"
#include "stutterbias/textnorm.hpp"

namespace stutterbias::harness {

using nlohmann::json;
namespace fs = std::filesystem;

double RetryPolicy::backoff(int attempt) const {
  return std::min(max_backoff_s, initial_backoff_s * std::pow(multiplier, attempt - 1));
}

void ProviderConfig::validate() const {
  if (name.empty()) throw Error("provider needs a name");
  if (!(rate_limit > 0)) throw Error(fmt::format("provider {}: rate_limit must be positive", name));
  if (!(timeout_s > 0)) throw Error(fmt::format("provider {}: timeout must be positive", name));
  if (retry.retries < 0) throw Error(fmt::format("provider {}: retries must be >= 0", name));
  if (retry.initial_backoff_s < 0 || retry.multiplier < 1 || retry.max_backoff_s < 0) {
    throw Error(fmt::format("provider {}: invalid backoff parameters", name));
  }
  if (kind == ProviderKind::Http) {
    if (endpoint.empty()) throw Error(fmt::format("provider {}: http endpoint is required", name));
    if (adapter.body != "wav" && adapter.body != "json_base64") {
      throw Error(fmt::format("provider {}: unknown body encoding '{}'", name, adapter.body));
    }
    if (adapter.method != "POST" && adapter.method != "PUT") {
      throw Error(fmt::format("provider {}: unsupported method '{}'", name, adapter.method));
    }
  }
  if (!settings.is_object()) throw Error(fmt::format("provider {}: settings must be an object", name));
}

std::string_view to_string(StubBehavior b) {
  switch (b) {
    case StubBehavior::Echo: return "echo";
    case StubBehavior::EchoVerbatim: return "echo-verbatim";
    case StubBehavior::WordDropper: return "word-dropper";
    case StubBehavior::Blank: return "blank";
  }
  return "echo";
}

StubBehavior parse_stub_behavior(std::string_view s) {
  for (auto b : {StubBehavior::Echo, StubBehavior::EchoVerbatim, StubBehavior::WordDropper,
                 StubBehavior::Blank}) {
    if (to_string(b) == s) return b;
  }
  throw Error(fmt::format("unknown stub behavior '{}'", s));
}

ProviderConfig provider_from_json(const json& j) {
  ProviderConfig c;
  try {
    c.name = j.at("name").get<std::string>();
    const std::string kind = j.value("kind", "stub");
    if (kind == "http") {
      c.kind = ProviderKind::Http;
    } else if (kind == "stub") {
      c.kind = ProviderKind::Stub;
    } else if (kind == "sidecar") {
      c.kind = ProviderKind::Sidecar;
    } else {
      throw Error(fmt::format("provider {}: unknown kind '{}'", c.name, kind));
    }
    if (j.contains("credentials")) {
      throw Error(fmt::format("provider {}: put the credential in an environment variable and "
                              "name it in credentials_env",
                              c.name));
    }
    c.endpoint = j.value("endpoint", "");
    c.credentials_env = j.value("credentials_env", "");
    c.rate_limit = j.value("rate_limit", c.rate_limit);
    c.timeout_s = j.value("timeout_s", c.timeout_s);
    if (j.contains("retry")) {
      const auto& r = j.at("retry");
      c.retry.retries = r.value("retries", c.retry.retries);
      c.retry.initial_backoff_s = r.value("initial_backoff_s", c.retry.initial_backoff_s);
      c.retry.multiplier = r.value("multiplier", c.retry.multiplier);
      c.retry.max_backoff_s = r.value("max_backoff_s", c.retry.max_backoff_s);
    }
    if (j.contains("adapter")) {
      const auto& a = j.at("adapter");
      c.adapter.method = a.value("method", c.adapter.method);
      c.adapter.headers = a.value("headers", c.adapter.headers);
      c.adapter.body = a.value("body", c.adapter.body);
      c.adapter.content_type = a.value("content_type", c.adapter.content_type);
      c.adapter.audio_field = a.value("audio_field", c.adapter.audio_field);
      c.adapter.transcript_pointer = a.value("transcript_pointer", c.adapter.transcript_pointer);
    }
    c.settings = j.value("settings", json::object());
    if (c.kind == ProviderKind::Stub) c.stub = parse_stub_behavior(j.value("behavior", "echo"));
  } catch (const json::exception& e) {
    throw Error(fmt::format("invalid provider config: {}", e.what()));
  }
  c.validate();
  return c;
}

TokenBucket::TokenBucket(double rate, double burst)
    : rate_(rate), burst_(std::max(1.0, burst)), tokens_(std::max(1.0, burst)), last_(Clock::now()) {}

void TokenBucket::acquire() {
  std::unique_lock lock(mu_);
  for (;;) {
    const auto now = Clock::now();
    tokens_ = std::min(burst_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const double wait = (1.0 - tokens_) / rate_;
    lock.unlock();
    std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    lock.lock();
  }
}

Provider::Provider(ProviderConfig config)
    : config_(std::move(config)), bucket_(config_.rate_limit), sleep_([](double s) {
        std::this_thread::sleep_for(std::chrono::duration<double>(s));
      }) {}

TranscribeOutcome Provider::transcribe(const Utterance& utterance, std::string_view wav_bytes) {
  TranscribeOutcome out;
  for (int attempt_no = 1;; ++attempt_no) {
    bucket_.acquire();
    out.attempts = attempt_no;
    Attempt a;
    try {
      a = attempt(utterance, wav_bytes);
    } catch (const std::exception& e) {
      a = {AttemptStatus::Fatal, {}, e.what()};
    }
    if (a.status == AttemptStatus::Ok) {
      out.transcript = std::move(a.transcript);
      out.error.clear();
      return out;
    }
    out.error = a.error;
    if (a.status == AttemptStatus::Fatal || attempt_no > config_.retry.retries) {
      if (a.status == AttemptStatus::Retryable) {
        out.error = fmt::format("{} (gave up after {} attempts)", a.error, attempt_no);
      }
      return out;
    }
    sleep_(config_.retry.backoff(attempt_no));
  }
}

std::string stub_transcript(StubBehavior behavior, const Utterance& utterance, const json& settings) {
  const std::string& spoken = utterance.verbatim ? *utterance.verbatim : utterance.reference;
  switch (behavior) {
    case StubBehavior::Echo: return utterance.reference;
    case StubBehavior::EchoVerbatim: return spoken;
    case StubBehavior::Blank: return "";
    case StubBehavior::WordDropper: break;
  }
  const auto modulus = settings.is_object() ? settings.value("drop_modulus", std::uint64_t{0}) : 0;
  const auto tokens = textnorm::tokenize(textnorm::basic_normalize(spoken));
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool repeated = (i > 0 && tokens[i - 1] == tokens[i]) ||
                          (i + 1 < tokens.size() && tokens[i + 1] == tokens[i]);
    if (repeated) continue;
    if (modulus > 0 && fnv1a64(tokens[i]) % modulus == 0) continue;
    kept.push_back(tokens[i]);
  }
  return textnorm::join(kept);
}

namespace {

class StubProvider : public Provider {
 public:
  using Provider::Provider;

 protected:
  Attempt attempt(const Utterance& u, std::string_view) override {
    return {AttemptStatus::Ok, stub_transcript(config().stub, u, config().settings), {}};
  }
};

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(fmt::format("endpoint '{}' is not a URL", url));
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string substitute_credential(std::string value, const std::string& credential) {
  static constexpr std::string_view kToken = "${credential}";
  for (auto pos = value.find(kToken); pos != std::string::npos; pos = value.find(kToken, pos)) {
    value.replace(pos, kToken.size(), credential);
    pos += credential.size();
  }
  return value;
}

class HttpProvider : public Provider {
 public:
  explicit HttpProvider(ProviderConfig c) : Provider(std::move(c)), url_(split_url(config().endpoint)) {}

 protected:
  Attempt attempt(const Utterance&, std::string_view wav) override {
    const auto& c = config();
    std::string credential;
    if (!c.credentials_env.empty()) {
      const char* v = std::getenv(c.credentials_env.c_str());
      if (v == nullptr) {
        return {AttemptStatus::Fatal, {},
                fmt::format("credential environment variable {} is not set", c.credentials_env)};
      }
      credential = v;
    }
    httplib::Headers headers;
    for (const auto& [k, v] : c.adapter.headers) {
      if (v.find("${credential}") != std::string::npos && c.credentials_env.empty()) {
        return {AttemptStatus::Fatal, {}, "header uses ${credential} but no credentials_env is set"};
      }
      headers.emplace(k, substitute_credential(v, credential));
    }
    std::string body;
    std::string content_type = c.adapter.content_type;
    if (c.adapter.body == "wav") {
      body.assign(wav);
    } else {
      json j = c.settings;
      j[c.adapter.audio_field] = base64_encode(wav);
      body = j.dump();
      content_type = "application/json";
    }

    httplib::Client client(url_.origin);
    const auto secs = std::chrono::duration<double>(c.timeout_s);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
    auto res = c.adapter.method == "PUT" ? client.Put(url_.path, headers, body, content_type)
                                         : client.Post(url_.path, headers, body, content_type);
    if (!res) {
      return {AttemptStatus::Retryable, {},
              fmt::format("connection error: {}", httplib::to_string(res.error()))};
    }
    const int status = res->status;
    if (status == 401 || status == 403) {
      return {AttemptStatus::Fatal, {}, fmt::format("authentication failed (HTTP {})", status)};
    }
    if (status == 429 || status >= 500) {
      return {AttemptStatus::Retryable, {}, fmt::format("HTTP {}", status)};
    }
    if (status < 200 || status >= 300) {
      return {AttemptStatus::Fatal, {}, fmt::format("HTTP {}", status)};
    }
    try {
      const json j = json::parse(res->body);
      const auto& t = j.at(json::json_pointer(c.adapter.transcript_pointer));
      if (!t.is_string()) throw Error("transcript is not a string");
      return {AttemptStatus::Ok, t.get<std::string>(), {}};
    } catch (const std::exception& e) {
      return {AttemptStatus::Fatal, {}, fmt::format("malformed provider response: {}", e.what())};
    }
  }

 private:
  Url url_;
};

class SidecarProvider : public Provider {
 public:
  SidecarProvider(ProviderConfig c, SidecarConfig sidecar, fs::path work_dir)
      : Provider(std::move(c)), sidecar_(std::move(sidecar)), work_dir_(std::move(work_dir)) {}

 protected:
  Attempt attempt(const Utterance& u, std::string_view wav) override {
    if (!sidecar_available(sidecar_)) return {AttemptStatus::Fatal, {}, "sidecar is not available"};
    const fs::path dir = work_dir_ / fmt::format("asr-{}-{}", sha256_hex(wav).substr(0, 16), counter_++);
    Manifest m;
    m.corpus_name = "asr-job";
    Utterance row = u;
    row.audio_path = "input.wav";
    row.alignment_path.reset();
    m.utterances.push_back(row);
    write_file(dir / "input.wav", wav);
    save_manifest(m, dir / "input.jsonl");
    SidecarJob job{"asr", dir / "input.jsonl", dir / "out", sidecar_.models, sidecar_.device};
    try {
      const auto result = run_sidecar(sidecar_, job);
      for (const auto& f : result.failures) {
        if (f.id == u.id) return {AttemptStatus::Fatal, {}, f.error};
      }
      for (const auto& row_json : read_jsonl(job.output_dir / "transcripts.jsonl")) {
        if (row_json.value("id", "") == u.id) {
          const auto& t = row_json.at("text");
          if (!t.is_string()) break;
          fs::remove_all(dir);
          return {AttemptStatus::Ok, t.get<std::string>(), {}};
        }
      }
      return {AttemptStatus::Fatal, {}, "sidecar returned no transcript"};
    } catch (const std::exception& e) {
      return {AttemptStatus::Retryable, {}, e.what()};
    }
  }

 private:
  SidecarConfig sidecar_;
  fs::path work_dir_;
  std::atomic<std::uint64_t> counter_{0};
};

}  // namespace

std::unique_ptr<Provider> make_provider(const ProviderConfig& config, const SidecarConfig& sidecar,
                                        const fs::path& work_dir) {
  config.validate();
  switch (config.kind) {
    case ProviderKind::Stub: return std::make_unique<StubProvider>(config);
    case ProviderKind::Http: return std::make_unique<HttpProvider>(config);
    case ProviderKind::Sidecar:
      return std::make_unique<SidecarProvider>(
          config, sidecar, work_dir.empty() ? fs::temp_directory_path() / "stutterbias" : work_dir);
  }
  throw Error("unknown provider kind");
}

}  // namespace stutterbias::harness
