#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "stutterbias/corpus.hpp"
#include "stutterbias/harness/sidecar.hpp"

namespace stutterbias::harness {

struct RetryPolicy {
  int retries = 3;
  double initial_backoff_s = 0.5;
  double multiplier = 2.0;
  double max_backoff_s = 8.0;

  double backoff(int attempt) const;  // delay before retry `attempt` (1-based)
};

// Request/response mapping for one HTTP vendor.
//
// Header values may contain ${credential}, replaced by the value of the
// provider's credentials environment variable. With body "wav" the WAV bytes
// are sent as-is; with "json_base64" the body is the provider settings object
// plus `audio_field` holding base64 audio. The transcript is read from the
// JSON response at `transcript_pointer` (RFC 6901).
struct HttpAdapter {
  std::string method = "POST";
  std::map<std::string, std::string> headers;
  std::string body = "wav";
  std::string content_type = "audio/wav";
  std::string audio_field = "audio";
  std::string transcript_pointer = "/text";
};

enum class ProviderKind { Http, Stub, Sidecar };

// echo           the reference text
// echo-verbatim  the verbatim text, else the reference
// word-dropper   the verbatim text (else the reference) with every token of a
//                run of identical consecutive tokens removed; with
//                settings.drop_modulus = m > 0, tokens whose hash is
//                divisible by m are removed as well
// blank          the empty string
enum class StubBehavior { Echo, EchoVerbatim, WordDropper, Blank };

struct ProviderConfig {
  std::string name;
  ProviderKind kind = ProviderKind::Stub;
  std::string endpoint;  // URL for http providers
  std::string credentials_env;
  double rate_limit = 10.0;  // requests per second
  double timeout_s = 30.0;
  RetryPolicy retry;
  HttpAdapter adapter;
  nlohmann::json settings = nlohmann::json::object();
  StubBehavior stub = StubBehavior::Echo;

  void validate() const;
};

ProviderConfig provider_from_json(const nlohmann::json& j);
std::string_view to_string(StubBehavior b);
StubBehavior parse_stub_behavior(std::string_view s);

class TokenBucket {
 public:
  TokenBucket(double rate, double burst = 1.0);
  // Blocks until a token is available.
  void acquire();

 private:
  using Clock = std::chrono::steady_clock;
  std::mutex mu_;
  double rate_;
  double burst_;
  double tokens_;
  Clock::time_point last_;
};

struct TranscribeOutcome {
  std::optional<std::string> transcript;  // set on success, may be empty
  std::string error;                      // set on failure
  int attempts = 0;
  bool ok() const { return transcript.has_value(); }
};

class Provider {
 public:
  explicit Provider(ProviderConfig config);
  virtual ~Provider() = default;
  Provider(const Provider&) = delete;
  Provider& operator=(const Provider&) = delete;

  const ProviderConfig& config() const { return config_; }

  // Rate-limited, retried transcription. Never throws for provider-side
  // errors; they come back as a failed outcome.
  TranscribeOutcome transcribe(const Utterance& utterance, std::string_view wav_bytes);

  // Replaces sleeping between retries, for tests.
  void set_sleeper(std::function<void(double)> sleeper) { sleep_ = std::move(sleeper); }

 protected:
  enum class AttemptStatus { Ok, Retryable, Fatal };
  struct Attempt {
    AttemptStatus status = AttemptStatus::Ok;
    std::string transcript;
    std::string error;
  };
  virtual Attempt attempt(const Utterance& utterance, std::string_view wav_bytes) = 0;

 private:
  ProviderConfig config_;
  TokenBucket bucket_;
  std::function<void(double)> sleep_;
};

// Stub transcript for a behavior, exposed for tests.
std::string stub_transcript(StubBehavior behavior, const Utterance& utterance,
                            const nlohmann::json& settings);

// Sidecar providers need the sidecar config; others ignore it.
std::unique_ptr<Provider> make_provider(const ProviderConfig& config,
                                        const SidecarConfig& sidecar = {},
                                        const std::filesystem::path& work_dir = {});

}  // namespace stutterbias::harness
