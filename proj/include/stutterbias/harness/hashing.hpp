#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

namespace stutterbias::harness {

std::string sha256_hex(std::string_view bytes);
std::string base64_encode(std::string_view bytes);

// Compact dump with object keys sorted.
std::string canonical_json(const nlohmann::json& j);

// SHA-256 over length-prefixed provider name, canonical settings and audio.
std::string cache_key(std::string_view audio_bytes, std::string_view provider_name,
                      const nlohmann::json& settings);

// File stem for a normalized sentence's embedding file.
std::string embedding_key(std::string_view normalized_text);

}  // namespace stutterbias::harness
