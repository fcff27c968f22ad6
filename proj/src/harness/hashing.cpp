#include "stutterbias/harness/hashing.hpp"

#include <array>

#include <fmt/format.h>
#include <openssl/evp.h>
#include <openssl/sha.h>

namespace stutterbias::harness {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest.data());
  std::string out;
  out.reserve(2 * digest.size());
  for (unsigned char c : digest) out += fmt::format("{:02x}", c);
  return out;
}

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string canonical_json(const nlohmann::json& j) { return j.dump(); }

std::string cache_key(std::string_view audio_bytes, std::string_view provider_name,
                      const nlohmann::json& settings) {
  const std::string s = canonical_json(settings);
  std::string buf;
  buf.reserve(audio_bytes.size() + provider_name.size() + s.size() + 64);
  for (std::string_view part : {provider_name, std::string_view(s), audio_bytes}) {
    buf += fmt::format("{}:", part.size());
    buf += part;
  }
  return sha256_hex(buf);
}

std::string embedding_key(std::string_view normalized_text) {
  return sha256_hex(normalized_text).substr(0, 16);
}

}  // namespace stutterbias::harness
