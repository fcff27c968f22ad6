#include "stutterbias/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "stutterbias/error.hpp"
#include "stutterbias/textnorm.hpp"

namespace stutterbias {

namespace fs = std::filesystem;
using nlohmann::json;

void AudioBuffer::validate() const {
  if (sample_rate <= 0) throw Error(fmt::format("invalid sample rate {}", sample_rate));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const float s = samples[i];
    if (!(s >= -1.0f && s <= 1.0f)) {
      throw Error(fmt::format("sample {} out of range: {}", i, s));
    }
  }
}

std::string_view to_string(Condition c) { return c == Condition::Y ? "Y" : "N"; }

Condition parse_condition(std::string_view s) {
  if (s == "Y") return Condition::Y;
  if (s == "N") return Condition::N;
  throw Error(fmt::format("invalid condition '{}', expected Y or N", s));
}

fs::path Manifest::resolve(const std::string& relative) const {
  fs::path p(relative);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

const Utterance* Manifest::find(std::string_view id) const {
  for (const auto& u : utterances) {
    if (u.id == id) return &u;
  }
  return nullptr;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(fmt::format("write failed: {}", path.string()));
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

const std::string& require_string(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(fmt::format("line {}: missing required field '{}'", line, key));
  if (!it->is_string()) throw Error(fmt::format("line {}: field '{}' must be a string", line, key));
  return it->get_ref<const std::string&>();
}

std::optional<std::string> optional_string(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(fmt::format("line {}: field '{}' must be a string", line, key));
  return it->get<std::string>();
}

Utterance utterance_from_json(const json& j, std::size_t line) {
  if (!j.is_object()) throw Error(fmt::format("line {}: expected a JSON object", line));
  Utterance u;
  u.id = require_string(j, "id", line);
  u.audio_path = require_string(j, "audio", line);
  u.reference = require_string(j, "reference", line);
  u.verbatim = optional_string(j, "verbatim", line);
  u.alignment_path = optional_string(j, "alignment", line);
  auto d = j.find("duration_s");
  if (d == j.end()) throw Error(fmt::format("line {}: missing required field 'duration_s'", line));
  if (!d->is_number()) throw Error(fmt::format("line {}: field 'duration_s' must be a number", line));
  u.duration_s = d->get<double>();
  if (u.id.empty()) throw Error(fmt::format("line {}: empty id", line));
  if (u.reference.empty()) throw Error(fmt::format("line {}: empty reference for '{}'", line, u.id));
  if (u.duration_s < 0) throw Error(fmt::format("line {}: negative duration for '{}'", line, u.id));
  return u;
}

json utterance_to_json(const Utterance& u) {
  // Keys are emitted sorted, so lines are byte-stable.
  json j;
  j["id"] = u.id;
  j["audio"] = u.audio_path;
  j["reference"] = u.reference;
  if (u.verbatim) j["verbatim"] = *u.verbatim;
  if (u.alignment_path) j["alignment"] = *u.alignment_path;
  j["duration_s"] = u.duration_s;
  return j;
}

}  // namespace

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open manifest {}", path.string()));

  Manifest m;
  m.base_dir = path.parent_path();
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(fmt::format("{}:{}: parse error: {}", path.string(), lineno, e.what()));
    }
    if (!have_header) {
      if (!j.is_object()) throw Error(fmt::format("line {}: header must be a JSON object", lineno));
      m.corpus_name = require_string(j, "corpus_name", lineno);
      m.condition = parse_condition(require_string(j, "condition", lineno));
      if (auto s = j.find("seed"); s != j.end() && !s->is_null()) {
        if (!s->is_number_unsigned()) {
          throw Error(fmt::format("line {}: seed must be an unsigned integer", lineno));
        }
        m.seed = s->get<std::uint64_t>();
      }
      if (auto p = j.find("provenance"); p != j.end() && !p->is_null()) {
        if (!p->is_object()) throw Error(fmt::format("line {}: provenance must be an object", lineno));
        m.provenance = *p;
      }
      have_header = true;
      continue;
    }
    Utterance u = utterance_from_json(j, lineno);
    if (!seen.insert(u.id).second) {
      throw Error(fmt::format("line {}: duplicate utterance id '{}'", lineno, u.id));
    }
    m.utterances.push_back(std::move(u));
  }
  if (!have_header) throw Error(fmt::format("empty manifest: {}", path.string()));
  if (m.condition == Condition::Y && m.provenance.value("synthetic", false) && !m.seed) {
    throw Error("synthetic Y-condition manifest must record its generation seed");
  }
  return m;
}

void save_manifest(const Manifest& m, const fs::path& path) {
  std::set<std::string> seen;
  std::string out;
  try {
    json header;
    header["corpus_name"] = m.corpus_name;
    header["condition"] = std::string(to_string(m.condition));
    header["seed"] = m.seed ? json(*m.seed) : json(nullptr);
    header["provenance"] = m.provenance;
    out += header.dump() + "\n";
    for (const auto& u : m.utterances) {
      if (!seen.insert(u.id).second) throw Error(fmt::format("duplicate utterance id '{}'", u.id));
      out += utterance_to_json(u).dump() + "\n";
    }
  } catch (const json::type_error& e) {
    throw Error(fmt::format("manifest text is not valid UTF-8: {}", e.what()));
  }
  write_file(path, out);
}

std::vector<std::string> validate_manifest_files(const Manifest& m) {
  std::vector<std::string> problems;
  for (const auto& u : m.utterances) {
    const fs::path audio = m.resolve(u.audio_path);
    try {
      const WavInfo info = probe_wav(audio);
      const double actual = static_cast<double>(info.frames) / info.sample_rate;
      if (std::abs(actual - u.duration_s) > 1.0 / info.sample_rate) {
        problems.push_back(fmt::format("{}: duration_s {} does not match audio ({} s)", u.id,
                                       u.duration_s, actual));
      }
    } catch (const Error& e) {
      problems.push_back(fmt::format("{}: {}", u.id, e.what()));
    }
    if (u.alignment_path && !fs::exists(m.resolve(*u.alignment_path))) {
      problems.push_back(fmt::format("{}: alignment file missing: {}", u.id, *u.alignment_path));
    }
  }
  return problems;
}

// ---------------------------------------------------------------------------
// WAV

namespace {

std::uint32_t le32(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}
std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}

struct ParsedWav {
  int sample_rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_bytes = 0;
};

ParsedWav parse_wav(std::string_view bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
    throw Error("not a RIFF/WAVE file");
  }
  ParsedWav w;
  bool have_fmt = false;
  std::size_t off = 12;
  while (off + 8 <= n) {
    const std::uint32_t size = le32(p + off + 4);
    const unsigned char* body = p + off + 8;
    const std::size_t avail = n - off - 8;
    if (std::memcmp(p + off, "fmt ", 4) == 0) {
      if (size < 16 || avail < 16) throw Error("truncated fmt chunk");
      const std::uint16_t format = le16(body);
      const std::uint16_t channels = le16(body + 2);
      const std::uint32_t rate = le32(body + 4);
      const std::uint16_t bits = le16(body + 14);
      if (format != 1) throw Error(fmt::format("unsupported encoding (format tag {})", format));
      if (channels != 1) throw Error(fmt::format("unsupported channel count {}", channels));
      if (bits != 16) throw Error(fmt::format("unsupported bit depth {}", bits));
      if (rate == 0) throw Error("invalid sample rate 0");
      w.sample_rate = static_cast<int>(rate);
      have_fmt = true;
    } else if (std::memcmp(p + off, "data", 4) == 0) {
      if (!have_fmt) throw Error("data chunk before fmt chunk");
      if (size > avail) throw Error("truncated data chunk");
      if (size % 2 != 0) throw Error("truncated sample in data chunk");
      w.data = body;
      w.data_bytes = size;
      return w;
    }
    if (size > avail) throw Error("truncated chunk");
    off += 8 + size + (size & 1);
  }
  throw Error(have_fmt ? "missing data chunk" : "missing fmt chunk");
}

}  // namespace

AudioBuffer decode_wav(std::string_view bytes) {
  const ParsedWav w = parse_wav(bytes);
  AudioBuffer b;
  b.sample_rate = w.sample_rate;
  b.samples.resize(w.data_bytes / 2);
  for (std::size_t i = 0; i < b.samples.size(); ++i) {
    const auto v = static_cast<std::int16_t>(le16(w.data + 2 * i));
    b.samples[i] = static_cast<float>(v) / 32768.0f;
  }
  return b;
}

AudioBuffer read_audio(const fs::path& path) {
  try {
    return decode_wav(read_file(path));
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

WavInfo probe_wav(const fs::path& path) {
  const std::string bytes = read_file(path);
  const ParsedWav w = parse_wav(bytes);
  return {w.sample_rate, w.data_bytes / 2};
}

std::string encode_wav(const AudioBuffer& b) {
  b.validate();
  const auto data_bytes = static_cast<std::uint32_t>(b.samples.size() * 2);
  std::string s;
  s.reserve(44 + data_bytes);
  s += "RIFF";
  put32(s, 36 + data_bytes);
  s += "WAVEfmt ";
  put32(s, 16);
  put16(s, 1);
  put16(s, 1);
  put32(s, static_cast<std::uint32_t>(b.sample_rate));
  put32(s, static_cast<std::uint32_t>(b.sample_rate) * 2);
  put16(s, 2);
  put16(s, 16);
  s += "data";
  put32(s, data_bytes);
  for (float x : b.samples) {
    const long q = std::lround(static_cast<double>(x) * 32768.0);
    put16(s, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L))));
  }
  return s;
}

void write_audio(const AudioBuffer& b, const fs::path& path) { write_file(path, encode_wav(b)); }

// ---------------------------------------------------------------------------
// Alignment

WordAlignment alignment_from_json(const json& j) {
  if (!j.is_array()) throw Error("alignment must be a JSON array");
  WordAlignment a;
  for (const auto& e : j) {
    if (!e.is_object() || !e.contains("token") || !e.contains("start_s") || !e.contains("end_s")) {
      throw Error("alignment entry needs token, start_s and end_s");
    }
    a.push_back({e.at("token").get<std::string>(), e.at("start_s").get<double>(),
                 e.at("end_s").get<double>()});
  }
  return a;
}

json alignment_to_json(const WordAlignment& a) {
  json arr = json::array();
  for (const auto& w : a) arr.push_back({{"token", w.token}, {"start_s", w.start_s}, {"end_s", w.end_s}});
  return arr;
}

WordAlignment load_alignment(const fs::path& path) {
  try {
    return alignment_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void save_alignment(const WordAlignment& a, const fs::path& path) {
  write_file(path, alignment_to_json(a).dump() + "\n");
}

std::optional<WordAlignment> load_utterance_alignment(const Manifest& m, const Utterance& u) {
  if (!u.alignment_path) return std::nullopt;
  return load_alignment(m.resolve(*u.alignment_path));
}

std::vector<AlignmentViolation> validate_alignment(const Utterance& u, const WordAlignment& a) {
  using Kind = AlignmentViolation::Kind;
  std::vector<AlignmentViolation> out;
  // Half a sample of slack for timestamps rounded to the sample grid.
  const double slack = 0.5 / kStandardSampleRate;
  double prev_end = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& w = a[i];
    if (!(w.start_s >= 0.0 && w.start_s < w.end_s)) {
      out.push_back({Kind::InvalidSpan, fmt::format("word {} '{}': invalid span [{}, {}]", i,
                                                    w.token, w.start_s, w.end_s)});
    }
    if (i > 0 && w.start_s < prev_end - slack) {
      out.push_back({Kind::NonMonotone,
                     fmt::format("word {} '{}': non-monotone spans (starts at {} before previous end {})",
                                 i, w.token, w.start_s, prev_end)});
    }
    if (w.end_s > u.duration_s + slack) {
      out.push_back({Kind::ExceedsDuration, fmt::format("word {} '{}': span exceeds duration ({} > {})",
                                                        i, w.token, w.end_s, u.duration_s)});
    }
    prev_end = std::max(prev_end, w.end_s);
  }
  const auto ref = textnorm::tokenize(textnorm::normalize(u.reference));
  if (ref.size() != a.size()) {
    out.push_back({Kind::TokenCountMismatch,
                   fmt::format("token count mismatch: alignment has {}, reference has {}", a.size(),
                               ref.size())});
  } else {
    for (std::size_t i = 0; i < ref.size(); ++i) {
      if (textnorm::normalize(a[i].token) != ref[i]) {
        out.push_back({Kind::TokenMismatch, fmt::format("token mismatch at {}: '{}' vs reference '{}'",
                                                        i, a[i].token, ref[i])});
      }
    }
  }
  return out;
}

}  // namespace stutterbias
