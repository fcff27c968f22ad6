#include "stutterbias/textnorm.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <unordered_map>

#include "stutterbias/error.hpp"

namespace stutterbias::textnorm {

std::vector<std::string> default_atmospherics() {
  return {"[laughter]", "[laughs]",   "(laughter)", "(laughs)",  "<laughter>", "[silence]",
          "(silence)",  "<silence>",  "[noise]",    "(noise)",   "<noise>",    "[music]",
          "(music)",    "[inaudible]", "(inaudible)", "[crosstalk]", "[applause]", "[cough]",
          "(cough)",    "<sil>",      "[blank_audio]"};
}

void NormalizationConfig::validate() const {
  for (const auto& m : atmospherics_lexicon) {
    if (m.empty()) throw Error("atmospherics lexicon entries must be non-empty");
  }
}

NormalizationConfig config_from_json(const nlohmann::json& j) {
  NormalizationConfig c;
  if (j.is_null()) return c;
  c.lowercase = j.value("lowercase", c.lowercase);
  c.strip_punctuation = j.value("strip_punctuation", c.strip_punctuation);
  c.normalize_numbers = j.value("normalize_numbers", c.normalize_numbers);
  if (j.contains("atmospherics_lexicon")) {
    c.atmospherics_lexicon = j.at("atmospherics_lexicon").get<std::vector<std::string>>();
  }
  c.validate();
  return c;
}

nlohmann::json config_to_json(const NormalizationConfig& c) {
  return {{"lowercase", c.lowercase},
          {"strip_punctuation", c.strip_punctuation},
          {"normalize_numbers", c.normalize_numbers},
          {"atmospherics_lexicon", c.atmospherics_lexicon}};
}

namespace {

// Decodes one UTF-8 code point starting at i; advances i. Invalid bytes yield
// U+FFFD and consume one byte.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int need = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    need = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    need = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    need = 3;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  for (int k = 1; k <= need; ++k) {
    const int c = cont(static_cast<std::size_t>(k));
    if (c < 0) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  i += static_cast<std::size_t>(need) + 1;
  return cp;
}

// ASCII base letter for U+00C0..U+00FF, or 0.
char fold_latin1(char32_t cp) {
  // 0 marks code points with no ASCII letter (multiplication/division signs, thorn).
  static constexpr char table[64] = {
      'A', 'A', 'A', 'A', 'A', 'A', 'A', 'C', 'E', 'E', 'E', 'E', 'I', 'I', 'I', 'I',
      'D', 'N', 'O', 'O', 'O', 'O', 'O', 0,   'O', 'U', 'U', 'U', 'U', 'Y', 0,   's',
      'a', 'a', 'a', 'a', 'a', 'a', 'a', 'c', 'e', 'e', 'e', 'e', 'i', 'i', 'i', 'i',
      'd', 'n', 'o', 'o', 'o', 'o', 'o', 0,   'o', 'u', 'u', 'u', 'u', 'y', 0,   'y'};
  if (cp < 0xC0 || cp > 0xFF) return 0;
  return table[cp - 0xC0];
}

std::string collapse_spaces(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

std::string fold_case_and_punctuation(std::string_view text, bool lowercase, bool strip) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t begin = i;
    const char32_t cp = next_code_point(text, i);
    if (cp < 0x80) {
      char c = static_cast<char>(cp);
      if (lowercase) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (strip && !std::isalnum(static_cast<unsigned char>(c))) c = ' ';
      out.push_back(c);
      continue;
    }
    if (!strip) {
      out.append(text.substr(begin, i - begin));
      continue;
    }
    char folded = fold_latin1(cp);
    if (folded == 0) {
      out.push_back(' ');
      continue;
    }
    if (lowercase) folded = static_cast<char>(std::tolower(static_cast<unsigned char>(folded)));
    out.push_back(folded);
  }
  return collapse_spaces(out);
}

// --- number grammar --------------------------------------------------------

const std::unordered_map<std::string_view, int>& units() {
  static const std::unordered_map<std::string_view, int> m{
      {"one", 1}, {"two", 2},   {"three", 3}, {"four", 4}, {"five", 5},
      {"six", 6}, {"seven", 7}, {"eight", 8}, {"nine", 9}};
  return m;
}
const std::unordered_map<std::string_view, int>& teens() {
  static const std::unordered_map<std::string_view, int> m{
      {"ten", 10},      {"eleven", 11},  {"twelve", 12},   {"thirteen", 13}, {"fourteen", 14},
      {"fifteen", 15},  {"sixteen", 16}, {"seventeen", 17}, {"eighteen", 18}, {"nineteen", 19}};
  return m;
}
const std::unordered_map<std::string_view, int>& tens() {
  static const std::unordered_map<std::string_view, int> m{
      {"twenty", 20}, {"thirty", 30},  {"forty", 40},  {"fifty", 50},
      {"sixty", 60},  {"seventy", 70}, {"eighty", 80}, {"ninety", 90}};
  return m;
}
std::optional<std::int64_t> scale_of(std::string_view w) {
  if (w == "thousand") return 1000;
  if (w == "million") return 1000000;
  if (w == "billion") return 1000000000;
  return std::nullopt;
}

struct Span {
  std::int64_t value;
  std::size_t length;
};

template <class Map>
std::optional<int> lookup(const Map& m, std::string_view w) {
  auto it = m.find(w);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

class NumberParser {
 public:
  explicit NumberParser(const std::vector<std::string>& tokens) : t_(tokens) {}

  std::optional<Span> parse_number(std::size_t i) const {
    if (i >= t_.size()) return std::nullopt;
    if (t_[i] == "zero") return Span{0, 1};

    std::int64_t total = 0;
    std::int64_t last_scale = INT64_MAX;
    std::size_t pos = i;
    std::size_t committed = i;  // end of the last fully accepted group
    bool any = false;
    while (true) {
      const auto chunk = parse_chunk(pos);
      if (!chunk) break;
      const std::size_t after = pos + chunk->length;
      const auto scale = after < t_.size() ? scale_of(t_[after]) : std::nullopt;
      if (scale && *scale < last_scale) {
        total += chunk->value * *scale;
        last_scale = *scale;
        any = true;
        pos = after + 1;
        committed = pos;
        if (pos < t_.size() && t_[pos] == "and" && parse_chunk(pos + 1)) ++pos;
        continue;
      }
      if (scale) break;  // not decreasing: this chunk starts the next number
      total += chunk->value;
      any = true;
      committed = after;
      break;
    }
    if (!any) return std::nullopt;
    return Span{total, committed - i};
  }

 private:
  std::optional<Span> parse_small(std::size_t i) const {
    if (i >= t_.size()) return std::nullopt;
    if (auto t = lookup(tens(), t_[i])) {
      if (i + 1 < t_.size()) {
        if (auto u = lookup(units(), t_[i + 1])) return Span{*t + *u, 2};
      }
      return Span{*t, 1};
    }
    if (auto v = lookup(teens(), t_[i])) return Span{*v, 1};
    if (auto v = lookup(units(), t_[i])) return Span{*v, 1};
    return std::nullopt;
  }

  std::optional<Span> parse_chunk(std::size_t i) const {
    const auto head = parse_small(i);
    if (!head) return std::nullopt;
    const std::size_t after = i + head->length;
    if (head->value < 20 && after < t_.size() && t_[after] == "hundred") {
      std::int64_t value = head->value * 100;
      std::size_t end = after + 1;
      std::size_t q = end;
      if (q < t_.size() && t_[q] == "and" && parse_small(q + 1)) ++q;
      if (auto rest = parse_small(q)) {
        value += rest->value;
        end = q + rest->length;
      }
      return Span{value, end - i};
    }
    return head;
  }

  const std::vector<std::string>& t_;
};

bool iequals_at(std::string_view hay, std::size_t pos, std::string_view needle) {
  if (pos + needle.size() > hay.size()) return false;
  for (std::size_t k = 0; k < needle.size(); ++k) {
    if (std::tolower(static_cast<unsigned char>(hay[pos + k])) !=
        std::tolower(static_cast<unsigned char>(needle[k]))) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::string basic_normalize(std::string_view text) {
  return fold_case_and_punctuation(text, true, true);
}

std::string normalize_numbers(std::string_view text) {
  const auto tokens = tokenize(text);
  NumberParser parser(tokens);
  std::vector<std::string> out;
  out.reserve(tokens.size());
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (auto span = parser.parse_number(i)) {
      out.push_back(std::to_string(span->value));
      i += span->length;
    } else {
      out.push_back(tokens[i]);
      ++i;
    }
  }
  return join(out);
}

std::string strip_atmospherics(std::string_view text, const std::vector<std::string>& lexicon) {
  // Longest markers first so one marker never leaves part of another behind.
  std::vector<std::string_view> markers(lexicon.begin(), lexicon.end());
  std::stable_sort(markers.begin(), markers.end(),
                   [](std::string_view a, std::string_view b) { return a.size() > b.size(); });
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    bool matched = false;
    for (auto m : markers) {
      if (!m.empty() && iequals_at(text, i, m)) {
        i += m.size();
        matched = true;
        break;
      }
    }
    if (!matched) out.push_back(text[i++]);
  }
  return out;
}

std::string normalize(std::string_view text, const NormalizationConfig& config) {
  std::string s = strip_atmospherics(text, config.atmospherics_lexicon);
  s = fold_case_and_punctuation(s, config.lowercase, config.strip_punctuation);
  if (config.normalize_numbers) s = normalize_numbers(s);
  return s;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::string join(const std::vector<std::string>& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.append(sep);
    out.append(tokens[i]);
  }
  return out;
}

}  // namespace stutterbias::textnorm
