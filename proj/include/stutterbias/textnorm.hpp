#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace stutterbias::textnorm {

std::vector<std::string> default_atmospherics();

struct NormalizationConfig {
  bool lowercase = true;
  bool strip_punctuation = true;
  bool normalize_numbers = true;
  std::vector<std::string> atmospherics_lexicon = default_atmospherics();

  void validate() const;
};

NormalizationConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const NormalizationConfig& c);

// Lowercase, replace every non-alphanumeric character with a space, collapse
// runs of spaces, trim. Latin-1 letters with diacritics fold to their ASCII
// base letter; any other non-ASCII code point becomes a space.
std::string basic_normalize(std::string_view text);

// Replaces maximal spans of English cardinal number words with digits.
//
// Grammar, over whitespace-separated lowercase tokens:
//
//   number   := "zero" | group+           (scales strictly decreasing)
//   group    := chunk [scale ["and"]]     ("and" only when a chunk follows)
//   chunk    := head "hundred" ["and"] [small] | small
//   head     := unit | teen
//   small    := tens [unit] | teen | unit
//   scale    := "thousand" | "million" | "billion"
//
// Parsing is left to right, longest match. A group whose scale is not smaller
// than the previous one starts a new number. Words such as a bare "hundred"
// that cannot start a chunk are left verbatim. Ordinals and fractions are not
// part of the grammar.
std::string normalize_numbers(std::string_view text);

// Deletes each lexicon marker (case-insensitive). Surrounding whitespace is kept.
std::string strip_atmospherics(std::string_view text, const std::vector<std::string>& lexicon);

// strip_atmospherics, then case/punctuation folding, then number
// normalization, each according to the config flags.
std::string normalize(std::string_view text, const NormalizationConfig& config = {});

std::vector<std::string> tokenize(std::string_view text);
std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

}  // namespace stutterbias::textnorm
