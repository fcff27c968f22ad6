#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stutterbias/error.hpp"

namespace stutterbias {

struct EditOps {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t correct = 0;

  std::size_t errors() const { return substitutions + deletions + insertions; }
  std::size_t reference_length() const { return substitutions + deletions + correct; }
  std::size_t hypothesis_length() const { return substitutions + insertions + correct; }

  bool operator==(const EditOps&) const = default;
};

// Minimum edit distance alignment with unit costs. Among minimal alignments
// the backtrace from the end prefers, at each cell: correct, substitution,
// deletion, insertion.
template <class T>
EditOps edit_ops(std::span<const T> ref, std::span<const T> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  const std::size_t w = m + 1;
  std::vector<std::size_t> d((n + 1) * w);
  for (std::size_t i = 0; i <= n; ++i) d[i * w] = i;
  for (std::size_t j = 0; j <= m; ++j) d[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = d[(i - 1) * w + (j - 1)] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const std::size_t del = d[(i - 1) * w + j] + 1;
      const std::size_t ins = d[i * w + (j - 1)] + 1;
      d[i * w + j] = std::min({diag, del, ins});
    }
  }
  EditOps ops;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const std::size_t here = d[i * w + j];
    if (i > 0 && j > 0) {
      const std::size_t diag = d[(i - 1) * w + (j - 1)];
      if (ref[i - 1] == hyp[j - 1] && here == diag) {
        ++ops.correct;
        --i, --j;
        continue;
      }
      if (ref[i - 1] != hyp[j - 1] && here == diag + 1) {
        ++ops.substitutions;
        --i, --j;
        continue;
      }
    }
    if (i > 0 && here == d[(i - 1) * w + j] + 1) {
      ++ops.deletions;
      --i;
    } else {
      ++ops.insertions;
      --j;
    }
  }
  return ops;
}

EditOps edit_ops(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);

// (S + D + I) / (S + D + C). Throws on an empty reference.
double error_rate(const EditOps& ops);

// Word error rate over whitespace tokens of normalized text.
double wer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);
double wer(std::string_view ref_text, std::string_view hyp_text);

// Character error rate over the space-joined normalized texts; spaces count
// as characters.
double cer(std::string_view ref_text, std::string_view hyp_text);

// Token embeddings of one sentence.
struct EmbeddingSequence {
  std::vector<std::string> tokens;
  std::size_t dim = 0;
  std::vector<std::vector<double>> vectors;

  // Throws when sizes disagree, dimensions differ, or a vector is zero.
  void validate() const;
  bool empty() const { return tokens.empty(); }
};

EmbeddingSequence embeddings_from_json(const nlohmann::json& j);
nlohmann::json embeddings_to_json(const EmbeddingSequence& e);
EmbeddingSequence load_embeddings(const std::filesystem::path& path);

struct SemanticScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool rescaled = false;
  double baseline = 0.0;
  bool empty_hypothesis = false;
};

// Greedy cosine matching. Recall averages, over hypothesis tokens, the best
// cosine against any reference token; precision averages, over reference
// tokens, the best cosine against any hypothesis token. F is their harmonic
// mean (0 when P + R == 0). An empty hypothesis scores 0 with
// empty_hypothesis set; an empty reference throws.
SemanticScore semantic_f(const EmbeddingSequence& reference, const EmbeddingSequence& hypothesis);

// (v - b) / (1 - b) for each of P, R, F. Requires 0 <= b < 1.
SemanticScore rescale(const SemanticScore& score, double baseline);

}  // namespace stutterbias
