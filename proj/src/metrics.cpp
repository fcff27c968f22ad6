#include "stutterbias/metrics.hpp"

#include <cmath>

#include <fmt/format.h>

#include "stutterbias/corpus.hpp"
#include "stutterbias/textnorm.hpp"

namespace stutterbias {

using nlohmann::json;

EditOps edit_ops(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  return edit_ops<std::string>(std::span<const std::string>(ref), std::span<const std::string>(hyp));
}

double error_rate(const EditOps& ops) {
  const std::size_t denom = ops.substitutions + ops.deletions + ops.correct;
  if (denom == 0) throw Error("undefined WER: empty reference");
  return static_cast<double>(ops.errors()) / static_cast<double>(denom);
}

double wer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  if (ref.empty()) throw Error("undefined WER: empty reference");
  return error_rate(edit_ops(ref, hyp));
}

double wer(std::string_view ref_text, std::string_view hyp_text) {
  return wer(textnorm::tokenize(ref_text), textnorm::tokenize(hyp_text));
}

double cer(std::string_view ref_text, std::string_view hyp_text) {
  const std::string ref = textnorm::join(textnorm::tokenize(ref_text));
  const std::string hyp = textnorm::join(textnorm::tokenize(hyp_text));
  if (ref.empty()) throw Error("undefined CER: empty reference");
  return error_rate(edit_ops<char>(std::span<const char>(ref.data(), ref.size()),
                                   std::span<const char>(hyp.data(), hyp.size())));
}

void EmbeddingSequence::validate() const {
  if (dim == 0) throw Error("embedding dimension must be positive");
  if (tokens.size() != vectors.size()) {
    throw Error(fmt::format("embedding has {} tokens but {} vectors", tokens.size(), vectors.size()));
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != dim) {
      throw Error(fmt::format("vector {} has dimension {}, expected {}", i, vectors[i].size(), dim));
    }
    double norm2 = 0.0;
    for (double v : vectors[i]) {
      if (!std::isfinite(v)) throw Error(fmt::format("vector {} has a non-finite entry", i));
      norm2 += v * v;
    }
    if (norm2 == 0.0) throw Error(fmt::format("vector {} is zero", i));
  }
}

EmbeddingSequence embeddings_from_json(const json& j) {
  EmbeddingSequence e;
  try {
    e.tokens = j.at("tokens").get<std::vector<std::string>>();
    e.dim = j.at("dim").get<std::size_t>();
    e.vectors = j.at("vectors").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& ex) {
    throw Error(fmt::format("malformed embedding file: {}", ex.what()));
  }
  e.validate();
  return e;
}

json embeddings_to_json(const EmbeddingSequence& e) {
  return {{"tokens", e.tokens}, {"dim", e.dim}, {"vectors", e.vectors}};
}

EmbeddingSequence load_embeddings(const std::filesystem::path& path) {
  try {
    return embeddings_from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& ex) {
    throw Error(fmt::format("{}: {}", path.string(), ex.what()));
  }
}

namespace {

std::vector<std::vector<double>> unit_vectors(const EmbeddingSequence& e) {
  std::vector<std::vector<double>> out = e.vectors;
  for (auto& v : out) {
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
  }
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Mean over `from` of the best cosine against any vector in `to`.
double greedy_mean(const std::vector<std::vector<double>>& from,
                   const std::vector<std::vector<double>>& to) {
  double sum = 0.0;
  for (const auto& a : from) {
    double best = -INFINITY;
    for (const auto& b : to) best = std::max(best, dot(a, b));
    sum += best;
  }
  return sum / static_cast<double>(from.size());
}

}  // namespace

SemanticScore semantic_f(const EmbeddingSequence& reference, const EmbeddingSequence& hypothesis) {
  reference.validate();
  if (reference.empty()) throw Error("semantic score undefined for an empty reference");
  SemanticScore s;
  if (hypothesis.empty()) {
    s.empty_hypothesis = true;
    return s;
  }
  hypothesis.validate();
  if (hypothesis.dim != reference.dim) {
    throw Error(fmt::format("embedding dimensions differ: {} vs {}", reference.dim, hypothesis.dim));
  }
  const auto ref = unit_vectors(reference);
  const auto hyp = unit_vectors(hypothesis);
  s.recall = greedy_mean(hyp, ref);
  s.precision = greedy_mean(ref, hyp);
  const double sum = s.precision + s.recall;
  s.f1 = sum == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / sum;
  return s;
}

SemanticScore rescale(const SemanticScore& score, double baseline) {
  if (!(baseline >= 0.0 && baseline < 1.0)) {
    throw Error(fmt::format("rescale baseline {} must lie in [0, 1)", baseline));
  }
  auto f = [&](double v) { return (v - baseline) / (1.0 - baseline); };
  SemanticScore out = score;
  out.precision = f(score.precision);
  out.recall = f(score.recall);
  out.f1 = f(score.f1);
  out.rescaled = true;
  out.baseline = baseline;
  return out;
}

}  // namespace stutterbias
