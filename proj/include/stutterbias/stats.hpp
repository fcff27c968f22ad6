#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stutterbias/error.hpp"

namespace stutterbias::stats {

// Raised when a rank vector has zero variance.
class UndefinedCorrelation : public Error {
 public:
  UndefinedCorrelation() : Error("undefined correlation: zero-variance ranks") {}
};

// Ranks 1..n; tied values share the mean of the ranks they span.
std::vector<double> rank(std::span<const double> values);

double pearson(std::span<const double> x, std::span<const double> y);

// 1 - 6 sum(d^2) / (n (n^2 - 1)) on tie-free rank vectors.
double spearman_closed_form(std::span<const double> rank_x, std::span<const double> rank_y);

// Spearman's r of two samples: the closed form when neither sample has ties,
// Pearson on average ranks otherwise.
double spearman_r(std::span<const double> x, std::span<const double> y);

// Per-utterance scores under the two conditions, index-aligned.
struct PairedScores {
  std::vector<std::string> ids;
  std::vector<double> y;
  std::vector<double> n;

  std::size_t size() const { return y.size(); }
  // At least three finite pairs with matching lengths.
  void validate() const;
  void append(const PairedScores& other);
};

enum class CorrelationMethod {
  Paired,           // r between Y scores and N scores of the same utterance
  PooledIndicator,  // r between a 0/1 condition indicator and the pooled scores
};

enum class PValueMode { Permutation, TApprox };

std::string_view to_string(CorrelationMethod m);
std::string_view to_string(PValueMode m);
CorrelationMethod parse_correlation_method(std::string_view s);
PValueMode parse_p_value_mode(std::string_view s);

struct CorrelationResult {
  double r = 0.0;
  double p = 1.0;
  std::size_t n = 0;
  CorrelationMethod method = CorrelationMethod::Paired;
};

inline constexpr std::size_t kExactPermutationLimit = 8;
inline constexpr std::size_t kRandomPermutations = 10000;

// The two samples a method correlates.
struct CorrelationInput {
  std::vector<double> x;
  std::vector<double> y;
};
CorrelationInput correlation_input(const PairedScores& pairs, CorrelationMethod method);

// r only (p left at 1). Throws UndefinedCorrelation on zero variance.
CorrelationResult spearman(const PairedScores& pairs,
                           CorrelationMethod method = CorrelationMethod::Paired);

// Two-sided p-value of a tie-free Spearman r for n observations.
//
// Permutation: for n <= 8 every one of the n! pairings is enumerated and p is
// the fraction with |r| >= |r_obs|; larger n uses 10,000 seeded random
// permutations and p = (hits + 1) / (10,000 + 1).
// TApprox: t = r sqrt((n - 2) / (1 - r^2)) against Student's t with n - 2
// degrees of freedom; |r| == 1 gives p = 0.
double p_value(double r, std::size_t n, PValueMode mode, std::uint64_t seed = 0);

// Same, permuting the observed samples, so ties are respected.
double p_value(std::span<const double> x, std::span<const double> y, double r, PValueMode mode,
               std::uint64_t seed = 0);

// Two-sided tail probability P(|T| >= |t|) for Student's t with df degrees of
// freedom, via the regularized incomplete beta function
// I_{df/(df+t^2)}(df/2, 1/2), evaluated with Lentz's continued fraction.
double student_t_two_sided(double t, double df);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation
  std::size_t n = 0;
};

Summary summarize(std::span<const double> values);

// Grid of per-model means for one (condition, metric) column, plus the
// cross-model mean of means (mu) and population sd of the means (sigma).
struct ColumnSummary {
  std::map<std::string, Summary> per_model;
  Summary across_models;  // over the per-model means
};

// Groups keyed by (model, column), where a column typically names a
// metric/condition pair such as "wer/Y".
std::map<std::string, ColumnSummary> summarize_columns(
    const std::map<std::string, std::map<std::string, std::vector<double>>>& model_to_columns);

inline constexpr std::string_view kAllModels = "All";

struct BiasCell {
  std::string model;   // a model name or "All"
  std::string metric;
  std::optional<CorrelationResult> result;  // empty when undefined
  std::string note;                         // reason when undefined
};

// One cell per (model, metric) plus an "All" row per metric that pools every
// model's pairs. Cells are ordered by model name, with "All" last.
std::vector<BiasCell> bias_report(
    const std::map<std::string, std::map<std::string, PairedScores>>& model_metric_pairs,
    CorrelationMethod method, PValueMode mode, std::uint64_t seed);

}  // namespace stutterbias::stats
