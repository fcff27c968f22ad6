#include "stutterbias/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "stutterbias/random.hpp"

namespace stutterbias::stats {

std::vector<double> rank(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

namespace {

bool has_ties(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

void require_same_size(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(fmt::format("sample sizes differ: {} vs {}", x.size(), y.size()));
  }
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  require_same_size(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelation();
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman_closed_form(std::span<const double> rx, std::span<const double> ry) {
  require_same_size(rx, ry);
  const double n = static_cast<double>(rx.size());
  if (rx.size() < 2) throw UndefinedCorrelation();
  double d2 = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double d = rx[i] - ry[i];
    d2 += d * d;
  }
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

double spearman_r(std::span<const double> x, std::span<const double> y) {
  require_same_size(x, y);
  const auto rx = rank(x);
  const auto ry = rank(y);
  if (has_ties(x) || has_ties(y)) return pearson(rx, ry);
  return spearman_closed_form(rx, ry);
}

void PairedScores::validate() const {
  if (y.size() != n.size() || (!ids.empty() && ids.size() != y.size())) {
    throw Error("paired scores must have equal lengths");
  }
  if (y.size() < 3) throw Error(fmt::format("need at least 3 pairs, have {}", y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i]) || !std::isfinite(n[i])) {
      throw Error(fmt::format("non-finite score at pair {}", i));
    }
  }
}

void PairedScores::append(const PairedScores& other) {
  ids.insert(ids.end(), other.ids.begin(), other.ids.end());
  y.insert(y.end(), other.y.begin(), other.y.end());
  n.insert(n.end(), other.n.begin(), other.n.end());
}

std::string_view to_string(CorrelationMethod m) {
  return m == CorrelationMethod::Paired ? "paired" : "pooled-indicator";
}
std::string_view to_string(PValueMode m) {
  return m == PValueMode::Permutation ? "permutation" : "t_approx";
}
CorrelationMethod parse_correlation_method(std::string_view s) {
  if (s == "paired") return CorrelationMethod::Paired;
  if (s == "pooled-indicator") return CorrelationMethod::PooledIndicator;
  throw Error(fmt::format("unknown correlation method '{}'", s));
}
PValueMode parse_p_value_mode(std::string_view s) {
  if (s == "permutation") return PValueMode::Permutation;
  if (s == "t_approx") return PValueMode::TApprox;
  throw Error(fmt::format("unknown p-value mode '{}'", s));
}

CorrelationInput correlation_input(const PairedScores& pairs, CorrelationMethod method) {
  pairs.validate();
  CorrelationInput in;
  if (method == CorrelationMethod::Paired) {
    in.x = pairs.y;
    in.y = pairs.n;
    return in;
  }
  // Indicator is 1 for the disfluent condition.
  in.x.assign(pairs.size(), 0.0);
  in.x.resize(2 * pairs.size(), 1.0);
  in.y = pairs.n;
  in.y.insert(in.y.end(), pairs.y.begin(), pairs.y.end());
  return in;
}

CorrelationResult spearman(const PairedScores& pairs, CorrelationMethod method) {
  const auto in = correlation_input(pairs, method);
  CorrelationResult res;
  res.r = spearman_r(in.x, in.y);
  res.n = in.x.size();
  res.method = method;
  return res;
}

namespace {

constexpr double kTieTolerance = 1e-12;

double permutation_p(std::vector<double> rx, std::vector<double> ry, double r_obs,
                     std::uint64_t seed) {
  const std::size_t n = rx.size();
  const double threshold = std::abs(r_obs) - kTieTolerance;
  auto r_of = [&](const std::vector<double>& perm) {
    try {
      return pearson(rx, perm);
    } catch (const UndefinedCorrelation&) {
      return 0.0;
    }
  };
  if (n <= kExactPermutationLimit) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<double> perm(n);
    std::size_t hits = 0, total = 0;
    do {
      for (std::size_t i = 0; i < n; ++i) perm[i] = ry[idx[i]];
      if (std::abs(r_of(perm)) >= threshold) ++hits;
      ++total;
    } while (std::next_permutation(idx.begin(), idx.end()));
    return static_cast<double>(hits) / static_cast<double>(total);
  }
  RandomSource rng(seed);
  std::size_t hits = 0;
  std::vector<double> perm = ry;
  for (std::size_t b = 0; b < kRandomPermutations; ++b) {
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
    if (std::abs(r_of(perm)) >= threshold) ++hits;
  }
  return static_cast<double>(hits + 1) / static_cast<double>(kRandomPermutations + 1);
}

double t_approx_p(double r, std::size_t n) {
  if (n < 3) throw Error("p-value needs at least 3 observations");
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = r * std::sqrt(df / (1.0 - r * r));
  return student_t_two_sided(t, df);
}

}  // namespace

double p_value(double r, std::size_t n, PValueMode mode, std::uint64_t seed) {
  if (n < 3) throw Error("p-value needs at least 3 observations");
  if (mode == PValueMode::TApprox) return t_approx_p(r, n);
  std::vector<double> ranks(n);
  std::iota(ranks.begin(), ranks.end(), 1.0);
  return permutation_p(ranks, ranks, r, seed);
}

double p_value(std::span<const double> x, std::span<const double> y, double r, PValueMode mode,
               std::uint64_t seed) {
  require_same_size(x, y);
  if (x.size() < 3) throw Error("p-value needs at least 3 observations");
  if (mode == PValueMode::TApprox) return t_approx_p(r, x.size());
  return permutation_p(rank(x), rank(y), r, seed);
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  // The continued fraction converges fast for x < (a + 1) / (a + b + 2); use
  // the symmetry I_x(a, b) = 1 - I_{1-x}(b, a) otherwise.
  if (x > (a + 1.0) / (a + b + 2.0)) return 1.0 - incomplete_beta(b, a, 1.0 - x);

  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-15;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double f = d;
  for (int m = 1; m <= 500; ++m) {
    const double dm = m;
    // even step
    double num = dm * (b - dm) * x / ((a + 2 * dm - 1) * (a + 2 * dm));
    d = 1.0 + num * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + num / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    f *= d * c;
    // odd step
    num = -(a + dm) * (a + b + dm) * x / ((a + 2 * dm) * (a + 2 * dm + 1));
    d = 1.0 + num * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + num / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    f *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(log_front) * f / a;
}

double student_t_two_sided(double t, double df) {
  if (!(df > 0)) throw Error("degrees of freedom must be positive");
  if (!std::isfinite(t)) return 0.0;
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw Error("cannot summarize an empty group");
  Summary s;
  s.n = values.size();
  const double n = static_cast<double>(s.n);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / n);
  return s;
}

std::map<std::string, ColumnSummary> summarize_columns(
    const std::map<std::string, std::map<std::string, std::vector<double>>>& model_to_columns) {
  std::map<std::string, ColumnSummary> out;
  for (const auto& [model, columns] : model_to_columns) {
    for (const auto& [column, values] : columns) {
      out[column].per_model[model] = summarize(values);
    }
  }
  for (auto& [column, cs] : out) {
    std::vector<double> means;
    for (const auto& [model, s] : cs.per_model) means.push_back(s.mean);
    cs.across_models = summarize(means);
  }
  return out;
}

std::vector<BiasCell> bias_report(
    const std::map<std::string, std::map<std::string, PairedScores>>& model_metric_pairs,
    CorrelationMethod method, PValueMode mode, std::uint64_t seed) {
  std::vector<BiasCell> cells;
  std::map<std::string, PairedScores> pooled;

  auto evaluate = [&](const std::string& model, const std::string& metric, const PairedScores& ps) {
    BiasCell cell{model, metric, std::nullopt, {}};
    try {
      const auto in = correlation_input(ps, method);
      CorrelationResult res;
      res.r = spearman_r(in.x, in.y);
      res.n = in.x.size();
      res.method = method;
      res.p = p_value(in.x, in.y, res.r, mode, derive_seed(seed, model + "/" + metric));
      cell.result = res;
    } catch (const UndefinedCorrelation& e) {
      cell.note = e.what();
    } catch (const Error& e) {
      cell.note = e.what();
    }
    cells.push_back(std::move(cell));
  };

  for (const auto& [model, metrics] : model_metric_pairs) {
    for (const auto& [metric, ps] : metrics) {
      evaluate(model, metric, ps);
      pooled[metric].append(ps);
    }
  }
  for (const auto& [metric, ps] : pooled) evaluate(std::string(kAllModels), metric, ps);
  return cells;
}

}  // namespace stutterbias::stats
