#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stutterbias/disfluency_plan.hpp"
#include "stutterbias/harness/result_store.hpp"
#include "stutterbias/stats.hpp"

namespace stutterbias::harness {

// Metric keys stored in ScoreRows, in report column order.
inline constexpr std::array<std::string_view, 5> kMetricOrder = {
    "wer", "cer", "semantic_f", "semantic_p", "semantic_r"};
// Metrics that get summary and bias tables.
inline constexpr std::array<std::string_view, 3> kReportedMetrics = {"wer", "cer", "semantic_f"};

struct StatsSettings {
  std::vector<stats::CorrelationMethod> methods{stats::CorrelationMethod::Paired};
  stats::PValueMode p_value = stats::PValueMode::Permutation;
  double alpha = 0.05;
};

struct Unscored {
  std::string corpus;
  std::string provider;
  std::string utterance_id;
  std::string reason;
};

struct ReportInputs {
  std::vector<std::string> corpora;    // report order
  std::vector<std::string> providers;  // report order
  std::vector<ScoreRow> scores;
  std::vector<FailureRecord> failures;
  std::vector<Unscored> unscored;
  // corpus -> utterance id -> disfluency type of its Y version
  std::map<std::string, std::map<std::string, DisfluencyType>> event_types;
  StatsSettings stats;
  std::uint64_t seed = 0;
  std::optional<std::string> similarity_csv;
};

// File name -> contents.
using ReportBundle = std::map<std::string, std::string>;

// Tables (all CSV unless noted):
//
//   summary_<corpus>.csv      model rows plus mu and sigma rows; <metric>_Y/_N columns
//   stats.csv, stats.json     long format: corpus, model, metric, condition
//                             (Y, N or delta), method, value, r, p, n
//   bias_<corpus>.csv         one row per (model or All, metric, method)
//   events_<corpus>.csv       mean WER per event type, <label>_Y/_N columns
//   events_bias_<corpus>.csv  paired WER correlation per event type
//   violin.json               raw scores and quartiles per model, corpus half, metric
//   similarity.csv            when provided
//   failures.json             failed transcriptions and unscored utterances
//
// Values are printed with six decimals; undefined entries are blank.
// Throws when there are no scores and no failures.
ReportBundle build_report(const ReportInputs& inputs);

// Quartiles by linear interpolation between order statistics.
struct ViolinSummary {
  std::vector<double> scores;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
};
ViolinSummary violin_summary(std::vector<double> scores);

void write_report(const ReportBundle& bundle, const std::filesystem::path& dir);

}  // namespace stutterbias::harness
