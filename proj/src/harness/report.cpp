#include "stutterbias/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "stutterbias/corpus.hpp"
#include "stutterbias/error.hpp"
#include "stutterbias/random.hpp"

namespace stutterbias::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  if (v == 0.0) v = 0.0;  // no "-0.000000"
  std::string s = fmt::format("{:.6f}", v);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  return out + "\n";
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

using RowsByProvider = std::map<std::string, std::vector<const ScoreRow*>>;

bool has_metric(const ScoreRow& r, std::string_view m) {
  const std::string key(m);
  return r.y.contains(key) && r.n.contains(key);
}

stats::PairedScores pairs_of(const std::vector<const ScoreRow*>& rows, std::string_view metric) {
  stats::PairedScores ps;
  const std::string key(metric);
  for (const ScoreRow* r : rows) {
    if (!has_metric(*r, metric)) continue;
    ps.ids.push_back(r->utterance_id);
    ps.y.push_back(r->y.at(key));
    ps.n.push_back(r->n.at(key));
  }
  return ps;
}

std::vector<std::string> metrics_present(const RowsByProvider& rows) {
  std::vector<std::string> out;
  for (auto m : kReportedMetrics) {
    const bool any = std::any_of(rows.begin(), rows.end(), [&](const auto& kv) {
      return std::any_of(kv.second.begin(), kv.second.end(),
                         [&](const ScoreRow* r) { return has_metric(*r, m); });
    });
    if (any) out.emplace_back(m);
  }
  return out;
}

std::vector<std::string> ordered_providers(const ReportInputs& in, const RowsByProvider& rows) {
  std::vector<std::string> out;
  for (const auto& p : in.providers) {
    if (rows.contains(p)) out.push_back(p);
  }
  for (const auto& [p, v] : rows) {
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  return out;
}

// Per-model means of each column, with mu/sigma rows over the model means.
std::string grid_csv(const std::vector<std::string>& header_columns,
                     const std::vector<std::string>& models,
                     const std::map<std::string, std::map<std::string, std::vector<double>>>& values) {
  std::map<std::string, std::map<std::string, std::vector<double>>> nonempty;
  for (const auto& [model, cols] : values) {
    for (const auto& [col, v] : cols) {
      if (!v.empty()) nonempty[model][col] = v;
    }
  }
  const auto summary = stats::summarize_columns(nonempty);
  std::vector<std::string> header{"model"};
  header.insert(header.end(), header_columns.begin(), header_columns.end());
  std::string out = csv_line(header);
  for (const auto& model : models) {
    std::vector<std::string> row{model};
    for (const auto& col : header_columns) {
      const auto it = summary.find(col);
      if (it == summary.end() || !it->second.per_model.contains(model)) {
        row.emplace_back();
      } else {
        row.push_back(num(it->second.per_model.at(model).mean));
      }
    }
    out += csv_line(row);
  }
  for (const bool is_mu : {true, false}) {
    std::vector<std::string> row{is_mu ? "mu" : "sigma"};
    for (const auto& col : header_columns) {
      const auto it = summary.find(col);
      if (it == summary.end()) {
        row.emplace_back();
      } else {
        const auto& s = it->second.across_models;
        row.push_back(num(is_mu ? s.mean : s.sd));
      }
    }
    out += csv_line(row);
  }
  return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

ViolinSummary violin_summary(std::vector<double> scores) {
  if (scores.empty()) throw Error("cannot summarize an empty score group");
  ViolinSummary s;
  s.scores = scores;
  std::sort(scores.begin(), scores.end());
  auto quantile = [&](double p) {
    const double h = (static_cast<double>(scores.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = static_cast<std::size_t>(std::ceil(h));
    return scores[lo] + (h - static_cast<double>(lo)) * (scores[hi] - scores[lo]);
  };
  s.min = scores.front();
  s.max = scores.back();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.mean = mean_of(scores);
  return s;
}

ReportBundle build_report(const ReportInputs& in) {
  if (in.scores.empty() && in.failures.empty()) throw Error("result store has no scores to report");
  ReportBundle bundle;

  std::map<std::string, RowsByProvider> by_corpus;
  for (const auto& r : in.scores) by_corpus[r.corpus][r.provider].push_back(&r);
  std::vector<std::string> corpora;
  for (const auto& c : in.corpora) {
    if (by_corpus.contains(c)) corpora.push_back(c);
  }
  for (const auto& [c, v] : by_corpus) {
    if (std::find(corpora.begin(), corpora.end(), c) == corpora.end()) corpora.push_back(c);
  }

  std::string stats_csv = csv_line({"corpus", "model", "metric", "condition", "method", "value", "r",
                                    "p", "n"});
  json stats_rows = json::array();
  json notes = json::array();
  json violin = json::array();

  for (const auto& corpus : corpora) {
    const auto& rows = by_corpus.at(corpus);
    const auto providers = ordered_providers(in, rows);
    const auto metrics = metrics_present(rows);
    const std::uint64_t corpus_seed = derive_seed(in.seed, corpus);

    // Summary grid.
    {
      std::vector<std::string> cols;
      std::map<std::string, std::map<std::string, std::vector<double>>> values;
      for (const auto& m : metrics) {
        cols.push_back(m + "_Y");
        cols.push_back(m + "_N");
      }
      for (const auto& p : providers) {
        for (const auto& m : metrics) {
          const auto ps = pairs_of(rows.at(p), m);
          values[p][m + "_Y"] = ps.y;
          values[p][m + "_N"] = ps.n;
        }
      }
      bundle["summary_" + corpus + ".csv"] = grid_csv(cols, providers, values);
    }

    // Bias tables and long-format stats.
    std::map<std::string, std::map<std::string, stats::PairedScores>> model_metric;
    for (const auto& p : providers) {
      for (const auto& m : metrics) model_metric[p][m] = pairs_of(rows.at(p), m);
    }
    std::string bias_csv = csv_line({"model", "metric", "method", "r", "p", "n", "significant", "note"});
    std::map<std::string, std::vector<stats::BiasCell>> cells_by_method;
    for (const auto method : in.stats.methods) {
      auto cells = stats::bias_report(model_metric, method, in.stats.p_value,
                                      derive_seed(corpus_seed, stats::to_string(method)));
      // bias_report sorts models by name; restore the configured order.
      std::stable_sort(cells.begin(), cells.end(), [&](const auto& a, const auto& b) {
        auto pos = [&](const std::string& m) {
          const auto it = std::find(providers.begin(), providers.end(), m);
          return it == providers.end() ? providers.size() : static_cast<std::size_t>(it - providers.begin());
        };
        return pos(a.model) < pos(b.model);
      });
      for (const auto& c : cells) {
        if (c.result) {
          bias_csv += csv_line({c.model, c.metric, std::string(stats::to_string(method)),
                                num(c.result->r), num(c.result->p), std::to_string(c.result->n),
                                c.result->p < in.stats.alpha ? "yes" : "no", ""});
        } else {
          bias_csv += csv_line({c.model, c.metric, std::string(stats::to_string(method)), "", "", "",
                                "", c.note});
          notes.push_back({{"corpus", corpus}, {"model", c.model}, {"metric", c.metric},
                           {"method", stats::to_string(method)}, {"note", c.note}});
        }
      }
      cells_by_method[std::string(stats::to_string(method))] = std::move(cells);
    }
    bundle["bias_" + corpus + ".csv"] = bias_csv;

    std::vector<std::string> models = providers;
    models.emplace_back(stats::kAllModels);
    for (const auto& model : models) {
      for (const auto& m : metrics) {
        stats::PairedScores ps;
        if (model == stats::kAllModels) {
          for (const auto& p : providers) ps.append(model_metric[p][m]);
        } else {
          ps = model_metric[model][m];
        }
        if (ps.size() == 0) continue;
        std::vector<double> delta(ps.size());
        for (std::size_t i = 0; i < ps.size(); ++i) delta[i] = ps.y[i] - ps.n[i];
        const std::vector<std::pair<std::string, double>> conditions = {
            {"Y", mean_of(ps.y)}, {"N", mean_of(ps.n)}};
        for (const auto& [cond, value] : conditions) {
          stats_csv += csv_line({corpus, model, m, cond, "", num(value), "", "", std::to_string(ps.size())});
          stats_rows.push_back({{"corpus", corpus}, {"model", model}, {"metric", m},
                                {"condition", cond}, {"method", nullptr}, {"value", value},
                                {"r", nullptr}, {"p", nullptr}, {"n", ps.size()}});
        }
        for (const auto& [method, cells] : cells_by_method) {
          const auto it = std::find_if(cells.begin(), cells.end(), [&](const stats::BiasCell& c) {
            return c.model == model && c.metric == m;
          });
          std::optional<double> r, p;
          std::size_t n = ps.size();
          if (it != cells.end() && it->result) {
            r = it->result->r;
            p = it->result->p;
            n = it->result->n;
          }
          stats_csv += csv_line({corpus, model, m, "delta", method, num(mean_of(delta)),
                                 r ? num(*r) : "", p ? num(*p) : "", std::to_string(n)});
          stats_rows.push_back({{"corpus", corpus}, {"model", model}, {"metric", m},
                                {"condition", "delta"}, {"method", method},
                                {"value", mean_of(delta)}, {"r", optional_number(r)},
                                {"p", optional_number(p)}, {"n", n}});
        }
      }
    }

    // Per-event tables.
    if (const auto et = in.event_types.find(corpus); et != in.event_types.end() && !et->second.empty()) {
      std::vector<std::string> cols;
      for (auto t : kReportTypeOrder) {
        cols.push_back(std::string(report_label(t)) + "_Y");
        cols.push_back(std::string(report_label(t)) + "_N");
      }
      std::map<std::string, std::map<std::string, std::vector<double>>> values;
      std::map<std::string, std::map<std::string, stats::PairedScores>> event_pairs;
      for (const auto& p : providers) {
        std::map<DisfluencyType, std::vector<const ScoreRow*>> split;
        for (const ScoreRow* r : rows.at(p)) {
          if (const auto it = et->second.find(r->utterance_id); it != et->second.end()) {
            split[it->second].push_back(r);
          }
        }
        for (auto t : kReportTypeOrder) {
          const auto ps = pairs_of(split[t], "wer");
          const std::string label(report_label(t));
          values[p][label + "_Y"] = ps.y;
          values[p][label + "_N"] = ps.n;
          event_pairs[p][label] = ps;
        }
      }
      bundle["events_" + corpus + ".csv"] = grid_csv(cols, providers, values);

      std::vector<std::string> header{"model", "method"};
      for (auto t : kReportTypeOrder) {
        header.push_back(std::string(report_label(t)) + "_r");
        header.push_back(std::string(report_label(t)) + "_p");
      }
      std::string ev_csv = csv_line(header);
      for (const auto method : in.stats.methods) {
        const auto cells = stats::bias_report(
            event_pairs, method, in.stats.p_value,
            derive_seed(corpus_seed, fmt::format("events/{}", stats::to_string(method))));
        for (const auto& model : models) {
          std::vector<std::string> row{model, std::string(stats::to_string(method))};
          for (auto t : kReportTypeOrder) {
            const std::string label(report_label(t));
            const auto it = std::find_if(cells.begin(), cells.end(), [&](const stats::BiasCell& c) {
              return c.model == model && c.metric == label;
            });
            if (it != cells.end() && it->result) {
              row.push_back(num(it->result->r));
              row.push_back(num(it->result->p));
            } else {
              row.emplace_back();
              row.emplace_back();
            }
          }
          ev_csv += csv_line(row);
        }
      }
      bundle["events_bias_" + corpus + ".csv"] = ev_csv;
    }

    // Plot data.
    for (const auto& p : providers) {
      for (const auto& m : metrics) {
        const auto ps = pairs_of(rows.at(p), m);
        if (ps.size() == 0) continue;
        for (const auto& [cond, scores] : {std::pair{"Y", ps.y}, std::pair{"N", ps.n}}) {
          const auto v = violin_summary(scores);
          violin.push_back({{"corpus", corpus}, {"condition", cond}, {"model", p}, {"metric", m},
                            {"ids", ps.ids}, {"scores", v.scores}, {"min", v.min}, {"q1", v.q1},
                            {"median", v.median}, {"q3", v.q3}, {"max", v.max}, {"mean", v.mean}});
        }
      }
    }
  }

  bundle["stats.csv"] = stats_csv;
  bundle["stats.json"] = json({{"alpha", in.stats.alpha},
                               {"p_value", stats::to_string(in.stats.p_value)},
                               {"rows", stats_rows},
                               {"notes", notes}})
                             .dump(2) +
                         "\n";
  bundle["violin.json"] = json({{"series", violin}}).dump(2) + "\n";
  if (in.similarity_csv) bundle["similarity.csv"] = *in.similarity_csv;

  json failures = json::array();
  for (const auto& f : in.failures) {
    failures.push_back({{"corpus", f.corpus}, {"provider", f.provider},
                        {"condition", to_string(f.condition)}, {"id", f.utterance_id},
                        {"error", f.error}, {"attempts", f.attempts}});
  }
  json unscored = json::array();
  for (const auto& u : in.unscored) {
    unscored.push_back({{"corpus", u.corpus}, {"provider", u.provider}, {"id", u.utterance_id},
                        {"reason", u.reason}});
  }
  bundle["failures.json"] = json({{"failures", failures}, {"unscored", unscored}}).dump(2) + "\n";
  return bundle;
}

void write_report(const ReportBundle& bundle, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& [name, content] : bundle) write_file(dir / name, content);
}

}  // namespace stutterbias::harness
