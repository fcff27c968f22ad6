#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "stutterbias/error.hpp"
#include "stutterbias/fixture.hpp"
#include "stutterbias/harness/experiment.hpp"

namespace fs = std::filesystem;
using namespace stutterbias;
using namespace stutterbias::harness;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool strict = false;
  std::optional<std::size_t> parallelism;
};

ExperimentConfig load_config(const Globals& g) {
  if (g.config_path.empty()) throw Error("--config is required for this command");
  auto c = load_experiment_config(g.config_path);
  if (g.seed) c.seed = *g.seed;
  if (g.strict) c.strict = true;
  if (g.parallelism) c.parallelism = *g.parallelism;
  c.validate();
  return c;
}

void write_selected(const ReportBundle& bundle, const fs::path& dir,
                    bool (*keep)(const std::string&)) {
  ReportBundle selected;
  for (const auto& [name, content] : bundle) {
    if (keep(name)) selected[name] = content;
  }
  write_report(selected, dir);
  for (const auto& [name, content] : selected) fmt::print("wrote {}\n", (dir / name).string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disfluency bias toolkit for ASR evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "Experiment config (JSON)");
  app.add_option("--seed", g.seed, "Override the config seed");
  app.add_flag("--strict", g.strict, "Fail instead of skipping work that needs the sidecar");
  app.add_option("--parallelism", g.parallelism, "Concurrent workers")->check(CLI::PositiveNumber);

  auto* generate = app.add_subcommand("generate", "Build a synthetic Y corpus and its paired N subset");
  std::string gen_source, gen_out, gen_name, gen_types;
  std::optional<double> gen_fraction;
  generate->add_option("--source", gen_source, "Source condition-N manifest");
  generate->add_option("--out", gen_out, "Output directory");
  generate->add_option("--name", gen_name, "Corpus stem; outputs are <name>-Y and <name>-N");
  generate->add_option("--fraction", gen_fraction, "Fraction of the source to use");
  generate->add_option("--types", gen_types, "Comma-separated disfluency types");

  auto* transcribe = app.add_subcommand("transcribe", "Transcribe every corpus with every provider");
  auto* score = app.add_subcommand("score", "Score stored transcriptions");
  auto* stats_cmd = app.add_subcommand("stats", "Write summary and correlation tables");
  auto* similarity_cmd = app.add_subcommand("similarity", "Run the spectrogram similarity audit");
  auto* report = app.add_subcommand("report", "Write the full report bundle from the store");
  auto* run = app.add_subcommand("run", "Transcribe, score and report");

  auto* make_fixture = app.add_subcommand("make-fixture", "Write a tone-word test corpus");
  std::string fixture_out;
  fixture::FixtureOptions fixture_opts;
  make_fixture->add_option("--out", fixture_out, "Output directory")->required();
  make_fixture->add_option("--name", fixture_opts.corpus_name, "Corpus name");
  make_fixture->add_option("--count", fixture_opts.utterances, "Number of utterances");

  auto* compact = app.add_subcommand("compact", "Rewrite the result store without superseded records");

  CLI11_PARSE(app, argc, argv);

  try {
    if (make_fixture->parsed()) {
      if (g.seed) fixture_opts.seed = *g.seed;
      const auto m = fixture::make_tone_corpus(fixture_out, fixture_opts);
      fmt::print("wrote {} utterances to {}\n", m.utterances.size(),
                 (fs::path(fixture_out) / "manifest.jsonl").string());
      return 0;
    }

    if (generate->parsed()) {
      ExperimentConfig config;
      if (!g.config_path.empty()) {
        config = load_config(g);
      } else {
        if (!g.seed) throw Error("generate needs --seed or --config");
        config.seed = *g.seed;
        config.strict = g.strict;
        config.parallelism = g.parallelism.value_or(1);
      }
      GenerationSettings gs = config.generation.value_or(GenerationSettings{});
      if (!gen_source.empty()) gs.source = gen_source;
      if (!gen_out.empty()) gs.output_dir = gen_out;
      if (!gen_name.empty()) gs.options.name = gen_name;
      if (gen_fraction) gs.options.fraction = *gen_fraction;
      if (!gen_types.empty()) {
        gs.options.types.clear();
        std::size_t start = 0;
        while (start <= gen_types.size()) {
          const auto end = std::min(gen_types.find(',', start), gen_types.size());
          gs.options.types.push_back(parse_disfluency_type(gen_types.substr(start, end - start)));
          start = end + 1;
        }
      }
      if (gs.source.empty() || gs.output_dir.empty()) {
        throw Error("generate needs a source manifest and an output directory");
      }
      gs.options.seed = config.seed;
      gs.options.strict = config.strict;
      gs.options.sidecar = config.sidecar;
      gs.options.parallelism = config.parallelism;
      const auto result = generate_synthetic_corpus(load_manifest(gs.source), gs.options, gs.output_dir);
      fmt::print("wrote {} ({} utterances, {} skipped)\n", result.y_manifest.string(),
                 result.y.utterances.size(), result.skipped.size());
      fmt::print("wrote {}\n", result.n_manifest.string());
      return 0;
    }

    const auto config = load_config(g);

    ResultStore store(config.store);
    if (compact->parsed()) {
      store.compact();
      fmt::print("compacted {}\n", config.store.string());
      return 0;
    }
    if (transcribe->parsed()) {
      const auto s = transcribe_all(config, store);
      fmt::print("{} provider requests, {} cached, {} failures\n", s.requests, s.cached, s.failures);
      return 0;
    }
    if (score->parsed()) {
      const auto s = score_all(config, store);
      fmt::print("{} score rows ({} new or changed), {} unscored\n", s.rows, s.appended, s.unscored.size());
      return 0;
    }
    if (stats_cmd->parsed()) {
      const auto bundle = build_experiment_report(config, store);
      write_selected(bundle, config.output_dir, [](const std::string& n) {
        return n.starts_with("stats.") || n.starts_with("summary_") || n.starts_with("bias_");
      });
      return 0;
    }
    if (similarity_cmd->parsed()) {
      write_report({{"similarity.csv", similarity_audit(config)}}, config.output_dir);
      fmt::print("wrote {}\n", (config.output_dir / "similarity.csv").string());
      return 0;
    }
    if (report->parsed()) {
      const auto s = score_all(config, store);
      const auto bundle = build_experiment_report(config, store, s.unscored);
      write_selected(bundle, config.output_dir, [](const std::string&) { return true; });
      return 0;
    }
    if (run->parsed()) {
      const auto s = run_experiment(config);
      fmt::print("{} provider requests, {} cached, {} failures, {} score rows\n", s.transcribe.requests,
                 s.transcribe.cached, s.transcribe.failures, s.score.rows);
      fmt::print("wrote {} files to {}\n", s.report.size(), config.output_dir.string());
      return 0;
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
