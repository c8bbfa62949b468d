#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qag/config.hpp"
#include "qag/errors.hpp"
#include "qag/generation.hpp"
#include "qag/metrics.hpp"
#include "qag/rng.hpp"
#include "qag/squad_io.hpp"

namespace fs = std::filesystem;
using namespace qag;

namespace {

// Exit codes: 0 ok, 2 input/format, 3 backend, 4 config, 64 usage.
constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kBackendError = 3;
constexpr int kConfigError = 4;
constexpr int kUsageError = 64;

std::string g_run_id = "--------";

void log_line(std::string_view level, std::string_view msg,
              const std::map<std::string, std::string>& fields = {}) {
  std::cerr << "run=" << g_run_id << " level=" << level << " msg=\"" << msg << "\"";
  for (const auto& [k, v] : fields) std::cerr << ' ' << k << '=' << v;
  std::cerr << "\n";
}

void set_run_id(const std::string& subcommand, const std::string& salt) {
  std::ostringstream hex;
  hex << std::hex << std::setw(8) << std::setfill('0')
      << (fnv1a(subcommand + "|" + salt) & 0xffffffffULL);
  g_run_id = hex.str();
}

int classify_exit(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) != nullptr ||
      dynamic_cast<const TemplateError*>(&e) != nullptr) {
    return kConfigError;
  }
  if (dynamic_cast<const BackendError*>(&e) != nullptr ||
      dynamic_cast<const CapabilityError*>(&e) != nullptr) {
    return kBackendError;
  }
  return kInputError;
}

PipelineConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return PipelineConfig{};
  return PipelineConfig::load(path);
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

int cmd_stats(const std::string& input, const std::string& report_path, bool strict, int k) {
  const Corpus corpus = ingest_squad(input, strict);
  const AnnotationStats stats = annotation_stats(corpus, k);

  std::cout << "documents: " << corpus.documents.size() << "  qa pairs: " << stats.n_qas
            << "  skipped: " << stats.skipped << "\n\n";
  std::cout << "position  fraction\n";
  for (std::size_t i = 0; i < stats.per_position_fraction.size(); ++i) {
    std::cout << "  " << (i + 1) << "       " << std::fixed << std::setprecision(4)
              << stats.per_position_fraction[i] << "\n";
  }
  std::cout << "\nfirst-half fraction: " << std::fixed << std::setprecision(4)
            << stats.first_half_fraction << "\n\nwh type   fraction\n";
  for (const auto& [t, f] : stats.wh_distribution) {
    std::cout << "  " << std::left << std::setw(8) << to_string(t) << std::right << std::fixed
              << std::setprecision(4) << f << "\n";
  }

  if (!report_path.empty()) {
    nlohmann::ordered_json out;
    out["n_documents"] = corpus.documents.size();
    out["n_qas"] = stats.n_qas;
    out["skipped"] = stats.skipped;
    out["per_position_fraction"] = stats.per_position_fraction;
    out["first_half_fraction"] = stats.first_half_fraction;
    out["wh_distribution"] = nlohmann::ordered_json::object();
    for (const auto& [t, f] : stats.wh_distribution) {
      out["wh_distribution"][std::string(to_string(t))] = f;
    }
    std::ofstream file(report_path, std::ios::binary);
    if (!file) throw ExportError("cannot open '" + report_path + "' for writing");
    file << out.dump(2) << "\n";
  }
  log_line("info", "stats complete",
           {{"qas", std::to_string(stats.n_qas)},
            {"first_half", std::to_string(stats.first_half_fraction)}});
  return kOk;
}

// ---------------------------------------------------------------------------
// prepare
// ---------------------------------------------------------------------------

int cmd_prepare(const std::string& input, const std::vector<std::string>& kinds,
                const std::string& out_dir, const std::string& config_path) {
  const PipelineConfig config = load_config_or_default(config_path);
  const Corpus corpus = ingest_squad(input, /*strict=*/false);
  const std::unique_ptr<EntityTagger> tagger = config.make_tagger();
  fs::create_directories(out_dir);

  for (const std::string& kind_name : kinds) {
    const std::optional<RecordKind> kind = record_kind_from_string(kind_name);
    if (!kind) throw ConfigError("unknown record kind \"" + kind_name + "\"");
    const RecordBatch batch =
        build_training_records(corpus, *kind, *tagger, config.templates, config.k_positions);
    const std::string path = (fs::path(out_dir) / (kind_name + ".jsonl")).string();
    write_records_jsonl(batch.records, path);
    log_line("info", "records written",
             {{"kind", kind_name},
              {"records", std::to_string(batch.records.size())},
              {"skipped", std::to_string(batch.skipped)},
              {"path", path}});
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

int cmd_generate(const std::string& input, const std::string& strategy_name,
                 const std::string& config_path, const std::string& out_dir_flag, int n_override,
                 int max_docs, const std::string& label) {
  const PipelineConfig config = load_config_or_default(config_path);
  const std::optional<Strategy> strategy = strategy_from_string(strategy_name);
  if (!strategy) throw ConfigError("unknown strategy \"" + strategy_name + "\"");

  const Corpus corpus = ingest_squad(input, /*strict=*/false);
  const std::unique_ptr<GenerationBackend> backend = config.make_backend();
  const std::unique_ptr<EntityTagger> tagger = config.make_tagger();
  const DecodingConfig decoding = config.decoding_for(strategy_name);
  RunOptions options = config.run_options(*strategy);
  if (n_override > 0) options.n = n_override;
  if (!label.empty()) options.label = label;
  // Keep duplicates in the results file so the diversity analysis measures
  // real redundancy; the exported corpus is deduplicated below.
  options.dedup = false;

  const std::string out_dir =
      out_dir_flag.empty() ? (fs::path(config.output_dir) / options.label).string()
                           : out_dir_flag;
  fs::create_directories(out_dir);

  std::vector<GenerationResult> all_results;
  std::vector<CallFailure> all_failures;
  StrategyCounters totals;
  std::size_t degenerate_docs = 0;
  std::size_t processed = 0;

  for (const Document& doc : corpus.documents) {
    if (max_docs > 0 && processed >= static_cast<std::size_t>(max_docs)) break;
    ++processed;
    try {
      StrategyRun run = run_strategy(doc, *strategy, *backend, *tagger, config.templates,
                                     decoding, options);
      totals.scheduled_calls += run.counters.scheduled_calls;
      totals.failures += run.counters.failures;
      totals.predictor_none += run.counters.predictor_none;
      totals.predictor_errors += run.counters.predictor_errors;
      totals.predictor_other_skipped += run.counters.predictor_other_skipped;
      totals.parse_errors += run.counters.parse_errors;
      totals.duplicates_dropped += run.counters.duplicates_dropped;
      totals.ungrounded += run.counters.ungrounded;
      for (GenerationResult& r : run.results) all_results.push_back(std::move(r));
      for (CallFailure& f : run.failures) all_failures.push_back(std::move(f));
    } catch (const DegenerateDocument&) {
      ++degenerate_docs;
    }
  }

  const std::string results_path = (fs::path(out_dir) / "generations.jsonl").string();
  write_results_jsonl(all_results, results_path);

  // Grounded, deduplicated synthetic corpus in SQuAD format; ungrounded
  // pairs stay behind in the results file.
  std::size_t dedup_dropped = 0;
  const std::vector<GenerationResult> unique_results =
      dedup(all_results, config.near_dedup_threshold, &dedup_dropped);
  Corpus synthetic;
  synthetic.provenance["source"] = input;
  synthetic.provenance["strategy"] = options.label;
  synthetic.provenance["seed"] = std::to_string(config.seed);
  for (const Document& doc : corpus.documents) synthetic.add_document(doc);
  for (const GenerationResult& r : unique_results) {
    for (const QAPair& qa : r.parsed) {
      if (qa.grounded()) synthetic.add_qa(r.doc_id, qa);
    }
  }
  totals.duplicates_dropped = dedup_dropped;
  const std::string synthetic_path = (fs::path(out_dir) / "synthetic.json").string();
  export_squad(synthetic, synthetic_path);

  if (totals.failures > 0 || totals.predictor_errors > 0) {
    nlohmann::ordered_json manifest;
    manifest["failures"] = nlohmann::ordered_json::array();
    for (const CallFailure& f : all_failures) {
      manifest["failures"].push_back({{"doc_id", f.doc_id},
                                      {"condition", f.condition_key},
                                      {"error", f.error},
                                      {"attempts", f.attempts}});
    }
    manifest["counters"] = {{"scheduled_calls", totals.scheduled_calls},
                            {"failures", totals.failures},
                            {"predictor_none", totals.predictor_none},
                            {"predictor_errors", totals.predictor_errors},
                            {"parse_errors", totals.parse_errors},
                            {"duplicates_dropped", totals.duplicates_dropped},
                            {"ungrounded", totals.ungrounded}};
    std::ofstream manifest_file(fs::path(out_dir) / "failures.json", std::ios::binary);
    manifest_file << manifest.dump(2) << "\n";
  }

  log_line("info", "generation complete",
           {{"strategy", options.label},
            {"documents", std::to_string(processed)},
            {"degenerate_docs", std::to_string(degenerate_docs)},
            {"results", std::to_string(all_results.size())},
            {"scheduled", std::to_string(totals.scheduled_calls)},
            {"failures", std::to_string(totals.failures)},
            {"duplicates_dropped", std::to_string(totals.duplicates_dropped)},
            {"ungrounded", std::to_string(totals.ungrounded)}});
  std::cout << "results: " << all_results.size() << "  synthetic pairs: "
            << synthetic.total_qa_count() << "  failures: " << totals.failures << "\n";
  return totals.failures > 0 ? kBackendError : kOk;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

int cmd_analyze(const std::vector<std::string>& gen_paths, const std::string& docs_path,
                const std::string& report_path, const std::string& config_path, int first_n) {
  const PipelineConfig config = load_config_or_default(config_path);
  const Corpus docs = ingest_squad(docs_path, /*strict=*/false);
  const std::unique_ptr<EntityTagger> tagger = config.make_tagger();

  std::vector<std::pair<std::string, std::vector<GenerationResult>>> by_strategy;
  for (const std::string& raw_path : gen_paths) {
    fs::path path(raw_path);
    if (fs::is_directory(path)) path /= "generations.jsonl";
    std::vector<GenerationResult> results = read_results_jsonl(path.string());
    if (results.empty()) {
      log_line("warn", "empty generations file", {{"path", path.string()}});
      continue;
    }
    // One file may hold several labels; keep file order, then label order.
    std::map<std::string, std::size_t> index;
    for (GenerationResult& r : results) {
      auto [it, inserted] = index.try_emplace(r.strategy, by_strategy.size());
      if (inserted) by_strategy.emplace_back(r.strategy, std::vector<GenerationResult>{});
      by_strategy[it->second].second.push_back(std::move(r));
    }
  }

  ReportOptions options;
  options.first_n = first_n;
  options.k = config.k_positions;
  std::vector<DocumentDetail> detail;
  const std::vector<DiversityReport> reports =
      diversity_report(by_strategy, docs, *tagger, options, &detail);
  if (reports.empty()) {
    throw UndefinedMetric("no strategy produced a document with >= 2 parsed pairs");
  }

  std::cout << std::left << std::setw(18) << "strategy" << std::right << std::setw(9) << "overlap"
            << std::setw(9) << "pos" << std::setw(9) << "wh" << std::setw(9) << "ent"
            << std::setw(12) << "ms/5" << std::setw(8) << "docs" << std::setw(8) << "pairs"
            << "\n";
  for (const DiversityReport& r : reports) {
    std::cout << std::left << std::setw(18) << r.strategy << std::right << std::fixed
              << std::setprecision(2) << std::setw(9) << r.overlap_pct << std::setw(9)
              << r.pos_coverage_pct << std::setw(9) << r.wh_coverage_pct << std::setw(9)
              << r.ent_coverage_pct << std::setw(12) << r.avg_time_ms_per_5 << std::setw(8)
              << r.n_documents << std::setw(8) << r.n_pairs << "\n";
  }

  write_report_csv(reports, report_path);
  fs::path detail_path(report_path);
  detail_path.replace_extension(".detail.json");
  write_report_detail_json(detail, detail_path.string());
  log_line("info", "analyze complete",
           {{"strategies", std::to_string(reports.size())}, {"report", report_path}});
  return kOk;
}

// ---------------------------------------------------------------------------
// export
// ---------------------------------------------------------------------------

int cmd_export(const std::string& gen_path, const std::string& format,
               const std::string& merge_path, long long size, std::uint64_t seed,
               const std::string& out_path, const std::string& docs_path) {
  if (format != "squad") throw ConfigError("unsupported export format \"" + format + "\"");

  Corpus synthetic;
  fs::path path(gen_path);
  if (fs::is_directory(path)) path /= "synthetic.json";
  if (path.extension() == ".jsonl") {
    // Raw generation results: re-ground against the source documents.
    if (docs_path.empty()) {
      throw ConfigError("--docs is required when --gen points at a results file");
    }
    const Corpus docs = ingest_squad(docs_path, /*strict=*/false);
    for (const Document& doc : docs.documents) synthetic.add_document(doc);
    for (const GenerationResult& r : read_results_jsonl(path.string())) {
      const Document* doc = synthetic.find_document(r.doc_id);
      if (doc == nullptr) continue;
      for (const QAPair& qa : r.parsed) {
        const QAPair grounded = ground_answer(*doc, qa);
        if (grounded.grounded()) synthetic.add_qa(r.doc_id, grounded);
      }
    }
  } else {
    synthetic = ingest_squad(path.string(), /*strict=*/false);
  }

  Corpus result = synthetic;
  if (!merge_path.empty()) {
    const Corpus human = ingest_squad(merge_path, /*strict=*/false);
    result = merge(human, synthetic);  // H+Syn concatenation
  }
  if (size >= 0) {
    result = sample_to_size(result, static_cast<std::size_t>(size), seed);
  }
  export_squad(result, out_path);
  std::cout << "exported " << result.total_qa_count() << " pairs over "
            << result.documents.size() << " documents\n";
  log_line("info", "export complete",
           {{"pairs", std::to_string(result.total_qa_count())}, {"out", out_path}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diversity-conditioned question-answer generation pipeline"};
  app.require_subcommand(1);

  // stats
  std::string stats_input, stats_report;
  bool stats_strict = false;
  int stats_k = 5;
  CLI::App* stats = app.add_subcommand("stats", "Annotation statistics of a SQuAD-format file");
  stats->add_option("--input", stats_input, "SQuAD v1.1 input file")->required();
  stats->add_option("--report", stats_report, "Write the statistics as JSON");
  stats->add_flag("--strict", stats_strict, "Fail on any offset mismatch");
  stats->add_option("--k", stats_k, "Number of position splits")->default_val(5);

  // prepare
  std::string prep_input, prep_out, prep_config;
  std::vector<std::string> prep_kinds;
  CLI::App* prepare = app.add_subcommand("prepare", "Emit fine-tuning record files");
  prepare->add_option("--input", prep_input, "SQuAD v1.1 input file")->required();
  prepare->add_option("--kinds", prep_kinds,
                      "Record kinds (qag_pos qag_wh qag_ent wh_pred_pos wh_pred_ent)")
      ->required()
      ->delimiter(',');
  prepare->add_option("--out", prep_out, "Output directory")->required();
  prepare->add_option("--config", prep_config, "Pipeline config JSON");

  // generate
  std::string gen_input, gen_strategy, gen_config, gen_out, gen_label;
  int gen_n = 0, gen_max_docs = 0;
  CLI::App* generate = app.add_subcommand("generate", "Run a generation strategy over all documents");
  generate->add_option("--input", gen_input, "SQuAD v1.1 input file")->required();
  generate->add_option("--strategy", gen_strategy,
                       "implicit|pos|wh|ent|pos_wh|ent_wh|combined")
      ->required();
  generate->add_option("--config", gen_config, "Pipeline config JSON");
  generate->add_option("--out", gen_out,
                       "Output directory (default: <config output_dir>/<strategy>)");
  generate->add_option("--n", gen_n, "Samples (implicit) or pair cap (combined)");
  generate->add_option("--max-docs", gen_max_docs, "Process only the first N documents");
  generate->add_option("--label", gen_label, "Strategy label used in results and reports");

  // analyze
  std::vector<std::string> an_gen;
  std::string an_docs, an_report, an_config;
  int an_first_n = 5;
  CLI::App* analyze = app.add_subcommand("analyze", "Diversity report across strategies");
  analyze->add_option("--gen", an_gen, "Generation output dirs or generations.jsonl files")
      ->required();
  analyze->add_option("--docs", an_docs, "SQuAD v1.1 file with the source documents")->required();
  analyze->add_option("--report", an_report, "CSV report path")->required();
  analyze->add_option("--config", an_config, "Pipeline config JSON");
  analyze->add_option("--first-n", an_first_n, "Pairs per document entering the metrics")
      ->default_val(5);

  // export
  std::string ex_gen, ex_format = "squad", ex_merge, ex_out, ex_docs;
  long long ex_size = -1;
  std::uint64_t ex_seed = 1234;
  CLI::App* exporter = app.add_subcommand("export", "Merge, down-sample and export SQuAD data");
  exporter->add_option("--gen", ex_gen, "Generation output dir, synthetic corpus, or results file")
      ->required();
  exporter->add_option("--format", ex_format, "Output format (squad)")->default_val("squad");
  exporter->add_option("--merge", ex_merge, "Human-annotated SQuAD file to concatenate (H+Syn)");
  exporter->add_option("--size", ex_size, "Down-sample to exactly this many pairs");
  exporter->add_option("--seed", ex_seed, "Sampling seed")->default_val(1234);
  exporter->add_option("--out", ex_out, "Output SQuAD file")->required();
  exporter->add_option("--docs", ex_docs, "Source documents (only for raw results files)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (stats->parsed()) {
      set_run_id("stats", stats_input);
      return cmd_stats(stats_input, stats_report, stats_strict, stats_k);
    }
    if (prepare->parsed()) {
      set_run_id("prepare", prep_input);
      return cmd_prepare(prep_input, prep_kinds, prep_out, prep_config);
    }
    if (generate->parsed()) {
      set_run_id("generate", gen_input + "|" + gen_strategy);
      return cmd_generate(gen_input, gen_strategy, gen_config, gen_out, gen_n, gen_max_docs,
                          gen_label);
    }
    if (analyze->parsed()) {
      set_run_id("analyze", an_docs);
      return cmd_analyze(an_gen, an_docs, an_report, an_config, an_first_n);
    }
    if (exporter->parsed()) {
      set_run_id("export", ex_gen);
      return cmd_export(ex_gen, ex_format, ex_merge, ex_size, ex_seed, ex_out, ex_docs);
    }
  } catch (const std::exception& e) {
    log_line("error", e.what());
    return classify_exit(e);
  }
  return kOk;
}
