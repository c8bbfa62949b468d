#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qag/backend.hpp"
#include "qag/corpus.hpp"
#include "qag/prompting.hpp"

namespace qag {

enum class Strategy { implicit, pos, wh, ent, pos_wh, ent_wh, combined };

std::string_view to_string(Strategy s);
std::optional<Strategy> strategy_from_string(std::string_view s);

struct ParseOutcome {
  std::vector<QAPair> pairs;          // question/answer only; ids assigned later
  std::vector<std::string> errors;
};

// single mode: case-insensitive "question:" ... "answer:" grammar; the text
// between the first question marker and the final answer marker is the
// question, the rest is the answer; whitespace, one trailing comma and
// surrounding quotes are trimmed. multi mode splits on repeated "question:"
// markers (tolerating "1." style enumeration) and parses each segment.
ParseOutcome parse_generation(std::string_view raw, bool multi);

// Locates the answer in the document: first case-insensitive exact
// occurrence, then a token-level match ignoring edge punctuation and
// whitespace runs. On success answer_start is set and answer_text is
// canonicalized to the document slice; otherwise the pair stays ungrounded.
QAPair ground_answer(const Document& doc, QAPair qa);

// One generated sample under one condition.
struct GenerationResult {
  std::string doc_id;
  std::string strategy;
  DiversityCondition condition = ImplicitCond{};
  std::string condition_key;       // includes the WH suffix for two-step flows
  std::string raw;
  std::vector<QAPair> parsed;      // grounded() reflects the slice check
  double latency_ms = 0.0;
  std::vector<std::string> parse_errors;
};

struct StrategyCounters {
  std::size_t scheduled_calls = 0;
  std::size_t failures = 0;            // backend calls that failed after retries
  std::size_t predictor_none = 0;      // conditions skipped on "none"
  std::size_t predictor_errors = 0;    // unparseable predictor output
  std::size_t predictor_other_skipped = 0;  // predicted "other" types (never prompted)
  std::size_t parse_errors = 0;
  std::size_t duplicates_dropped = 0;
  std::size_t ungrounded = 0;
};

struct CallFailure {
  std::string doc_id;
  std::string condition_key;
  std::string error;
  int attempts = 0;
};

struct StrategyRun {
  std::vector<GenerationResult> results;  // deterministic schedule order
  StrategyCounters counters;
  std::vector<CallFailure> failures;
};

struct RunOptions {
  int n = 5;                    // samples for implicit; pair cap for combined
  int k = 5;                    // position splits
  bool dedup = true;            // drop duplicate questions before returning;
                                // analysis paths disable this so redundancy
                                // stays measurable
  std::optional<double> near_dedup_threshold;
  int max_entities = 0;         // 0 = unlimited
  int concurrency = 1;          // backend calls in flight
  std::string label;            // report/strategy label; default to_string(strategy)
};

// Runs one strategy schedule over one document: implicit = n samples of the
// generic prompt; pos = one call per split; wh = one per promptable type;
// ent = one per inference entity; pos_wh/ent_wh = predictor-gated two-step
// calls; combined = a single multi-pair call. Outputs are parsed, grounded
// and deduplicated; per-call failures become counters, never aborts.
StrategyRun run_strategy(const Document& doc, Strategy strategy, GenerationBackend& backend,
                         const EntityTagger& tagger, const PromptTemplateSet& templates,
                         const DecodingConfig& decoding, const RunOptions& options = {},
                         GenerationBackend* predictor = nullptr);

// Drops pairs whose normalized question was already kept for the same
// document; with near_threshold set, also pairs whose question-token overlap
// coefficient with a kept question reaches the threshold. Keeps first
// occurrences in input order.
std::vector<GenerationResult> dedup(std::vector<GenerationResult> results,
                                    std::optional<double> near_threshold = std::nullopt,
                                    std::size_t* dropped = nullptr);

// Serialization of results (one JSON object per line) for analyze/export.
void write_results_jsonl(const std::vector<GenerationResult>& results, const std::string& path);
std::vector<GenerationResult> read_results_jsonl(const std::string& path);

}  // namespace qag
