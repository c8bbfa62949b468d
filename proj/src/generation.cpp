#include "qag/generation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <set>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "qag/errors.hpp"
#include "qag/text.hpp"

namespace qag {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::implicit: return "implicit";
    case Strategy::pos: return "pos";
    case Strategy::wh: return "wh";
    case Strategy::ent: return "ent";
    case Strategy::pos_wh: return "pos_wh";
    case Strategy::ent_wh: return "ent_wh";
    case Strategy::combined: return "combined";
  }
  return "implicit";
}

std::optional<Strategy> strategy_from_string(std::string_view s) {
  for (Strategy v : {Strategy::implicit, Strategy::pos, Strategy::wh, Strategy::ent,
                     Strategy::pos_wh, Strategy::ent_wh, Strategy::combined}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

namespace {

constexpr std::string_view kQuestionMarker = "question:";
constexpr std::string_view kAnswerMarker = "answer:";

std::string strip_wrapping(std::string_view segment, bool strip_trailing_comma) {
  std::string s = trim(segment);
  if (strip_trailing_comma && !s.empty() && s.back() == ',') {
    s.pop_back();
    s = trim(s);
  }
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\''))) {
    s = trim(s.substr(1, s.size() - 2));
  }
  return s;
}

// Handles one "question: ... answer: ..." segment.
void parse_single_segment(std::string_view raw, ParseOutcome& out) {
  const std::size_t qpos = find_ci(raw, kQuestionMarker);
  if (qpos == std::string_view::npos) {
    out.errors.push_back("missing \"question:\" marker");
    return;
  }
  const std::size_t qbegin = qpos + kQuestionMarker.size();
  std::size_t apos = std::string_view::npos;
  for (std::size_t at = find_ci(raw, kAnswerMarker, qbegin); at != std::string_view::npos;
       at = find_ci(raw, kAnswerMarker, at + 1)) {
    apos = at;  // the final "answer:" wins
  }
  if (apos == std::string_view::npos) {
    out.errors.push_back("missing \"answer:\" marker");
    return;
  }
  QAPair qa;
  qa.question = strip_wrapping(raw.substr(qbegin, apos - qbegin), /*strip_trailing_comma=*/true);
  qa.answer_text = strip_wrapping(raw.substr(apos + kAnswerMarker.size()), false);
  qa.source = QASource::synthetic;
  if (qa.question.empty() || qa.answer_text.empty()) {
    out.errors.push_back("empty question or answer");
    return;
  }
  out.pairs.push_back(std::move(qa));
}

// Removes list enumeration ("1.", "2)", "-", "*") from line starts.
std::string strip_enumeration(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i <= raw.size()) {
    const std::size_t line_end = std::min(raw.size(), raw.find('\n', i));
    std::string_view line = raw.substr(i, line_end - i);
    std::size_t b = 0;
    while (b < line.size() && (line[b] == ' ' || line[b] == '\t')) ++b;
    std::size_t d = b;
    while (d < line.size() && std::isdigit(static_cast<unsigned char>(line[d]))) ++d;
    if (d > b && d < line.size() && (line[d] == '.' || line[d] == ')')) {
      line.remove_prefix(d + 1);
    } else if (b < line.size() && (line[b] == '-' || line[b] == '*')) {
      line.remove_prefix(b + 1);
    }
    out.append(line);
    if (line_end < raw.size()) out.push_back('\n');
    if (line_end == raw.size()) break;
    i = line_end + 1;
  }
  return out;
}

}  // namespace

ParseOutcome parse_generation(std::string_view raw, bool multi) {
  ParseOutcome out;
  if (!multi) {
    parse_single_segment(raw, out);
    return out;
  }
  const std::string cleaned = strip_enumeration(raw);
  std::vector<std::size_t> marks;
  for (std::size_t at = find_ci(cleaned, kQuestionMarker); at != std::string_view::npos;
       at = find_ci(cleaned, kQuestionMarker, at + 1)) {
    marks.push_back(at);
  }
  if (marks.empty()) {
    out.errors.push_back("missing \"question:\" marker");
    return out;
  }
  for (std::size_t i = 0; i < marks.size(); ++i) {
    const std::size_t end = i + 1 < marks.size() ? marks[i + 1] : cleaned.size();
    parse_single_segment(std::string_view(cleaned).substr(marks[i], end - marks[i]), out);
  }
  return out;
}

QAPair ground_answer(const Document& doc, QAPair qa) {
  qa.answer_start.reset();
  const std::string& text = doc.text();

  const std::size_t exact = find_ci(text, qa.answer_text);
  if (exact != std::string_view::npos) {
    qa.answer_start = exact;
    qa.answer_text = text.substr(exact, qa.answer_text.size());
    return qa;
  }

  // Token-level fallback: whitespace runs and edge punctuation forgiven.
  const std::vector<Token> wanted = tokenize(qa.answer_text);
  if (wanted.empty()) return qa;
  const std::vector<Token>& have = doc.tokens();
  if (wanted.size() > have.size()) return qa;
  std::vector<std::string> wanted_low;
  wanted_low.reserve(wanted.size());
  for (const Token& t : wanted) wanted_low.push_back(to_lower(t.text));
  for (std::size_t i = 0; i + wanted.size() <= have.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < wanted.size(); ++j) {
      if (to_lower(have[i + j].text) != wanted_low[j]) {
        match = false;
        break;
      }
    }
    if (match) {
      const std::size_t begin = have[i].begin;
      const std::size_t end = have[i + wanted.size() - 1].end;
      qa.answer_start = begin;
      qa.answer_text = text.substr(begin, end - begin);
      return qa;
    }
  }
  return qa;
}

namespace {

std::set<std::string> question_token_set(const std::string& normalized_question) {
  std::set<std::string> out;
  std::size_t i = 0;
  while (i < normalized_question.size()) {
    const std::size_t sp = normalized_question.find(' ', i);
    const std::size_t end = sp == std::string::npos ? normalized_question.size() : sp;
    if (end > i) out.insert(normalized_question.substr(i, end - i));
    i = end + 1;
  }
  return out;
}

double overlap_coefficient(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::size_t shared = 0;
  for (const std::string& t : a) {
    if (b.contains(t)) ++shared;
  }
  return static_cast<double>(shared) / static_cast<double>(std::min(a.size(), b.size()));
}

struct PlannedCall {
  DiversityCondition condition = ImplicitCond{};
  std::string key;
  std::string prompt;
  int n_samples = 1;
};

struct CallOutcome {
  std::vector<BackendReply> replies;
  bool ok = false;
  std::string error;
  int attempts = 0;
};

// Bounded-concurrency execution preserving call order. Two retries with
// exponential backoff on transport-style errors.
std::vector<CallOutcome> execute_calls(GenerationBackend& backend, const std::string& doc_text,
                                       const std::vector<PlannedCall>& calls,
                                       const DecodingConfig& decoding, int concurrency) {
  std::vector<CallOutcome> outcomes(calls.size());
  if (calls.empty()) return outcomes;

  int limit = std::max(1, concurrency);
  if (backend.max_concurrency() > 0) limit = std::min(limit, backend.max_concurrency());
  limit = std::min<int>(limit, static_cast<int>(calls.size()));

  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= calls.size()) return;
      CallOutcome& slot = outcomes[i];
      constexpr int kMaxRetries = 2;
      for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
        slot.attempts = attempt + 1;
        try {
          slot.replies =
              backend.generate(calls[i].prompt, doc_text, decoding, calls[i].n_samples);
          slot.ok = true;
          break;
        } catch (const BackendError& e) {
          slot.error = e.what();
        } catch (const PipelineError& e) {
          slot.error = e.what();  // structural error: retrying cannot help
          break;
        } catch (const std::exception& e) {
          slot.error = e.what();
        }
        if (attempt < kMaxRetries) {
          std::this_thread::sleep_for(std::chrono::milliseconds(50 << attempt));
        }
      }
    }
  };

  if (limit == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(limit));
    for (int t = 0; t < limit; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return outcomes;
}

std::optional<std::vector<WhType>> parse_wh_list(const std::string& raw) {
  const std::string body = to_lower(trim(raw));
  if (body.empty()) return std::nullopt;
  if (body == "none") return std::vector<WhType>{};
  std::vector<WhType> out;
  std::size_t i = 0;
  while (i <= body.size()) {
    const std::size_t comma = std::min(body.size(), body.find(',', i));
    const std::string piece = trim(std::string_view(body).substr(i, comma - i));
    if (piece.empty()) return std::nullopt;
    const std::optional<WhType> t = wh_from_string(piece);
    if (!t) return std::nullopt;
    out.push_back(*t);
    if (comma == body.size()) break;
    i = comma + 1;
  }
  return out;
}

}  // namespace

std::vector<GenerationResult> dedup(std::vector<GenerationResult> results,
                                    std::optional<double> near_threshold,
                                    std::size_t* dropped) {
  std::size_t removed = 0;
  std::unordered_map<std::string, std::set<std::string>> seen_exact;
  std::unordered_map<std::string, std::vector<std::set<std::string>>> kept_sets;

  for (GenerationResult& result : results) {
    std::vector<QAPair> kept;
    kept.reserve(result.parsed.size());
    for (QAPair& qa : result.parsed) {
      const std::string nq = normalize_question(qa.question);
      if (!seen_exact[result.doc_id].insert(nq).second) {
        ++removed;
        continue;
      }
      bool near_dup = false;
      if (near_threshold) {
        const std::set<std::string> ts = question_token_set(nq);
        for (const auto& other : kept_sets[result.doc_id]) {
          if (overlap_coefficient(ts, other) >= *near_threshold) {
            near_dup = true;
            break;
          }
        }
        if (!near_dup) kept_sets[result.doc_id].push_back(ts);
      }
      if (near_dup) {
        ++removed;
        continue;
      }
      kept.push_back(std::move(qa));
    }
    result.parsed = std::move(kept);
  }
  if (dropped != nullptr) *dropped = removed;
  return results;
}

StrategyRun run_strategy(const Document& doc, Strategy strategy, GenerationBackend& backend,
                         const EntityTagger& tagger, const PromptTemplateSet& templates,
                         const DecodingConfig& decoding, const RunOptions& options,
                         GenerationBackend* predictor) {
  decoding.validate();
  if (!backend.supports(decoding.mode)) {
    throw CapabilityError("backend '" + backend.name() + "' does not support " +
                          std::string(to_string(decoding.mode)) + " decoding");
  }
  const std::string label = options.label.empty() ? std::string(to_string(strategy))
                                                  : options.label;
  StrategyRun run;
  std::vector<PlannedCall> plan;

  auto planned = [&](DiversityCondition cond, std::string prompt, int n_samples = 1,
                     std::string key = {}) {
    PlannedCall call;
    call.key = key.empty() ? condition_key(cond) : std::move(key);
    call.condition = std::move(cond);
    call.prompt = std::move(prompt);
    call.n_samples = n_samples;
    plan.push_back(std::move(call));
  };

  switch (strategy) {
    case Strategy::implicit:
      planned(ImplicitCond{}, build_prompt(ImplicitCond{}, templates), options.n);
      break;
    case Strategy::pos: {
      position_splits(doc, options.k);  // DegenerateDocument surfaces here
      for (int i = 1; i <= options.k; ++i) {
        planned(PositionCond{i}, build_prompt(PositionCond{i}, templates));
      }
      break;
    }
    case Strategy::wh:
      for (WhType t : kWhPromptable) {
        planned(WhCond{t}, build_prompt(WhCond{t}, templates));
      }
      break;
    case Strategy::ent: {
      std::vector<EntitySpan> spans = select_inference_entities(doc, tagger);
      if (options.max_entities > 0 &&
          spans.size() > static_cast<std::size_t>(options.max_entities)) {
        spans.resize(static_cast<std::size_t>(options.max_entities));
      }
      for (EntitySpan& span : spans) {
        planned(EntityCond{span}, build_prompt(EntityCond{span}, templates));
      }
      break;
    }
    case Strategy::combined:
      planned(CombinedCond{options.n}, build_prompt(CombinedCond{options.n}, templates));
      break;
    case Strategy::pos_wh:
    case Strategy::ent_wh: {
      std::vector<DiversityCondition> primaries;
      if (strategy == Strategy::pos_wh) {
        position_splits(doc, options.k);
        for (int i = 1; i <= options.k; ++i) primaries.emplace_back(PositionCond{i});
      } else {
        std::vector<EntitySpan> spans = select_inference_entities(doc, tagger);
        if (options.max_entities > 0 &&
            spans.size() > static_cast<std::size_t>(options.max_entities)) {
          spans.resize(static_cast<std::size_t>(options.max_entities));
        }
        for (EntitySpan& span : spans) primaries.emplace_back(EntityCond{span});
      }

      GenerationBackend& wh_predictor = predictor == nullptr ? backend : *predictor;
      std::vector<PlannedCall> predictor_calls;
      for (const DiversityCondition& primary : primaries) {
        PlannedCall call;
        call.condition = primary;
        call.key = condition_key(primary);
        call.prompt = build_predictor_prompt(primary, templates);
        predictor_calls.push_back(std::move(call));
      }
      // The predictor always runs greedy: a sampled WH list would make the
      // two-step schedule nondeterministic.
      DecodingConfig predictor_decoding;
      predictor_decoding.max_new_tokens = decoding.max_new_tokens;
      const std::vector<CallOutcome> predictions = execute_calls(
          wh_predictor, doc.text(), predictor_calls, predictor_decoding, options.concurrency);

      for (std::size_t i = 0; i < primaries.size(); ++i) {
        if (!predictions[i].ok) {
          ++run.counters.predictor_errors;
          run.failures.push_back({doc.id(), predictor_calls[i].key,
                                  "predictor: " + predictions[i].error,
                                  predictions[i].attempts});
          continue;
        }
        const std::optional<std::vector<WhType>> types =
            parse_wh_list(predictions[i].replies.front().text);
        if (!types) {
          ++run.counters.predictor_errors;
          continue;
        }
        if (types->empty()) {
          ++run.counters.predictor_none;
          continue;
        }
        for (WhType t : *types) {
          if (t == WhType::other) {
            ++run.counters.predictor_other_skipped;
            continue;
          }
          planned(primaries[i], build_joint_prompt(primaries[i], t, templates), 1,
                  condition_key(primaries[i]) + "+wh:" + std::string(to_string(t)));
        }
      }
      break;
    }
  }

  for (const PlannedCall& call : plan) {
    run.counters.scheduled_calls += static_cast<std::size_t>(call.n_samples);
  }

  const std::vector<CallOutcome> outcomes =
      execute_calls(backend, doc.text(), plan, decoding, options.concurrency);

  std::unordered_map<std::string, std::size_t> ordinal_by_key;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (!outcomes[i].ok) {
      run.counters.failures += static_cast<std::size_t>(plan[i].n_samples);
      run.failures.push_back({doc.id(), plan[i].key, outcomes[i].error, outcomes[i].attempts});
      continue;
    }
    for (const BackendReply& reply : outcomes[i].replies) {
      GenerationResult result;
      result.doc_id = doc.id();
      result.strategy = label;
      result.condition = plan[i].condition;
      result.condition_key = plan[i].key;
      result.raw = reply.text;
      result.latency_ms = reply.latency_ms;

      ParseOutcome parsed = parse_generation(reply.text, strategy == Strategy::combined);
      if (strategy == Strategy::combined &&
          parsed.pairs.size() > static_cast<std::size_t>(options.n)) {
        parsed.pairs.resize(static_cast<std::size_t>(options.n));
      }
      run.counters.parse_errors += parsed.errors.size();
      result.parse_errors = std::move(parsed.errors);

      std::size_t& ordinal = ordinal_by_key[plan[i].key];
      for (QAPair& qa : parsed.pairs) {
        qa = ground_answer(doc, std::move(qa));
        if (!qa.grounded()) ++run.counters.ungrounded;
        qa.id = doc.id() + ":" + label + ":" + plan[i].key + ":" + std::to_string(ordinal++);
        qa.source = QASource::synthetic;
        qa.strategy_tag = label;
        result.parsed.push_back(std::move(qa));
      }
      run.results.push_back(std::move(result));
    }
  }

  if (options.dedup) {
    std::size_t dropped = 0;
    run.results = dedup(std::move(run.results), options.near_dedup_threshold, &dropped);
    run.counters.duplicates_dropped = dropped;
  }
  return run;
}

namespace {

DiversityCondition condition_from_key(const std::string& key) {
  if (key.rfind("pos:", 0) == 0) {
    return PositionCond{std::atoi(key.c_str() + 4)};
  }
  if (key.rfind("wh:", 0) == 0) {
    if (auto t = wh_from_string(key.substr(3))) return WhCond{*t};
  }
  if (key.rfind("ent:", 0) == 0) {
    EntitySpan span;
    span.text = key.substr(4);
    return EntityCond{span};
  }
  if (key.rfind("combined:", 0) == 0) {
    return CombinedCond{std::atoi(key.c_str() + 9)};
  }
  return ImplicitCond{};
}

}  // namespace

void write_results_jsonl(const std::vector<GenerationResult>& results, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExportError("cannot open '" + path + "' for writing");
  for (const GenerationResult& r : results) {
    nlohmann::ordered_json line;
    line["doc_id"] = r.doc_id;
    line["strategy"] = r.strategy;
    line["condition"] = r.condition_key;
    line["raw"] = r.raw;
    line["latency_ms"] = r.latency_ms;
    line["parse_errors"] = r.parse_errors;
    line["parsed"] = nlohmann::ordered_json::array();
    for (const QAPair& qa : r.parsed) {
      nlohmann::ordered_json item;
      item["id"] = qa.id;
      item["question"] = qa.question;
      item["answer"] = qa.answer_text;
      if (qa.grounded()) item["answer_start"] = *qa.answer_start;
      item["strategy_tag"] = qa.strategy_tag;
      line["parsed"].push_back(std::move(item));
    }
    out << line.dump() << "\n";
  }
  if (!out) throw ExportError("failed writing '" + path + "'");
}

std::vector<GenerationResult> read_results_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::vector<GenerationResult> results;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    GenerationResult r;
    r.doc_id = obj.value("doc_id", "");
    r.strategy = obj.value("strategy", "");
    r.condition_key = obj.value("condition", "");
    r.condition = condition_from_key(r.condition_key);
    r.raw = obj.value("raw", "");
    r.latency_ms = obj.value("latency_ms", 0.0);
    if (obj.contains("parse_errors")) {
      for (const auto& e : obj["parse_errors"]) r.parse_errors.push_back(e.get<std::string>());
    }
    if (obj.contains("parsed")) {
      for (const auto& item : obj["parsed"]) {
        QAPair qa;
        qa.id = item.value("id", "");
        qa.question = item.value("question", "");
        qa.answer_text = item.value("answer", "");
        if (item.contains("answer_start")) {
          qa.answer_start = item["answer_start"].get<std::size_t>();
        }
        qa.source = QASource::synthetic;
        qa.strategy_tag = item.value("strategy_tag", "");
        r.parsed.push_back(std::move(qa));
      }
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace qag
