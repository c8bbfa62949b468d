#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "qag/conditions.hpp"
#include "qag/corpus.hpp"

namespace qag {

struct PositionCond {
  int index = 1;  // 1..k
};
struct WhCond {
  WhType type = WhType::what;
};
struct EntityCond {
  EntitySpan span;
};
struct CombinedCond {
  int n = 5;  // >= 1
};
struct ImplicitCond {};

using DiversityCondition =
    std::variant<PositionCond, WhCond, EntityCond, CombinedCond, ImplicitCond>;

// Short stable key used in synthetic qa ids and reports:
// "pos:2", "wh:where", "ent:Paris", "combined:5", "implicit".
std::string condition_key(const DiversityCondition& cond);

// Prompt wordings with named placeholders, plus the layout joining prompt and
// document and the target serialization for fine-tuning records.
struct PromptTemplateSet {
  std::string pos_template = "Generate a QA pair from position {pos}.";
  std::string wh_template = "Generate a {wh} type QA pair.";
  std::string ent_template = "Generate a QA pair about the entity \"{entity}\".";
  std::string combined_template =
      "Generate {n} questions of different question type from different positions.";
  std::string two_step_predictor_template =
      "List the relevant question types for {condition}.";
  std::string qa_serialization = "question: {question}, answer: {answer}";
  std::string document_separator = "\n";
  bool prompt_before_document = true;

  // Throws TemplateError when a required placeholder is missing.
  void validate() const;
};

// Deterministic prompt string for a condition. Wh(other) and Combined(n<1)
// raise TemplateError ("other" is never prompted at inference).
std::string build_prompt(const DiversityCondition& cond, const PromptTemplateSet& templates);

// Prompt for the two-step WH predictor; cond must be Position or Entity.
std::string build_predictor_prompt(const DiversityCondition& cond,
                                   const PromptTemplateSet& templates);

// Joint conditioning (two-step flows): primary clause + " " + WH clause.
std::string build_joint_prompt(const DiversityCondition& primary, WhType wh,
                               const PromptTemplateSet& templates);

// Full model input: prompt and document joined per the template layout.
std::string compose_input(const std::string& prompt, const std::string& document_text,
                          const PromptTemplateSet& templates);

// "question: {q}, answer: {a}" with the configured serialization.
std::string serialize_qa_target(const std::string& question, const std::string& answer,
                                const PromptTemplateSet& templates);

enum class RecordKind { qag_pos, qag_wh, qag_ent, wh_pred_pos, wh_pred_ent };
enum class PredictorAxis { pos, ent };

std::string_view to_string(RecordKind k);
std::optional<RecordKind> record_kind_from_string(std::string_view s);

struct TrainingRecord {
  std::string input;   // prompt + document text
  std::string target;
  RecordKind kind = RecordKind::qag_pos;
  std::map<std::string, std::string> meta;  // source qa id / condition / doc id
};

struct RecordBatch {
  std::vector<TrainingRecord> records;
  std::size_t skipped = 0;  // ungrounded or degenerate-document pairs
};

// qag_pos: one record per grounded QA with pos = position_of_answer.
// qag_wh: one record per QA with wh = classify_wh ("other" included).
// qag_ent: one record per (QA, training entity) pair.
RecordBatch build_training_records(const Corpus& corpus, RecordKind kind,
                                   const EntityTagger& tagger,
                                   const PromptTemplateSet& templates, int k = 5);

// axis=pos: one record per (document with >= k tokens, position 1..k);
// target = comma-joined WH types of the QAs answered in that position in
// canonical order, or "none". axis=ent: one record per training entity with
// the WH types of the QAs mentioning it.
RecordBatch build_predictor_records(const Corpus& corpus, PredictorAxis axis,
                                    const EntityTagger& tagger,
                                    const PromptTemplateSet& templates, int k = 5);

// One JSON object per line: {"input","output","kind","meta"}.
void write_records_jsonl(const std::vector<TrainingRecord>& records, const std::string& path);

}  // namespace qag
