#include "qag/prompting.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "qag/errors.hpp"

namespace qag {

namespace {

std::string replace_placeholder(std::string_view tmpl, std::string_view key,
                                std::string_view value) {
  const std::size_t at = tmpl.find(key);
  if (at == std::string_view::npos) {
    throw TemplateError("template '" + std::string(tmpl) + "' lacks placeholder " +
                        std::string(key));
  }
  std::string out(tmpl);
  out.replace(at, key.size(), value);
  return out;
}

std::string wh_clause(WhType t, const PromptTemplateSet& templates) {
  return replace_placeholder(templates.wh_template, "{wh}", to_string(t));
}

std::string join_wh_types(const std::vector<WhType>& types) {
  if (types.empty()) return "none";
  std::string out;
  for (WhType t : types) {
    if (!out.empty()) out += ", ";
    out += to_string(t);
  }
  return out;
}

// Deduplicated, canonical order.
std::vector<WhType> canonicalize(const std::set<WhType>& types) {
  std::vector<WhType> out;
  for (WhType t : kWhCanonical) {
    if (types.contains(t)) out.push_back(t);
  }
  return out;
}

}  // namespace

std::string condition_key(const DiversityCondition& cond) {
  struct Visitor {
    std::string operator()(const PositionCond& c) const { return "pos:" + std::to_string(c.index); }
    std::string operator()(const WhCond& c) const { return "wh:" + std::string(to_string(c.type)); }
    std::string operator()(const EntityCond& c) const { return "ent:" + c.span.text; }
    std::string operator()(const CombinedCond& c) const {
      return "combined:" + std::to_string(c.n);
    }
    std::string operator()(const ImplicitCond&) const { return "implicit"; }
  };
  return std::visit(Visitor{}, cond);
}

void PromptTemplateSet::validate() const {
  auto require = [](const std::string& tmpl, std::string_view key) {
    if (tmpl.find(key) == std::string::npos) {
      throw TemplateError("template '" + tmpl + "' lacks placeholder " + std::string(key));
    }
  };
  require(pos_template, "{pos}");
  require(wh_template, "{wh}");
  require(ent_template, "{entity}");
  require(combined_template, "{n}");
  require(two_step_predictor_template, "{condition}");
  require(qa_serialization, "{question}");
  require(qa_serialization, "{answer}");
}

std::string build_prompt(const DiversityCondition& cond, const PromptTemplateSet& templates) {
  struct Visitor {
    const PromptTemplateSet& t;
    std::string operator()(const PositionCond& c) const {
      return replace_placeholder(t.pos_template, "{pos}", std::to_string(c.index));
    }
    std::string operator()(const WhCond& c) const {
      if (c.type == WhType::other) {
        throw TemplateError("\"other\" is never prompted at inference");
      }
      return wh_clause(c.type, t);
    }
    std::string operator()(const EntityCond& c) const {
      return replace_placeholder(t.ent_template, "{entity}", c.span.text);
    }
    std::string operator()(const CombinedCond& c) const {
      if (c.n < 1) throw TemplateError("combined prompt requires n >= 1");
      return replace_placeholder(t.combined_template, "{n}", std::to_string(c.n));
    }
    std::string operator()(const ImplicitCond&) const { return "Generate a QA pair."; }
  };
  return std::visit(Visitor{templates}, cond);
}

std::string build_predictor_prompt(const DiversityCondition& cond,
                                   const PromptTemplateSet& templates) {
  std::string condition_text;
  if (const auto* pos = std::get_if<PositionCond>(&cond)) {
    condition_text = "position " + std::to_string(pos->index);
  } else if (const auto* ent = std::get_if<EntityCond>(&cond)) {
    condition_text = "the entity \"" + ent->span.text + "\"";
  } else {
    throw TemplateError("predictor prompts exist only for position and entity conditions");
  }
  return replace_placeholder(templates.two_step_predictor_template, "{condition}",
                             condition_text);
}

std::string build_joint_prompt(const DiversityCondition& primary, WhType wh,
                               const PromptTemplateSet& templates) {
  if (wh == WhType::other) {
    throw TemplateError("\"other\" is never prompted at inference");
  }
  return build_prompt(primary, templates) + " " + wh_clause(wh, templates);
}

std::string compose_input(const std::string& prompt, const std::string& document_text,
                          const PromptTemplateSet& templates) {
  if (templates.prompt_before_document) {
    return prompt + templates.document_separator + document_text;
  }
  return document_text + templates.document_separator + prompt;
}

std::string serialize_qa_target(const std::string& question, const std::string& answer,
                                const PromptTemplateSet& templates) {
  std::string out = replace_placeholder(templates.qa_serialization, "{question}", question);
  return replace_placeholder(out, "{answer}", answer);
}

std::string_view to_string(RecordKind k) {
  switch (k) {
    case RecordKind::qag_pos: return "qag_pos";
    case RecordKind::qag_wh: return "qag_wh";
    case RecordKind::qag_ent: return "qag_ent";
    case RecordKind::wh_pred_pos: return "wh_pred_pos";
    case RecordKind::wh_pred_ent: return "wh_pred_ent";
  }
  return "qag_pos";
}

std::optional<RecordKind> record_kind_from_string(std::string_view s) {
  for (RecordKind k : {RecordKind::qag_pos, RecordKind::qag_wh, RecordKind::qag_ent,
                       RecordKind::wh_pred_pos, RecordKind::wh_pred_ent}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

RecordBatch build_training_records(const Corpus& corpus, RecordKind kind,
                                   const EntityTagger& tagger,
                                   const PromptTemplateSet& templates, int k) {
  if (kind == RecordKind::wh_pred_pos) {
    return build_predictor_records(corpus, PredictorAxis::pos, tagger, templates, k);
  }
  if (kind == RecordKind::wh_pred_ent) {
    return build_predictor_records(corpus, PredictorAxis::ent, tagger, templates, k);
  }

  RecordBatch batch;
  for (const Document& doc : corpus.documents) {
    const std::vector<QAPair>* pairs = corpus.pairs_of(doc.id());
    if (pairs == nullptr) continue;
    for (const QAPair& qa : *pairs) {
      const std::string target = serialize_qa_target(qa.question, qa.answer_text, templates);
      auto push = [&](const DiversityCondition& cond, const std::string& prompt) {
        TrainingRecord rec;
        rec.input = compose_input(prompt, doc.text(), templates);
        rec.target = target;
        rec.kind = kind;
        rec.meta = {{"qa_id", qa.id}, {"doc_id", doc.id()}, {"condition", condition_key(cond)}};
        batch.records.push_back(std::move(rec));
      };

      switch (kind) {
        case RecordKind::qag_pos: {
          if (!qa.grounded()) {
            ++batch.skipped;
            break;
          }
          try {
            const int pos = position_of_answer(doc, *qa.answer_start, k);
            push(PositionCond{pos}, build_prompt(PositionCond{pos}, templates));
          } catch (const DegenerateDocument&) {
            ++batch.skipped;
          }
          break;
        }
        case RecordKind::qag_wh: {
          const WhType wh = classify_wh(qa.question);
          // "other" stays in the training set; the template is filled
          // directly because build_prompt refuses it at inference.
          push(WhCond{wh}, replace_placeholder(templates.wh_template, "{wh}", to_string(wh)));
          break;
        }
        case RecordKind::qag_ent: {
          for (const EntitySpan& span : select_training_entities(doc, qa, tagger)) {
            push(EntityCond{span}, build_prompt(EntityCond{span}, templates));
          }
          break;
        }
        default:
          break;
      }
    }
  }
  return batch;
}

RecordBatch build_predictor_records(const Corpus& corpus, PredictorAxis axis,
                                    const EntityTagger& tagger,
                                    const PromptTemplateSet& templates, int k) {
  RecordBatch batch;
  for (const Document& doc : corpus.documents) {
    const std::vector<QAPair>* pairs = corpus.pairs_of(doc.id());
    static const std::vector<QAPair> no_pairs;
    const std::vector<QAPair>& qa_list = pairs == nullptr ? no_pairs : *pairs;

    if (axis == PredictorAxis::pos) {
      if (doc.token_count() < static_cast<std::size_t>(k)) {
        batch.skipped += qa_list.size();
        continue;
      }
      std::vector<std::set<WhType>> types_by_pos(static_cast<std::size_t>(k));
      for (const QAPair& qa : qa_list) {
        if (!qa.grounded()) {
          ++batch.skipped;
          continue;
        }
        const int pos = position_of_answer(doc, *qa.answer_start, k);
        types_by_pos[static_cast<std::size_t>(pos - 1)].insert(classify_wh(qa.question));
      }
      for (int pos = 1; pos <= k; ++pos) {
        TrainingRecord rec;
        const DiversityCondition cond = PositionCond{pos};
        rec.input = compose_input(build_predictor_prompt(cond, templates), doc.text(), templates);
        rec.target = join_wh_types(canonicalize(types_by_pos[static_cast<std::size_t>(pos - 1)]));
        rec.kind = RecordKind::wh_pred_pos;
        rec.meta = {{"doc_id", doc.id()}, {"condition", condition_key(cond)}};
        batch.records.push_back(std::move(rec));
      }
    } else {
      // Training entities of the document: spans echoed by at least one QA,
      // with the WH types of the QAs mentioning them.
      const std::vector<EntitySpan> spans = tag_document(doc, tagger);
      for (const EntitySpan& span : spans) {
        std::set<WhType> types;
        for (const QAPair& qa : qa_list) {
          if (contains_ci(qa.question + " " + qa.answer_text, span.text)) {
            types.insert(classify_wh(qa.question));
          }
        }
        if (types.empty()) continue;
        TrainingRecord rec;
        const DiversityCondition cond = EntityCond{span};
        rec.input = compose_input(build_predictor_prompt(cond, templates), doc.text(), templates);
        rec.target = join_wh_types(canonicalize(types));
        rec.kind = RecordKind::wh_pred_ent;
        rec.meta = {{"doc_id", doc.id()}, {"condition", condition_key(cond)}};
        batch.records.push_back(std::move(rec));
      }
    }
  }
  return batch;
}

void write_records_jsonl(const std::vector<TrainingRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExportError("cannot open '" + path + "' for writing");
  for (const TrainingRecord& rec : records) {
    nlohmann::ordered_json line;
    line["input"] = rec.input;
    line["output"] = rec.target;
    line["kind"] = to_string(rec.kind);
    line["meta"] = rec.meta;
    out << line.dump() << "\n";
  }
  if (!out) throw ExportError("failed writing '" + path + "'");
}

}  // namespace qag
