#include <doctest.h>

#include <map>
#include <set>

#include "fixtures.hpp"
#include "helpers.hpp"
#include "qag/errors.hpp"
#include "qag/generation.hpp"
#include "qag/prompting.hpp"
#include "qag/rng.hpp"
#include "qag/squad_io.hpp"

using namespace qag;
using namespace qag::testfix;

TEST_CASE("build_prompt renders the default wordings") {
  const PromptTemplateSet templates;
  CHECK(build_prompt(PositionCond{2}, templates) == "Generate a QA pair from position 2.");
  CHECK(build_prompt(WhCond{WhType::where}, templates) == "Generate a where type QA pair.");
  CHECK(build_prompt(CombinedCond{5}, templates) ==
        "Generate 5 questions of different question type from different positions.");
  CHECK(build_prompt(ImplicitCond{}, templates) == "Generate a QA pair.");
  EntitySpan span;
  span.text = "Paris";
  CHECK(build_prompt(EntityCond{span}, templates) ==
        "Generate a QA pair about the entity \"Paris\".");
}

TEST_CASE("build_prompt refuses unpromptable conditions") {
  const PromptTemplateSet templates;
  CHECK_THROWS_AS(build_prompt(WhCond{WhType::other}, templates), TemplateError);
  CHECK_THROWS_AS(build_prompt(CombinedCond{0}, templates), TemplateError);
}

TEST_CASE("prompts are byte-identical across calls") {
  const PromptTemplateSet templates;
  for (int i = 0; i < 10; ++i) {
    CHECK(build_prompt(PositionCond{3}, templates) == build_prompt(PositionCond{3}, templates));
  }
}

TEST_CASE("joint prompts concatenate the two clauses") {
  const PromptTemplateSet templates;
  CHECK(build_joint_prompt(PositionCond{2}, WhType::what, templates) ==
        "Generate a QA pair from position 2. Generate a what type QA pair.");
  CHECK_THROWS_AS(build_joint_prompt(PositionCond{2}, WhType::other, templates), TemplateError);
}

TEST_CASE("template validation reports missing placeholders") {
  PromptTemplateSet templates;
  templates.pos_template = "no placeholder";
  CHECK_THROWS_AS(templates.validate(), TemplateError);
}

TEST_CASE("compose_input follows the configured layout") {
  PromptTemplateSet templates;
  CHECK(compose_input("P.", "Doc.", templates) == "P.\nDoc.");
  templates.prompt_before_document = false;
  templates.document_separator = " | ";
  CHECK(compose_input("P.", "Doc.", templates) == "Doc. | P.");
}

namespace {

Corpus grounded_fixture() {
  // Three QAs: two in the first sentence area, one near the end; WH types
  // what, what, who.
  const std::string file = R"({"version":"1.1","data":[{"title":"T","paragraphs":[
    {"context":"Alpha beta gamma delta epsilon zeta eta theta iota kappa.",
     "qas":[
       {"id":"q1","question":"What is alpha?","answers":[{"text":"Alpha","answer_start":0}]},
       {"id":"q2","question":"What is beta?","answers":[{"text":"beta","answer_start":6}]},
       {"id":"q3","question":"Who is kappa?","answers":[{"text":"kappa","answer_start":51}]}
     ]}]}]})";
  return ingest_squad_text(file);
}

}  // namespace

TEST_CASE("qag_pos records carry positions and re-parse to their source") {
  const Corpus corpus = grounded_fixture();
  const PromptTemplateSet templates;
  const auto tagger = builtin_rule_tagger();
  const RecordBatch batch = build_training_records(corpus, RecordKind::qag_pos, *tagger, templates);

  CHECK(batch.records.size() + batch.skipped == corpus.total_qa_count());
  CHECK(batch.skipped == 0);
  for (const TrainingRecord& rec : batch.records) {
    CHECK(rec.kind == RecordKind::qag_pos);
    CHECK(rec.meta.at("condition").substr(0, 4) == "pos:");
    const int pos = std::stoi(rec.meta.at("condition").substr(4));
    CHECK(pos >= 1);
    CHECK(pos <= 5);
    // Target re-parses into exactly the source pair.
    const ParseOutcome parsed = parse_generation(rec.target, /*multi=*/false);
    REQUIRE(parsed.pairs.size() == 1);
    bool found = false;
    for (const QAPair& qa : *corpus.pairs_of("T#0")) {
      if (qa.id == rec.meta.at("qa_id")) {
        CHECK(parsed.pairs[0].question == qa.question);
        CHECK(parsed.pairs[0].answer_text == qa.answer_text);
        found = true;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("qag_wh records keep the \"other\" class at training time") {
  const std::string file = R"({"version":"1.1","data":[{"title":"T","paragraphs":[
    {"context":"Alpha beta gamma delta epsilon.",
     "qas":[
       {"id":"q1","question":"Where is alpha?","answers":[{"text":"Alpha","answer_start":0}]},
       {"id":"q2","question":"Name the second word.","answers":[{"text":"beta","answer_start":6}]}
     ]}]}]})";
  const Corpus corpus = ingest_squad_text(file);
  const PromptTemplateSet templates;
  const auto tagger = builtin_rule_tagger();
  const RecordBatch batch = build_training_records(corpus, RecordKind::qag_wh, *tagger, templates);
  REQUIRE(batch.records.size() == 2);
  CHECK(batch.records[0].input.find("where") != std::string::npos);
  CHECK(batch.records[1].input.find("other") != std::string::npos);
}

TEST_CASE("qag_ent records multiply per echoed entity") {
  const std::string text = "Barack Obama visited Paris. Nothing else happened in Berlin.";
  const std::string file = std::string(R"({"version":"1.1","data":[{"title":"T","paragraphs":[
    {"context":")") + text + R"(",
     "qas":[{"id":"q1","question":"Where did Barack Obama go?",
             "answers":[{"text":"Paris","answer_start":21}]}]}]}]})";
  const Corpus corpus = ingest_squad_text(file);
  const PromptTemplateSet templates;
  const auto tagger = builtin_rule_tagger();  // finds Barack Obama, Paris, Berlin
  const RecordBatch batch = build_training_records(corpus, RecordKind::qag_ent, *tagger, templates);
  REQUIRE(batch.records.size() == 2);  // Barack Obama and Paris are echoed, Berlin is not
  CHECK(batch.records[0].meta.at("condition") == "ent:Barack Obama");
  CHECK(batch.records[1].meta.at("condition") == "ent:Paris");
}

TEST_CASE("predictor(pos) records group WH types by answer position") {
  const Corpus corpus = grounded_fixture();
  const PromptTemplateSet templates;
  const auto tagger = builtin_rule_tagger();
  const RecordBatch batch =
      build_predictor_records(corpus, PredictorAxis::pos, *tagger, templates);
  REQUIRE(batch.records.size() == 5);

  std::map<std::string, std::string> target_by_condition;
  for (const TrainingRecord& rec : batch.records) {
    target_by_condition[rec.meta.at("condition")] = rec.target;
  }
  // q1 (Alpha) and q2 (beta) both sit in split 1 of the 10-token document;
  // q3 (kappa) in split 5; splits 2-4 hold nothing.
  CHECK(target_by_condition.at("pos:1") == "what");
  CHECK(target_by_condition.at("pos:5") == "who");
  std::size_t nones = 0;
  for (const auto& [cond, target] : target_by_condition) {
    if (target == "none") ++nones;
  }
  CHECK(nones == 3);
}

TEST_CASE("predictor(pos) joins co-located types in canonical order") {
  // Three QAs whose answers all sit in split 1, types what/what/who.
  const std::string file = R"({"version":"1.1","data":[{"title":"T","paragraphs":[
    {"context":"Alpha beta gamma delta epsilon zeta eta theta iota kappa.",
     "qas":[
       {"id":"q1","question":"What is alpha?","answers":[{"text":"Alpha","answer_start":0}]},
       {"id":"q2","question":"What else is alpha?","answers":[{"text":"Alpha","answer_start":0}]},
       {"id":"q3","question":"Who is beta?","answers":[{"text":"beta","answer_start":6}]}
     ]}]}]})";
  const PromptTemplateSet templates;
  const auto tagger = builtin_rule_tagger();
  const RecordBatch batch = build_predictor_records(ingest_squad_text(file), PredictorAxis::pos,
                                                    *tagger, templates);
  REQUIRE(batch.records.size() == 5);
  CHECK(batch.records[0].target == "what, who");  // canonical order, deduplicated
  for (std::size_t i = 1; i < 5; ++i) CHECK(batch.records[i].target == "none");
}

TEST_CASE("predictor(pos) emits five none records for a QA-free document") {
  Corpus corpus;
  corpus.add_document(Document::make("d#0", "d", "One two three four five six seven."));
  const PromptTemplateSet templates;
  const auto tagger = builtin_rule_tagger();
  const RecordBatch batch =
      build_predictor_records(corpus, PredictorAxis::pos, *tagger, templates);
  REQUIRE(batch.records.size() == 5);
  for (const TrainingRecord& rec : batch.records) CHECK(rec.target == "none");
}

TEST_CASE("predictor(pos) matches a regroup-by-position oracle on random corpora") {
  const PromptTemplateSet templates;
  const auto tagger = builtin_rule_tagger();
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    const Corpus corpus = random_corpus(seed);
    const RecordBatch batch =
        build_predictor_records(corpus, PredictorAxis::pos, *tagger, templates);

    // Oracle: regroup independently, then compare targets.
    std::map<std::string, std::set<WhType>> expected;  // "docid|pos" -> types
    std::size_t eligible_docs = 0;
    for (const Document& doc : corpus.documents) {
      if (doc.token_count() < 5) continue;
      ++eligible_docs;
      for (int pos = 1; pos <= 5; ++pos) expected[doc.id() + "|" + std::to_string(pos)];
      const auto* pairs = corpus.pairs_of(doc.id());
      if (pairs == nullptr) continue;
      for (const QAPair& qa : *pairs) {
        if (!qa.grounded()) continue;
        const int pos = position_of_answer(doc, *qa.answer_start, 5);
        expected[doc.id() + "|" + std::to_string(pos)].insert(classify_wh(qa.question));
      }
    }
    CHECK(batch.records.size() == 5 * eligible_docs);
    for (const TrainingRecord& rec : batch.records) {
      const std::string key =
          rec.meta.at("doc_id") + "|" + rec.meta.at("condition").substr(4);
      std::string oracle_target;
      for (WhType t : kWhCanonical) {
        if (expected.at(key).contains(t)) {
          if (!oracle_target.empty()) oracle_target += ", ";
          oracle_target += to_string(t);
        }
      }
      if (oracle_target.empty()) oracle_target = "none";
      CHECK(rec.target == oracle_target);
    }
  }
}

TEST_CASE("predictor(ent) records exist only for echoed entities") {
  const std::string text = "Barack Obama visited Paris. Nothing else happened in Berlin.";
  const std::string file = std::string(R"({"version":"1.1","data":[{"title":"T","paragraphs":[
    {"context":")") + text + R"(",
     "qas":[{"id":"q1","question":"Where did Barack Obama go?",
             "answers":[{"text":"Paris","answer_start":21}]}]}]}]})";
  const Corpus corpus = ingest_squad_text(file);
  const PromptTemplateSet templates;
  const auto tagger = builtin_rule_tagger();
  const RecordBatch batch =
      build_predictor_records(corpus, PredictorAxis::ent, *tagger, templates);
  REQUIRE(batch.records.size() == 2);
  for (const TrainingRecord& rec : batch.records) {
    CHECK(rec.target == "where");
  }
}

TEST_CASE("records serialize one JSON object per line") {
  const Corpus corpus = grounded_fixture();
  const PromptTemplateSet templates;
  const auto tagger = builtin_rule_tagger();
  const RecordBatch batch = build_training_records(corpus, RecordKind::qag_pos, *tagger, templates);
  TempDir dir;
  const std::string path = dir.file("records.jsonl");
  write_records_jsonl(batch.records, path);
  const std::string payload = read_file(path);
  std::size_t lines = 0;
  for (char c : payload) lines += c == '\n';
  CHECK(lines == batch.records.size());
  CHECK(payload.find("\"input\"") != std::string::npos);
  CHECK(payload.find("\"output\"") != std::string::npos);
  CHECK(payload.find("\"kind\"") != std::string::npos);
  CHECK(payload.find("\"meta\"") != std::string::npos);
}
