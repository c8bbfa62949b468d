#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "helpers.hpp"
#include "qag/conditions.hpp"
#include "qag/errors.hpp"
#include "qag/rng.hpp"

using namespace qag;
using namespace qag::testfix;

namespace {

Document words_document(std::size_t n_tokens, const std::string& id = "doc") {
  std::string text;
  for (std::size_t i = 0; i < n_tokens; ++i) {
    if (i > 0) text.push_back(' ');
    text += "w" + std::to_string(i);
  }
  return Document::make(id, "", text);
}

// Independent linear-scan oracle for position_of_answer: walk the k char
// ranges in order, honoring the gap and tail attachment rules.
int position_oracle(const Document& doc, std::size_t answer_start, int k) {
  const auto splits = position_splits(doc, k);
  for (int i = 0; i < k; ++i) {
    const auto& s = splits[static_cast<std::size_t>(i)];
    if (answer_start >= s.char_begin && answer_start < s.char_end) return i + 1;
  }
  // Not inside any split: gaps attach forward, the tail to the last split.
  for (int i = 0; i < k; ++i) {
    if (answer_start < splits[static_cast<std::size_t>(i)].char_begin) return i + 1;
  }
  return k;
}

}  // namespace

TEST_CASE("position_splits covers the worked examples") {
  SUBCASE("evenly divisible: 400 tokens, 5 splits of 80") {
    const Document doc = words_document(400);
    const auto splits = position_splits(doc, 5);
    REQUIRE(splits.size() == 5);
    for (const auto& s : splits) CHECK(s.token_end - s.token_begin == 80);
  }
  SUBCASE("single-token splits") {
    const Document doc = words_document(5);
    const auto splits = position_splits(doc, 5);
    REQUIRE(splits.size() == 5);
    for (const auto& s : splits) CHECK(s.token_end - s.token_begin == 1);
  }
  SUBCASE("403 tokens round to sizes 81,80,81,80,81") {
    const Document doc = words_document(403);
    const auto splits = position_splits(doc, 5);
    std::vector<std::size_t> sizes;
    for (const auto& s : splits) sizes.push_back(s.token_end - s.token_begin);
    CHECK(sizes == std::vector<std::size_t>{81, 80, 81, 80, 81});
  }
  SUBCASE("too few tokens") {
    const Document doc = words_document(4);
    CHECK_THROWS_AS(position_splits(doc, 5), DegenerateDocument);
  }
}

TEST_CASE("position splits tile the token range exactly") {
  DetRng rng(21);
  for (int round = 0; round < 150; ++round) {
    const std::size_t m = 5 + rng.below(1996);
    for (int k : {2, 5, 10}) {
      if (m < static_cast<std::size_t>(k)) continue;
      const Document doc = words_document(m);
      const auto splits = position_splits(doc, k);
      REQUIRE(splits.size() == static_cast<std::size_t>(k));
      CHECK(splits.front().token_begin == 0);
      CHECK(splits.back().token_end == m);
      for (std::size_t i = 1; i < splits.size(); ++i) {
        CHECK(splits[i].token_begin == splits[i - 1].token_end);
        CHECK(splits[i].token_begin > splits[i - 1].token_begin);  // non-empty
      }
    }
  }
}

TEST_CASE("position_of_answer matches the edges") {
  const Document doc = words_document(100);
  CHECK(position_of_answer(doc, 0) == 1);
  CHECK(position_of_answer(doc, doc.tokens().back().begin) == 5);
  CHECK(position_of_answer(doc, doc.text().size() - 1) == 5);
  CHECK_THROWS_AS(position_of_answer(doc, doc.text().size()), OffsetError);
}

TEST_CASE("position_of_answer agrees with the linear-scan oracle") {
  DetRng rng(31);
  std::size_t cases = 0;
  while (cases < 1200) {
    const std::size_t m = 5 + rng.below(300);
    const Document doc = words_document(m, "oracle" + std::to_string(cases));
    for (int probe = 0; probe < 5; ++probe) {
      const std::size_t offset = rng.below(doc.text().size());
      const int k = 5;
      CHECK(position_of_answer(doc, offset, k) == position_oracle(doc, offset, k));
      ++cases;
    }
  }
}

TEST_CASE("position_of_answer is monotonic in the offset") {
  const Document doc = words_document(57);
  int prev = 1;
  for (std::size_t offset = 0; offset < doc.text().size(); ++offset) {
    const int pos = position_of_answer(doc, offset);
    CHECK(pos >= prev);
    prev = pos;
  }
}

TEST_CASE("classify_wh scans tokens for the first keyword") {
  CHECK(classify_wh("Where did the ceremony take place?") == WhType::where);
  CHECK(classify_wh("In which year was it built?") == WhType::which);
  CHECK(classify_wh("However, name the capital.") == WhType::other);
  CHECK(classify_wh("") == WhType::other);
  CHECK(classify_wh("Tell me what happened and why.") == WhType::what);  // first match wins
}

TEST_CASE("classify_wh is case-insensitive") {
  const char* questions[] = {"where is it?", "Which one?", "WHEN DID IT END?",
                             "what now", "Who?", "how come", "Why not", "name it"};
  for (const char* q : questions) {
    std::string upper(q);
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    CHECK(classify_wh(q) == classify_wh(upper));
  }
}

TEST_CASE("select_training_entities keeps spans echoed by the QA text") {
  const std::string text = "Barack Obama visited Paris. The trip was long. He returned to Berlin.";
  const Document doc = Document::make("d", "", text);
  const StubTagger tagger({span_of(text, "Barack Obama", EntityLabel::PERSON),
                           span_of(text, "Paris", EntityLabel::GPE),
                           span_of(text, "Berlin", EntityLabel::GPE)});
  QAPair qa;
  qa.id = "q";
  qa.question = "Where is Paris located?";
  qa.answer_text = "Berlin";

  const auto spans = select_training_entities(doc, qa, tagger);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].text == "Paris");   // document order
  CHECK(spans[1].text == "Berlin");

  QAPair unrelated;
  unrelated.id = "q2";
  unrelated.question = "What happened?";
  unrelated.answer_text = "nothing";
  CHECK(select_training_entities(doc, unrelated, tagger).empty());
}

TEST_CASE("select_inference_entities keeps the longest span per sentence") {
  const std::string text = "The UN met the United Nations. Nothing here. Paris hosted it.";
  const Document doc = Document::make("d", "", text);
  const StubTagger tagger({span_of(text, "UN", EntityLabel::ORG),
                           span_of(text, "United Nations", EntityLabel::ORG),
                           span_of(text, "Paris", EntityLabel::GPE)});
  const auto spans = select_inference_entities(doc, tagger);
  REQUIRE(spans.size() == 2);
  CHECK(spans[0].text == "United Nations");  // longest wins in sentence 0
  CHECK(spans[0].sentence_index == 0);
  CHECK(spans[1].text == "Paris");
  CHECK(spans[1].sentence_index == 2);

  // At most one span per sentence, unique sentence indices.
  std::vector<int> indices;
  for (const auto& s : spans) indices.push_back(s.sentence_index);
  std::sort(indices.begin(), indices.end());
  CHECK(std::adjacent_find(indices.begin(), indices.end()) == indices.end());
}

TEST_CASE("select_inference_entities on an entity-free document") {
  const Document doc = Document::make("d", "", "nothing capitalized in here at all.");
  CHECK(select_inference_entities(doc, *builtin_rule_tagger()).empty());
}

TEST_CASE("tag_document validates the tagger contract") {
  const std::string text = "Paris is nice.";
  const Document doc = Document::make("d", "", text);
  SUBCASE("slice mismatch") {
    const StubTagger bad({span_at(text, 1, "Paris", EntityLabel::GPE)});
    CHECK_THROWS_AS(tag_document(doc, bad), TaggerError);
  }
  SUBCASE("overlap") {
    const StubTagger bad({span_at(text, 0, "Paris", EntityLabel::GPE),
                          span_at(text, 3, "is is", EntityLabel::ORG)});
    CHECK_THROWS_AS(tag_document(doc, bad), TaggerError);
  }
  SUBCASE("valid spans gain sentence indices") {
    const StubTagger good({span_of(text, "Paris", EntityLabel::GPE)});
    const auto spans = tag_document(doc, good);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].sentence_index == 0);
  }
}

TEST_CASE("builtin rule tagger matches its declared rules") {
  const auto tagger = builtin_rule_tagger();

  SUBCASE("gazetteer person, gpe, and year") {
    const auto spans = tagger->tag("Barack Obama visited Paris in 1995.");
    REQUIRE(spans.size() == 3);
    CHECK(spans[0].text == "Barack Obama");
    CHECK(spans[0].label == EntityLabel::PERSON);
    CHECK(spans[1].text == "Paris");
    CHECK(spans[1].label == EntityLabel::GPE);
    CHECK(spans[2].text == "1995");
    CHECK(spans[2].label == EntityLabel::DATE);
  }
  SUBCASE("lowercase text yields nothing") {
    CHECK(tagger->tag("all lowercase words with no digits here.").empty());
  }
  SUBCASE("money includes the sign") {
    const auto spans = tagger->tag("He paid $5.");
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].text == "$5");
    CHECK(spans[0].label == EntityLabel::MONEY);
  }
  SUBCASE("percent numeral") {
    const auto spans = tagger->tag("Growth hit 12% that month.");
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].text == "12%");
    CHECK(spans[0].label == EntityLabel::PERCENT);
  }
  SUBCASE("plain numeral and month") {
    const auto spans = tagger->tag("It sold 42 units during January.");
    REQUIRE(spans.size() == 2);
    CHECK(spans[0].text == "42");
    CHECK(spans[0].label == EntityLabel::CARDINAL);
    CHECK(spans[1].text == "January");
    CHECK(spans[1].label == EntityLabel::DATE);
  }
  SUBCASE("mid-sentence capitalized run falls back to ORG") {
    const auto spans = tagger->tag("The Acme Widget Council approved it.");
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].text == "Acme Widget Council");
    CHECK(spans[0].label == EntityLabel::ORG);
  }
  SUBCASE("sentence-initial capitalization alone is not an entity") {
    CHECK(tagger->tag("Something plain happened.").empty());
  }
  SUBCASE("every span satisfies slice equality") {
    const std::string text = "Barack Obama spent $20 in Paris. Growth hit 9% in 1995.";
    for (const auto& span : tagger->tag(text)) {
      CHECK(text.substr(span.begin, span.end - span.begin) == span.text);
    }
  }
}

TEST_CASE("foreign label mapping covers common schemes and drops the rest") {
  CHECK(map_foreign_label("PER") == EntityLabel::PERSON);
  CHECK(map_foreign_label("per") == EntityLabel::PERSON);
  CHECK(map_foreign_label("LOCATION") == EntityLabel::LOC);
  CHECK(map_foreign_label("GPE") == EntityLabel::GPE);
  CHECK(map_foreign_label("work_of_art") == EntityLabel::WORK_OF_ART);
  CHECK(!map_foreign_label("MISC").has_value());
  CHECK(!map_foreign_label("").has_value());
}
