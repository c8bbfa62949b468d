#include <doctest.h>

#include "qag/rng.hpp"
#include "qag/text.hpp"

using namespace qag;

TEST_CASE("tokenize strips edge punctuation and records offsets") {
  const std::vector<Token> tokens = tokenize("Hello, world!");
  REQUIRE(tokens.size() == 2);
  CHECK(tokens[0].text == "Hello");
  CHECK(tokens[0].begin == 0);
  CHECK(tokens[0].end == 5);
  CHECK(tokens[1].text == "world");
  CHECK(tokens[1].begin == 7);
  CHECK(tokens[1].end == 12);
}

TEST_CASE("tokenize on empty and whitespace-heavy input") {
  CHECK(tokenize("").empty());
  CHECK(tokenize(" \t \n ").empty());
  CHECK(tokenize("a  b\tc").size() == 3);
  CHECK(tokenize("... --- !!!").empty());  // pure punctuation pieces vanish
}

TEST_CASE("tokenize preserves case and slices the original text") {
  const std::string text = "The U.S. peaked ($5.2) o'clock";
  for (const Token& t : tokenize(text)) {
    CHECK(text.substr(t.begin, t.end - t.begin) == t.text);
  }
}

TEST_CASE("tokenize is idempotent over its own serialization") {
  DetRng rng(7);
  const std::string punct = ".,;:!?()\"'";
  for (int round = 0; round < 200; ++round) {
    std::string text;
    const std::size_t n = rng.below(30);
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.below(4) == 0) text.push_back(punct[rng.below(punct.size())]);
      text.push_back(static_cast<char>('a' + rng.below(26)));
      if (rng.below(3) == 0) text.push_back(' ');
    }
    std::vector<std::string> first;
    for (const Token& t : tokenize(text)) first.push_back(t.text);
    std::string joined;
    for (const std::string& w : first) {
      if (!joined.empty()) joined.push_back(' ');
      joined += w;
    }
    std::vector<std::string> second;
    for (const Token& t : tokenize(joined)) second.push_back(t.text);
    CHECK(first == second);
  }
}

TEST_CASE("sentence_split follows the terminator+whitespace+uppercase rule") {
  const auto two = sentence_split("A cat. A dog.");
  REQUIRE(two.size() == 2);
  CHECK(two[0].begin == 0);
  CHECK(two[0].end == 6);   // span ends right after the terminator
  CHECK(two[1].begin == 6); // the following whitespace opens the next span
  CHECK(two[1].end == 13);

  CHECK(sentence_split("No terminator").size() == 1);
  // Abbreviations are not special-cased; a known limitation of the rule.
  CHECK(sentence_split("Mr. Smith left.").size() == 2);
  CHECK(sentence_split("He left. but stayed lowercase").size() == 1);
  CHECK(sentence_split("Wait... Then go!").size() == 2);
}

TEST_CASE("sentence spans tile the text") {
  DetRng rng(11);
  for (int round = 0; round < 100; ++round) {
    std::string text;
    const std::size_t n = 1 + rng.below(200);
    const std::string alphabet = "abc D.E!? ";
    for (std::size_t i = 0; i < n; ++i) text.push_back(alphabet[rng.below(alphabet.size())]);
    const auto spans = sentence_split(text);
    if (text.empty()) {
      CHECK(spans.empty());
      continue;
    }
    REQUIRE(!spans.empty());
    CHECK(spans.front().begin == 0);
    CHECK(spans.back().end == text.size());
    for (std::size_t i = 1; i < spans.size(); ++i) {
      CHECK(spans[i].begin == spans[i - 1].end);
    }
  }
}

TEST_CASE("every token lies inside exactly one sentence span") {
  DetRng rng(13);
  for (int round = 0; round < 100; ++round) {
    std::string text;
    const std::size_t n = 1 + rng.below(300);
    const std::string alphabet = "ab cD. e!f? U.S.";
    for (std::size_t i = 0; i < n; ++i) text.push_back(alphabet[rng.below(alphabet.size())]);
    const auto spans = sentence_split(text);
    for (const Token& t : tokenize(text)) {
      std::size_t containing = 0;
      for (const SentenceSpan& s : spans) {
        if (t.begin >= s.begin && t.end <= s.end) ++containing;
      }
      CHECK(containing == 1);
    }
  }
}

TEST_CASE("normalize_question lowercases, strips punctuation, collapses space") {
  CHECK(normalize_question("Where  is X?") == "where is x");
  CHECK(normalize_question("WHERE IS x") == "where is x");
  CHECK(normalize_question("") == "");
}

TEST_CASE("contains_ci and find_ci fold ASCII case") {
  CHECK(contains_ci("The Eiffel Tower", "eiffel"));
  CHECK(!contains_ci("The Eiffel Tower", "eifel"));
  CHECK(find_ci("abcABC", "ABC") == 0);
  CHECK(find_ci("abcABC", "ABC", 1) == 3);
}
