#include <cctype>
#include <unordered_set>

#include "qag/conditions.hpp"

namespace qag {

namespace {

// Small bundled gazetteers; deliberately tiny. Fidelity to a real NER system
// is the job of the external-service adapter.
const std::unordered_set<std::string>& person_gazetteer() {
  static const std::unordered_set<std::string> names = {
      "Barack", "Obama",    "Albert",   "Einstein", "Marie",   "Curie",  "Isaac",
      "Newton", "Nikola",   "Tesla",    "Charles",  "Darwin",  "Abraham", "Lincoln",
      "Mahatma", "Gandhi",  "Wolfgang", "Mozart",   "William", "Shakespeare",
      "John",   "Smith",    "Mary",     "Watson",   "Ada",     "Lovelace", "Alan",
      "Turing", "Grace",    "Hopper",   "Rosa",     "Parks",   "Nelson",  "Mandela"};
  return names;
}

const std::unordered_set<std::string>& gpe_gazetteer() {
  static const std::unordered_set<std::string> places = {
      "Paris",  "France",  "London", "England",   "Berlin",  "Germany", "Tokyo",
      "Japan",  "Madrid",  "Spain",  "Rome",      "Italy",   "Moscow",  "Russia",
      "Cairo",  "Egypt",   "Sydney", "Australia", "Chicago", "Boston",  "Texas",
      "California", "Washington", "Seattle",     "India",   "China",   "Brazil",
      "Canada", "Mexico",  "Norway", "Vienna",    "Austria", "Lisbon",  "Portugal"};
  return places;
}

const std::unordered_set<std::string>& month_names() {
  static const std::unordered_set<std::string> months = {
      "january", "february", "march",     "april",   "may",      "june",
      "july",    "august",   "september", "october", "november", "december"};
  return months;
}

bool is_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

bool is_numeral(std::string_view s) {
  if (s.empty()) return false;
  bool digit_seen = false;
  for (char c : s) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit_seen = true;
    } else if (c != '.' && c != ',') {
      return false;
    }
  }
  return digit_seen;
}

bool is_capitalized_word(std::string_view s) {
  if (s.empty() || !std::isupper(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (!std::isalpha(u) && c != '-' && c != '\'' && c != '.') return false;
  }
  return true;
}

class RuleTagger final : public EntityTagger {
 public:
  std::string name() const override { return "builtin-rule"; }

  std::vector<EntitySpan> tag(std::string_view text) const override {
    const std::vector<Token> tokens = tokenize(text);
    const std::vector<SentenceSpan> sentences = sentence_split(text);
    std::vector<EntitySpan> spans;

    auto sentence_of = [&](std::size_t offset) {
      for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (offset < sentences[i].end) return i;
      }
      return sentences.empty() ? std::size_t{0} : sentences.size() - 1;
    };
    auto sentence_initial = [&](std::size_t ti) {
      if (ti == 0) return true;
      return sentence_of(tokens[ti].begin) != sentence_of(tokens[ti - 1].begin);
    };
    auto in_gazetteer = [&](const std::string& word) {
      return person_gazetteer().contains(word) || gpe_gazetteer().contains(word);
    };

    std::size_t i = 0;
    while (i < tokens.size()) {
      const Token& tok = tokens[i];
      const std::string low = to_lower(tok.text);

      if (month_names().contains(low)) {
        spans.push_back(make_span(text, tok.begin, tok.end, EntityLabel::DATE));
        ++i;
        continue;
      }
      if (is_numeral(tok.text)) {
        EntityLabel label = EntityLabel::CARDINAL;
        std::size_t begin = tok.begin;
        std::size_t end = tok.end;
        if (is_digits(tok.text) && tok.text.size() == 4) label = EntityLabel::DATE;
        if (tok.begin > 0 && text[tok.begin - 1] == '$') {
          label = EntityLabel::MONEY;
          begin = tok.begin - 1;  // the sign belongs to the span
        } else if (tok.end < text.size() && text[tok.end] == '%') {
          label = EntityLabel::PERCENT;
          end = tok.end + 1;
        }
        spans.push_back(make_span(text, begin, end, label));
        ++i;
        continue;
      }
      if (is_capitalized_word(tok.text) && !month_names().contains(low)) {
        // Sentence-initial capitalization is ordinary; only a gazetteer hit
        // may open a run there.
        if (sentence_initial(i) && !in_gazetteer(tok.text)) {
          ++i;
          continue;
        }
        std::size_t j = i + 1;
        while (j < tokens.size() && is_capitalized_word(tokens[j].text) &&
               !month_names().contains(to_lower(tokens[j].text)) && !sentence_initial(j)) {
          ++j;
        }
        EntityLabel label = EntityLabel::ORG;
        bool person = false;
        bool gpe = false;
        for (std::size_t t = i; t < j; ++t) {
          if (person_gazetteer().contains(tokens[t].text)) person = true;
          if (gpe_gazetteer().contains(tokens[t].text)) gpe = true;
        }
        if (person) {
          label = EntityLabel::PERSON;
        } else if (gpe) {
          label = EntityLabel::GPE;
        }
        spans.push_back(make_span(text, tokens[i].begin, tokens[j - 1].end, label));
        i = j;
        continue;
      }
      ++i;
    }
    return spans;
  }

 private:
  static EntitySpan make_span(std::string_view text, std::size_t begin, std::size_t end,
                              EntityLabel label) {
    EntitySpan span;
    span.text = std::string(text.substr(begin, end - begin));
    span.label = label;
    span.begin = begin;
    span.end = end;
    return span;
  }
};

}  // namespace

std::unique_ptr<EntityTagger> builtin_rule_tagger() { return std::make_unique<RuleTagger>(); }

}  // namespace qag
