#include "qag/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qag/errors.hpp"

namespace qag {

std::string_view to_string(WhType t) {
  switch (t) {
    case WhType::where: return "where";
    case WhType::which: return "which";
    case WhType::when: return "when";
    case WhType::what: return "what";
    case WhType::who: return "who";
    case WhType::how: return "how";
    case WhType::why: return "why";
    case WhType::other: return "other";
  }
  return "other";
}

std::optional<WhType> wh_from_string(std::string_view s) {
  for (WhType t : kWhCanonical) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

std::vector<std::pair<std::size_t, std::size_t>> split_token_ranges(std::size_t token_count,
                                                                    int k) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  ranges.reserve(static_cast<std::size_t>(k));
  for (int i = 1; i <= k; ++i) {
    const auto lo = static_cast<std::size_t>(
        std::llround(static_cast<double>(i - 1) * static_cast<double>(token_count) / k));
    const auto hi = static_cast<std::size_t>(
        std::llround(static_cast<double>(i) * static_cast<double>(token_count) / k));
    ranges.emplace_back(lo, hi);
  }
  return ranges;
}

std::vector<PositionSplit> position_splits(const Document& doc, int k) {
  const std::size_t m = doc.token_count();
  if (k < 1) throw ConfigError("position split count must be >= 1");
  if (m < static_cast<std::size_t>(k)) {
    throw DegenerateDocument("document '" + doc.id() + "' has " + std::to_string(m) +
                             " tokens, fewer than k=" + std::to_string(k));
  }
  std::vector<PositionSplit> splits;
  splits.reserve(static_cast<std::size_t>(k));
  const auto& tokens = doc.tokens();
  for (const auto& [lo, hi] : split_token_ranges(m, k)) {
    PositionSplit s;
    s.token_begin = lo;
    s.token_end = hi;
    s.char_begin = tokens[lo].begin;
    s.char_end = tokens[hi - 1].end;
    splits.push_back(s);
  }
  return splits;
}

int position_of_answer(const Document& doc, std::size_t answer_start, int k) {
  if (answer_start >= doc.text().size()) {
    throw OffsetError("answer_start " + std::to_string(answer_start) +
                      " out of range for document '" + doc.id() + "' (len " +
                      std::to_string(doc.text().size()) + ")");
  }
  const std::vector<PositionSplit> splits = position_splits(doc, k);
  // First split whose char range ends past the offset; gap chars between
  // splits therefore attach to the following split and trailing chars to the
  // last one. Binary search over the nondecreasing char_end sequence (the
  // test oracle walks the ranges linearly instead).
  const auto it = std::upper_bound(
      splits.begin(), splits.end(), answer_start,
      [](std::size_t offset, const PositionSplit& s) { return offset < s.char_end; });
  if (it == splits.end()) return k;
  return static_cast<int>(it - splits.begin()) + 1;
}

WhType classify_wh(std::string_view question) {
  for (const Token& token : tokenize(question)) {
    const std::string word = to_lower(token.text);
    for (WhType t : kWhPromptable) {
      if (word == to_string(t)) return t;
    }
  }
  return WhType::other;
}

std::string_view to_string(EntityLabel label) {
  switch (label) {
    case EntityLabel::PERSON: return "PERSON";
    case EntityLabel::NORP: return "NORP";
    case EntityLabel::FAC: return "FAC";
    case EntityLabel::ORG: return "ORG";
    case EntityLabel::GPE: return "GPE";
    case EntityLabel::LOC: return "LOC";
    case EntityLabel::PRODUCT: return "PRODUCT";
    case EntityLabel::EVENT: return "EVENT";
    case EntityLabel::WORK_OF_ART: return "WORK_OF_ART";
    case EntityLabel::LAW: return "LAW";
    case EntityLabel::LANGUAGE: return "LANGUAGE";
    case EntityLabel::DATE: return "DATE";
    case EntityLabel::TIME: return "TIME";
    case EntityLabel::PERCENT: return "PERCENT";
    case EntityLabel::MONEY: return "MONEY";
    case EntityLabel::QUANTITY: return "QUANTITY";
    case EntityLabel::ORDINAL: return "ORDINAL";
    case EntityLabel::CARDINAL: return "CARDINAL";
  }
  return "ORG";
}

std::optional<EntityLabel> entity_label_from_string(std::string_view s) {
  static const std::array<EntityLabel, 18> all = {
      EntityLabel::PERSON,  EntityLabel::NORP,     EntityLabel::FAC,
      EntityLabel::ORG,     EntityLabel::GPE,      EntityLabel::LOC,
      EntityLabel::PRODUCT, EntityLabel::EVENT,    EntityLabel::WORK_OF_ART,
      EntityLabel::LAW,     EntityLabel::LANGUAGE, EntityLabel::DATE,
      EntityLabel::TIME,    EntityLabel::PERCENT,  EntityLabel::MONEY,
      EntityLabel::QUANTITY, EntityLabel::ORDINAL, EntityLabel::CARDINAL};
  for (EntityLabel l : all) {
    if (s == to_string(l)) return l;
  }
  return std::nullopt;
}

std::optional<EntityLabel> map_foreign_label(std::string_view s) {
  const std::string upper = [&] {
    std::string u(s);
    for (char& c : u) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return u;
  }();
  if (auto exact = entity_label_from_string(upper)) return exact;
  static const std::map<std::string, EntityLabel> table = {
      {"PER", EntityLabel::PERSON},       {"PEOPLE", EntityLabel::PERSON},
      {"LOCATION", EntityLabel::LOC},     {"FACILITY", EntityLabel::FAC},
      {"ORGANIZATION", EntityLabel::ORG}, {"ORGANISATION", EntityLabel::ORG},
      {"NUM", EntityLabel::CARDINAL},     {"NUMBER", EntityLabel::CARDINAL},
      {"DUR", EntityLabel::TIME},         {"DURATION", EntityLabel::TIME},
      {"NATIONALITY", EntityLabel::NORP}, {"RELIGION", EntityLabel::NORP},
      {"CURRENCY", EntityLabel::MONEY},   {"ART", EntityLabel::WORK_OF_ART},
      {"COUNTRY", EntityLabel::GPE},      {"CITY", EntityLabel::GPE},
  };
  auto it = table.find(upper);
  if (it != table.end()) return it->second;
  return std::nullopt;
}

std::vector<EntitySpan> tag_document(const Document& doc, const EntityTagger& tagger) {
  std::vector<EntitySpan> spans;
  try {
    spans = tagger.tag(doc.text());
  } catch (const TaggerError&) {
    throw;
  } catch (const std::exception& e) {
    throw TaggerError("tagger '" + tagger.name() + "' failed on document '" + doc.id() +
                      "': " + e.what());
  }
  std::size_t prev_end = 0;
  for (EntitySpan& span : spans) {
    if (span.end > doc.text().size() || span.begin >= span.end ||
        doc.text().compare(span.begin, span.end - span.begin, span.text) != 0) {
      throw TaggerError("tagger '" + tagger.name() + "' returned an invalid span '" + span.text +
                        "' for document '" + doc.id() + "'");
    }
    if (span.begin < prev_end) {
      throw TaggerError("tagger '" + tagger.name() +
                        "' returned overlapping or unsorted spans for document '" + doc.id() +
                        "'");
    }
    prev_end = span.end;
    span.sentence_index = static_cast<int>(doc.sentence_index_at(span.begin));
  }
  return spans;
}

std::vector<EntitySpan> select_training_entities(const Document& doc, const QAPair& qa,
                                                 const EntityTagger& tagger) {
  const std::string qa_text = qa.question + " " + qa.answer_text;
  std::vector<EntitySpan> out;
  for (const EntitySpan& span : tag_document(doc, tagger)) {
    if (contains_ci(qa_text, span.text)) out.push_back(span);
  }
  return out;
}

std::vector<EntitySpan> select_inference_entities(const Document& doc,
                                                  const EntityTagger& tagger) {
  std::map<int, EntitySpan> best_by_sentence;
  for (const EntitySpan& span : tag_document(doc, tagger)) {
    auto [it, inserted] = best_by_sentence.try_emplace(span.sentence_index, span);
    if (inserted) continue;
    const EntitySpan& held = it->second;
    if (span.text.size() > held.text.size() ||
        (span.text.size() == held.text.size() && span.begin < held.begin)) {
      it->second = span;
    }
  }
  std::vector<EntitySpan> out;
  out.reserve(best_by_sentence.size());
  for (auto& [idx, span] : best_by_sentence) out.push_back(std::move(span));
  return out;
}

}  // namespace qag
