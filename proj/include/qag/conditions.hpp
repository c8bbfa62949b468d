#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qag/corpus.hpp"

namespace qag {

// Canonical order; "other" is the 8th type and is never prompted at inference.
enum class WhType { where, which, when, what, who, how, why, other };

inline constexpr std::array<WhType, 8> kWhCanonical = {
    WhType::where, WhType::which, WhType::when, WhType::what,
    WhType::who,   WhType::how,   WhType::why,  WhType::other};

inline constexpr std::array<WhType, 7> kWhPromptable = {
    WhType::where, WhType::which, WhType::when, WhType::what,
    WhType::who,   WhType::how,   WhType::why};

std::string_view to_string(WhType t);
std::optional<WhType> wh_from_string(std::string_view s);

// One of k document segments of near-equal word count. Token range is
// half-open over token indices; char range spans the first token's start to
// the last token's end.
struct PositionSplit {
  std::size_t token_begin = 0;
  std::size_t token_end = 0;
  std::size_t char_begin = 0;
  std::size_t char_end = 0;
};

// Balanced boundary rule shared by the splitters: range i (1-based) is
// [round((i-1)*M/k), round(i*M/k)). Requires M >= k.
std::vector<std::pair<std::size_t, std::size_t>> split_token_ranges(std::size_t token_count,
                                                                    int k);

// Split i (1-based) covers token indices [round((i-1)*M/k), round(i*M/k)).
// Splits tile [0, M). Throws DegenerateDocument when M < k.
std::vector<PositionSplit> position_splits(const Document& doc, int k = 5);

// 1-based index of the split whose char range contains answer_start. Offsets
// in inter-split gaps attach to the following split; offsets past the last
// split attach to it. Throws OffsetError when out of range of the text.
int position_of_answer(const Document& doc, std::size_t answer_start, int k = 5);

// Lowercase, tokenize, scan left to right; the first token equal to one of
// the 7 keywords decides. No match -> other.
WhType classify_wh(std::string_view question);

// The 18 OntoNotes entity classes.
enum class EntityLabel {
  PERSON, NORP, FAC, ORG, GPE, LOC, PRODUCT, EVENT, WORK_OF_ART,
  LAW, LANGUAGE, DATE, TIME, PERCENT, MONEY, QUANTITY, ORDINAL, CARDINAL
};

std::string_view to_string(EntityLabel label);
std::optional<EntityLabel> entity_label_from_string(std::string_view s);

// Maps foreign tag-scheme labels (CoNLL-style PER/LOC/... and common
// variants) onto the 18-class set; nullopt for labels with no sensible home.
std::optional<EntityLabel> map_foreign_label(std::string_view s);

struct EntitySpan {
  std::string text;
  EntityLabel label = EntityLabel::ORG;
  std::size_t begin = 0;
  std::size_t end = 0;
  int sentence_index = -1;  // filled by tag_document
};

// Pluggable named-entity tagger. Implementations must return valid slices,
// non-overlapping and sorted by start; sentence_index may be left unset.
class EntityTagger {
 public:
  virtual ~EntityTagger() = default;
  virtual std::string name() const = 0;
  virtual std::vector<EntitySpan> tag(std::string_view text) const = 0;
};

// Runs the tagger, validates its contract (slice equality, ordering,
// non-overlap; TaggerError otherwise) and fills sentence_index.
std::vector<EntitySpan> tag_document(const Document& doc, const EntityTagger& tagger);

// Document entities whose surface text occurs (case-insensitively) in the
// question+answer text of qa, in document order.
std::vector<EntitySpan> select_training_entities(const Document& doc, const QAPair& qa,
                                                 const EntityTagger& tagger);

// Longest entity of each sentence (ties: earliest start); sentences without
// entities contribute nothing; sorted by sentence index.
std::vector<EntitySpan> select_inference_entities(const Document& doc,
                                                  const EntityTagger& tagger);

// Deterministic built-in tagger: capitalized runs (gazetteer-backed
// PERSON/GPE, fallback ORG), month names and 4-digit years as DATE, numerals
// as CARDINAL or MONEY/PERCENT when '$'/'%'-adjacent.
std::unique_ptr<EntityTagger> builtin_rule_tagger();

// Adapter for an external NER service (POST {"text"} -> {"entities"});
// foreign labels are mapped onto the 18-class set, unmappable ones dropped.
std::unique_ptr<EntityTagger> http_tagger(std::string endpoint, int timeout_s = 30);

}  // namespace qag
