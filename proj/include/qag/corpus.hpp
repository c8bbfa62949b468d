#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "qag/text.hpp"

namespace qag {

enum class QASource { human, synthetic };

std::string_view to_string(QASource s);

// One question/answer pair, optionally grounded to a character span of the
// owning document.
struct QAPair {
  std::string id;
  std::string question;
  std::string answer_text;
  std::optional<std::size_t> answer_start;
  QASource source = QASource::human;
  std::string strategy_tag;  // producing strategy, empty for human pairs

  bool grounded() const { return answer_start.has_value(); }
};

// Input passage with precomputed token and sentence segmentation.
class Document {
 public:
  // Tokenizes and sentence-splits text. Throws FormatError if the text
  // contains no tokens (such documents are never admitted to the pipeline).
  static Document make(std::string id, std::string title, std::string text);

  const std::string& id() const { return id_; }
  const std::string& title() const { return title_; }
  const std::string& text() const { return text_; }
  const std::vector<Token>& tokens() const { return tokens_; }
  const std::vector<SentenceSpan>& sentences() const { return sentences_; }
  std::size_t token_count() const { return tokens_.size(); }

  // Index of the sentence span containing the char offset (offsets past the
  // end clamp to the last sentence).
  std::size_t sentence_index_at(std::size_t char_offset) const;

 private:
  Document() = default;
  std::string id_;
  std::string title_;
  std::string text_;
  std::vector<Token> tokens_;
  std::vector<SentenceSpan> sentences_;
};

// Immutable after construction; safe to share across concurrent readers.
struct Corpus {
  std::vector<Document> documents;
  std::unordered_map<std::string, std::vector<QAPair>> qas;  // document id -> pairs
  std::map<std::string, std::string> provenance;

  const Document* find_document(const std::string& doc_id) const;

  // Throws FormatError on duplicate id.
  void add_document(Document doc);

  // Validates that the document exists, the qa id is unique within the
  // corpus, the question/answer are non-empty after trimming, and a present
  // answer_start satisfies slice equality.
  void add_qa(const std::string& doc_id, QAPair qa);

  const std::vector<QAPair>* pairs_of(const std::string& doc_id) const;
  std::size_t total_qa_count() const;

 private:
  std::unordered_map<std::string, std::size_t> doc_index_;  // id -> documents index
  std::unordered_set<std::string> qa_ids_;
};

// Union of documents (identical text required on id collision) and QA lists.
// Pairs from b that repeat an (id, normalized question) already present are
// dropped; a passes through untouched.
Corpus merge(const Corpus& a, const Corpus& b);

// Uniform sample of n QA pairs without replacement, deterministic given seed.
// All documents are retained even when left with zero pairs.
Corpus sample_to_size(const Corpus& corpus, std::size_t n, std::uint64_t seed);

// Content comparison used by round-trip checks: documents in order by
// (title, text) plus their QA lists (id, question, answer_text, answer_start,
// source). Document ids participate only when compare_doc_ids is set, since
// the SQuAD format cannot carry them. Provenance never participates.
bool structurally_equal(const Corpus& a, const Corpus& b, bool compare_doc_ids = false);

}  // namespace qag
