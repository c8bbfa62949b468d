#include "qag/corpus.hpp"

#include <algorithm>
#include <unordered_set>

#include "qag/errors.hpp"
#include "qag/rng.hpp"

namespace qag {

std::string_view to_string(QASource s) {
  return s == QASource::human ? "human" : "synthetic";
}

Document Document::make(std::string id, std::string title, std::string text) {
  Document d;
  d.id_ = std::move(id);
  d.title_ = std::move(title);
  d.text_ = std::move(text);
  d.tokens_ = tokenize(d.text_);
  d.sentences_ = sentence_split(d.text_);
  if (d.tokens_.empty()) {
    throw FormatError("document '" + d.id_ + "' has no tokens");
  }
  return d;
}

std::size_t Document::sentence_index_at(std::size_t char_offset) const {
  for (std::size_t i = 0; i < sentences_.size(); ++i) {
    if (char_offset < sentences_[i].end) return i;
  }
  return sentences_.empty() ? 0 : sentences_.size() - 1;
}

const Document* Corpus::find_document(const std::string& doc_id) const {
  auto it = doc_index_.find(doc_id);
  return it == doc_index_.end() ? nullptr : &documents[it->second];
}

void Corpus::add_document(Document doc) {
  if (doc_index_.contains(doc.id())) {
    throw FormatError("duplicate document id '" + doc.id() + "'");
  }
  doc_index_.emplace(doc.id(), documents.size());
  qas.try_emplace(doc.id());
  documents.push_back(std::move(doc));
}

void Corpus::add_qa(const std::string& doc_id, QAPair qa) {
  const Document* doc = find_document(doc_id);
  if (doc == nullptr) {
    throw FormatError("qa '" + qa.id + "' references unknown document '" + doc_id + "'");
  }
  if (trim(qa.question).empty() || trim(qa.answer_text).empty()) {
    throw FormatError("qa '" + qa.id + "' has an empty question or answer");
  }
  if (qa.answer_start.has_value()) {
    const std::size_t start = *qa.answer_start;
    const std::string& text = doc->text();
    if (start > text.size() || start + qa.answer_text.size() > text.size() ||
        text.compare(start, qa.answer_text.size(), qa.answer_text) != 0) {
      throw OffsetError("qa '" + qa.id + "': answer_start " + std::to_string(start) +
                        " does not point at the answer text");
    }
  }
  if (!qa.id.empty() && !qa_ids_.insert(qa.id).second) {
    throw FormatError("duplicate qa id '" + qa.id + "'");
  }
  qas[doc_id].push_back(std::move(qa));
}

const std::vector<QAPair>* Corpus::pairs_of(const std::string& doc_id) const {
  auto it = qas.find(doc_id);
  return it == qas.end() ? nullptr : &it->second;
}

std::size_t Corpus::total_qa_count() const {
  std::size_t n = 0;
  for (const auto& [id, pairs] : qas) n += pairs.size();
  return n;
}

Corpus merge(const Corpus& a, const Corpus& b) {
  Corpus out;
  for (const Document& doc : a.documents) {
    out.add_document(doc);
    if (const std::vector<QAPair>* pairs = a.pairs_of(doc.id())) {
      for (const QAPair& qa : *pairs) out.add_qa(doc.id(), qa);
    }
  }
  for (const auto& [k, v] : a.provenance) out.provenance[k] = v;
  for (const auto& [k, v] : b.provenance) out.provenance.try_emplace(k, v);

  for (const Document& doc : b.documents) {
    const Document* existing = out.find_document(doc.id());
    if (existing == nullptr) {
      out.add_document(doc);
    } else if (existing->text() != doc.text()) {
      throw MergeConflict("document '" + doc.id() + "' has different text in the two corpora");
    }
  }

  // Seed the seen-set from a so only newly introduced duplicates are dropped.
  std::unordered_set<std::string> seen;
  for (const auto& [doc_id, pairs] : a.qas) {
    for (const QAPair& qa : pairs) seen.insert(doc_id + "\x1f" + normalize_question(qa.question));
  }
  for (const Document& doc : b.documents) {
    const std::vector<QAPair>* pairs = b.pairs_of(doc.id());
    if (pairs == nullptr) continue;
    for (const QAPair& qa : *pairs) {
      const std::string key = doc.id() + "\x1f" + normalize_question(qa.question);
      if (!seen.insert(key).second) continue;
      out.add_qa(doc.id(), qa);
    }
  }
  return out;
}

Corpus sample_to_size(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
  const std::size_t total = corpus.total_qa_count();
  if (n > total) {
    throw SampleError("requested " + std::to_string(n) + " pairs but corpus holds " +
                      std::to_string(total));
  }

  // Flatten in deterministic order: documents in corpus order, pairs in list order.
  std::vector<std::pair<std::size_t, std::size_t>> slots;  // (doc index, pair index)
  slots.reserve(total);
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const std::vector<QAPair>* pairs = corpus.pairs_of(corpus.documents[d].id());
    if (pairs == nullptr) continue;
    for (std::size_t p = 0; p < pairs->size(); ++p) slots.emplace_back(d, p);
  }

  // Partial Fisher-Yates: the first n entries are a uniform sample.
  DetRng rng(seed);
  for (std::size_t i = 0; i < n && i + 1 < slots.size(); ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(slots.size() - i));
    std::swap(slots[i], slots[j]);
  }

  std::vector<std::vector<bool>> keep(corpus.documents.size());
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const std::vector<QAPair>* pairs = corpus.pairs_of(corpus.documents[d].id());
    keep[d].assign(pairs == nullptr ? 0 : pairs->size(), false);
  }
  for (std::size_t i = 0; i < n; ++i) keep[slots[i].first][slots[i].second] = true;

  Corpus out;
  out.provenance = corpus.provenance;
  out.provenance["sampled_to"] = std::to_string(n);
  out.provenance["sample_seed"] = std::to_string(seed);
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    out.add_document(corpus.documents[d]);
    const std::vector<QAPair>* pairs = corpus.pairs_of(corpus.documents[d].id());
    if (pairs == nullptr) continue;
    for (std::size_t p = 0; p < pairs->size(); ++p) {
      if (keep[d][p]) out.add_qa(corpus.documents[d].id(), (*pairs)[p]);
    }
  }
  return out;
}

namespace {

bool qa_equal(const QAPair& x, const QAPair& y) {
  return x.id == y.id && x.question == y.question && x.answer_text == y.answer_text &&
         x.answer_start == y.answer_start && x.source == y.source;
}

}  // namespace

bool structurally_equal(const Corpus& a, const Corpus& b, bool compare_doc_ids) {
  if (a.documents.size() != b.documents.size()) return false;
  for (std::size_t i = 0; i < a.documents.size(); ++i) {
    const Document& da = a.documents[i];
    const Document& db = b.documents[i];
    if (da.title() != db.title() || da.text() != db.text()) return false;
    if (compare_doc_ids && da.id() != db.id()) return false;
    const std::vector<QAPair>* pa = a.pairs_of(da.id());
    const std::vector<QAPair>* pb = b.pairs_of(db.id());
    const std::size_t na = pa == nullptr ? 0 : pa->size();
    const std::size_t nb = pb == nullptr ? 0 : pb->size();
    if (na != nb) return false;
    for (std::size_t j = 0; j < na; ++j) {
      if (!qa_equal((*pa)[j], (*pb)[j])) return false;
    }
  }
  return true;
}

}  // namespace qag
