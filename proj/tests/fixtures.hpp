#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qag/corpus.hpp"

namespace qag::testfix {

// 5 sentences x 10 tokens, every token unique within the document and of
// varying length so "longest token" picks are unambiguous. Sentence starts
// are capitalized (required by the splitter) and the vocabulary avoids WH
// keywords and gazetteer entries. With 50 tokens the 5 position splits line
// up 1:1 with the 5 sentences.
Document synthetic_document(int doc_index, const std::string& title = "");

// n_docs synthetic documents, no QA pairs. Used by the mock end-to-end runs.
Corpus synthetic_corpus(int n_docs);

// Uniformly random corpus for round-trip properties: articles hold
// contiguous paragraphs (as in the wire format), every pair grounded.
Corpus random_corpus(std::uint64_t seed);

// SQuAD v1.1 JSON text with planted annotation artifacts: answers start in
// the first half of the document's char length with probability
// first_half_rate, and WH types follow a fixed distribution whose
// who/how/what/why mass is 0.73. total_qas is exact.
std::string squad_like_json(std::size_t total_qas, double first_half_rate, std::uint64_t seed);

// RAII temp directory under the system temp path.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const;

 private:
  std::string path_;
};

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace qag::testfix
