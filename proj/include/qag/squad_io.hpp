#pragma once

#include <string>
#include <string_view>

#include "qag/corpus.hpp"

namespace qag {

// Reads a SQuAD v1.1 file: {"version", "data": [{"title", "paragraphs":
// [{"context", "qas": [{"id", "question", "answers": [{"text",
// "answer_start"}]}]}]}]}. Each paragraph becomes one Document with id
// "{title}#{per-title ordinal}". Only the first answer of each qa is kept.
//
// strict=true: any slice mismatch raises OffsetError naming the qa id, and a
// missing "version" field is a FormatError. strict=false: mismatched answers
// are re-grounded to the first exact occurrence of the answer text, else
// dropped; counts land in provenance ("regrounded", "dropped",
// "skipped_empty_contexts").
Corpus ingest_squad(const std::string& path, bool strict = false);
Corpus ingest_squad_text(std::string_view content, bool strict = false,
                         const std::string& source_name = "<string>");

// Writes the SQuAD v1.1 structure, UTF-8, 2-space indentation, keys in
// format order. Documents are grouped into one data entry per title, in
// first-appearance order. Every pair must be grounded (ExportError lists
// offending ids otherwise).
void export_squad(const Corpus& corpus, const std::string& path);
std::string export_squad_text(const Corpus& corpus);

}  // namespace qag
