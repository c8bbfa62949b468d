#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace qag {

// One whitespace-delimited piece with leading/trailing punctuation stripped.
// begin/end index into the original text; text == original.substr(begin, end-begin).
struct Token {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Half-open character span of one sentence. Spans tile the full text.
struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Deterministic word tokenizer: split on whitespace, strip leading/trailing
// punctuation from each piece, drop pieces that strip away entirely. Case
// preserved, offsets recorded against the stripped core.
std::vector<Token> tokenize(std::string_view text);

// Rule-based splitter: boundary after '.', '!' or '?' followed by whitespace
// and an uppercase letter. No abbreviation list, so "Mr. Smith" splits (a
// known limitation). Spans tile the text; trailing characters join the last
// span.
std::vector<SentenceSpan> sentence_split(std::string_view text);

std::string to_lower(std::string_view s);

// Lowercased, punctuation-stripped token strings.
std::vector<std::string> normalized_tokens(std::string_view s);

// Lowercase, strip punctuation, collapse runs of whitespace to single spaces.
std::string normalize_question(std::string_view q);

// Case-insensitive substring test (ASCII folding).
bool contains_ci(std::string_view haystack, std::string_view needle);

// Case-insensitive find; npos when absent.
std::size_t find_ci(std::string_view haystack, std::string_view needle, std::size_t from = 0);

std::string trim(std::string_view s);

}  // namespace qag
