#include "qag/text.hpp"

#include <cctype>

namespace qag {

namespace {

inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
inline bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }
inline char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    if (i >= n) break;
    const std::size_t piece_begin = i;
    while (i < n && !is_space(text[i])) ++i;
    std::size_t b = piece_begin;
    std::size_t e = i;
    while (b < e && is_punct(text[b])) ++b;
    while (e > b && is_punct(text[e - 1])) --e;
    if (b < e) out.push_back({std::string(text.substr(b, e - b)), b, e});
  }
  return out;
}

std::vector<SentenceSpan> sentence_split(std::string_view text) {
  std::vector<SentenceSpan> spans;
  const std::size_t n = text.size();
  if (n == 0) return spans;
  std::size_t start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    while (j < n && is_space(text[j])) ++j;
    if (j == i + 1) continue;  // terminator not followed by whitespace
    if (j >= n) continue;      // trailing whitespace folds into the last span
    if (!std::isupper(static_cast<unsigned char>(text[j]))) continue;
    spans.push_back({start, i + 1});
    start = i + 1;
  }
  if (start < n) spans.push_back({start, n});
  return spans;
}

std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out.push_back(lower(c));
  return out;
}

std::vector<std::string> normalized_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (const Token& t : tokenize(s)) out.push_back(to_lower(t.text));
  return out;
}

std::string normalize_question(std::string_view q) {
  std::string out;
  out.reserve(q.size());
  for (const Token& t : tokenize(q)) {
    if (!out.empty()) out.push_back(' ');
    for (char c : t.text) {
      if (!is_punct(c)) out.push_back(lower(c));
    }
  }
  // inner punctuation removal may leave doubled spaces when a token was all punct
  std::string packed;
  packed.reserve(out.size());
  for (char c : out) {
    if (c == ' ' && (packed.empty() || packed.back() == ' ')) continue;
    packed.push_back(c);
  }
  while (!packed.empty() && packed.back() == ' ') packed.pop_back();
  return packed;
}

std::size_t find_ci(std::string_view haystack, std::string_view needle, std::size_t from) {
  if (needle.empty()) return from <= haystack.size() ? from : std::string_view::npos;
  if (needle.size() > haystack.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    std::size_t j = 0;
    while (j < needle.size() && lower(haystack[i + j]) == lower(needle[j])) ++j;
    if (j == needle.size()) return i;
  }
  return std::string_view::npos;
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
  return find_ci(haystack, needle) != std::string_view::npos;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace qag
