#include <algorithm>
#include <cctype>

#include "qag/backend.hpp"
#include "qag/conditions.hpp"
#include "qag/rng.hpp"
#include "qag/text.hpp"

namespace qag {

namespace {

std::string capitalize(std::string_view word) {
  std::string out(word);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

// "…<marker>N…" -> N
std::optional<int> int_after(std::string_view prompt, std::string_view marker) {
  const std::size_t at = prompt.find(marker);
  if (at == std::string_view::npos) return std::nullopt;
  std::size_t i = at + marker.size();
  int value = 0;
  bool any = false;
  while (i < prompt.size() && std::isdigit(static_cast<unsigned char>(prompt[i]))) {
    value = value * 10 + (prompt[i] - '0');
    any = true;
    ++i;
  }
  if (!any) return std::nullopt;
  return value;
}

std::optional<std::string> quoted_after(std::string_view prompt, std::string_view marker) {
  const std::size_t at = prompt.find(marker);
  if (at == std::string_view::npos) return std::nullopt;
  const std::size_t open = at + marker.size();
  const std::size_t close = prompt.find('"', open);
  if (close == std::string_view::npos) return std::nullopt;
  return std::string(prompt.substr(open, close - open));
}

std::optional<WhType> wh_in_prompt(std::string_view prompt) {
  for (WhType t : kWhPromptable) {
    const std::string needle = "a " + std::string(to_string(t)) + " type QA pair";
    if (prompt.find(needle) != std::string_view::npos) return t;
  }
  return std::nullopt;
}

struct SentencePick {
  std::vector<const Token*> tokens;
};

class MockBackend final : public GenerationBackend {
 public:
  explicit MockBackend(std::uint64_t seed) : seed_(seed) {}

  std::string name() const override { return "mock"; }
  bool supports(DecodingMode) const override { return true; }

  std::vector<BackendReply> generate(const std::string& prompt, const std::string& document_text,
                                     const DecodingConfig& decoding, int n_samples) override {
    const std::vector<Token> tokens = tokenize(document_text);
    const std::vector<SentenceSpan> sentences = sentence_split(document_text);
    const double latency =
        base_latency(decoding.mode) + static_cast<double>(fnv1a(prompt) % 23);

    std::vector<BackendReply> replies;
    replies.reserve(static_cast<std::size_t>(n_samples));

    if (prompt.rfind("List ", 0) == 0) {
      const std::string reply = predictor_reply(prompt, document_text);
      for (int s = 0; s < n_samples; ++s) replies.push_back({reply, latency});
      return replies;
    }

    const std::optional<int> combined_n = int_after(prompt, "Generate ");
    if (prompt.find("questions of different question type") != std::string::npos && combined_n) {
      const std::string reply = combined_reply(*combined_n, tokens, sentences);
      for (int s = 0; s < n_samples; ++s) replies.push_back({reply, latency});
      return replies;
    }

    const std::optional<int> pos = int_after(prompt, "from position ");
    const std::optional<std::string> entity = quoted_after(prompt, "about the entity \"");
    const std::optional<WhType> wh = wh_in_prompt(prompt);

    for (int s = 0; s < n_samples; ++s) {
      std::string reply;
      if (pos) {
        reply = position_reply(*pos, wh, tokens, sentences);
      } else if (entity) {
        reply = entity_reply(*entity, wh, document_text, tokens);
      } else if (wh) {
        reply = wh_reply(*wh, tokens, sentences);
      } else if (decoding.mode == DecodingMode::greedy) {
        // Implicit greedy collapses onto the position-1 output: the
        // redundancy the explicit conditions exist to break.
        reply = position_reply(1, std::nullopt, tokens, sentences);
      } else {
        DetRng rng(seed_ ^ fnv1a(document_text) ^ (0x9e3779b97f4a7c15ULL * (s + 1)));
        const int split = 1 + static_cast<int>(rng.below(5));
        reply = position_reply(split, std::nullopt, tokens, sentences);
      }
      replies.push_back({reply, latency});
    }
    return replies;
  }

 private:
  static double base_latency(DecodingMode mode) {
    switch (mode) {
      case DecodingMode::greedy: return 50.0;
      case DecodingMode::nucleus: return 80.0;
      case DecodingMode::nucleus_topk: return 90.0;
      case DecodingMode::diverse_beam: return 120.0;
    }
    return 50.0;
  }

  static SentencePick sentence_tokens(std::size_t sentence_index,
                                      const std::vector<Token>& tokens,
                                      const std::vector<SentenceSpan>& sentences) {
    SentencePick pick;
    if (sentences.empty()) {
      for (const Token& t : tokens) pick.tokens.push_back(&t);
      return pick;
    }
    const SentenceSpan& span = sentences[std::min(sentence_index, sentences.size() - 1)];
    for (const Token& t : tokens) {
      if (t.begin >= span.begin && t.end <= span.end) pick.tokens.push_back(&t);
    }
    if (pick.tokens.empty()) {
      for (const Token& t : tokens) pick.tokens.push_back(&t);
    }
    return pick;
  }

  // Middle sentence of split `pos` (1-based, k=5).
  static SentencePick split_sentence(int pos, const std::vector<Token>& tokens,
                                     const std::vector<SentenceSpan>& sentences) {
    const int k = 5;
    if (tokens.size() < static_cast<std::size_t>(k) || sentences.empty()) {
      return sentence_tokens(static_cast<std::size_t>(std::max(0, pos - 1)), tokens, sentences);
    }
    const auto ranges = split_token_ranges(tokens.size(), k);
    const int idx = std::clamp(pos, 1, k) - 1;
    const auto [lo, hi] = ranges[static_cast<std::size_t>(idx)];
    const std::size_t char_begin = tokens[lo].begin;
    const std::size_t char_end = tokens[hi - 1].end;
    std::vector<std::size_t> overlapping;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (sentences[i].begin < char_end && sentences[i].end > char_begin) overlapping.push_back(i);
    }
    if (overlapping.empty()) return sentence_tokens(0, tokens, sentences);
    return sentence_tokens(overlapping[(overlapping.size() - 1) / 2], tokens, sentences);
  }

  static std::string longest_token(const SentencePick& pick) {
    const Token* best = nullptr;
    for (const Token* t : pick.tokens) {
      if (best == nullptr || t->text.size() > best->text.size()) best = t;
    }
    return best == nullptr ? std::string() : best->text;
  }

  static std::string first_tokens(const SentencePick& pick, std::size_t count) {
    std::string out;
    for (std::size_t i = 0; i < pick.tokens.size() && i < count; ++i) {
      if (!out.empty()) out.push_back(' ');
      out += pick.tokens[i]->text;
    }
    return out;
  }

  static std::string serialize(const std::string& question, const std::string& answer) {
    return "question: " + question + ", answer: " + answer;
  }

  static std::string position_reply(int pos, std::optional<WhType> wh,
                                    const std::vector<Token>& tokens,
                                    const std::vector<SentenceSpan>& sentences) {
    const SentencePick pick = split_sentence(pos, tokens, sentences);
    if (pick.tokens.empty()) return serialize("What about this?", "nothing");
    if (wh) {
      return serialize(capitalize(to_string(*wh)) + " is " + pick.tokens.front()->text + "?",
                       longest_token(pick));
    }
    return serialize("What about " + first_tokens(pick, 3) + "?", longest_token(pick));
  }

  static std::string wh_reply(WhType wh, const std::vector<Token>& tokens,
                              const std::vector<SentenceSpan>& sentences) {
    const std::size_t ordinal = static_cast<std::size_t>(
        std::find(kWhPromptable.begin(), kWhPromptable.end(), wh) - kWhPromptable.begin());
    const std::size_t sentence =
        sentences.empty() ? 0 : ordinal % sentences.size();
    const SentencePick pick = sentence_tokens(sentence, tokens, sentences);
    if (pick.tokens.empty()) return serialize(capitalize(to_string(wh)) + " is this?", "nothing");
    return serialize(capitalize(to_string(wh)) + " is " + pick.tokens.front()->text + "?",
                     longest_token(pick));
  }

  std::string entity_reply(const std::string& entity, std::optional<WhType> wh,
                           const std::string& document_text,
                           const std::vector<Token>& tokens) const {
    // Answer with the exact document slice so grounding always succeeds.
    std::string answer = entity;
    std::size_t at = document_text.find(entity);
    if (at == std::string::npos) at = find_ci(document_text, entity);
    if (at != std::string::npos) {
      answer = document_text.substr(at, entity.size());
    } else if (!tokens.empty()) {
      answer = tokens.front().text;
    }
    const std::string question =
        wh ? capitalize(to_string(*wh)) + " is " + entity + "?" : "What about " + entity + "?";
    return serialize(question, answer);
  }

  static std::string combined_reply(int n, const std::vector<Token>& tokens,
                                    const std::vector<SentenceSpan>& sentences) {
    std::string out;
    for (int j = 0; j < n; ++j) {
      const WhType wh = kWhPromptable[static_cast<std::size_t>(j) % kWhPromptable.size()];
      const SentencePick pick =
          tokens.size() >= 5
              ? split_sentence(1 + j % 5, tokens, sentences)
              : sentence_tokens(sentences.empty() ? 0 : static_cast<std::size_t>(j) %
                                                            sentences.size(),
                                tokens, sentences);
      if (pick.tokens.empty()) continue;
      if (!out.empty()) out += "\n";
      out += std::to_string(j + 1) + ". " +
             serialize(capitalize(to_string(wh)) + " is " + pick.tokens.front()->text + "?",
                       longest_token(pick));
    }
    return out;
  }

  std::string predictor_reply(const std::string& prompt, const std::string& document_text) const {
    std::uint64_t key = seed_ ^ fnv1a(document_text);
    if (const std::optional<int> pos = int_after(prompt, "position ")) {
      key ^= 0x517cc1b727220a95ULL * static_cast<std::uint64_t>(*pos);
    } else if (const std::optional<std::string> ent = quoted_after(prompt, "the entity \"")) {
      key ^= fnv1a(*ent, 0x9ae16a3b2f90404fULL);
    }
    DetRng rng(key);
    if (rng.below(4) == 0) return "none";
    const std::size_t count = 1 + rng.below(3);
    std::array<bool, 7> chosen{};
    for (std::size_t c = 0; c < count; ++c) chosen[rng.below(7)] = true;
    std::string out;
    for (std::size_t i = 0; i < kWhPromptable.size(); ++i) {
      if (!chosen[i]) continue;
      if (!out.empty()) out += ", ";
      out += to_string(kWhPromptable[i]);
    }
    return out.empty() ? "none" : out;
  }

  std::uint64_t seed_;
};

}  // namespace

std::unique_ptr<GenerationBackend> mock_backend(std::uint64_t seed) {
  return std::make_unique<MockBackend>(seed);
}

}  // namespace qag
