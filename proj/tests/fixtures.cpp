#include "fixtures.hpp"

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qag/conditions.hpp"
#include "qag/errors.hpp"
#include "qag/rng.hpp"

namespace fs = std::filesystem;

namespace qag::testfix {

namespace {

std::string fixture_word(int doc_index, int sentence, int position) {
  // Unique within the document, length grows with the position so the
  // longest-token pick is unambiguous.
  std::string word = "tok" + std::to_string(doc_index) + "s" + std::to_string(sentence) + "p" +
                     std::to_string(position);
  word.append(static_cast<std::size_t>(position), 'z');
  return word;
}

std::string capitalize(std::string word) {
  if (!word.empty()) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
  return word;
}

// Pronounceable pseudoword, never equal to a WH keyword (length >= 4).
std::string pseudo_word(DetRng& rng) {
  static const char* consonants = "bcdfglmnprstv";
  static const char* vowels = "aeiou";
  const std::size_t syllables = 2 + rng.below(2);
  std::string word;
  for (std::size_t s = 0; s < syllables; ++s) {
    word.push_back(consonants[rng.below(13)]);
    word.push_back(vowels[rng.below(5)]);
  }
  return word;
}

}  // namespace

Document synthetic_document(int doc_index, const std::string& title) {
  std::string text;
  for (int s = 0; s < 5; ++s) {
    if (s > 0) text.push_back(' ');
    for (int p = 0; p < 10; ++p) {
      std::string word = fixture_word(doc_index, s, p);
      if (p == 0) word = capitalize(std::move(word));
      if (p > 0) text.push_back(' ');
      text += word;
    }
    text.push_back('.');
  }
  const std::string doc_title =
      title.empty() ? "Fixture " + std::to_string(doc_index / 10) : title;
  const std::string id = doc_title + "#" + std::to_string(doc_index % 10);
  return Document::make(id, doc_title, text);
}

Corpus synthetic_corpus(int n_docs) {
  Corpus corpus;
  for (int d = 0; d < n_docs; ++d) corpus.add_document(synthetic_document(d));
  return corpus;
}

Corpus random_corpus(std::uint64_t seed) {
  DetRng rng(seed);
  Corpus corpus;
  std::size_t qa_counter = 0;
  const std::size_t n_articles = 1 + rng.below(3);
  for (std::size_t a = 0; a < n_articles; ++a) {
    const std::string title = "Article " + std::to_string(seed) + "-" + std::to_string(a);
    const std::size_t n_paragraphs = 1 + rng.below(3);
    for (std::size_t p = 0; p < n_paragraphs; ++p) {
      std::string text;
      const std::size_t n_tokens = 5 + rng.below(56);
      for (std::size_t t = 0; t < n_tokens; ++t) {
        if (t > 0) text.push_back(' ');
        std::string word = pseudo_word(rng);
        if (t == 0) word = capitalize(std::move(word));
        text += word;
      }
      text.push_back('.');
      const std::string doc_id = title + "#" + std::to_string(p);
      corpus.add_document(Document::make(doc_id, title, text));
      const Document& doc = *corpus.find_document(doc_id);

      const std::size_t n_qas = rng.below(5);
      for (std::size_t q = 0; q < n_qas; ++q) {
        const auto& tokens = doc.tokens();
        const std::size_t first = rng.below(tokens.size());
        const std::size_t span = std::min(tokens.size() - first, 1 + rng.below(3));
        QAPair qa;
        qa.id = "r" + std::to_string(seed) + "-" + std::to_string(qa_counter++);
        qa.question = "What is " + pseudo_word(rng) + " " + std::to_string(q) + "?";
        qa.answer_start = tokens[first].begin;
        qa.answer_text = doc.text().substr(tokens[first].begin,
                                           tokens[first + span - 1].end - tokens[first].begin);
        qa.source = QASource::human;
        corpus.add_qa(doc_id, std::move(qa));
      }
    }
  }
  return corpus;
}

std::string squad_like_json(std::size_t total_qas, double first_half_rate, std::uint64_t seed) {
  DetRng rng(seed);
  // WH mass: what .40 + how .12 + who .14 + why .07 = .73 for the
  // who/how/what/why group; where .08, when .08, which .09, none .02.
  struct WhSlot {
    const char* keyword;  // nullptr = no keyword (the "other" class)
    double mass;
  };
  static const WhSlot slots[] = {{"What", 0.40}, {"How", 0.12},  {"Who", 0.14}, {"Why", 0.07},
                                 {"Where", 0.08}, {"When", 0.08}, {"Which", 0.09}, {nullptr, 0.02}};

  nlohmann::ordered_json data = nlohmann::ordered_json::array();
  nlohmann::ordered_json article;
  std::size_t emitted = 0;
  std::size_t doc_index = 0;
  std::size_t qa_id = 0;

  while (emitted < total_qas) {
    if (doc_index % 20 == 0) {
      if (!article.is_null()) data.push_back(std::move(article));
      article = nlohmann::ordered_json();
      article["title"] = "Topic " + std::to_string(doc_index / 20);
      article["paragraphs"] = nlohmann::ordered_json::array();
    }

    std::string text;
    for (int s = 0; s < 8; ++s) {
      if (s > 0) text.push_back(' ');
      const std::size_t words = 8 + rng.below(5);
      for (std::size_t w = 0; w < words; ++w) {
        if (w > 0) text.push_back(' ');
        std::string word = pseudo_word(rng);
        if (w == 0) word = capitalize(std::move(word));
        text += word;
      }
      text.push_back('.');
    }
    const std::vector<Token> tokens = tokenize(text);
    const std::size_t half = text.size() / 2;
    std::vector<std::size_t> first_half_tokens;
    std::vector<std::size_t> second_half_tokens;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      (tokens[t].begin < half ? first_half_tokens : second_half_tokens).push_back(t);
    }

    nlohmann::ordered_json paragraph;
    paragraph["context"] = text;
    paragraph["qas"] = nlohmann::ordered_json::array();

    const std::size_t qas_here = std::min<std::size_t>(5, total_qas - emitted);
    for (std::size_t q = 0; q < qas_here; ++q) {
      const bool first_half = rng.unit() < first_half_rate;
      const std::vector<std::size_t>& pool =
          first_half || second_half_tokens.empty() ? first_half_tokens : second_half_tokens;
      const Token& answer = tokens[pool[rng.below(pool.size())]];

      double dice = rng.unit();
      const WhSlot* slot = &slots[0];
      for (const WhSlot& candidate : slots) {
        slot = &candidate;
        if (dice < candidate.mass) break;
        dice -= candidate.mass;
      }
      const std::string question =
          slot->keyword == nullptr
              ? "Name the term " + answer.text + " please."
              : std::string(slot->keyword) + " is " + answer.text + " in the passage?";

      nlohmann::ordered_json qa;
      qa["id"] = "fix-" + std::to_string(seed) + "-" + std::to_string(qa_id++);
      qa["question"] = question;
      nlohmann::ordered_json ans;
      ans["text"] = answer.text;
      ans["answer_start"] = answer.begin;
      qa["answers"] = nlohmann::ordered_json::array();
      qa["answers"].push_back(std::move(ans));
      paragraph["qas"].push_back(std::move(qa));
    }
    emitted += qas_here;
    article["paragraphs"].push_back(std::move(paragraph));
    ++doc_index;
  }
  if (!article.is_null()) data.push_back(std::move(article));

  nlohmann::ordered_json root;
  root["version"] = "1.1";
  root["data"] = std::move(data);
  return root.dump(2) + "\n";
}

namespace {
std::atomic<int> g_tempdir_counter{0};
}

TempDir::TempDir() {
  const int n = g_tempdir_counter.fetch_add(1);
  fs::path base = fs::temp_directory_path() /
                  ("qag-test-" + std::to_string(::getpid()) + "-" + std::to_string(n));
  fs::create_directories(base);
  path_ = base.string();
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string TempDir::file(const std::string& name) const {
  return (fs::path(path_) / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace qag::testfix
