#include "qag/squad_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "qag/errors.hpp"

namespace qag {

namespace {

using ordered_json = nlohmann::ordered_json;

const nlohmann::json& require_field(const nlohmann::json& obj, const char* key,
                                    const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw FormatError(where + ": missing \"" + key + "\"");
  }
  return obj.at(key);
}

std::string document_id_for(const std::string& title, std::size_t ordinal) {
  return (title.empty() ? std::string("untitled") : title) + "#" + std::to_string(ordinal);
}

}  // namespace

Corpus ingest_squad_text(std::string_view content, bool strict, const std::string& source_name) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(source_name + ": not valid JSON: " + e.what());
  }
  if (!root.is_object()) throw FormatError(source_name + ": top level is not an object");
  if (strict && !root.contains("version")) {
    throw FormatError(source_name + ": missing \"version\"");
  }
  const nlohmann::json& data = require_field(root, "data", source_name);
  if (!data.is_array()) throw FormatError(source_name + ": \"data\" is not a list");

  Corpus corpus;
  corpus.provenance["source"] = source_name;
  if (root.contains("version") && root["version"].is_string()) {
    corpus.provenance["version"] = root["version"].get<std::string>();
  }

  std::size_t regrounded = 0;
  std::size_t dropped = 0;
  std::size_t skipped_contexts = 0;
  std::map<std::string, std::size_t> title_ordinal;

  for (const nlohmann::json& article : data) {
    const std::string title =
        article.contains("title") && article["title"].is_string() ? article["title"] : "";
    const nlohmann::json& paragraphs = require_field(article, "paragraphs", source_name);
    if (!paragraphs.is_array()) {
      throw FormatError(source_name + ": \"paragraphs\" is not a list");
    }
    for (const nlohmann::json& paragraph : paragraphs) {
      const nlohmann::json& context = require_field(paragraph, "context", source_name);
      if (!context.is_string()) throw FormatError(source_name + ": \"context\" is not a string");
      const std::string text = context.get<std::string>();
      const std::string doc_id = document_id_for(title, title_ordinal[title]++);

      if (tokenize(text).empty()) {
        if (strict) throw FormatError(source_name + ": empty context in '" + doc_id + "'");
        ++skipped_contexts;
        continue;
      }
      corpus.add_document(Document::make(doc_id, title, text));

      const nlohmann::json& qa_list = require_field(paragraph, "qas", source_name);
      if (!qa_list.is_array()) throw FormatError(source_name + ": \"qas\" is not a list");
      for (const nlohmann::json& qa_json : qa_list) {
        QAPair qa;
        qa.id = require_field(qa_json, "id", source_name).get<std::string>();
        qa.question = require_field(qa_json, "question", source_name).get<std::string>();
        const nlohmann::json& answers = require_field(qa_json, "answers", source_name);
        if (!answers.is_array() || answers.empty()) {
          if (strict) throw FormatError(source_name + ": qa '" + qa.id + "' has no answers");
          ++dropped;
          continue;
        }
        const nlohmann::json& answer = answers.at(0);  // multi-answer adjudication out of scope
        qa.answer_text = require_field(answer, "text", source_name).get<std::string>();
        const auto start =
            require_field(answer, "answer_start", source_name).get<long long>();
        qa.source = QASource::human;

        const bool offset_ok =
            start >= 0 && static_cast<std::size_t>(start) + qa.answer_text.size() <= text.size() &&
            text.compare(static_cast<std::size_t>(start), qa.answer_text.size(),
                         qa.answer_text) == 0;
        if (offset_ok) {
          qa.answer_start = static_cast<std::size_t>(start);
        } else if (strict) {
          throw OffsetError(source_name + ": qa '" + qa.id + "': answer_start " +
                            std::to_string(start) + " does not match the answer text");
        } else {
          const std::size_t found = text.find(qa.answer_text);
          if (found == std::string::npos) {
            ++dropped;
            continue;
          }
          qa.answer_start = found;
          ++regrounded;
        }
        if (trim(qa.question).empty() || trim(qa.answer_text).empty()) {
          if (strict) throw FormatError(source_name + ": qa '" + qa.id + "' is empty");
          ++dropped;
          continue;
        }
        try {
          corpus.add_qa(doc_id, std::move(qa));
        } catch (const FormatError&) {  // e.g. a duplicated qa id
          if (strict) throw;
          ++dropped;
        }
      }
    }
  }

  corpus.provenance["regrounded"] = std::to_string(regrounded);
  corpus.provenance["dropped"] = std::to_string(dropped);
  corpus.provenance["skipped_empty_contexts"] = std::to_string(skipped_contexts);
  return corpus;
}

Corpus ingest_squad(const std::string& path, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return ingest_squad_text(buf.str(), strict, path);
}

std::string export_squad_text(const Corpus& corpus) {
  std::string ungrounded;
  for (const Document& doc : corpus.documents) {
    const std::vector<QAPair>* pairs = corpus.pairs_of(doc.id());
    if (pairs == nullptr) continue;
    for (const QAPair& qa : *pairs) {
      if (!qa.grounded()) ungrounded += ungrounded.empty() ? qa.id : ", " + qa.id;
    }
  }
  if (!ungrounded.empty()) {
    throw ExportError("ungrounded pairs cannot be exported: " + ungrounded);
  }

  // One data entry per title, titles in first-appearance order.
  std::vector<std::string> title_order;
  std::map<std::string, std::vector<const Document*>> by_title;
  for (const Document& doc : corpus.documents) {
    auto [it, inserted] = by_title.try_emplace(doc.title());
    if (inserted) title_order.push_back(doc.title());
    it->second.push_back(&doc);
  }

  ordered_json root;
  auto version = corpus.provenance.find("version");
  root["version"] = version == corpus.provenance.end() ? "1.1" : version->second;
  root["data"] = ordered_json::array();
  for (const std::string& title : title_order) {
    ordered_json article;
    article["title"] = title;
    article["paragraphs"] = ordered_json::array();
    for (const Document* doc : by_title[title]) {
      ordered_json paragraph;
      paragraph["context"] = doc->text();
      paragraph["qas"] = ordered_json::array();
      if (const std::vector<QAPair>* pairs = corpus.pairs_of(doc->id())) {
        for (const QAPair& qa : *pairs) {
          ordered_json item;
          item["id"] = qa.id;
          item["question"] = qa.question;
          ordered_json answer;
          answer["text"] = qa.answer_text;
          answer["answer_start"] = *qa.answer_start;
          item["answers"] = ordered_json::array();
          item["answers"].push_back(std::move(answer));
          paragraph["qas"].push_back(std::move(item));
        }
      }
      article["paragraphs"].push_back(std::move(paragraph));
    }
    root["data"].push_back(std::move(article));
  }
  return root.dump(2) + "\n";
}

void export_squad(const Corpus& corpus, const std::string& path) {
  const std::string payload = export_squad_text(corpus);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExportError("cannot open '" + path + "' for writing");
  out << payload;
  if (!out) throw ExportError("failed writing '" + path + "'");
}

}  // namespace qag
