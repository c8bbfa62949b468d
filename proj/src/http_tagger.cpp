#include <algorithm>

#include <httplib.h>
#include <json.hpp>

#include "qag/conditions.hpp"
#include "qag/errors.hpp"

namespace qag {

namespace {

// Adapter for an external NER service: POST {"text": ...} returning
// {"entities": [{"text","label","start","end"}]}. Foreign labels are mapped
// onto the 18-class set by the bundled table, unmappable ones are dropped,
// and spans are sanitized to satisfy the tagger contract (valid slices,
// sorted, non-overlapping).
class HttpTagger final : public EntityTagger {
 public:
  HttpTagger(std::string endpoint, int timeout_s)
      : endpoint_(std::move(endpoint)), timeout_s_(timeout_s) {
    const std::size_t scheme = endpoint_.find("://");
    if (scheme == std::string::npos) {
      throw ConfigError("tagger endpoint '" + endpoint_ + "' lacks a scheme");
    }
    const std::size_t path_at = endpoint_.find('/', scheme + 3);
    base_ = path_at == std::string::npos ? endpoint_ : endpoint_.substr(0, path_at);
    path_ = path_at == std::string::npos ? "/" : endpoint_.substr(path_at);
  }

  std::string name() const override { return "http:" + endpoint_; }

  std::vector<EntitySpan> tag(std::string_view text) const override {
    nlohmann::json payload;
    payload["text"] = std::string(text);

    httplib::Client client(base_);
    client.set_connection_timeout(timeout_s_, 0);
    client.set_read_timeout(timeout_s_, 0);
    httplib::Result res = client.Post(path_, payload.dump(), "application/json");
    if (!res) {
      throw TaggerError("POST " + endpoint_ + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
      throw TaggerError("POST " + endpoint_ + " returned status " + std::to_string(res->status));
    }

    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw TaggerError("tagger returned invalid JSON: " + std::string(e.what()));
    }
    if (!reply.contains("entities") || !reply["entities"].is_array()) {
      throw TaggerError("tagger reply lacks an \"entities\" list");
    }

    std::vector<EntitySpan> spans;
    for (const auto& item : reply["entities"]) {
      if (!item.contains("text") || !item.contains("label")) continue;
      const std::optional<EntityLabel> label =
          map_foreign_label(item["label"].get<std::string>());
      if (!label) continue;  // no sensible home in the 18-class set

      EntitySpan span;
      span.text = item["text"].get<std::string>();
      span.label = *label;
      span.begin = item.value("start", std::size_t{0});
      span.end = item.value("end", std::size_t{0});
      if (span.text.empty()) continue;

      // Re-locate spans whose offsets do not line up with the text.
      const bool slice_ok = span.end > span.begin && span.end <= text.size() &&
                            text.substr(span.begin, span.end - span.begin) == span.text;
      if (!slice_ok) {
        const std::size_t at = text.find(span.text);
        if (at == std::string_view::npos) continue;
        span.begin = at;
        span.end = at + span.text.size();
      }
      spans.push_back(std::move(span));
    }

    std::sort(spans.begin(), spans.end(), [](const EntitySpan& a, const EntitySpan& b) {
      return a.begin != b.begin ? a.begin < b.begin : a.end > b.end;
    });
    std::vector<EntitySpan> kept;
    for (EntitySpan& span : spans) {
      if (!kept.empty() && span.begin < kept.back().end) continue;  // overlap: keep first
      kept.push_back(std::move(span));
    }
    return kept;
  }

 private:
  std::string endpoint_;
  std::string base_;
  std::string path_;
  int timeout_s_;
};

}  // namespace

std::unique_ptr<EntityTagger> http_tagger(std::string endpoint, int timeout_s) {
  return std::make_unique<HttpTagger>(std::move(endpoint), timeout_s);
}

}  // namespace qag
