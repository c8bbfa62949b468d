#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qag/backend.hpp"
#include "qag/conditions.hpp"

namespace qag::testfix {

// Backend driven by a lambda; used to stub predictors and failure modes.
class FnBackend final : public GenerationBackend {
 public:
  using Fn = std::function<std::string(const std::string& prompt, const std::string& doc)>;

  explicit FnBackend(Fn fn, std::string name = "fn") : fn_(std::move(fn)), name_(std::move(name)) {}

  std::string name() const override { return name_; }
  bool supports(DecodingMode) const override { return true; }

  std::vector<BackendReply> generate(const std::string& prompt, const std::string& document_text,
                                     const DecodingConfig&, int n_samples) override {
    std::vector<BackendReply> out;
    for (int i = 0; i < n_samples; ++i) out.push_back({fn_(prompt, document_text), 1.0});
    return out;
  }

 private:
  Fn fn_;
  std::string name_;
};

// Tagger returning a fixed span list regardless of input.
class StubTagger final : public EntityTagger {
 public:
  explicit StubTagger(std::vector<EntitySpan> spans) : spans_(std::move(spans)) {}

  std::string name() const override { return "stub"; }
  std::vector<EntitySpan> tag(std::string_view) const override { return spans_; }

 private:
  std::vector<EntitySpan> spans_;
};

inline EntitySpan span_at(const std::string& text, std::size_t begin, std::string_view surface,
                          EntityLabel label) {
  EntitySpan span;
  span.text = std::string(surface);
  span.label = label;
  span.begin = begin;
  span.end = begin + surface.size();
  (void)text;
  return span;
}

// Span located by searching the document text (first occurrence).
inline EntitySpan span_of(const std::string& text, std::string_view surface, EntityLabel label) {
  const std::size_t at = text.find(surface);
  return span_at(text, at, surface, label);
}

}  // namespace qag::testfix
