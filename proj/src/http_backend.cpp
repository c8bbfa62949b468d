#include <chrono>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "qag/backend.hpp"
#include "qag/errors.hpp"

namespace qag {

namespace {

struct UrlParts {
  std::string base;  // scheme://host[:port]
  std::string path;  // /v1/completions
};

UrlParts split_url(const std::string& url) {
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("endpoint '" + url + "' lacks a scheme");
  }
  const std::size_t path_at = url.find('/', scheme + 3);
  UrlParts parts;
  if (path_at == std::string::npos) {
    parts.base = url;
    parts.path = "/";
  } else {
    parts.base = url.substr(0, path_at);
    parts.path = url.substr(path_at);
  }
  return parts;
}

class HttpBackend final : public GenerationBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw ConfigError("http backend requires an endpoint");
    url_ = split_url(config_.endpoint);
    if (!config_.api_key_env.empty()) {
      const char* key = std::getenv(config_.api_key_env.c_str());
      if (key == nullptr || *key == '\0') {
        throw ConfigError("environment variable '" + config_.api_key_env +
                          "' named as the API key source is not set");
      }
      api_key_ = key;
    }
  }

  std::string name() const override { return "http:" + config_.endpoint; }

  bool supports(DecodingMode mode) const override {
    for (DecodingMode m : config_.supported_modes) {
      if (m == mode) return true;
    }
    return false;
  }

  int max_concurrency() const override { return config_.max_concurrency; }

  std::vector<BackendReply> generate(const std::string& prompt, const std::string& document_text,
                                     const DecodingConfig& decoding, int n_samples) override {
    const std::string body = build_payload(prompt, document_text, decoding, n_samples);

    httplib::Client client(url_.base);
    client.set_connection_timeout(config_.timeout_s, 0);
    client.set_read_timeout(config_.timeout_s, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    const auto started = std::chrono::steady_clock::now();
    httplib::Result res = client.Post(url_.path, headers, body, "application/json");
    const double latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();

    if (!res) {
      throw BackendError("POST " + config_.endpoint +
                         " failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
      throw BackendError("POST " + config_.endpoint + " returned status " +
                         std::to_string(res->status));
    }
    return parse_reply(res->body, n_samples, latency_ms);
  }

 private:
  std::string build_payload(const std::string& prompt, const std::string& document_text,
                            const DecodingConfig& decoding, int n_samples) const {
    const std::string input = prompt + "\n" + document_text;
    nlohmann::json payload;
    payload["model"] = config_.model;
    if (config_.chat_style) {
      payload["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", input}}});
    } else {
      payload["prompt"] = input;
    }
    payload["n"] = n_samples;
    payload["max_tokens"] = decoding.max_new_tokens;

    // Parameters a mode does not use are omitted entirely.
    switch (decoding.mode) {
      case DecodingMode::greedy:
        payload["temperature"] = 0.0;
        break;
      case DecodingMode::nucleus:
        payload["temperature"] = decoding.temperature;
        payload["top_p"] = decoding.top_p;
        break;
      case DecodingMode::nucleus_topk:
        payload["temperature"] = decoding.temperature;
        payload["top_p"] = decoding.top_p;
        payload["top_k"] = decoding.top_k;
        break;
      case DecodingMode::diverse_beam:
        payload["num_beams"] = decoding.num_beams;
        payload["num_beam_groups"] = decoding.num_beam_groups;
        payload["diversity_penalty"] = decoding.diversity_penalty;
        break;
    }
    if (decoding.seed && decoding.mode != DecodingMode::greedy) {
      payload["seed"] = *decoding.seed;
    }
    return payload.dump();
  }

  std::vector<BackendReply> parse_reply(const std::string& body, int n_samples,
                                        double latency_ms) const {
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw BackendError("backend returned invalid JSON: " + std::string(e.what()));
    }
    std::vector<BackendReply> out;
    if (reply.contains("choices") && reply["choices"].is_array()) {
      for (const auto& choice : reply["choices"]) {
        if (choice.contains("text") && choice["text"].is_string()) {
          out.push_back({choice["text"].get<std::string>(), latency_ms});
        } else if (choice.contains("message") && choice["message"].contains("content")) {
          out.push_back({choice["message"]["content"].get<std::string>(), latency_ms});
        }
      }
    } else if (reply.contains("text") && reply["text"].is_string()) {
      out.push_back({reply["text"].get<std::string>(), latency_ms});
    }
    if (out.size() != static_cast<std::size_t>(n_samples)) {
      throw BackendError("backend returned " + std::to_string(out.size()) + " texts, expected " +
                         std::to_string(n_samples));
    }
    return out;
  }

  HttpBackendConfig config_;
  UrlParts url_;
  std::string api_key_;
};

}  // namespace

std::unique_ptr<GenerationBackend> http_backend(HttpBackendConfig config) {
  return std::make_unique<HttpBackend>(std::move(config));
}

}  // namespace qag
