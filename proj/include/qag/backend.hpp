#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qag {

enum class DecodingMode { greedy, nucleus, nucleus_topk, diverse_beam };

std::string_view to_string(DecodingMode m);
std::optional<DecodingMode> decoding_mode_from_string(std::string_view s);

// Sampling/beam parameters handed to a generation backend. Defaults carry the
// reference settings top_p=0.95, top_k=30.
struct DecodingConfig {
  DecodingMode mode = DecodingMode::greedy;
  double top_p = 0.95;
  int top_k = 30;
  int num_beams = 1;
  int num_beam_groups = 1;
  double diversity_penalty = 0.0;
  double temperature = 1.0;
  std::optional<std::uint64_t> seed;
  int max_new_tokens = 128;

  // Throws ConfigError on violated mode invariants.
  void validate() const;

  // num_beams=5, num_beam_groups=5, diversity_penalty=1.0.
  static DecodingConfig diverse_beam_defaults();
};

struct BackendReply {
  std::string text;
  double latency_ms = 0.0;
};

// Realizes the conditional generation P(qa | document, condition). Must
// return exactly n_samples texts or throw. Implementations are either safe
// for concurrent generate() calls or advertise max_concurrency() == 1.
class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;
  virtual std::string name() const = 0;
  virtual bool supports(DecodingMode mode) const = 0;
  virtual int max_concurrency() const { return 0; }  // 0 = unlimited
  virtual std::vector<BackendReply> generate(const std::string& prompt,
                                             const std::string& document_text,
                                             const DecodingConfig& decoding, int n_samples) = 0;
};

// Hermetic deterministic stand-in: output depends only on (seed, prompt,
// document text, n_samples); answers are always exact document substrings;
// greedy implicit calls repeat the position-1 output to simulate redundancy.
// Simulated latencies are deterministic too, so downstream reports are
// byte-stable. Supports every decoding mode and concurrent calls.
std::unique_ptr<GenerationBackend> mock_backend(std::uint64_t seed);

struct HttpBackendConfig {
  std::string endpoint;      // full URL of a completions-style POST endpoint
  std::string model;
  std::string api_key_env;   // name of the env var holding the key; never the key
  bool chat_style = false;   // "messages" instead of "prompt"
  std::vector<DecodingMode> supported_modes = {DecodingMode::greedy, DecodingMode::nucleus,
                                               DecodingMode::nucleus_topk};
  int timeout_s = 60;
  int max_concurrency = 4;
};

// POSTs {"model","prompt"|"messages","temperature","top_p","top_k","n",
// "seed","max_tokens"}; parameters a mode does not use are omitted, and modes
// the endpoint cannot honor are missing from supports(). Transport failures
// surface as BackendError (the orchestrator owns the retry policy).
std::unique_ptr<GenerationBackend> http_backend(HttpBackendConfig config);

}  // namespace qag
