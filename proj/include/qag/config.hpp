#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "qag/backend.hpp"
#include "qag/conditions.hpp"
#include "qag/generation.hpp"
#include "qag/prompting.hpp"

namespace qag {

// Declarative run configuration. Secrets never live here: the backend block
// names the environment variable holding the API key, nothing more.
struct PipelineConfig {
  struct BackendSpec {
    std::string kind = "mock";  // mock | http
    std::string endpoint;
    std::string model;
    std::string api_key_env;
    bool chat_style = false;
    int max_concurrency = 4;
    std::vector<DecodingMode> supported_modes = {DecodingMode::greedy, DecodingMode::nucleus,
                                                 DecodingMode::nucleus_topk};
  };
  struct TaggerSpec {
    std::string kind = "builtin";  // builtin | http
    std::string endpoint;
  };

  BackendSpec backend;
  TaggerSpec tagger;
  PromptTemplateSet templates;
  DecodingConfig decoding;                                  // default
  std::map<std::string, DecodingConfig> decoding_overrides; // per strategy name
  int n_pairs = 5;
  int k_positions = 5;
  std::uint64_t seed = 1234;
  int max_entities = 0;
  std::optional<double> near_dedup_threshold;
  std::string output_dir = "out";

  // Parses the JSON config file; unknown keys are a ConfigError, as are
  // violated invariants (k_positions >= 2, mode constraints).
  static PipelineConfig load(const std::string& path);
  static PipelineConfig from_json_text(std::string_view text, const std::string& source);

  void validate() const;

  std::unique_ptr<GenerationBackend> make_backend() const;
  std::unique_ptr<EntityTagger> make_tagger() const;
  DecodingConfig decoding_for(std::string_view strategy) const;
  RunOptions run_options(Strategy strategy) const;
};

}  // namespace qag
