#include "qag/backend.hpp"

#include "qag/errors.hpp"

namespace qag {

std::string_view to_string(DecodingMode m) {
  switch (m) {
    case DecodingMode::greedy: return "greedy";
    case DecodingMode::nucleus: return "nucleus";
    case DecodingMode::nucleus_topk: return "nucleus_topk";
    case DecodingMode::diverse_beam: return "diverse_beam";
  }
  return "greedy";
}

std::optional<DecodingMode> decoding_mode_from_string(std::string_view s) {
  for (DecodingMode m : {DecodingMode::greedy, DecodingMode::nucleus, DecodingMode::nucleus_topk,
                         DecodingMode::diverse_beam}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

void DecodingConfig::validate() const {
  if (mode == DecodingMode::nucleus || mode == DecodingMode::nucleus_topk) {
    if (!(top_p > 0.0 && top_p <= 1.0)) {
      throw ConfigError("nucleus decoding requires 0 < top_p <= 1");
    }
  }
  if (mode == DecodingMode::nucleus_topk && top_k < 1) {
    throw ConfigError("nucleus_topk decoding requires top_k >= 1");
  }
  if (mode == DecodingMode::diverse_beam) {
    if (num_beam_groups < 2) {
      throw ConfigError("diverse_beam decoding requires num_beam_groups >= 2");
    }
    if (num_beams < num_beam_groups || num_beams % num_beam_groups != 0) {
      throw ConfigError("diverse_beam decoding requires num_beams divisible by num_beam_groups");
    }
  }
  if (diversity_penalty < 0.0) throw ConfigError("diversity_penalty must be >= 0");
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (max_new_tokens < 1) throw ConfigError("max_new_tokens must be >= 1");
}

DecodingConfig DecodingConfig::diverse_beam_defaults() {
  DecodingConfig cfg;
  cfg.mode = DecodingMode::diverse_beam;
  cfg.num_beams = 5;
  cfg.num_beam_groups = 5;
  cfg.diversity_penalty = 1.0;
  return cfg;
}

}  // namespace qag
