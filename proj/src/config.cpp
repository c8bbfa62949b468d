#include "qag/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qag/errors.hpp"

namespace qag {

namespace {

void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) {
      throw ConfigError(where + ": unknown key \"" + key + "\"");
    }
  }
}

DecodingConfig parse_decoding(const nlohmann::json& obj, const DecodingConfig& base,
                              const std::string& where) {
  reject_unknown_keys(obj,
                      {"mode", "top_p", "top_k", "num_beams", "num_beam_groups",
                       "diversity_penalty", "temperature", "seed", "max_new_tokens"},
                      where);
  DecodingConfig cfg = base;
  if (obj.contains("mode")) {
    const auto mode = decoding_mode_from_string(obj["mode"].get<std::string>());
    if (!mode) throw ConfigError(where + ": unknown decoding mode");
    cfg.mode = *mode;
    if (*mode == DecodingMode::diverse_beam) {
      const DecodingConfig d = DecodingConfig::diverse_beam_defaults();
      cfg.num_beams = d.num_beams;
      cfg.num_beam_groups = d.num_beam_groups;
      cfg.diversity_penalty = d.diversity_penalty;
    }
  }
  if (obj.contains("top_p")) cfg.top_p = obj["top_p"].get<double>();
  if (obj.contains("top_k")) cfg.top_k = obj["top_k"].get<int>();
  if (obj.contains("num_beams")) cfg.num_beams = obj["num_beams"].get<int>();
  if (obj.contains("num_beam_groups")) cfg.num_beam_groups = obj["num_beam_groups"].get<int>();
  if (obj.contains("diversity_penalty")) {
    cfg.diversity_penalty = obj["diversity_penalty"].get<double>();
  }
  if (obj.contains("temperature")) cfg.temperature = obj["temperature"].get<double>();
  if (obj.contains("seed")) cfg.seed = obj["seed"].get<std::uint64_t>();
  if (obj.contains("max_new_tokens")) cfg.max_new_tokens = obj["max_new_tokens"].get<int>();
  cfg.validate();
  return cfg;
}

}  // namespace

PipelineConfig PipelineConfig::from_json_text(std::string_view text, const std::string& source) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(source + ": not valid JSON: " + e.what());
  }
  if (!root.is_object()) throw ConfigError(source + ": top level is not an object");
  reject_unknown_keys(root,
                      {"backend", "tagger", "templates", "decoding", "n_pairs", "k_positions",
                       "seed", "max_entities", "near_dedup_threshold", "output_dir"},
                      source);

  PipelineConfig cfg;
  if (root.contains("backend")) {
    const nlohmann::json& b = root["backend"];
    reject_unknown_keys(b,
                        {"kind", "endpoint", "model", "api_key_env", "chat_style",
                         "max_concurrency", "supported_modes"},
                        source + ".backend");
    cfg.backend.kind = b.value("kind", cfg.backend.kind);
    cfg.backend.endpoint = b.value("endpoint", cfg.backend.endpoint);
    cfg.backend.model = b.value("model", cfg.backend.model);
    cfg.backend.api_key_env = b.value("api_key_env", cfg.backend.api_key_env);
    cfg.backend.chat_style = b.value("chat_style", cfg.backend.chat_style);
    cfg.backend.max_concurrency = b.value("max_concurrency", cfg.backend.max_concurrency);
    if (b.contains("supported_modes")) {
      cfg.backend.supported_modes.clear();
      for (const auto& m : b["supported_modes"]) {
        const auto mode = decoding_mode_from_string(m.get<std::string>());
        if (!mode) throw ConfigError(source + ".backend: unknown decoding mode");
        cfg.backend.supported_modes.push_back(*mode);
      }
    }
  }
  if (root.contains("tagger")) {
    const nlohmann::json& t = root["tagger"];
    reject_unknown_keys(t, {"kind", "endpoint"}, source + ".tagger");
    cfg.tagger.kind = t.value("kind", cfg.tagger.kind);
    cfg.tagger.endpoint = t.value("endpoint", cfg.tagger.endpoint);
  }
  if (root.contains("templates")) {
    const nlohmann::json& t = root["templates"];
    reject_unknown_keys(t,
                        {"pos", "wh", "ent", "combined", "predictor", "qa_serialization",
                         "document_separator", "prompt_before_document"},
                        source + ".templates");
    cfg.templates.pos_template = t.value("pos", cfg.templates.pos_template);
    cfg.templates.wh_template = t.value("wh", cfg.templates.wh_template);
    cfg.templates.ent_template = t.value("ent", cfg.templates.ent_template);
    cfg.templates.combined_template = t.value("combined", cfg.templates.combined_template);
    cfg.templates.two_step_predictor_template =
        t.value("predictor", cfg.templates.two_step_predictor_template);
    cfg.templates.qa_serialization = t.value("qa_serialization", cfg.templates.qa_serialization);
    cfg.templates.document_separator =
        t.value("document_separator", cfg.templates.document_separator);
    cfg.templates.prompt_before_document =
        t.value("prompt_before_document", cfg.templates.prompt_before_document);
  }
  if (root.contains("decoding")) {
    const nlohmann::json& d = root["decoding"];
    reject_unknown_keys(d, {"default", "per_strategy"}, source + ".decoding");
    if (d.contains("default")) {
      cfg.decoding = parse_decoding(d["default"], DecodingConfig{}, source + ".decoding.default");
    }
    if (d.contains("per_strategy")) {
      for (const auto& [name, value] : d["per_strategy"].items()) {
        if (!strategy_from_string(name)) {
          throw ConfigError(source + ".decoding.per_strategy: unknown strategy \"" + name + "\"");
        }
        cfg.decoding_overrides[name] =
            parse_decoding(value, cfg.decoding, source + ".decoding.per_strategy." + name);
      }
    }
  }
  cfg.n_pairs = root.value("n_pairs", cfg.n_pairs);
  cfg.k_positions = root.value("k_positions", cfg.k_positions);
  cfg.seed = root.value("seed", cfg.seed);
  cfg.max_entities = root.value("max_entities", cfg.max_entities);
  if (root.contains("near_dedup_threshold") && !root["near_dedup_threshold"].is_null()) {
    cfg.near_dedup_threshold = root["near_dedup_threshold"].get<double>();
  }
  cfg.output_dir = root.value("output_dir", cfg.output_dir);
  cfg.validate();
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str(), path);
}

void PipelineConfig::validate() const {
  if (backend.kind != "mock" && backend.kind != "http") {
    throw ConfigError("backend.kind must be \"mock\" or \"http\"");
  }
  if (backend.kind == "http" && backend.endpoint.empty()) {
    throw ConfigError("http backend requires backend.endpoint");
  }
  if (tagger.kind != "builtin" && tagger.kind != "http") {
    throw ConfigError("tagger.kind must be \"builtin\" or \"http\"");
  }
  if (tagger.kind == "http" && tagger.endpoint.empty()) {
    throw ConfigError("http tagger requires tagger.endpoint");
  }
  if (k_positions < 2) throw ConfigError("k_positions must be >= 2");
  if (n_pairs < 1) throw ConfigError("n_pairs must be >= 1");
  if (max_entities < 0) throw ConfigError("max_entities must be >= 0");
  if (near_dedup_threshold && (*near_dedup_threshold <= 0.0 || *near_dedup_threshold > 1.0)) {
    throw ConfigError("near_dedup_threshold must be in (0, 1]");
  }
  templates.validate();
  decoding.validate();
}

std::unique_ptr<GenerationBackend> PipelineConfig::make_backend() const {
  if (backend.kind == "mock") return mock_backend(seed);
  HttpBackendConfig http;
  http.endpoint = backend.endpoint;
  http.model = backend.model;
  http.api_key_env = backend.api_key_env;
  http.chat_style = backend.chat_style;
  http.max_concurrency = backend.max_concurrency;
  http.supported_modes = backend.supported_modes;
  return http_backend(std::move(http));
}

std::unique_ptr<EntityTagger> PipelineConfig::make_tagger() const {
  if (tagger.kind == "builtin") return builtin_rule_tagger();
  return http_tagger(tagger.endpoint);
}

DecodingConfig PipelineConfig::decoding_for(std::string_view strategy) const {
  auto it = decoding_overrides.find(std::string(strategy));
  return it == decoding_overrides.end() ? decoding : it->second;
}

RunOptions PipelineConfig::run_options(Strategy strategy) const {
  RunOptions options;
  options.n = n_pairs;
  options.k = k_positions;
  options.near_dedup_threshold = near_dedup_threshold;
  options.max_entities = max_entities;
  options.concurrency = backend.max_concurrency;
  options.label = std::string(to_string(strategy));
  return options;
}

}  // namespace qag
