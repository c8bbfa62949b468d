#pragma once

#include <stdexcept>
#include <string>

namespace qag {

// Base for every error raised by the pipeline. Subtypes map 1:1 onto the
// failure modes of the operations that throw them.
struct PipelineError : std::runtime_error {
  explicit PipelineError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file or structurally invalid data.
struct FormatError : PipelineError {
  using PipelineError::PipelineError;
};

// answer_start does not point at answer_text (or offset out of range).
struct OffsetError : PipelineError {
  using PipelineError::PipelineError;
};

// Export refused (e.g. ungrounded pairs).
struct ExportError : PipelineError {
  using PipelineError::PipelineError;
};

// Same document id with different text on merge.
struct MergeConflict : PipelineError {
  using PipelineError::PipelineError;
};

// Requested sample size exceeds the available pairs.
struct SampleError : PipelineError {
  using PipelineError::PipelineError;
};

// Document too short for the requested number of position splits.
struct DegenerateDocument : PipelineError {
  using PipelineError::PipelineError;
};

// Entity tagger failed or returned spans violating its contract.
struct TaggerError : PipelineError {
  using PipelineError::PipelineError;
};

// Prompt template cannot be instantiated for the given condition.
struct TemplateError : PipelineError {
  using PipelineError::PipelineError;
};

// Backend does not support the requested decoding mode.
struct CapabilityError : PipelineError {
  using PipelineError::PipelineError;
};

// Backend transport failure after retries.
struct BackendError : PipelineError {
  using PipelineError::PipelineError;
};

// WH-predictor output could not be interpreted.
struct PredictorError : PipelineError {
  using PipelineError::PipelineError;
};

// Generated text could not be parsed into a QA pair.
struct ParseError : PipelineError {
  using PipelineError::PipelineError;
};

// Metric undefined for the given input (e.g. overlap of a single pair).
struct UndefinedMetric : PipelineError {
  using PipelineError::PipelineError;
};

// Invalid configuration value.
struct ConfigError : PipelineError {
  using PipelineError::PipelineError;
};

}  // namespace qag
