#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agrag {

enum class ErrorCode {
  InvalidArgument,
  Io,
  Config,
  // corpus
  MissingColumn,
  EmptyCorpus,
  MalformedRow,
  // embedding / vector math
  BackendUnavailable,
  DimensionMismatch,
  ZeroVector,
  NonFinite,
  // vector store
  DuplicateChunkId,
  CorruptIndex,
  ModelMismatch,
  // llm client
  ResponseTooLong,
  EmptyResponse,
  ScriptExhausted,
  // agent
  NoActionBlock,
  MalformedAction,
  UnknownTool,
  MaxStepsExceeded,
  // topics
  WrongTopicCount,
  EmptyLabel,
  DuplicateLabel,
  // evaluation
  AllTopicsEmpty,
  // lda
  EmptyVocabulary,
};

std::string_view error_code_name(ErrorCode code) noexcept;

// Every failure surfaced by the engine carries a code so callers (and the CLI)
// can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace agrag
