#pragma once

#include <stdexcept>
#include <string>

namespace recguard {

enum class Errc {
  EmptyPrompt,
  PromptTooLong,
  BackendFailure,
  InversionFailure,
  EmptyVerdictList,
  Timeout,
  RateLimited,
  ProtocolError,
  NoRuleMatched,
  NoScoreFound,
  MissingPlaceholder,
  FileNotFound,
  SchemaViolation,
  DuplicateId,
  CoverageMismatch,
  CorpusVersionMismatch,
  AuditWriteFailure,
  ConfigError,
};

const char* errc_name(Errc code) noexcept;

/// Typed failure used across the library. `code()` distinguishes the error
/// classes named in the module contracts; the message carries context
/// (line numbers, placeholder names, upstream status).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace recguard
