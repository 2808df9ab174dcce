#include "recguard/errors.hpp"

namespace recguard {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::EmptyPrompt: return "EmptyPrompt";
    case Errc::PromptTooLong: return "PromptTooLong";
    case Errc::BackendFailure: return "BackendFailure";
    case Errc::InversionFailure: return "InversionFailure";
    case Errc::EmptyVerdictList: return "EmptyVerdictList";
    case Errc::Timeout: return "Timeout";
    case Errc::RateLimited: return "RateLimited";
    case Errc::ProtocolError: return "ProtocolError";
    case Errc::NoRuleMatched: return "NoRuleMatched";
    case Errc::NoScoreFound: return "NoScoreFound";
    case Errc::MissingPlaceholder: return "MissingPlaceholder";
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::CoverageMismatch: return "CoverageMismatch";
    case Errc::CorpusVersionMismatch: return "CorpusVersionMismatch";
    case Errc::AuditWriteFailure: return "AuditWriteFailure";
    case Errc::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace recguard
