#pragma once

#include <json.hpp>

#include "recguard/guard.hpp"
#include "recguard/harness.hpp"

namespace recguard::jsonio {

// JSON views of the core value types, used by the report writer, the audit
// log, and the CLI's trace output.  Field names are stable: they are part of
// the on-disk report and audit formats.

nlohmann::json to_json(const GuardConfig& config);
nlohmann::json to_json(const InvertedCandidate& candidate);
nlohmann::json to_json(const SafetyVerdict& verdict);
nlohmann::json to_json(const GuardTrace& trace);
nlohmann::json to_json(const GuardOutcome& outcome);
nlohmann::json to_json(const RunReport& report);
nlohmann::json to_json(const Metrics& metrics);
nlohmann::json to_json(const Comparison& comparison);

// Digest of the canonical JSON form of the config (nlohmann serializes
// object keys sorted, so equal configs digest equally).
std::string config_digest(const GuardConfig& config);

}  // namespace recguard::jsonio
