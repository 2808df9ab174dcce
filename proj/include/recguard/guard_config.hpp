#pragma once

#include <optional>
#include <string>

#include "recguard/errors.hpp"

namespace recguard {

// The verbatim sentence shown in place of a blocked response.
inline constexpr char kDefaultRefusalText[] =
    "I'm sorry, but I can't assist with that request";

// How per-candidate verdicts aggregate into one gate decision.  Uncertain
// counts as blocking under both policies (fail closed).
enum class AggregationPolicy { AnyUnsafeBlocks, MajorityBlocks };

inline const char* aggregation_policy_name(AggregationPolicy p) {
  switch (p) {
    case AggregationPolicy::AnyUnsafeBlocks: return "AnyUnsafeBlocks";
    case AggregationPolicy::MajorityBlocks: return "MajorityBlocks";
  }
  return "?";
}

struct GenerationParams {
  double temperature = 0.0;  // deterministic by default
  int max_tokens = 1024;
  std::optional<long> seed;
};

struct GuardConfig {
  // Number k of dummy questions requested from the inverter.
  int candidate_count = 1;
  AggregationPolicy aggregation_policy = AggregationPolicy::AnyUnsafeBlocks;
  std::string refusal_text = kDefaultRefusalText;
  // Include the refusal-counterbalance preamble in judge requests.
  bool counterbalance_caution = true;
  GenerationParams generation;
  int max_input_chars = 32768;

  void validate() const {
    if (candidate_count < 1) throw Error(Errc::ConfigError, "candidate_count must be >= 1");
    if (max_input_chars < 1) throw Error(Errc::ConfigError, "max_input_chars must be >= 1");
    if (refusal_text.empty()) throw Error(Errc::ConfigError, "refusal_text must be non-empty");
    if (generation.temperature < 0.0 || generation.temperature > 2.0) {
      throw Error(Errc::ConfigError, "temperature must lie in [0, 2]");
    }
    if (generation.max_tokens < 1) throw Error(Errc::ConfigError, "max_tokens must be >= 1");
  }
};

}  // namespace recguard
