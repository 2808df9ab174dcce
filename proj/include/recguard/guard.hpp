#pragma once

#include <map>
#include <string>
#include <vector>

#include "recguard/chat.hpp"
#include "recguard/guard_config.hpp"
#include "recguard/inversion.hpp"
#include "recguard/refusals.hpp"
#include "recguard/safety.hpp"

namespace recguard {

enum class GuardDecision { Allowed, Blocked, BaselineRefused };

const char* guard_decision_name(GuardDecision d);

// Full per-stage record of one pipeline run.  stage_durations holds one
// entry per executed stage ("generate", "refusal_check", "invert",
// "evaluate", "decide") and nothing for skipped stages.
struct GuardTrace {
  std::string original_prompt;
  std::string initial_response;
  std::vector<InvertedCandidate> inverted_candidates;
  std::vector<SafetyVerdict> verdicts;
  AggregationPolicy policy_applied = AggregationPolicy::AnyUnsafeBlocks;
  std::string backend_id;
  std::map<std::string, long> stage_durations_ms;
  std::string timestamp;  // ISO-8601 UTC, time the run started
};

// decision = Blocked    → final_text is config.refusal_text, byte for byte
// decision = Allowed    → final_text is the hidden initial response
// decision = BaselineRefused → final_text is the backend's own refusal,
//                              passed through verbatim; no inversion ran
struct GuardOutcome {
  GuardDecision decision = GuardDecision::Blocked;
  std::string final_text;
  GuardTrace trace;
};

// Aggregates per-candidate verdicts into the gate decision.  Uncertain
// counts as blocking under both policies.  Throws Error(EmptyVerdictList)
// on an empty list.
GuardDecision decide(const std::vector<SafetyVerdict>& verdicts, AggregationPolicy policy);

// The verification pipeline: (1) generate the initial response, hidden from
// the caller; (2) if the backend already refused, pass that through;
// (3) invert the response into 1..k dummy questions; (4) evaluate each;
// (5) aggregate into the decision.
GuardOutcome run_pipeline(const std::string& original_prompt, const GuardConfig& config,
                          Backend& generator, Inverter& inverter, SafetyEvaluator& evaluator);

// Multi-turn variant used by the gateway: the generator sees the full
// message history; the guard inspects the last user message.
GuardOutcome run_pipeline(const ChatRequest& request, const GuardConfig& config,
                          Backend& generator, Inverter& inverter, SafetyEvaluator& evaluator);

}  // namespace recguard
