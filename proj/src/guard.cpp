#include "recguard/guard.hpp"

#include <chrono>

#include "recguard/errors.hpp"
#include "recguard/text.hpp"
#include "recguard/util.hpp"

namespace recguard {

const char* guard_decision_name(GuardDecision d) {
  switch (d) {
    case GuardDecision::Allowed: return "Allowed";
    case GuardDecision::Blocked: return "Blocked";
    case GuardDecision::BaselineRefused: return "BaselineRefused";
  }
  return "?";
}

GuardDecision decide(const std::vector<SafetyVerdict>& verdicts, AggregationPolicy policy) {
  if (verdicts.empty()) {
    throw Error(Errc::EmptyVerdictList, "decide: verdict list is empty");
  }
  std::size_t blocking = 0;
  for (const auto& v : verdicts) {
    if (v.label != SafetyLabel::Safe) ++blocking;
  }
  switch (policy) {
    case AggregationPolicy::AnyUnsafeBlocks:
      return blocking > 0 ? GuardDecision::Blocked : GuardDecision::Allowed;
    case AggregationPolicy::MajorityBlocks:
      return 2 * blocking > verdicts.size() ? GuardDecision::Blocked : GuardDecision::Allowed;
  }
  return GuardDecision::Blocked;
}

namespace {

class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, long>& sink) : sink_(sink) {}

  template <typename Fn>
  auto run(const char* stage, Fn&& fn) -> decltype(fn()) {
    auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record(stage, start);
    } else {
      auto result = fn();
      record(stage, start);
      return result;
    }
  }

 private:
  void record(const char* stage, std::chrono::steady_clock::time_point start) {
    auto elapsed = std::chrono::steady_clock::now() - start;
    sink_[stage] = std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
  }

  std::map<std::string, long>& sink_;
};

// Backend and evaluator faults surface as BackendFailure so callers see one
// error for "the model side broke", with the stage and original message kept
// in the detail.  Inversion faults keep their own code.
template <typename Fn>
auto guard_stage(const char* stage, bool pass_inversion_failure, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (pass_inversion_failure && e.code() == Errc::InversionFailure) throw;
    if (e.code() == Errc::EmptyPrompt || e.code() == Errc::PromptTooLong) throw;
    throw Error(Errc::BackendFailure, std::string(stage) + " stage: " + e.what());
  }
}

}  // namespace

GuardOutcome run_pipeline(const ChatRequest& request, const GuardConfig& config,
                          Backend& generator, Inverter& inverter, SafetyEvaluator& evaluator) {
  config.validate();

  const std::string* prompt = request.final_user_message();
  if (prompt == nullptr || text::trim(*prompt).empty()) {
    throw Error(Errc::EmptyPrompt, "run_pipeline: no non-empty user message");
  }
  if (prompt->size() > static_cast<std::size_t>(config.max_input_chars)) {
    throw Error(Errc::PromptTooLong,
                "run_pipeline: prompt length " + std::to_string(prompt->size()) +
                    " exceeds max_input_chars " + std::to_string(config.max_input_chars));
  }

  GuardOutcome outcome;
  GuardTrace& trace = outcome.trace;
  trace.original_prompt = *prompt;
  trace.policy_applied = config.aggregation_policy;
  trace.backend_id = generator.id();
  trace.timestamp = util::iso8601_now();

  StageTimer timer(trace.stage_durations_ms);

  ChatRequest gen_request = request;
  gen_request.temperature = config.generation.temperature;
  gen_request.max_tokens = config.generation.max_tokens;
  gen_request.seed = config.generation.seed;

  ChatCompletion initial = timer.run("generate", [&] {
    return guard_stage("generate", false, [&] { return generator.complete(gen_request); });
  });
  trace.initial_response = initial.text;

  bool baseline_refused =
      timer.run("refusal_check", [&] { return detect_refusal(initial.text); });
  if (baseline_refused) {
    outcome.decision = GuardDecision::BaselineRefused;
    outcome.final_text = initial.text;
    return outcome;
  }

  trace.inverted_candidates = timer.run("invert", [&] {
    return guard_stage("invert", true, [&] {
      return inverter.invert(initial.text, *prompt, config.candidate_count);
    });
  });
  if (trace.inverted_candidates.empty()) {
    throw Error(Errc::InversionFailure, "inverter returned zero candidates");
  }

  trace.verdicts = timer.run("evaluate", [&] {
    return guard_stage("evaluate", false, [&] {
      std::vector<SafetyVerdict> verdicts;
      verdicts.reserve(trace.inverted_candidates.size());
      for (const auto& candidate : trace.inverted_candidates) {
        verdicts.push_back(evaluator.evaluate(candidate.text));
      }
      return verdicts;
    });
  });

  outcome.decision =
      timer.run("decide", [&] { return decide(trace.verdicts, config.aggregation_policy); });
  outcome.final_text =
      outcome.decision == GuardDecision::Blocked ? config.refusal_text : initial.text;
  return outcome;
}

GuardOutcome run_pipeline(const std::string& original_prompt, const GuardConfig& config,
                          Backend& generator, Inverter& inverter, SafetyEvaluator& evaluator) {
  ChatRequest request;
  request.messages.push_back({Role::User, original_prompt});
  return run_pipeline(request, config, generator, inverter, evaluator);
}

}  // namespace recguard
