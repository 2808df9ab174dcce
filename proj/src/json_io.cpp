#include "recguard/json_io.hpp"

#include "recguard/util.hpp"

namespace recguard::jsonio {

using nlohmann::json;

json to_json(const GuardConfig& config) {
  json j;
  j["candidate_count"] = config.candidate_count;
  j["aggregation_policy"] = aggregation_policy_name(config.aggregation_policy);
  j["refusal_text"] = config.refusal_text;
  j["counterbalance_caution"] = config.counterbalance_caution;
  j["temperature"] = config.generation.temperature;
  j["max_tokens"] = config.generation.max_tokens;
  if (config.generation.seed) j["seed"] = *config.generation.seed;
  j["max_input_chars"] = config.max_input_chars;
  return j;
}

std::string config_digest(const GuardConfig& config) {
  return util::sha256_hex(to_json(config).dump()).substr(0, 12);
}

json to_json(const InvertedCandidate& candidate) {
  return json{{"text", candidate.text},
              {"rank", candidate.rank},
              {"source", inversion_source_name(candidate.source)}};
}

json to_json(const SafetyVerdict& verdict) {
  json j;
  j["label"] = safety_label_name(verdict.label);
  if (verdict.score) j["score"] = *verdict.score;
  json categories = json::array();
  for (HarmCategory c : verdict.categories) categories.push_back(harm_category_name(c));
  j["categories"] = std::move(categories);
  j["matched_terms"] = verdict.matched_terms;
  if (verdict.rationale) j["rationale"] = *verdict.rationale;
  j["evaluator_id"] = verdict.evaluator_id;
  return j;
}

json to_json(const GuardTrace& trace) {
  json j;
  j["original_prompt"] = trace.original_prompt;
  j["initial_response"] = trace.initial_response;
  json candidates = json::array();
  for (const auto& c : trace.inverted_candidates) candidates.push_back(to_json(c));
  j["inverted_candidates"] = std::move(candidates);
  json verdicts = json::array();
  for (const auto& v : trace.verdicts) verdicts.push_back(to_json(v));
  j["verdicts"] = std::move(verdicts);
  j["policy_applied"] = aggregation_policy_name(trace.policy_applied);
  j["backend_id"] = trace.backend_id;
  j["stage_durations_ms"] = trace.stage_durations_ms;
  j["timestamp"] = trace.timestamp;
  return j;
}

json to_json(const GuardOutcome& outcome) {
  return json{{"decision", guard_decision_name(outcome.decision)},
              {"final_text", outcome.final_text},
              {"trace", to_json(outcome.trace)}};
}

json to_json(const RunReport& report) {
  json j;
  j["variant"] = report.variant;
  j["corpus_version"] = report.corpus_version;
  j["config_digest"] = report.config_digest;
  j["trials"] = report.trials;
  json outcomes = json::object();
  for (const auto& [id, list] : report.outcomes) {
    json arr = json::array();
    for (TrialOutcome o : list) arr.push_back(trial_outcome_name(o));
    outcomes[id] = std::move(arr);
  }
  j["outcomes"] = std::move(outcomes);
  json failures = json::object();
  for (const auto& [id, msgs] : report.failures) failures[id] = msgs;
  j["failures"] = std::move(failures);
  j["started"] = report.started;
  j["finished"] = report.finished;
  return j;
}

json to_json(const Metrics& metrics) {
  json j;
  j["corpus_version"] = metrics.corpus_version;
  if (metrics.adversarial_block_rate) j["adversarial_block_rate"] = *metrics.adversarial_block_rate;
  if (metrics.benign_refusal_rate) j["benign_refusal_rate"] = *metrics.benign_refusal_rate;
  json per_category = json::object();
  for (const auto& [category, rate] : metrics.per_category) {
    per_category[harm_category_name(category)] = rate;
  }
  j["per_category"] = std::move(per_category);
  json per_wrapper = json::object();
  for (const auto& [kind, rate] : metrics.per_wrapper) {
    per_wrapper[wrapper_kind_name(kind)] = rate;
  }
  j["per_wrapper"] = std::move(per_wrapper);
  json wilson = json::object();
  for (const auto& [name, interval] : metrics.wilson_95) {
    wilson[name] = json{{"low", interval.first}, {"high", interval.second}};
  }
  j["wilson_95"] = std::move(wilson);
  j["adversarial_trials"] = metrics.adversarial_trials;
  j["benign_trials"] = metrics.benign_trials;
  j["failed_trials"] = metrics.failed_trials;
  return j;
}

json to_json(const Comparison& comparison) {
  json rows = json::array();
  for (const auto& row : comparison.rows) {
    json r;
    r["metric"] = row.metric;
    if (row.baseline) r["baseline"] = *row.baseline;
    if (row.guarded) r["guarded"] = *row.guarded;
    if (row.delta) r["delta"] = *row.delta;
    rows.push_back(std::move(r));
  }
  return json{{"rows", std::move(rows)},
              {"expectation_violations", comparison.expectation_violations}};
}

}  // namespace recguard::jsonio
