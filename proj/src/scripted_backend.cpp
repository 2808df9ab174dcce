#include "recguard/scripted_backend.hpp"

#include <json.hpp>

#include <fstream>
#include <limits>
#include <set>

#include "recguard/errors.hpp"
#include "recguard/text.hpp"
#include "recguard/util.hpp"

namespace recguard {

namespace {

using nlohmann::json;

std::string render_rule_template(const std::string& template_text,
                                 const std::string& user_message) {
  static const std::string kPlaceholder = "{{last_user_message}}";
  std::string out = template_text;
  std::size_t pos = 0;
  while ((pos = out.find(kPlaceholder, pos)) != std::string::npos) {
    out.replace(pos, kPlaceholder.size(), user_message);
    pos += user_message.size();
  }
  return out;
}

const ScriptedRule* pick_rule(const std::vector<ScriptedRule>& rules,
                              const std::vector<std::optional<std::regex>>& compiled,
                              const std::string& folded_message) {
  const ScriptedRule* best = nullptr;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    bool matches = !compiled[i].has_value() ||
                   std::regex_search(folded_message, *compiled[i]);
    if (matches && (!best || rules[i].priority > best->priority)) {
      best = &rules[i];
    }
  }
  return best;
}

std::vector<std::optional<std::regex>> compile_all(const std::vector<ScriptedRule>& rules);

std::regex compile_match(const ScriptedRule& rule) {
  try {
    return std::regex(rule.match, std::regex::ECMAScript | std::regex::icase);
  } catch (const std::regex_error& e) {
    throw Error(Errc::SchemaViolation,
                "rule '" + rule.id + "': bad regex: " + e.what());
  }
}

std::vector<std::optional<std::regex>> compile_all(const std::vector<ScriptedRule>& rules) {
  std::vector<std::optional<std::regex>> compiled(rules.size());
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (!rules[i].match.empty()) compiled[i] = compile_match(rules[i]);
  }
  return compiled;
}

void check_rule_set(const std::vector<ScriptedRule>& rules) {
  std::set<int> priorities;
  std::size_t catch_alls = 0;
  for (const auto& rule : rules) {
    if (!priorities.insert(rule.priority).second) {
      throw Error(Errc::SchemaViolation,
                  "duplicate rule priority " + std::to_string(rule.priority));
    }
    if (rule.match.empty()) ++catch_alls;
  }
  if (catch_alls > 1) {
    throw Error(Errc::SchemaViolation, "more than one catch-all rule");
  }
}

}  // namespace

const char* rule_behavior_name(RuleBehavior behavior) noexcept {
  switch (behavior) {
    case RuleBehavior::Refuse: return "refuse";
    case RuleBehavior::ComplyUnsafe: return "comply_unsafe";
    case RuleBehavior::Answer: return "answer";
    case RuleBehavior::InvertTo: return "invert_to";
    case RuleBehavior::JudgeSafe: return "judge_safe";
    case RuleBehavior::JudgeUnsafe: return "judge_unsafe";
  }
  return "answer";
}

RuleBehavior rule_behavior_from_name(const std::string& name) {
  if (name == "refuse") return RuleBehavior::Refuse;
  if (name == "comply_unsafe") return RuleBehavior::ComplyUnsafe;
  if (name == "answer") return RuleBehavior::Answer;
  if (name == "invert_to") return RuleBehavior::InvertTo;
  if (name == "judge_safe") return RuleBehavior::JudgeSafe;
  if (name == "judge_unsafe") return RuleBehavior::JudgeUnsafe;
  throw Error(Errc::SchemaViolation, "unknown rule behavior '" + name + "'");
}

const ScriptedRule& resolve_rule(const std::vector<ScriptedRule>& rules,
                                 const std::string& message) {
  if (rules.empty()) throw Error(Errc::NoRuleMatched, "empty rule list");
  auto compiled = compile_all(rules);
  const ScriptedRule* best = pick_rule(rules, compiled, text::casefold(message));
  if (!best) throw Error(Errc::NoRuleMatched, "no rule matches message");
  return *best;
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptedRule> rules, std::string source_digest)
    : rules_(std::move(rules)) {
  check_rule_set(rules_);
  compiled_ = compile_all(rules_);
  id_ = source_digest.empty() ? "scripted:inline"
                              : "scripted:" + source_digest.substr(0, 12);
}

ScriptedBackend ScriptedBackend::from_jsonl(const std::filesystem::path& path) {
  std::string content = util::read_file(path);
  std::vector<ScriptedRule> rules;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    std::string line = content.substr(
        start, end == std::string::npos ? std::string::npos : end - start);
    start = end == std::string::npos ? content.size() + 1 : end + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::SchemaViolation,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    ScriptedRule rule;
    try {
      rule.id = j.at("id").get<std::string>();
      rule.priority = j.at("priority").get<int>();
      rule.match = j.at("match").get<std::string>();
      rule.behavior = rule_behavior_from_name(j.at("behavior").get<std::string>());
      rule.template_text = j.at("template").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(Errc::SchemaViolation,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    rules.push_back(std::move(rule));
  }
  return ScriptedBackend(std::move(rules), util::sha256_hex(content));
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::shared_from_jsonl(
    const std::filesystem::path& path) {
  return std::make_shared<ScriptedBackend>(from_jsonl(path));
}

ChatCompletion ScriptedBackend::complete(const ChatRequest& request) {
  request.validate();
  const std::string* user = request.final_user_message();
  std::string message = user ? *user : std::string();
  const ScriptedRule* rule = pick_rule(rules_, compiled_, text::casefold(message));
  if (!rule) {
    throw Error(Errc::NoRuleMatched, "scripted backend has no matching rule");
  }

  ChatCompletion completion;
  completion.text = render_rule_template(rule->template_text, message);
  completion.model_id = id_;
  long request_chars = 0;
  for (const auto& m : request.messages) request_chars += static_cast<long>(m.content.size());
  completion.prompt_tokens = request_chars / 4 + 1;
  completion.completion_tokens = static_cast<long>(completion.text.size()) / 4 + 1;
  completion.finish_reason = FinishReason::Stop;
  return completion;
}

}  // namespace recguard
