#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "recguard/chat.hpp"

namespace recguard {

enum class RuleBehavior { Refuse, ComplyUnsafe, Answer, InvertTo, JudgeSafe, JudgeUnsafe };

const char* rule_behavior_name(RuleBehavior behavior) noexcept;
RuleBehavior rule_behavior_from_name(const std::string& name);

/// One deterministic stand-in rule. `match` is a regex applied to the
/// case-folded final user message; an empty match source is the catch-all.
/// The template may reference {{last_user_message}}.
struct ScriptedRule {
  std::string id;
  int priority = 0;
  std::string match;
  RuleBehavior behavior = RuleBehavior::Answer;
  std::string template_text;
};

/// Highest-priority rule matching `message` (already case-folded by the
/// caller or not; matching case-folds internally). Order-independent: the
/// winner depends only on the rule set. Throws Error(NoRuleMatched) when
/// nothing matches.
const ScriptedRule& resolve_rule(const std::vector<ScriptedRule>& rules,
                                 const std::string& message);

/// Deterministic rule-table backend: identical requests yield identical
/// completions. Immutable after construction, safe for concurrent use.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::vector<ScriptedRule> rules, std::string source_digest = "");

  static ScriptedBackend from_jsonl(const std::filesystem::path& path);
  static std::shared_ptr<ScriptedBackend> shared_from_jsonl(const std::filesystem::path& path);

  ChatCompletion complete(const ChatRequest& request) override;
  std::string id() const override { return id_; }

  const std::vector<ScriptedRule>& rules() const { return rules_; }

 private:
  std::vector<ScriptedRule> rules_;
  std::vector<std::optional<std::regex>> compiled_;  // index-aligned with rules_
  std::string id_;
};

}  // namespace recguard
