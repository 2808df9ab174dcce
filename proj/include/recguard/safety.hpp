#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "recguard/chat.hpp"
#include "recguard/guard_config.hpp"
#include "recguard/templates.hpp"

namespace recguard {

// Closed harm taxonomy; versioned together with the lexicon file.
enum class HarmCategory {
  IllegalActivity,
  PrivateDataExtraction,
  HateOrStereotype,
  Disinformation,
  MalwareOrCyber,
};

inline constexpr HarmCategory kAllHarmCategories[] = {
    HarmCategory::IllegalActivity, HarmCategory::PrivateDataExtraction,
    HarmCategory::HateOrStereotype, HarmCategory::Disinformation,
    HarmCategory::MalwareOrCyber,
};

const char* harm_category_name(HarmCategory c);
std::optional<HarmCategory> harm_category_from_name(std::string_view name);

enum class SafetyLabel { Safe, Unsafe, Uncertain };

const char* safety_label_name(SafetyLabel l);

struct SafetyVerdict {
  SafetyLabel label = SafetyLabel::Uncertain;
  std::optional<int> score;  // [-10, 10] when present
  std::set<HarmCategory> categories;
  std::vector<std::string> matched_terms;
  std::optional<std::string> rationale;
  std::string evaluator_id;
};

// Harm-category term list loaded from JSONL ({"category", "term", "note"}).
// Terms are case-folded at load; the version string derives from the file
// digest so two processes can confirm they classify identically.
class Lexicon {
 public:
  static Lexicon load(const std::filesystem::path& jsonl_path);

  const std::string& version() const { return version_; }
  const std::map<HarmCategory, std::vector<std::string>>& entries() const { return entries_; }
  std::size_t term_count() const;

 private:
  std::string version_;
  std::map<HarmCategory, std::vector<std::string>> entries_;
};

// Deterministic evaluator: Unsafe iff any lexicon term occurs as a substring
// of the case-folded prompt.  Never returns Uncertain.
SafetyVerdict classify_lexicon(const std::string& prompt, const Lexicon& lexicon);

// First signed integer in the text, clamped to [-10, 10].  Throws
// Error(NoScoreFound) when no integer is present.
int parse_score(const std::string& sample);

// Total mapping from judge output to a label, in priority order:
// "negative" anywhere (word-bounded) → Unsafe; refusal opener → Unsafe;
// leading yes → Safe; leading no → Unsafe; otherwise Uncertain.
SafetyLabel parse_verdict(const std::string& sample);

// Asks the backend whether it would answer `prompt` absent any special
// instructions, optionally prefixing the caution counterbalance paragraph
// (config.counterbalance_caution).  Unparseable output becomes Uncertain
// with the completion preserved as rationale.
SafetyVerdict judge_via_llm(const std::string& prompt, Backend& backend,
                            const GuardConfig& config, const InstructionTemplate& tmpl,
                            const std::string& caution_text);

// Pipeline-facing strategy interface over the two evaluators.
class SafetyEvaluator {
 public:
  virtual ~SafetyEvaluator() = default;
  virtual SafetyVerdict evaluate(const std::string& question) = 0;
  virtual std::string id() const = 0;
  virtual bool concurrent_safe() const = 0;
};

class LexiconEvaluator : public SafetyEvaluator {
 public:
  explicit LexiconEvaluator(std::shared_ptr<const Lexicon> lexicon);

  SafetyVerdict evaluate(const std::string& question) override;
  std::string id() const override;
  bool concurrent_safe() const override { return true; }

  const Lexicon& lexicon() const { return *lexicon_; }

 private:
  std::shared_ptr<const Lexicon> lexicon_;
};

class LlmJudgeEvaluator : public SafetyEvaluator {
 public:
  LlmJudgeEvaluator(std::shared_ptr<Backend> backend, GuardConfig config,
                    InstructionTemplate judge_template, std::string caution_text);

  SafetyVerdict evaluate(const std::string& question) override;
  std::string id() const override;
  bool concurrent_safe() const override;

 private:
  std::shared_ptr<Backend> backend_;
  GuardConfig config_;
  InstructionTemplate tmpl_;
  std::string caution_text_;
};

}  // namespace recguard
