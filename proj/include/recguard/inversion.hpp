#pragma once

#include <string>
#include <vector>

#include "recguard/chat.hpp"
#include "recguard/templates.hpp"
#include "recguard/wrappers.hpp"

namespace recguard {

enum class InversionSource { LlmInversion, RuleInversion };

const char* inversion_source_name(InversionSource s);

// A "dummy question": a prompt judged likely to have elicited the response
// under scrutiny.  Ranks in a candidate list are 1..n without gaps; texts
// are pairwise distinct after casefold + whitespace normalization.
struct InvertedCandidate {
  std::string text;
  int rank = 1;
  InversionSource source = InversionSource::LlmInversion;
};

// Extracts candidates from a completion that lists prompts as numbered
// lines ("1. <prompt>").  Only lines of that shape are accepted; order of
// appearance fixes the rank; duplicates (after casefold + whitespace
// normalization) collapse into the earliest occurrence; at most k are kept.
std::vector<InvertedCandidate> parse_candidates(const std::string& completion_text, int k);

// Asks the backend for the k most likely prompts behind `response_text`,
// using the inversion template ({{response}}, {{count}}).  Returns 1..k
// candidates; throws Error(InversionFailure) when the response is empty or
// the completion contains no parseable candidate.  Backend errors propagate.
std::vector<InvertedCandidate> invert_via_llm(const std::string& response_text, int k,
                                              Backend& backend,
                                              const InstructionTemplate& tmpl);

// Same, but appends the message that produced the response as extra context.
// Off the default path: inversion normally sees the response alone, so the
// dummy question reflects what the response says, not what the prompt asked.
std::vector<InvertedCandidate> invert_via_llm(const std::string& response_text, int k,
                                              Backend& backend, const InstructionTemplate& tmpl,
                                              const std::string& original_prompt_context);

// Deterministic counterpart used as oracle and optional pre-filter: the
// dummy question is the original prompt with its wrapper layers stripped.
std::vector<InvertedCandidate> rule_invert(const std::string& original_prompt,
                                           const WrapperLibrary& lib);

// Pipeline-facing strategy interface.  The original prompt travels alongside
// the response so rule-based inversion (which works on the prompt) and
// context-assisted LLM inversion fit the same slot.
class Inverter {
 public:
  virtual ~Inverter() = default;
  virtual std::vector<InvertedCandidate> invert(const std::string& response_text,
                                                const std::string& original_prompt, int k) = 0;
  virtual std::string id() const = 0;
  virtual bool concurrent_safe() const = 0;
};

class LlmInverter : public Inverter {
 public:
  // include_context appends the original prompt to the inversion request;
  // default off — the inversion normally sees the response alone.
  LlmInverter(std::shared_ptr<Backend> backend, InstructionTemplate tmpl,
              bool include_context = false);

  std::vector<InvertedCandidate> invert(const std::string& response_text,
                                        const std::string& original_prompt, int k) override;
  std::string id() const override;
  bool concurrent_safe() const override;

 private:
  std::shared_ptr<Backend> backend_;
  InstructionTemplate tmpl_;
  bool include_context_;
};

class RuleInverter : public Inverter {
 public:
  explicit RuleInverter(std::shared_ptr<const WrapperLibrary> lib);

  std::vector<InvertedCandidate> invert(const std::string& response_text,
                                        const std::string& original_prompt, int k) override;
  std::string id() const override;
  bool concurrent_safe() const override { return true; }

 private:
  std::shared_ptr<const WrapperLibrary> lib_;
};

}  // namespace recguard
