#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace recguard {

// A prompt template with {{name}} placeholders.  `version` is the first 12
// hex chars of the sha256 of `text`, so two libraries loaded from identical
// files compare equal and a drifted file is visible in traces and reports.
struct InstructionTemplate {
  std::string id;
  std::string version;
  std::string text;
  std::set<std::string> required_placeholders;
};

// Builds a template from raw text.  Every {{name}} found in the text is
// required unless listed in `optional_placeholders`.
InstructionTemplate make_template(std::string id, std::string text,
                                  const std::set<std::string>& optional_placeholders = {});

// Substitutes bindings into the template.  Throws Error(MissingPlaceholder)
// naming every required placeholder without a binding.  Optional placeholders
// without a binding render as the empty string.  Binding values are inserted
// literally; they are never re-scanned for placeholders.
std::string render(const InstructionTemplate& tmpl,
                   const std::map<std::string, std::string>& bindings);

// Post-deployment control keywords.  Matching is exact on the trimmed,
// casefolded message text, so ordinary prose containing these words does not
// trigger them.
enum class CommandKeyword { Prompt, Response, Score, Explanation, Repeat };

const char* command_keyword_name(CommandKeyword k);

std::optional<CommandKeyword> detect_command(std::string_view user_text);

// Loads the template set shipped in a data directory and pins each file to
// the digest manifest written next to it.
class TemplateLibrary {
 public:
  // Expects dir to contain final_instructions.txt, initial_instructions.txt,
  // inversion_prompt.txt, judge_prompt.txt, judge_caution.txt and
  // digests.sha256.  Throws Error(FileNotFound) for a missing file and
  // Error(SchemaViolation) when a file does not match its pinned digest.
  static TemplateLibrary load(const std::filesystem::path& dir);

  // The system-prompt text installed ahead of every guarded conversation.
  const std::string& final_instructions() const { return final_instructions_.text; }
  const InstructionTemplate& final_instructions_template() const { return final_instructions_; }

  // First-revision instructions, kept as a fixture for regression tests.
  const InstructionTemplate& initial_instructions() const { return initial_instructions_; }

  // Placeholders: {{response}}, {{count}}.
  const InstructionTemplate& inversion_prompt() const { return inversion_prompt_; }

  // Placeholders: {{question}} required, {{caution}} optional.
  const InstructionTemplate& judge_prompt() const { return judge_prompt_; }

  // Preamble bound to {{caution}} when the judge runs in counterbalanced mode.
  const std::string& judge_caution() const { return judge_caution_; }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  TemplateLibrary() = default;

  std::filesystem::path dir_;
  InstructionTemplate final_instructions_;
  InstructionTemplate initial_instructions_;
  InstructionTemplate inversion_prompt_;
  InstructionTemplate judge_prompt_;
  std::string judge_caution_;
};

}  // namespace recguard
