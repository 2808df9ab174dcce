#pragma once

#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace recguard {

// Obfuscation layers an adversarial prompt can hide its core question in.
// The enumeration is closed; new layers require a new pattern-library
// version.
enum class WrapperKind {
  RolePlayScenario,
  PrefixInjection,
  HypotheticalFraming,
  ReversedText,
  NestedPadding,
};

inline constexpr WrapperKind kAllWrapperKinds[] = {
    WrapperKind::RolePlayScenario, WrapperKind::PrefixInjection,
    WrapperKind::HypotheticalFraming, WrapperKind::ReversedText,
    WrapperKind::NestedPadding,
};

const char* wrapper_kind_name(WrapperKind k);
std::optional<WrapperKind> wrapper_kind_from_name(std::string_view name);

// Result of wrapper stripping: the residual core text plus the layers that
// were peeled off, in removal order.  removed empty ⇔ text is the input,
// byte for byte.
struct SimplifiedPrompt {
  std::string text;
  std::vector<WrapperKind> removed;
};

// One compiled detection rule from the pattern file.
struct WrapperPattern {
  WrapperKind kind;
  std::regex detect;
  std::string mode;  // HypotheticalFraming only: "capture" or "gerund_question"
};

// Pattern table driving strip_wrappers, loaded from a versioned JSONL file,
// plus the frequency dictionary used by the reversed-text detector.
class WrapperLibrary {
 public:
  static WrapperLibrary load(const std::filesystem::path& patterns_jsonl,
                             const std::filesystem::path& words_file);

  const std::string& version() const { return version_; }

  // Compiled rules for one wrapper kind, in file order (empty for
  // ReversedText, which is parameterized rather than pattern-matched).
  const std::vector<WrapperPattern>& patterns(WrapperKind kind) const;

  bool in_dictionary(std::string_view word) const;
  std::size_t dictionary_size() const { return words_.size(); }

  // Fraction of alphabetic tokens (length >= min_token_len) found in the
  // dictionary; 1.0 when there are no such tokens, so token-free text never
  // looks reversed.
  double dictionary_hit_ratio(std::string_view text) const;

  std::size_t min_token_len() const { return min_token_len_; }
  double reversal_forward_max() const { return forward_max_; }
  double reversal_reversed_min() const { return reversed_min_; }

 private:
  std::string version_;
  std::vector<WrapperPattern> role_play_;
  std::vector<WrapperPattern> prefix_injection_;
  std::vector<WrapperPattern> hypothetical_;
  std::vector<WrapperPattern> padding_;
  std::vector<WrapperPattern> none_;
  std::unordered_set<std::string> words_;
  std::size_t min_token_len_ = 2;
  double forward_max_ = 0.2;
  double reversed_min_ = 0.8;
};

// Peels wrapper layers in a fixed pass order — role-play preamble,
// prefix-injection directive, hypothetical framing, reversed text, padding —
// iterating until no pass changes the text.  Idempotent and never expands
// the text.  A prompt with no recognizable wrapper comes back unchanged.
SimplifiedPrompt strip_wrappers(const std::string& prompt, const WrapperLibrary& lib);

// Forward transform used by the benchmark corpus and the wrap-matrix tests:
// hides `base` under one wrapper layer such that strip_wrappers recovers the
// base question.
std::string apply_wrapper(WrapperKind kind, const std::string& base);

}  // namespace recguard
