#include "recguard/refusals.hpp"

#include "recguard/text.hpp"

namespace recguard {

const std::vector<std::string>& default_refusal_phrases() {
  static const std::vector<std::string> phrases = {
      "I can't assist",
      "I cannot assist",
      "I'm sorry, but I can't assist with that request",
      "I can't provide guidance on that topic",
      "I can’t assist",
      "I’m sorry, but I can’t assist with that request",
      "I can’t provide guidance on that topic",
  };
  return phrases;
}

bool detect_refusal(std::string_view sample) {
  return detect_refusal(sample, default_refusal_phrases());
}

bool detect_refusal(std::string_view sample, const std::vector<std::string>& phrases) {
  std::string trimmed = text::trim(sample);
  for (const auto& phrase : phrases) {
    if (text::starts_with_ci(trimmed, phrase)) return true;
  }
  return false;
}

}  // namespace recguard
