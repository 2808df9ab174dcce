#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace recguard {

// Refusal openers shared by the pipeline's baseline-refusal detector and the
// judge-output parser.  Includes curly-apostrophe spellings of the same
// phrases so detection is robust to either quote style.
const std::vector<std::string>& default_refusal_phrases();

// True iff text, after trimming, begins with one of the phrases
// (case-insensitive).
bool detect_refusal(std::string_view text);
bool detect_refusal(std::string_view text, const std::vector<std::string>& phrases);

}  // namespace recguard
