#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace recguard::text {

/// ASCII-only lowercasing; bytes >= 0x80 pass through unchanged.
std::string casefold(std::string_view s);

std::string trim(std::string_view s);

bool starts_with_ci(std::string_view text, std::string_view prefix);

/// Collapses whitespace runs to single spaces and trims; used for
/// candidate deduplication keys.
std::string normalize_space(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

/// Splits on '.', '!' or '?' runs followed by whitespace (or end of text).
/// Terminators stay attached to their sentence.
std::vector<std::string> split_sentences(std::string_view s);

/// True when the sentence's last non-quote, non-space character is '?'.
bool is_interrogative(std::string_view sentence);

/// Reverses the sequence of UTF-8 code points (bytes within a code point
/// keep their order, so the result is valid UTF-8 and the transform is an
/// involution).
std::string reverse_utf8(std::string_view s);

/// Lowercased alphabetic tokens of length >= min_len, punctuation stripped.
std::vector<std::string> word_tokens(std::string_view s, std::size_t min_len);

}  // namespace recguard::text
