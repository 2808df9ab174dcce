#include "recguard/text.hpp"

#include <algorithm>
#include <cctype>

namespace recguard::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string casefold(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

bool starts_with_ci(std::string_view textv, std::string_view prefix) {
  if (textv.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    unsigned char a = static_cast<unsigned char>(textv[i]);
    unsigned char b = static_cast<unsigned char>(prefix[i]);
    if (std::tolower(a) != std::tolower(b)) return false;
  }
  return true;
}

std::string normalize_space(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_ws = true;  // swallow leading whitespace
  for (char c : s) {
    if (is_space(c)) {
      in_ws = true;
    } else {
      if (in_ws && !out.empty()) out.push_back(' ');
      out.push_back(c);
      in_ws = false;
    }
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '\n') {
      std::string_view line = s.substr(start, i - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.emplace_back(line);
      start = i + 1;
    }
  }
  return lines;
}

std::vector<std::string> split_sentences(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == '.' || c == '!' || c == '?') {
      std::size_t j = i;
      while (j + 1 < s.size() &&
             (s[j + 1] == '.' || s[j + 1] == '!' || s[j + 1] == '?')) {
        ++j;
      }
      // Closing quote directly after the terminator belongs to the sentence.
      std::size_t k = j + 1;
      while (k < s.size() &&
             (s[k] == '"' || s[k] == '\'' ||
              (static_cast<unsigned char>(s[k]) == 0xE2 && k + 2 < s.size() &&
               static_cast<unsigned char>(s[k + 1]) == 0x80))) {
        if (static_cast<unsigned char>(s[k]) == 0xE2) {
          k += 3;
        } else {
          k += 1;
        }
      }
      if (k >= s.size() || is_space(s[k])) {
        std::string sentence = trim(s.substr(start, k - start));
        if (!sentence.empty()) out.push_back(std::move(sentence));
        while (k < s.size() && is_space(s[k])) ++k;
        start = k;
        i = k;
        continue;
      }
      i = j + 1;
      continue;
    }
    ++i;
  }
  if (start < s.size()) {
    std::string tail = trim(s.substr(start));
    if (!tail.empty()) out.push_back(std::move(tail));
  }
  return out;
}

bool is_interrogative(std::string_view sentence) {
  for (std::size_t i = sentence.size(); i > 0; --i) {
    char c = sentence[i - 1];
    if (is_space(c) || c == '"' || c == '\'') continue;
    // Skip UTF-8 curly quote bytes (E2 80 98..9D).
    if (static_cast<unsigned char>(c) >= 0x80) continue;
    return c == '?';
  }
  return false;
}

std::string reverse_utf8(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = s.size();
  while (i > 0) {
    std::size_t j = i - 1;
    // Back up over continuation bytes to the code point start.
    while (j > 0 && (static_cast<unsigned char>(s[j]) & 0xC0) == 0x80) --j;
    out.append(s.substr(j, i - j));
    i = j;
  }
  return out;
}

std::vector<std::string> word_tokens(std::string_view s, std::size_t min_len) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= min_len) tokens.push_back(current);
    current.clear();
  };
  for (char c : s) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else if (u < 0x80) {
      flush();
    }
    // Non-ASCII bytes neither extend nor break a token; reversed UTF-8
    // punctuation should not split words apart.
  }
  flush();
  return tokens;
}

}  // namespace recguard::text
