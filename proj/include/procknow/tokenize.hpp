#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace procknow {

// Lowercase, split on whitespace, and detach leading/trailing ASCII
// punctuation into single-character tokens. Interior punctuation stays put
// ("don't" survives, "deep." becomes "deep" "."). Bytes >= 0x80 are treated
// as word characters, so UTF-8 passes through untouched.
inline std::vector<std::string> tokenize(std::string_view text) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  auto is_punct = [](unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; };
  auto lower = [](unsigned char c) -> char {
    return c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
  };

  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) break;

    std::size_t lo = i, hi = j;  // word span within [i, j)
    while (lo < hi && is_punct(static_cast<unsigned char>(text[lo]))) ++lo;
    while (hi > lo && is_punct(static_cast<unsigned char>(text[hi - 1]))) --hi;

    for (std::size_t k = i; k < lo; ++k) out.emplace_back(1, lower(static_cast<unsigned char>(text[k])));
    if (lo < hi) {
      std::string word;
      word.reserve(hi - lo);
      for (std::size_t k = lo; k < hi; ++k) word.push_back(lower(static_cast<unsigned char>(text[k])));
      out.push_back(std::move(word));
    }
    for (std::size_t k = hi; k < j; ++k) out.emplace_back(1, lower(static_cast<unsigned char>(text[k])));
    i = j;
  }
  return out;
}

inline std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) s.push_back(' ');
    s += tokens[i];
  }
  return s;
}

}  // namespace procknow
