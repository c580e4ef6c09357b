#include "commentgen/tokenize.hpp"

#include <algorithm>
#include <cctype>

#include "commentgen/text.hpp"

namespace commentgen {
namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::vector<std::string> identifier_parts(std::string_view word) {
  std::vector<std::string> parts;
  auto flush = [&](std::string_view p) {
    if (p.empty()) return;
    std::string lower = to_lower(p);
    if (std::find(parts.begin(), parts.end(), lower) == parts.end()) parts.push_back(std::move(lower));
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i <= word.size(); ++i) {
    if (i == word.size() || word[i] == '_') {
      flush(word.substr(start, i - start));
      start = i + 1;
      continue;
    }
    if (i == start) continue;
    char prev = word[i - 1];
    char c = word[i];
    bool boundary = (is_lower(prev) && is_upper(c)) || (is_digit(prev) != is_digit(c) && prev != '_') ||
                    (is_upper(prev) && is_upper(c) && i + 1 < word.size() && is_lower(word[i + 1]));
    if (boundary) {
      flush(word.substr(start, i - start));
      start = i;
    }
  }
  return parts;
}

std::vector<std::string> tokenize_terms(std::string_view text) {
  std::vector<std::string> terms;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_ident_char(text[i])) {
      ++i;
      continue;
    }
    std::size_t b = i;
    while (i < text.size() && is_ident_char(text[i])) ++i;
    std::string_view word = text.substr(b, i - b);
    std::string whole = to_lower(word);
    auto parts = identifier_parts(word);
    bool underscores_only = std::all_of(word.begin(), word.end(), [](char c) { return c == '_'; });
    if (underscores_only) continue;
    terms.push_back(whole);
    if (parts.size() > 1)
      for (auto& p : parts)
        if (p != whole) terms.push_back(std::move(p));
  }
  return terms;
}

}  // namespace commentgen
