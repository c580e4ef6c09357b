#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace commentgen {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view s);
std::string collapse_whitespace(std::string_view s);
bool starts_with_word(std::string_view haystack, std::string_view word);
std::size_t count_newlines(std::string_view s);

// Provider-neutral token approximation: ceil(chars / 4).
constexpr std::size_t estimate_tokens(std::size_t chars) noexcept {
  return (chars + 3) / 4;
}

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

inline bool is_ident_start(char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_ident_char(char c) noexcept {
  return is_ident_start(c) || (c >= '0' && c <= '9');
}
inline bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Fixed-point rendering used in every table and CSV: "%.{digits}f".
std::string format_fixed(double value, int digits);
// Like format_fixed but drops trailing zeros ("24.00" -> "24", "30.50" -> "30.5").
std::string format_trimmed(double value, int digits);

}  // namespace commentgen
