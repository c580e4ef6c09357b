#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace commentgen {

/// Lowercase identifier-aware terms. Each word ([A-Za-z0-9_]+) is kept whole
/// and, when it is snake_case or camelCase, followed by its distinct parts:
/// "dump_escaped" -> {dump_escaped, dump, escaped}, "getHTTPReply" ->
/// {gethttpreply, get, http, reply}.
std::vector<std::string> tokenize_terms(std::string_view text);

/// The parts alone (lowercase), without the whole word.
std::vector<std::string> identifier_parts(std::string_view word);

}  // namespace commentgen
