#pragma once

#include <string>
#include <string_view>

namespace commentgen {

/// Lowercase hex SHA-256 of the input bytes.
std::string sha256_hex(std::string_view data);

}  // namespace commentgen
