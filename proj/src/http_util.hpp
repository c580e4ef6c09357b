#pragma once

#include <string>
#include <string_view>

#include "commentgen/error.hpp"

namespace commentgen::detail {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'
};

inline SplitUrl split_url(std::string_view url) {
  std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw ConfigError("endpoint is not an absolute URL: " + std::string(url));
  std::size_t path_begin = url.find('/', scheme_end + 3);
  if (path_begin == std::string_view::npos) return {std::string(url), "/"};
  return {std::string(url.substr(0, path_begin)), std::string(url.substr(path_begin))};
}

}  // namespace commentgen::detail
