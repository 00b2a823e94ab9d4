#pragma once

#include <string>
#include <string_view>

#include "stackrag/errors.hpp"

namespace stackrag {

// "https://host:port/some/prefix" split into the origin httplib's client
// constructor accepts and the path prefix to prepend to request paths.
struct ParsedBaseUrl {
  std::string origin;       // scheme://host[:port]
  std::string path_prefix;  // "" or "/some/prefix" (no trailing slash)
};

inline ParsedBaseUrl parse_base_url(std::string_view url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos || scheme_end == 0) {
    throw PreconditionError("base url must start with http:// or https://: " +
                            std::string(url));
  }
  const std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw PreconditionError("unsupported url scheme: " + std::string(scheme));
  }
  const std::size_t host_start = scheme_end + 3;
  if (host_start >= url.size()) {
    throw PreconditionError("base url has no host: " + std::string(url));
  }
  const std::size_t path_start = url.find('/', host_start);
  ParsedBaseUrl out;
  if (path_start == std::string_view::npos) {
    out.origin = std::string(url);
    return out;
  }
  out.origin = std::string(url.substr(0, path_start));
  std::string_view prefix = url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') {
    prefix.remove_suffix(1);
  }
  out.path_prefix = std::string(prefix);
  return out;
}

}  // namespace stackrag
