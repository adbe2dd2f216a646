// Copyright 2026 The Marsad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace marsad::detail {

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/', includes any query
};

/// Splits an absolute http(s) URL. Returns nothing for anything else.
inline std::optional<UrlParts> split_url(std::string_view url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) return std::nullopt;
  auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") return std::nullopt;
  auto path_start = url.find('/', scheme_end + 3);
  UrlParts parts;
  if (path_start == std::string_view::npos) {
    parts.origin = std::string(url);
    parts.path = "/";
  } else {
    parts.origin = std::string(url.substr(0, path_start));
    parts.path = std::string(url.substr(path_start));
  }
  if (parts.origin.size() == static_cast<std::size_t>(scheme_end) + 3) return std::nullopt;
  return parts;
}

/// Whether this build can open `origin`. TLS is not compiled in.
inline bool reachable_scheme(const UrlParts& parts) { return parts.origin.starts_with("http://"); }

}  // namespace marsad::detail
