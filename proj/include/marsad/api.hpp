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

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "marsad/engine.hpp"
#include "marsad/error.hpp"

namespace marsad::api {

/// Principal for a presented bearer token, compared in constant time against
/// every configured token. Nothing for a missing or unknown token.
std::optional<std::string> auth_check(std::string_view authorization_header,
                                      const std::map<std::string, std::string>& tokens);

int http_status(Errc code);

/// The /v1 HTTP service. Owns a worker pool and a webhook notifier; handlers
/// never run analyses themselves.
class Server {
 public:
  explicit Server(Engine& engine);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds to the configured host/port (0 picks a free port) and returns the
  /// port, or -1 on failure.
  int bind();
  /// Serves until stop(). Call after bind().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace marsad::api
