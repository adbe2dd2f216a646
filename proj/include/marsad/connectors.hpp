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

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "json.hpp"
#include "marsad/ingest.hpp"
#include "marsad/time.hpp"

namespace marsad::connectors {

enum class Mode { kFree, kCredentialed };
std::string_view to_string(Mode mode);

struct ParamSpec {
  std::string name;
  std::string type;  // string | integer | timestamp
  bool required = false;
  std::string description;
};

struct SourceDescriptor {
  std::string source_id;
  std::string display_name;
  Mode mode = Mode::kFree;
  std::vector<ParamSpec> params;
  std::vector<std::string> credential_fields;
};

nlohmann::json to_json(const SourceDescriptor& d);
/// Problems with a descriptor's own schema; empty when it is consistent.
std::vector<std::string> check_descriptor(const SourceDescriptor& d);

using Credentials = std::map<std::string, std::string>;

struct SearchRequest {
  std::string query;
  std::size_t limit = 100;
  std::optional<Instant> since;
  std::optional<Instant> until;
  Credentials credentials;
};

class Source {
 public:
  virtual ~Source() = default;
  virtual const SourceDescriptor& descriptor() const = 0;
  /// Raw rows for the query. May return more than the limit; the registry caps.
  virtual std::vector<ingest::RawRecord> fetch(const SearchRequest& request) = 0;
};

/// Records from a JSONL document whose normalized text contains the query.
std::shared_ptr<Source> make_mock_source(std::string jsonl);

struct GenericHttpConfig {
  /// `{query}` and `{limit}` are replaced (URL-encoded).
  std::string url_template;
  /// PostSchema field -> key in the response objects (dotted paths allowed).
  std::map<std::string, std::string> field_map;
  std::chrono::milliseconds timeout{10000};
};

std::shared_ptr<Source> make_generic_http_source(GenericHttpConfig config);

/// Requires a `token` credential. With a URL template it GETs that URL and
/// sends the token as a bearer header; without one it serves the mock data.
std::shared_ptr<Source> make_credentialed_stub(std::optional<GenericHttpConfig> remote,
                                               std::string fallback_jsonl);

/// Replaces every credential value in `text` with "***".
std::string scrub(std::string text, const Credentials& credentials);

class SourceRegistry {
 public:
  explicit SourceRegistry(std::size_t per_source_limit = 2) : per_source_limit_(per_source_limit) {}

  void add(std::shared_ptr<Source> source);
  std::vector<SourceDescriptor> list() const;

  /// Throws Error(kUnknownSource), Error(kCredentialsRequired),
  /// Error(kCredentialsRejected), Error(kInvalidArgument), and whatever the
  /// source raises (kSourceUnreachable, kRateLimited) with credentials scrubbed.
  std::vector<ingest::RawRecord> search(const std::string& source_id, const SearchRequest& request);

 private:
  struct Slot {
    std::shared_ptr<Source> source;
    std::unique_ptr<std::counting_semaphore<>> gate;
  };
  std::size_t per_source_limit_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Slot>> sources_;
};

/// Registry with mock_local, generic_http and credentialed_stub. An unconfigured
/// generic_http rejects searches with Error(kInvalidArgument).
std::unique_ptr<SourceRegistry> builtin_sources(std::optional<GenericHttpConfig> generic_http = {},
                                                std::optional<GenericHttpConfig> stub_remote = {});

}  // namespace marsad::connectors
