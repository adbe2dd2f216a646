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

#include "marsad/connectors.hpp"

#include <algorithm>

#include "httplib.h"
#include "marsad/embedded_data.hpp"
#include "marsad/error.hpp"
#include "../common/http_util.hpp"

namespace marsad::connectors {

std::string_view to_string(Mode mode) { return mode == Mode::kFree ? "free" : "credentialed"; }

nlohmann::json to_json(const SourceDescriptor& d) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : d.params)
    params.push_back({{"name", p.name},
                      {"type", p.type},
                      {"required", p.required},
                      {"description", p.description}});
  return {{"source_id", d.source_id},
          {"display_name", d.display_name},
          {"mode", to_string(d.mode)},
          {"params", std::move(params)},
          {"credential_fields", d.credential_fields}};
}

std::vector<std::string> check_descriptor(const SourceDescriptor& d) {
  std::vector<std::string> problems;
  if (d.source_id.empty()) problems.push_back("source_id is empty");
  if (d.mode == Mode::kFree && !d.credential_fields.empty())
    problems.push_back("free source declares credential fields");
  if (d.mode == Mode::kCredentialed && d.credential_fields.empty())
    problems.push_back("credentialed source declares no credential fields");
  std::vector<std::string> names;
  for (const auto& p : d.params) {
    if (p.type != "string" && p.type != "integer" && p.type != "timestamp")
      problems.push_back("param " + p.name + " has unknown type " + p.type);
    names.push_back(p.name);
  }
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end())
    problems.push_back("duplicate param names");
  for (const char* required : {"query", "limit"})
    if (!std::binary_search(names.begin(), names.end(), required))
      problems.push_back(std::string("missing param ") + required);
  return problems;
}

std::string scrub(std::string text, const Credentials& credentials) {
  for (const auto& [name, value] : credentials) {
    if (value.empty()) continue;
    for (auto pos = text.find(value); pos != std::string::npos; pos = text.find(value, pos + 3))
      text.replace(pos, value.size(), "***");
  }
  return text;
}

namespace {

std::vector<ParamSpec> search_params() {
  return {{"query", "string", true, "search terms"},
          {"limit", "integer", false, "maximum records (default 100)"},
          {"since", "timestamp", false, "earliest post time, inclusive"},
          {"until", "timestamp", false, "latest post time, inclusive"}};
}

SourceDescriptor generic_http_descriptor() {
  return {"generic_http", "Keyless JSON endpoint", Mode::kFree, search_params(), {}};
}

bool matches_query(const ingest::RawRecord& r, const std::string& norm_query) {
  if (norm_query.empty()) return true;
  auto it = r.fields.find("text");
  if (it == r.fields.end()) return false;
  return ingest::normalize_text(it->second).find(norm_query) != std::string::npos;
}

class MockSource : public Source {
 public:
  explicit MockSource(std::string jsonl, SourceDescriptor descriptor)
      : jsonl_(std::move(jsonl)), descriptor_(std::move(descriptor)) {}

  const SourceDescriptor& descriptor() const override { return descriptor_; }

  std::vector<ingest::RawRecord> fetch(const SearchRequest& request) override {
    auto records = ingest::decode_records(jsonl_, ingest::SourceFormat::kJsonl);
    std::string q = ingest::normalize_text(request.query);
    std::vector<ingest::RawRecord> out;
    for (auto& r : records)
      if (matches_query(r, q)) out.push_back(std::move(r));
    return out;
  }

 private:
  std::string jsonl_;
  SourceDescriptor descriptor_;
};

const nlohmann::json* lookup(const nlohmann::json& obj, const std::string& path) {
  const nlohmann::json* cur = &obj;
  std::size_t start = 0;
  while (true) {
    auto dot = path.find('.', start);
    std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!cur->is_object() || !cur->contains(key)) return nullptr;
    cur = &(*cur)[key];
    if (dot == std::string::npos) return cur;
    start = dot + 1;
  }
}

std::string expand(const std::string& tmpl, const SearchRequest& request) {
  std::string out = tmpl;
  auto replace_all = [&](const std::string& key, const std::string& value) {
    for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + value.size()))
      out.replace(pos, key.size(), value);
  };
  replace_all("{query}", httplib::detail::encode_query_param(request.query));
  replace_all("{limit}", std::to_string(request.limit));
  return out;
}

std::vector<ingest::RawRecord> fetch_json_array(const GenericHttpConfig& config,
                                                const SearchRequest& request,
                                                const httplib::Headers& headers) {
  std::string url = expand(config.url_template, request);
  auto parts = detail::split_url(url);
  if (!parts) throw Error(Errc::kInvalidArgument, "source url must be http(s)://host[:port]/path");
  if (!detail::reachable_scheme(*parts))
    throw Error(Errc::kSourceUnreachable, parts->origin + ": https is not supported in this build");
  httplib::Client client(parts->origin);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  auto res = client.Get(parts->path, headers);
  if (!res)
    throw Error(Errc::kSourceUnreachable, parts->origin + ": " + httplib::to_string(res.error()));
  if (res->status == 429) throw Error(Errc::kRateLimited, parts->origin + " returned HTTP 429");
  if (res->status < 200 || res->status >= 300)
    throw Error(Errc::kSourceUnreachable, parts->origin + " returned HTTP " + std::to_string(res->status));

  nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, false);
  if (doc.is_discarded() || !doc.is_array())
    throw Error(Errc::kUndecodableInput, "source response is not a JSON array");
  nlohmann::json mapped = nlohmann::json::array();
  for (const auto& item : doc) {
    if (!item.is_object()) {
      mapped.push_back(item);  // decode marks it malformed
      continue;
    }
    nlohmann::json row = nlohmann::json::object();
    for (const auto& [key, value] : item.items())
      if (!value.is_object()) row[key] = value;
    for (const auto& [field, path] : config.field_map) {
      row.erase(path);
      if (const auto* v = lookup(item, path)) row[field] = *v;
    }
    mapped.push_back(std::move(row));
  }
  return ingest::decode_records(mapped.dump(), ingest::SourceFormat::kJson);
}

class GenericHttpSource : public Source {
 public:
  GenericHttpSource(std::optional<GenericHttpConfig> config, SourceDescriptor descriptor)
      : config_(std::move(config)), descriptor_(std::move(descriptor)) {}

  const SourceDescriptor& descriptor() const override { return descriptor_; }

  std::vector<ingest::RawRecord> fetch(const SearchRequest& request) override {
    if (!config_ || config_->url_template.empty())
      throw Error(Errc::kInvalidArgument, "generic_http has no url_template configured");
    return fetch_json_array(*config_, request, {});
  }

 private:
  std::optional<GenericHttpConfig> config_;
  SourceDescriptor descriptor_;
};

class CredentialedStub : public Source {
 public:
  CredentialedStub(std::optional<GenericHttpConfig> remote, std::string fallback,
                   SourceDescriptor descriptor)
      : remote_(std::move(remote)), mock_(std::move(fallback), descriptor),
        descriptor_(std::move(descriptor)) {}

  const SourceDescriptor& descriptor() const override { return descriptor_; }

  std::vector<ingest::RawRecord> fetch(const SearchRequest& request) override {
    if (remote_ && !remote_->url_template.empty()) {
      httplib::Headers headers{{"Authorization", "Bearer " + request.credentials.at("token")}};
      return fetch_json_array(*remote_, request, headers);
    }
    return mock_.fetch(request);
  }

 private:
  std::optional<GenericHttpConfig> remote_;
  MockSource mock_;
  SourceDescriptor descriptor_;
};

}  // namespace

std::shared_ptr<Source> make_mock_source(std::string jsonl) {
  return std::make_shared<MockSource>(
      std::move(jsonl), SourceDescriptor{"mock_local", "Local sample posts", Mode::kFree, search_params(), {}});
}

std::shared_ptr<Source> make_generic_http_source(GenericHttpConfig config) {
  return std::make_shared<GenericHttpSource>(std::move(config), generic_http_descriptor());
}

std::shared_ptr<Source> make_credentialed_stub(std::optional<GenericHttpConfig> remote,
                                               std::string fallback_jsonl) {
  return std::make_shared<CredentialedStub>(
      std::move(remote), std::move(fallback_jsonl),
      SourceDescriptor{"credentialed_stub", "Token-authenticated source", Mode::kCredentialed,
                       search_params(), {"token"}});
}

void SourceRegistry::add(std::shared_ptr<Source> source) {
  auto slot = std::make_shared<Slot>();
  slot->gate = std::make_unique<std::counting_semaphore<>>(
      static_cast<std::ptrdiff_t>(std::max<std::size_t>(per_source_limit_, 1)));
  std::string id = source->descriptor().source_id;
  slot->source = std::move(source);
  std::lock_guard lock(mu_);
  sources_[id] = std::move(slot);
}

std::vector<SourceDescriptor> SourceRegistry::list() const {
  std::lock_guard lock(mu_);
  std::vector<SourceDescriptor> out;
  for (const auto& [id, slot] : sources_) out.push_back(slot->source->descriptor());
  return out;
}

std::vector<ingest::RawRecord> SourceRegistry::search(const std::string& source_id,
                                                      const SearchRequest& request) {
  std::shared_ptr<Slot> slot;
  {
    std::lock_guard lock(mu_);
    auto it = sources_.find(source_id);
    if (it == sources_.end()) throw Error(Errc::kUnknownSource, "unknown source " + source_id);
    slot = it->second;
  }
  const auto& d = slot->source->descriptor();
  if (d.mode == Mode::kFree && !request.credentials.empty())
    throw Error(Errc::kCredentialsRejected, source_id + " is a free source and takes no credentials");
  if (d.mode == Mode::kCredentialed) {
    for (const auto& field : d.credential_fields) {
      auto it = request.credentials.find(field);
      if (it == request.credentials.end() || it->second.empty())
        throw Error(Errc::kCredentialsRequired, source_id + " requires credential '" + field + "'");
    }
  }
  if (request.limit == 0) throw Error(Errc::kInvalidArgument, "limit must be >= 1");

  std::vector<ingest::RawRecord> records;
  slot->gate->acquire();
  try {
    records = slot->source->fetch(request);
    slot->gate->release();
  } catch (const Error& e) {
    slot->gate->release();
    throw Error(e.code(), scrub(e.what(), request.credentials));
  } catch (const std::exception& e) {
    slot->gate->release();
    throw Error(Errc::kSourceUnreachable, scrub(e.what(), request.credentials));
  }

  std::vector<ingest::RawRecord> out;
  for (auto& r : records) {
    if (request.since || request.until) {
      auto ts = r.fields.find("timestamp");
      std::optional<Instant> t = ts == r.fields.end() ? std::nullopt : parse_iso8601(ts->second);
      if (t && ((request.since && *t < *request.since) || (request.until && *t > *request.until)))
        continue;
    }
    if (out.size() == request.limit) break;
    r.row_index = out.size() + 1;
    out.push_back(std::move(r));
  }
  return out;
}

std::unique_ptr<SourceRegistry> builtin_sources(std::optional<GenericHttpConfig> generic_http,
                                                std::optional<GenericHttpConfig> stub_remote) {
  auto registry = std::make_unique<SourceRegistry>();
  std::string mock(embedded::file("mock_posts.jsonl"));
  registry->add(make_mock_source(mock));
  registry->add(std::make_shared<GenericHttpSource>(std::move(generic_http), generic_http_descriptor()));
  registry->add(make_credentialed_stub(std::move(stub_remote), mock));
  return registry;
}

}  // namespace marsad::connectors
