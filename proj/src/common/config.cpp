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

#include "marsad/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "marsad/error.hpp"

namespace marsad {
namespace {

namespace pt = boost::property_tree;

template <typename T>
T get(const pt::ptree& tree, const std::string& path, T fallback) {
  try {
    return tree.get<T>(path, fallback);
  } catch (const pt::ptree_error& e) {
    throw Error(Errc::kInvalidArgument, "config " + path + ": " + e.what());
  }
}

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

std::optional<connectors::GenericHttpConfig> http_source(const pt::ptree& tree,
                                                         const std::string& section) {
  auto node = tree.get_child_optional(section);
  if (!node) return std::nullopt;
  connectors::GenericHttpConfig c;
  c.url_template = node->get<std::string>("url_template", "");
  c.timeout = std::chrono::milliseconds(get<long>(*node, "timeout_ms", 10000));
  for (const auto& [key, value] : *node)
    if (key.rfind("map.", 0) == 0) c.field_map[key.substr(4)] = value.data();
  if (c.url_template.empty() && c.field_map.empty()) return std::nullopt;
  return c;
}

}  // namespace

Config parse_config(const std::string& ini, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(ini);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::kInvalidArgument, std::string("config: ") + e.what());
  }

  Config c;
  c.data_dir = resolve(get<std::string>(tree, "paths.data_dir", c.data_dir.string()), base_dir);

  c.server.host = get<std::string>(tree, "server.host", c.server.host);
  c.server.port = get<int>(tree, "server.port", c.server.port);
  c.server.cors_origin = get<std::string>(tree, "server.cors_origin", "");
  c.server.static_dir = resolve(get<std::string>(tree, "server.static_dir", ""), base_dir);
  c.server.threads = get<std::size_t>(tree, "server.threads", c.server.threads);

  std::stringstream tokens(get<std::string>(tree, "auth.tokens", ""));
  std::string item;
  while (std::getline(tokens, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    auto colon = item.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == item.size())
      throw Error(Errc::kInvalidArgument, "config auth.tokens: expected principal:token entries");
    c.tokens[trim(item.substr(colon + 1))] = trim(item.substr(0, colon));
  }

  c.queue.worker_limit = get<std::size_t>(tree, "jobs.worker_limit", c.queue.worker_limit);
  if (c.queue.worker_limit == 0) throw Error(Errc::kInvalidArgument, "config jobs.worker_limit must be >= 1");
  c.queue.default_priority = get<int>(tree, "jobs.default_priority", c.queue.default_priority);
  c.queue.default_seed = get<std::uint64_t>(tree, "jobs.default_seed", c.queue.default_seed);

  auto& a = c.analysis;
  a.sentiment.positive = get<double>(tree, "classify.positive_threshold", a.sentiment.positive);
  a.sentiment.negative = get<double>(tree, "classify.negative_threshold", a.sentiment.negative);
  a.propaganda_threshold = get<double>(tree, "classify.propaganda_threshold", a.propaganda_threshold);
  a.feedback_min_votes = get<std::size_t>(tree, "classify.feedback_min_votes", a.feedback_min_votes);

  auto adapter = [&](const std::string& kind_name,
                     AnalysisKind kind) -> std::optional<classify::HttpAdapterOptions> {
    std::string url = get<std::string>(tree, "classify." + kind_name + "_url", "");
    if (url.empty()) return std::nullopt;
    classify::HttpAdapterOptions o;
    o.id = kind_name + "-http";
    o.kind = kind;
    o.url = url;
    o.token = get<std::string>(tree, "classify." + kind_name + "_token", "");
    o.timeout = std::chrono::milliseconds(get<long>(tree, "classify.timeout_ms", 30000));
    o.batch_size = get<std::size_t>(tree, "classify.batch_size", o.batch_size);
    o.max_in_flight = get<std::size_t>(tree, "classify.max_in_flight", o.max_in_flight);
    return o;
  };
  c.sentiment_adapter = adapter("sentiment", AnalysisKind::kSentiment);
  c.propaganda_adapter = adapter("propaganda", AnalysisKind::kPropaganda);

  a.subtopics.min_df = get<std::size_t>(tree, "topics.min_df", a.subtopics.min_df);
  a.subtopics.max_df_ratio = get<double>(tree, "topics.max_df_ratio", a.subtopics.max_df_ratio);
  if (auto k = get<std::size_t>(tree, "topics.k", 0); k > 0) a.subtopics.k = k;
  a.subtopics.rank = get<std::size_t>(tree, "topics.rank", a.subtopics.rank);
  a.subtopics.top_m = get<std::size_t>(tree, "topics.top_m", a.subtopics.top_m);
  a.subtopics.restarts = get<std::size_t>(tree, "topics.restarts", a.subtopics.restarts);

  std::string granularity = get<std::string>(tree, "trends.granularity", "day");
  auto g = trends::parse_granularity(granularity);
  if (!g) throw Error(Errc::kInvalidArgument, "config trends.granularity: unknown value " + granularity);
  a.granularity = *g;
  a.spike_window = get<std::size_t>(tree, "trends.window", a.spike_window);
  a.spike_z = get<double>(tree, "trends.z_threshold", a.spike_z);

  c.source_concurrency = get<std::size_t>(tree, "sources.concurrency", c.source_concurrency);
  c.generic_http = http_source(tree, "generic_http");
  c.credentialed_stub = http_source(tree, "credentialed_stub");
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::filesystem::path p = path;
  if (p.empty()) {
    if (const char* env = std::getenv("MARSAD_CONFIG"); env && *env) p = env;
  }
  if (p.empty()) return Config{};
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot read config " + p.string());
  std::ostringstream body;
  body << in.rdbuf();
  return parse_config(body.str(), p.parent_path());
}

}  // namespace marsad
