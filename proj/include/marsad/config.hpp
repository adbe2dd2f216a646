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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "marsad/classify.hpp"
#include "marsad/connectors.hpp"
#include "marsad/jobs.hpp"
#include "marsad/topics.hpp"
#include "marsad/trends.hpp"

namespace marsad {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin;
  std::filesystem::path static_dir;
  std::size_t threads = 8;
};

struct AnalysisConfig {
  classify::SentimentThresholds sentiment;
  double propaganda_threshold = 0.5;
  trends::Granularity granularity = trends::Granularity::kDay;
  std::size_t spike_window = 7;
  double spike_z = 2.0;
  topics::SubtopicOptions subtopics;
  std::size_t wordcloud_terms = 500;
  std::size_t top_influencers = 10;
  std::size_t feedback_min_votes = 3;
};

struct Config {
  std::filesystem::path data_dir = "marsad-data";
  ServerConfig server;
  /// token -> principal
  std::map<std::string, std::string> tokens;
  jobs::QueueOptions queue;
  AnalysisConfig analysis;
  std::optional<classify::HttpAdapterOptions> sentiment_adapter;
  std::optional<classify::HttpAdapterOptions> propaganda_adapter;
  std::optional<connectors::GenericHttpConfig> generic_http;
  std::optional<connectors::GenericHttpConfig> credentialed_stub;
  std::size_t source_concurrency = 2;
};

/// Parses an INI document:
///
///   [paths]    data_dir
///   [server]   host, port, cors_origin, static_dir, threads
///   [auth]     tokens = principal:token, principal:token
///   [jobs]     worker_limit, default_priority, default_seed
///   [classify] positive_threshold, negative_threshold, propaganda_threshold,
///              sentiment_url, sentiment_token, propaganda_url, propaganda_token,
///              timeout_ms, batch_size, max_in_flight
///   [topics]   min_df, max_df_ratio, k, rank, top_m
///   [trends]   granularity, window, z_threshold
///   [sources]  concurrency
///   [generic_http]      url_template, timeout_ms, map.<field> = <response key>
///   [credentialed_stub] url_template, timeout_ms, map.<field> = <response key>
///
/// Relative paths resolve against `base_dir`. Throws Error(kInvalidArgument).
Config parse_config(const std::string& ini, const std::filesystem::path& base_dir = {});

/// Reads `path`, or $MARSAD_CONFIG when `path` is empty, or returns defaults
/// when neither is set.
Config load_config(const std::filesystem::path& path = {});

}  // namespace marsad
