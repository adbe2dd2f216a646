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

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "marsad/ingest.hpp"

namespace marsad::network {

enum class EdgeKind { kReply, kMention, kShare };
std::string_view to_string(EdgeKind kind);

struct Edge {
  std::string from;  // interactor
  std::string to;    // author interacted with
  EdgeKind kind = EdgeKind::kReply;
  std::size_t weight = 0;
  bool operator==(const Edge&) const = default;
};

struct InteractionGraph {
  std::vector<std::string> nodes;  // sorted
  std::vector<Edge> edges;         // sorted by (from, to, kind)
};

/// Reply edges from the replier to the parent post's author, mention edges
/// from the author to each mentioned user. Self-interactions and posts
/// without an author produce no edges.
InteractionGraph build_graph(std::span<const ingest::Post> posts);

struct PageRankOptions {
  double damping = 0.85;
  double tol = 1e-8;
  std::size_t max_iter = 200;
};

struct NodeMetrics {
  std::string node;
  std::size_t in_degree = 0;   // distinct neighbours
  std::size_t out_degree = 0;  // distinct neighbours
  double pagerank = 0.0;
};

/// Metrics in node order. Throws Error(kEmptyGraph).
std::vector<NodeMetrics> centrality(const InteractionGraph& graph, const PageRankOptions& options = {});

/// PageRank over a dense weight matrix (w[i][j] = weight of i -> j). Exposed for
/// callers that already hold an adjacency matrix.
std::vector<double> pagerank(const std::vector<std::vector<double>>& weights,
                             const PageRankOptions& options = {});

/// Sorted by pagerank desc, then in_degree desc, then node id.
std::vector<NodeMetrics> top_influencers(std::vector<NodeMetrics> metrics, std::size_t n = 10);

nlohmann::json to_json(const InteractionGraph& graph, const std::vector<NodeMetrics>& metrics,
                       std::size_t top_n = 10);

}  // namespace marsad::network
