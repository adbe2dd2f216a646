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

#include "marsad/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "marsad/error.hpp"

namespace marsad::network {

std::string_view to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::kReply: return "reply";
    case EdgeKind::kMention: return "mention";
    case EdgeKind::kShare: return "share";
  }
  return "reply";
}

InteractionGraph build_graph(std::span<const ingest::Post> posts) {
  std::unordered_map<std::string, const std::string*> author_of;
  for (const auto& p : posts)
    if (p.author) author_of.emplace(p.id, &*p.author);

  std::set<std::string> nodes;
  std::map<std::tuple<std::string, std::string, EdgeKind>, std::size_t> weights;
  for (const auto& p : posts) {
    if (!p.author) continue;
    const std::string& from = *p.author;
    nodes.insert(from);
    if (p.parent_id) {
      auto it = author_of.find(*p.parent_id);
      if (it != author_of.end() && *it->second != from)
        ++weights[{from, *it->second, EdgeKind::kReply}];
    }
    for (const auto& m : p.mentions) {
      if (m.empty() || m == from) continue;
      nodes.insert(m);
      ++weights[{from, m, EdgeKind::kMention}];
    }
  }
  for (const auto& [key, w] : weights) nodes.insert(std::get<1>(key));

  InteractionGraph g;
  g.nodes.assign(nodes.begin(), nodes.end());
  for (const auto& [key, w] : weights)
    g.edges.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), w});
  return g;
}

namespace {

using Incoming = std::vector<std::vector<std::pair<std::size_t, double>>>;

std::vector<double> power_iteration(const Incoming& incoming, const std::vector<double>& out_weight,
                                    const PageRankOptions& options) {
  const std::size_t n = incoming.size();
  const double nd = static_cast<double>(n);
  const double d = options.damping;
  std::vector<double> rank(n, 1.0 / nd), next(n);
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    double dangling = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (out_weight[i] == 0.0) dangling += rank[i];
    double base = (1.0 - d) / nd + d * dangling / nd;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (const auto& [i, w] : incoming[j]) s += rank[i] * w / out_weight[i];
      next[j] = base + d * s;
    }
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual += std::abs(next[i] - rank[i]);
    rank.swap(next);
    if (residual < options.tol) break;
  }
  return rank;
}

}  // namespace

std::vector<double> pagerank(const std::vector<std::vector<double>>& weights,
                             const PageRankOptions& options) {
  const std::size_t n = weights.size();
  if (n == 0) throw Error(Errc::kEmptyGraph, "graph has no nodes");
  std::vector<double> out_weight(n, 0.0);
  Incoming incoming(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (weights[i][j] > 0.0) {
        out_weight[i] += weights[i][j];
        incoming[j].emplace_back(i, weights[i][j]);
      }
  return power_iteration(incoming, out_weight, options);
}

std::vector<NodeMetrics> centrality(const InteractionGraph& graph, const PageRankOptions& options) {
  const std::size_t n = graph.nodes.size();
  if (n == 0) throw Error(Errc::kEmptyGraph, "graph has no nodes");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(graph.nodes[i], i);

  std::map<std::pair<std::size_t, std::size_t>, double> w;
  std::vector<std::set<std::size_t>> in(n), out(n);
  for (const auto& e : graph.edges) {
    std::size_t a = index.at(e.from);
    std::size_t b = index.at(e.to);
    w[{a, b}] += static_cast<double>(e.weight);
    out[a].insert(b);
    in[b].insert(a);
  }
  std::vector<double> out_weight(n, 0.0);
  Incoming incoming(n);
  for (const auto& [ab, weight] : w) {
    out_weight[ab.first] += weight;
    incoming[ab.second].emplace_back(ab.first, weight);
  }
  auto pr = power_iteration(incoming, out_weight, options);
  std::vector<NodeMetrics> metrics(n);
  for (std::size_t i = 0; i < n; ++i)
    metrics[i] = {graph.nodes[i], in[i].size(), out[i].size(), pr[i]};
  return metrics;
}

std::vector<NodeMetrics> top_influencers(std::vector<NodeMetrics> metrics, std::size_t n) {
  std::sort(metrics.begin(), metrics.end(), [](const NodeMetrics& a, const NodeMetrics& b) {
    if (a.pagerank != b.pagerank) return a.pagerank > b.pagerank;
    if (a.in_degree != b.in_degree) return a.in_degree > b.in_degree;
    return a.node < b.node;
  });
  if (metrics.size() > n) metrics.resize(n);
  return metrics;
}

nlohmann::json to_json(const InteractionGraph& graph, const std::vector<NodeMetrics>& metrics,
                       std::size_t top_n) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& m : metrics)
    nodes.push_back({{"id", m.node},
                     {"in_degree", m.in_degree},
                     {"out_degree", m.out_degree},
                     {"pagerank", m.pagerank}});
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : graph.edges)
    edges.push_back({{"from", e.from}, {"to", e.to}, {"kind", to_string(e.kind)}, {"weight", e.weight}});
  nlohmann::json top = nlohmann::json::array();
  for (const auto& m : top_influencers(metrics, top_n)) top.push_back(m.node);
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}, {"top_influencers", std::move(top)}};
}

}  // namespace marsad::network
