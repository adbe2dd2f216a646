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

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "marsad/error.hpp"
#include "marsad/network.hpp"

using namespace marsad;
using namespace marsad::network;
using marsad::testing::post;

namespace {

ingest::Post authored(const std::string& id, const std::string& author,
                      std::optional<std::string> parent = {}, std::vector<std::string> mentions = {}) {
  auto p = post(id, "text " + id);
  p.author = author;
  p.parent_id = std::move(parent);
  p.mentions = std::move(mentions);
  return p;
}

// Dense power iteration written from the textbook definition.
std::vector<double> dense_oracle(const std::vector<std::vector<double>>& w, double d = 0.85) {
  std::size_t n = w.size();
  std::vector<double> r(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < 1000; ++it) {
    std::vector<double> next(n, (1 - d) / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      double out = std::accumulate(w[i].begin(), w[i].end(), 0.0);
      for (std::size_t j = 0; j < n; ++j)
        next[j] += out > 0 ? d * r[i] * w[i][j] / out : d * r[i] / static_cast<double>(n);
    }
    r = next;
  }
  return r;
}

}  // namespace

TEST_CASE("reply edges") {
  std::vector<ingest::Post> posts = {authored("1", "A"), authored("2", "B", "1")};
  auto g = build_graph(posts);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0] == Edge{"B", "A", EdgeKind::kReply, 1});

  posts.push_back(authored("3", "B", "1"));
  posts.push_back(authored("4", "A", "1"));  // self reply
  auto g2 = build_graph(posts);
  REQUIRE(g2.edges.size() == 1);
  CHECK(g2.edges[0].weight == 2);
}

TEST_CASE("mention edges and missing authors") {
  std::vector<ingest::Post> posts = {authored("1", "A", {}, {"B", "A", "C"}), post("2", "no author @A")};
  auto g = build_graph(posts);
  CHECK(g.nodes == std::vector<std::string>{"A", "B", "C"});
  REQUIRE(g.edges.size() == 2);
  CHECK(g.edges[0] == Edge{"A", "B", EdgeKind::kMention, 1});
  CHECK(g.edges[1] == Edge{"A", "C", EdgeKind::kMention, 1});
}

TEST_CASE("planted 50-post reply tree gives the hand-counted edge list") {
  const std::string users[] = {"ua", "ub", "uc", "ud"};
  std::vector<ingest::Post> posts;
  for (int i = 0; i < 10; ++i) posts.push_back(authored("r" + std::to_string(i), "hub"));
  for (int j = 10; j < 48; ++j)
    posts.push_back(authored("q" + std::to_string(j), users[(j - 10) % 4], "r" + std::to_string((j - 10) % 10)));
  posts.push_back(authored("q48", "hub", "r0"));
  posts.push_back(authored("q49", "ub", "q10"));
  REQUIRE(posts.size() == 50);
  auto g = build_graph(posts);
  std::vector<Edge> expected = {{"ua", "hub", EdgeKind::kReply, 10},
                                {"ub", "hub", EdgeKind::kReply, 10},
                                {"ub", "ua", EdgeKind::kReply, 1},
                                {"uc", "hub", EdgeKind::kReply, 9},
                                {"ud", "hub", EdgeKind::kReply, 9}};
  CHECK(g.edges == expected);

  auto metrics = centrality(g);
  auto hub = std::find_if(metrics.begin(), metrics.end(), [](const auto& m) { return m.node == "hub"; });
  CHECK(hub->in_degree == 4);
  CHECK(hub->out_degree == 0);
  CHECK(top_influencers(metrics, 1)[0].node == "hub");
}

TEST_CASE("property: graph construction ignores post order") {
  std::mt19937_64 rng(4);
  std::vector<ingest::Post> posts;
  for (int i = 0; i < 60; ++i) {
    std::string author = "u" + std::to_string(std::uniform_int_distribution<int>(0, 9)(rng));
    std::optional<std::string> parent;
    if (i > 0 && i % 3 == 0) parent = std::to_string(std::uniform_int_distribution<int>(0, i - 1)(rng));
    std::vector<std::string> mentions;
    if (i % 4 == 0) mentions.push_back("u" + std::to_string(std::uniform_int_distribution<int>(0, 9)(rng)));
    posts.push_back(authored(std::to_string(i), author, parent, mentions));
  }
  auto g = build_graph(posts);
  for (int t = 0; t < 5; ++t) {
    std::shuffle(posts.begin(), posts.end(), rng);
    auto h = build_graph(posts);
    CHECK(h.nodes == g.nodes);
    CHECK(h.edges == g.edges);
  }
}

TEST_CASE("pagerank analytic cases") {
  auto cycle = pagerank({{0, 1}, {1, 0}});
  CHECK(cycle[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cycle[1] == doctest::Approx(0.5).epsilon(1e-12));
  auto isolated = pagerank({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
  for (double r : isolated) CHECK(r == doctest::Approx(1.0 / 3).epsilon(1e-12));

  std::vector<std::vector<double>> star = {{0, 0, 0, 0}, {1, 0, 0, 0}, {1, 0, 0, 0}, {1, 0, 0, 0}};
  auto r = pagerank(star);
  auto oracle = dense_oracle(star);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(r[i] - oracle[i]) < 1e-6);
  CHECK(r[0] > r[1]);
  CHECK(r[1] == doctest::Approx(r[2]));
}

TEST_CASE("centrality agrees with the dense oracle and sums to one") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ingest::Post> posts;
    int n_users = std::uniform_int_distribution<int>(2, 12)(rng);
    for (int i = 0; i < 40; ++i) {
      std::string author = "u" + std::to_string(std::uniform_int_distribution<int>(0, n_users - 1)(rng));
      std::vector<std::string> mentions = {"u" + std::to_string(std::uniform_int_distribution<int>(0, n_users - 1)(rng))};
      posts.push_back(authored(std::to_string(i), author, {}, mentions));
    }
    auto g = build_graph(posts);
    if (g.edges.empty()) continue;
    auto metrics = centrality(g);
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) idx[g.nodes[i]] = i;
    std::vector<std::vector<double>> w(g.nodes.size(), std::vector<double>(g.nodes.size(), 0));
    for (const auto& e : g.edges) w[idx[e.from]][idx[e.to]] += static_cast<double>(e.weight);
    auto oracle = dense_oracle(w);
    double sum = 0;
    for (std::size_t i = 0; i < metrics.size(); ++i) {
      CHECK(std::abs(metrics[i].pagerank - oracle[i]) < 1e-6);
      CHECK(metrics[i].pagerank > 0);
      sum += metrics[i].pagerank;
    }
    CHECK(std::abs(sum - 1) < 1e-6);

    // Relabeling nodes permutes the scores only.
    std::vector<std::size_t> perm(w.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<double>> pw(w.size(), std::vector<double>(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i)
      for (std::size_t j = 0; j < w.size(); ++j) pw[perm[i]][perm[j]] = w[i][j];
    auto a = pagerank(w), b = pagerank(pw);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::abs(a[i] - b[perm[i]]) < 1e-12);
  }
}

TEST_CASE("empty graph") {
  std::vector<ingest::Post> posts = {post("1", "no author here")};
  CHECK(build_graph(posts).nodes.empty());
  auto lone = centrality(build_graph(std::vector<ingest::Post>{authored("1", "A")}));
  REQUIRE(lone.size() == 1);
  CHECK(lone[0].pagerank == doctest::Approx(1.0));
  try {
    centrality(build_graph(posts));
    FAIL("expected EMPTY_GRAPH");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kEmptyGraph);
  }
}

TEST_CASE("top influencers") {
  std::vector<ingest::Post> posts = {authored("1", "a", {}, {"hub"}), authored("2", "b", {}, {"hub"}),
                                     authored("3", "c", {}, {"hub"})};
  auto metrics = centrality(build_graph(posts));
  CHECK(top_influencers(metrics, 1)[0].node == "hub");
  CHECK(top_influencers(metrics, 100).size() == 4);

  // Two planted communities, each mentioning its own hub most.
  std::mt19937_64 rng(12);
  std::vector<ingest::Post> community;
  for (int i = 0; i < 120; ++i) {
    int side = i % 2;
    std::string member = (side ? "blue" : "red") + std::to_string(std::uniform_int_distribution<int>(1, 8)(rng));
    std::string target = std::bernoulli_distribution(0.6)(rng)
                             ? (side ? "blue0" : "red0")
                             : (side ? "blue" : "red") + std::to_string(std::uniform_int_distribution<int>(1, 8)(rng));
    community.push_back(authored(std::to_string(i), member, {}, {target}));
  }
  auto top = top_influencers(centrality(build_graph(community)), 3);
  std::vector<std::string> ids;
  for (const auto& m : top) ids.push_back(m.node);
  CHECK(std::find(ids.begin(), ids.end(), "red0") != ids.end());
  CHECK(std::find(ids.begin(), ids.end(), "blue0") != ids.end());
}
