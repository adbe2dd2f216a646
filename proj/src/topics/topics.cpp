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

#include "marsad/topics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "marsad/error.hpp"

namespace marsad::topics {

std::optional<std::size_t> Vocabulary::index(const std::string& term) const {
  auto it = std::lower_bound(terms.begin(), terms.end(), term);
  if (it == terms.end() || *it != term) return std::nullopt;
  return static_cast<std::size_t>(it - terms.begin());
}

Vocabulary build_vocabulary(const Corpus& corpus, std::size_t min_df, double max_df_ratio) {
  if (corpus.empty()) throw Error(Errc::kEmptyVocabulary, "corpus is empty");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    std::set<std::string> seen(doc.begin(), doc.end());
    for (const auto& t : seen) ++df[t];
  }
  Vocabulary vocab;
  vocab.n_docs = corpus.size();
  const double n = static_cast<double>(corpus.size());
  for (const auto& [term, count] : df) {
    if (count < min_df) continue;
    if (static_cast<double>(count) / n > max_df_ratio) continue;
    vocab.terms.push_back(term);
    vocab.df.push_back(count);
  }
  if (vocab.terms.empty())
    throw Error(Errc::kEmptyVocabulary, "no term survives min_df=" + std::to_string(min_df) +
                                            " and max_df_ratio=" + std::to_string(max_df_ratio));
  return vocab;
}

double WeightedMatrix::at(std::size_t row, std::size_t col) const {
  const auto& r = rows.at(row);
  auto it = std::lower_bound(r.begin(), r.end(), col,
                             [](const Entry& e, std::size_t c) { return e.col < c; });
  return (it != r.end() && it->col == col) ? it->value : 0.0;
}

Eigen::MatrixXd WeightedMatrix::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_rows),
                                            static_cast<Eigen::Index>(n_cols));
  for (std::size_t i = 0; i < n_rows; ++i)
    for (const auto& e : rows[i]) m(static_cast<Eigen::Index>(i), e.col) = e.value;
  return m;
}

WeightedMatrix WeightedMatrix::from_dense(const Eigen::MatrixXd& m) {
  WeightedMatrix out;
  out.n_rows = static_cast<std::size_t>(m.rows());
  out.n_cols = static_cast<std::size_t>(m.cols());
  out.rows.resize(out.n_rows);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0)
        out.rows[static_cast<std::size_t>(i)].push_back({static_cast<std::uint32_t>(j), m(i, j)});
  return out;
}

WeightedMatrix tfidf_matrix(const Corpus& corpus, const Vocabulary& vocab) {
  WeightedMatrix m;
  m.n_rows = corpus.size();
  m.n_cols = vocab.size();
  m.rows.resize(corpus.size());
  std::vector<double> idf(vocab.size());
  const double n = static_cast<double>(vocab.n_docs);
  for (std::size_t j = 0; j < vocab.size(); ++j)
    idf[j] = std::log((1.0 + n) / (1.0 + static_cast<double>(vocab.df[j]))) + 1.0;

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::map<std::uint32_t, double> counts;
    for (const auto& t : corpus[i])
      if (auto j = vocab.index(t)) counts[static_cast<std::uint32_t>(*j)] += 1.0;
    double norm2 = 0.0;
    auto& row = m.rows[i];
    for (const auto& [j, tf] : counts) {
      double w = tf * idf[j];
      row.push_back({j, w});
      norm2 += w * w;
    }
    if (norm2 > 0.0) {
      double norm = std::sqrt(norm2);
      for (auto& e : row) e.value /= norm;
    }
  }
  return m;
}

std::size_t choose_k(std::size_t n_docs) {
  if (n_docs < 2) throw Error(Errc::kTooFewDocs, "need at least 2 documents, got " +
                                                     std::to_string(n_docs));
  auto k = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n_docs) / 2.0)));
  return std::clamp<std::size_t>(k, 2, 20);
}

namespace {

using RowRef = const std::vector<Entry>*;

double squared_norm(const std::vector<Entry>& row) {
  double s = 0.0;
  for (const auto& e : row) s += e.value * e.value;
  return s;
}

double squared_distance(const std::vector<Entry>& row, double row_norm2,
                        const Eigen::MatrixXd& centroids, Eigen::Index c,
                        const Eigen::VectorXd& centroid_norm2) {
  double d = row_norm2 + centroid_norm2(c);
  for (const auto& e : row) d -= 2.0 * e.value * centroids(c, e.col);
  return std::max(d, 0.0);
}

bool row_less(const std::vector<Entry>& a, const std::vector<Entry>& b) {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(),
      [](const Entry& x, const Entry& y) { return std::tie(x.col, x.value) < std::tie(y.col, y.value); });
}

struct Lloyd {
  const std::vector<RowRef>& rows;
  std::size_t dims;
  std::size_t k;
  std::vector<double> row_norm2;
  Eigen::MatrixXd centroids;
  Eigen::VectorXd centroid_norm2;
  std::vector<std::size_t> assign;
  std::vector<double> dist;

  Lloyd(const std::vector<RowRef>& r, std::size_t d, std::size_t kk)
      : rows(r), dims(d), k(kk), row_norm2(r.size()), assign(r.size(), 0), dist(r.size(), 0.0) {
    for (std::size_t i = 0; i < rows.size(); ++i) row_norm2[i] = squared_norm(*rows[i]);
    centroids = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(dims));
    centroid_norm2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  }

  void set_centroid(std::size_t c, const std::vector<Entry>& row) {
    auto ci = static_cast<Eigen::Index>(c);
    centroids.row(ci).setZero();
    for (const auto& e : row) centroids(ci, e.col) = e.value;
    centroid_norm2(ci) = centroids.row(ci).squaredNorm();
  }

  double distance(std::size_t i, std::size_t c) const {
    return squared_distance(*rows[i], row_norm2[i], centroids, static_cast<Eigen::Index>(c),
                            centroid_norm2);
  }

  void seed_plus_plus(std::mt19937_64& rng) {
    const std::size_t n = rows.size();
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    set_centroid(0, *rows[pick(rng)]);
    std::vector<double> closest(n);
    for (std::size_t i = 0; i < n; ++i) closest[i] = distance(i, 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t c = 1; c < k; ++c) {
      double total = std::accumulate(closest.begin(), closest.end(), 0.0);
      std::size_t chosen = 0;
      if (total > 0.0) {
        double target = unit(rng) * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (closest[i] <= 0.0) continue;
          chosen = i;
          acc += closest[i];
          if (acc > target) break;
        }
      } else {
        chosen = pick(rng);
      }
      set_centroid(c, *rows[chosen]);
      for (std::size_t i = 0; i < n; ++i) closest[i] = std::min(closest[i], distance(i, c));
    }
  }

  double assign_step() {
    double inertia = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::size_t best = 0;
      double best_d = distance(i, 0);
      for (std::size_t c = 1; c < k; ++c) {
        double d = distance(i, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assign[i] = best;
      dist[i] = best_d;
      inertia += best_d;
    }
    return inertia;
  }

  // Moves the farthest point of a multi-member cluster into each empty one.
  // Returns the adjusted inertia.
  double repair_empty(double inertia) {
    std::vector<std::size_t> sizes(k, 0);
    for (auto a : assign) ++sizes[a];
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t far = rows.size();
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (sizes[assign[i]] < 2) continue;
        if (far == rows.size() || dist[i] > dist[far]) far = i;
      }
      --sizes[assign[far]];
      ++sizes[c];
      inertia -= dist[far];
      assign[far] = c;
      dist[far] = 0.0;
      set_centroid(c, *rows[far]);
    }
    return inertia;
  }

  double update_step() {
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(centroids.rows(), centroids.cols());
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto c = static_cast<Eigen::Index>(assign[i]);
      ++sizes[assign[i]];
      for (const auto& e : *rows[i]) next(c, e.col) += e.value;
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      auto ci = static_cast<Eigen::Index>(c);
      next.row(ci) /= static_cast<double>(sizes[c]);
      shift = std::max(shift, (next.row(ci) - centroids.row(ci)).norm());
    }
    centroids = std::move(next);
    centroid_norm2 = centroids.rowwise().squaredNorm();
    return shift;
  }
};

}  // namespace

Clustering kmeans(const WeightedMatrix& matrix, std::size_t k, std::uint64_t seed,
                  std::size_t max_iter, double tol) {
  const std::size_t n = matrix.n_rows;
  if (k == 0) throw Error(Errc::kInvalidArgument, "k must be >= 1");
  if (k > n)
    throw Error(Errc::kKExceedsDocs, "k=" + std::to_string(k) + " exceeds " + std::to_string(n) +
                                         " documents");

  // Work in a content-sorted order so the partition is independent of row order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return row_less(matrix.rows[a], matrix.rows[b]);
  });
  std::vector<RowRef> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = &matrix.rows[order[i]];

  Lloyd lloyd(rows, matrix.n_cols, k);
  std::mt19937_64 rng(seed);
  lloyd.seed_plus_plus(rng);

  Clustering out;
  out.k = k;
  for (std::size_t it = 0; it < max_iter; ++it) {
    double inertia = lloyd.repair_empty(lloyd.assign_step());
    out.inertia_trace.push_back(inertia);
    double shift = lloyd.update_step();
    out.iterations = it + 1;
    if (shift < tol) break;
  }
  // Final inertia against the final means.
  double final_inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) final_inertia += lloyd.distance(i, lloyd.assign[i]);
  out.inertia_trace.push_back(final_inertia);
  out.inertia = final_inertia;

  // Relabel clusters by first appearance in the canonical order.
  std::vector<std::size_t> relabel(k, k);
  std::size_t next_label = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (relabel[lloyd.assign[i]] == k) relabel[lloyd.assign[i]] = next_label++;
  for (auto& r : relabel)
    if (r == k) r = next_label++;

  out.assignments.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) out.assignments[order[i]] = relabel[lloyd.assign[i]];
  out.centroids.resize(lloyd.centroids.rows(), lloyd.centroids.cols());
  for (std::size_t c = 0; c < k; ++c)
    out.centroids.row(static_cast<Eigen::Index>(relabel[c])) =
        lloyd.centroids.row(static_cast<Eigen::Index>(c));
  return out;
}

NmfResult nmf(const Eigen::MatrixXd& V, std::size_t rank, std::uint64_t seed, std::size_t max_iter,
              double tol) {
  if ((V.array() < 0.0).any()) throw Error(Errc::kNegativeInput, "NMF input has negative entries");
  const auto rows = V.rows();
  const auto cols = V.cols();
  if (rank == 0 || static_cast<Eigen::Index>(rank) > std::min(rows, cols))
    throw Error(Errc::kRankTooLarge, "rank " + std::to_string(rank) + " exceeds min(" +
                                         std::to_string(rows) + ", " + std::to_string(cols) + ")");
  const auto r = static_cast<Eigen::Index>(rank);
  constexpr double eps = std::numeric_limits<double>::min();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double scale = std::sqrt(V.mean() / static_cast<double>(rank));
  NmfResult out;
  out.W.resize(rows, r);
  out.H.resize(r, cols);
  for (Eigen::Index i = 0; i < out.W.size(); ++i) out.W.data()[i] = unit(rng) * scale;
  for (Eigen::Index i = 0; i < out.H.size(); ++i) out.H.data()[i] = unit(rng) * scale;

  auto objective = [&] { return (V - out.W * out.H).squaredNorm(); };
  double prev = objective();
  out.objective_trace.push_back(prev);
  for (std::size_t it = 0; it < max_iter; ++it) {
    Eigen::MatrixXd wt_v = out.W.transpose() * V;
    Eigen::MatrixXd wt_wh = out.W.transpose() * out.W * out.H;
    out.H.array() *= wt_v.array() / (wt_wh.array() + eps);
    Eigen::MatrixXd v_ht = V * out.H.transpose();
    Eigen::MatrixXd w_hht = out.W * (out.H * out.H.transpose());
    out.W.array() *= v_ht.array() / (w_hht.array() + eps);

    double cur = objective();
    out.objective_trace.push_back(cur);
    out.iterations = it + 1;
    if (prev <= 0.0 || (prev - cur) / prev < tol) break;
    prev = cur;
  }
  return out;
}

std::vector<Subtopic> factor_clusters(const WeightedMatrix& matrix, const Clustering& clustering,
                                      std::uint64_t seed, std::size_t rank) {
  std::vector<std::vector<std::size_t>> members(clustering.k);
  for (std::size_t i = 0; i < clustering.assignments.size(); ++i)
    members[clustering.assignments[i]].push_back(i);

  std::vector<Subtopic> out(clustering.k);
  for (std::size_t c = 0; c < clustering.k; ++c) {
    Subtopic& s = out[c];
    s.cluster = c;
    s.doc_count = members[c].size();
    std::set<std::size_t> cols;
    for (auto i : members[c])
      for (const auto& e : matrix.rows[i]) cols.insert(e.col);
    s.columns.assign(cols.begin(), cols.end());
    if (s.columns.empty() || members[c].empty()) continue;

    std::unordered_map<std::size_t, Eigen::Index> col_pos;
    for (std::size_t j = 0; j < s.columns.size(); ++j)
      col_pos[s.columns[j]] = static_cast<Eigen::Index>(j);
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(members[c].size()),
                                              static_cast<Eigen::Index>(s.columns.size()));
    for (std::size_t r = 0; r < members[c].size(); ++r)
      for (const auto& e : matrix.rows[members[c][r]])
        V(static_cast<Eigen::Index>(r), col_pos.at(e.col)) = e.value;

    std::size_t r = std::min({rank, members[c].size(), s.columns.size()});
    s.factors = nmf(V, r, seed + c);
  }
  return out;
}

void extract_subtopics(std::vector<Subtopic>& clusters, const Vocabulary& vocab,
                       std::size_t top_m) {
  for (auto& s : clusters) {
    s.top_terms.clear();
    if (s.factors.H.size() == 0) continue;
    Eigen::MatrixXd H = s.factors.H;
    for (Eigen::Index q = 0; q < H.rows(); ++q) {
      double l1 = s.factors.W.col(q).sum();
      H.row(q) *= l1;
    }
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(s.columns.size());
    for (std::size_t j = 0; j < s.columns.size(); ++j)
      scored.emplace_back(vocab.terms.at(s.columns[j]), H.col(static_cast<Eigen::Index>(j)).maxCoeff());
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (scored.size() > top_m) scored.resize(top_m);
    s.top_terms = std::move(scored);
  }
}

SubtopicSet run_subtopics(const Corpus& corpus, std::uint64_t seed,
                          const SubtopicOptions& options) {
  const std::size_t k = options.k ? *options.k : choose_k(corpus.size());
  Vocabulary vocab = build_vocabulary(corpus, options.min_df, options.max_df_ratio);
  WeightedMatrix matrix = tfidf_matrix(corpus, vocab);
  // Restarts use seeds derived from `seed`; the lowest inertia wins, earlier on ties.
  Clustering clustering = kmeans(matrix, k, seed);
  std::mt19937_64 restart_seeds(seed);
  for (std::size_t r = 1; r < std::max<std::size_t>(options.restarts, 1); ++r) {
    Clustering candidate = kmeans(matrix, k, restart_seeds());
    if (candidate.inertia < clustering.inertia) clustering = std::move(candidate);
  }

  SubtopicSet set;
  set.k = k;
  set.seed = seed;
  set.vocabulary_size = vocab.size();
  set.inertia = clustering.inertia;
  set.assignments = clustering.assignments;
  set.clusters = factor_clusters(matrix, clustering, seed, options.rank);
  extract_subtopics(set.clusters, vocab, options.top_m);
  return set;
}

std::vector<std::pair<std::string, std::size_t>> word_cloud(const Corpus& corpus) {
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : corpus)
    for (const auto& t : doc) ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

nlohmann::json to_json(const SubtopicSet& set) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& s : set.clusters) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [term, weight] : s.top_terms) terms.push_back({{"term", term}, {"weight", weight}});
    clusters.push_back({{"cluster", s.cluster},
                        {"doc_count", s.doc_count},
                        {"top_terms", std::move(terms)},
                        {"rank", s.factors.H.rows()},
                        {"nmf_iterations", s.factors.iterations}});
  }
  return {{"k", set.k},
          {"seed", set.seed},
          {"vocabulary_size", set.vocabulary_size},
          {"inertia", set.inertia},
          {"assignments", set.assignments},
          {"clusters", std::move(clusters)}};
}

nlohmann::json word_cloud_json(const std::vector<std::pair<std::string, std::size_t>>& cloud,
                               std::size_t limit) {
  nlohmann::json terms = nlohmann::json::array();
  for (std::size_t i = 0; i < cloud.size() && i < limit; ++i)
    terms.push_back({{"term", cloud[i].first}, {"frequency", cloud[i].second}});
  return {{"total_terms", cloud.size()}, {"terms", std::move(terms)}};
}

}  // namespace marsad::topics
