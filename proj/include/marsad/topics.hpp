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
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace marsad::topics {

/// One token list per document.
using Corpus = std::vector<std::vector<std::string>>;

struct Vocabulary {
  std::vector<std::string> terms;  // sorted, unique
  std::vector<std::size_t> df;     // parallel to terms
  std::size_t n_docs = 0;

  std::optional<std::size_t> index(const std::string& term) const;
  std::size_t size() const { return terms.size(); }
};

/// Throws Error(kEmptyVocabulary) when no term survives the df filters or the
/// corpus is empty.
Vocabulary build_vocabulary(const Corpus& corpus, std::size_t min_df = 2,
                            double max_df_ratio = 0.95);

struct Entry {
  std::uint32_t col;
  double value;
};

/// Row-major sparse matrix; each row's entries are sorted by column.
struct WeightedMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::vector<Entry>> rows;

  double at(std::size_t row, std::size_t col) const;
  Eigen::MatrixXd dense() const;
  static WeightedMatrix from_dense(const Eigen::MatrixXd& m);
};

/// TF = raw count, IDF = ln((1+N)/(1+df)) + 1, rows L2-normalized.
WeightedMatrix tfidf_matrix(const Corpus& corpus, const Vocabulary& vocab);

/// clamp(round(sqrt(n_docs/2)), 2, 20). Throws Error(kTooFewDocs) below 2.
std::size_t choose_k(std::size_t n_docs);

struct Clustering {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;
  Eigen::MatrixXd centroids;  // k x n_cols
  double inertia = 0.0;
  /// Inertia after every assignment step, ending with the final value.
  std::vector<double> inertia_trace;
  std::size_t iterations = 0;
};

/// k-means++ seeding and Lloyd iterations. Empty clusters are repaired by
/// moving the point farthest from its centroid into them. The partition does
/// not depend on row order. Throws Error(kKExceedsDocs), Error(kInvalidArgument)
/// for k = 0.
Clustering kmeans(const WeightedMatrix& matrix, std::size_t k, std::uint64_t seed,
                  std::size_t max_iter = 100, double tol = 1e-4);

struct NmfResult {
  Eigen::MatrixXd W;  // rows x r
  Eigen::MatrixXd H;  // r x cols
  std::vector<double> objective_trace;  // ||V - WH||_F^2, initial value first
  std::size_t iterations = 0;
};

/// Lee-Seung multiplicative updates for the Frobenius objective.
/// Throws Error(kNegativeInput), Error(kRankTooLarge).
NmfResult nmf(const Eigen::MatrixXd& V, std::size_t rank = 2, std::uint64_t seed = 0,
              std::size_t max_iter = 200, double tol = 1e-4);

struct Subtopic {
  std::size_t cluster = 0;
  std::size_t doc_count = 0;
  std::vector<std::pair<std::string, double>> top_terms;
  NmfResult factors;
  std::vector<std::size_t> columns;  // vocabulary index of each H column
};

struct SubtopicSet {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::size_t vocabulary_size = 0;
  double inertia = 0.0;
  std::vector<std::size_t> assignments;
  std::vector<Subtopic> clusters;
};

/// Slices each cluster's rows and nonzero columns out of `matrix` and factors
/// them with rank min(rank, rows, cols).
std::vector<Subtopic> factor_clusters(const WeightedMatrix& matrix, const Clustering& clustering,
                                      std::uint64_t seed, std::size_t rank = 2);

/// Ranks each cluster's terms by the max over H rows after W columns are scaled
/// to unit L1 norm. Ties go to the lexicographically smaller term.
void extract_subtopics(std::vector<Subtopic>& clusters, const Vocabulary& vocab,
                       std::size_t top_m = 10);

struct SubtopicOptions {
  std::size_t min_df = 2;
  double max_df_ratio = 0.95;
  std::optional<std::size_t> k;  // choose_k when unset
  std::size_t rank = 2;
  std::size_t top_m = 10;
  std::size_t restarts = 10;  // k-means runs; the lowest inertia is kept
};

SubtopicSet run_subtopics(const Corpus& corpus, std::uint64_t seed,
                          const SubtopicOptions& options = {});

/// Token counts, ordered by count desc then term.
std::vector<std::pair<std::string, std::size_t>> word_cloud(const Corpus& corpus);

nlohmann::json to_json(const SubtopicSet& set);
nlohmann::json word_cloud_json(const std::vector<std::pair<std::string, std::size_t>>& cloud,
                               std::size_t limit = 200);

}  // namespace marsad::topics
