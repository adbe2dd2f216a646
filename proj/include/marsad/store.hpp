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

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "marsad/ingest.hpp"
#include "marsad/records.hpp"

namespace marsad::store {

/// 128-bit random id, lowercase hex (32 characters). Thread-safe.
std::string new_id();

struct LexiconVersion {
  int version = 0;
  Instant created_at{};
  nlohmann::json content;
};

/// Persistence for datasets, jobs, results, annotations and lexicon versions.
///
/// Posts are schema-less documents (one JSONL log per dataset); everything
/// else lives in relational tables. All methods are safe to call from
/// multiple threads.
class Store {
 public:
  virtual ~Store() = default;

  virtual std::string put_dataset(const std::string& name, std::span<const ingest::Post> posts,
                                  const ingest::DatasetMetadata& metadata) = 0;
  /// Throws Error(kNotFound).
  virtual DatasetRecord get_dataset_record(const std::string& dataset_id) const = 0;
  /// Throws Error(kNotFound).
  virtual std::vector<ingest::Post> get_posts(const std::string& dataset_id) const = 0;
  virtual bool has_dataset(const std::string& dataset_id) const = 0;
  /// Datasets in creation order, starting after the `after` cursor (a dataset id).
  virtual std::vector<DatasetRecord> list_datasets(std::size_t limit,
                                                   const std::string& after = {}) const = 0;
  /// Moves status forward (stored → analyzing → analyzed). Backward moves are ignored.
  virtual void advance_dataset_status(const std::string& dataset_id, DatasetStatus status) = 0;

  /// Throws Error(kForeignKey) when the dataset does not exist.
  virtual void put_result(const AnalysisResult& result) = 0;
  /// Results in insertion order. Throws Error(kNotFound) for an unknown dataset.
  virtual std::vector<AnalysisResult> get_results(const std::string& dataset_id,
                                                  std::optional<AnalysisKind> kind = {}) const = 0;
  virtual std::optional<AnalysisResult> get_result(const std::string& job_id) const = 0;

  /// Throws Error(kNotFound) for the dataset, Error(kUnknownPost) for the post,
  /// Error(kInvalidLabel) when new_label is outside the kind's label set.
  virtual std::string record_annotation(const Annotation& annotation) = 0;
  virtual std::vector<Annotation> list_annotations(const std::string& dataset_id) const = 0;

  virtual void insert_job(const AnalysisJob& job) = 0;
  virtual void update_job(const AnalysisJob& job) = 0;
  /// Writes the result and the job's terminal state in one transaction.
  virtual void finish_job(const AnalysisJob& job, const AnalysisResult* result) = 0;
  virtual std::optional<AnalysisJob> get_job(const std::string& job_id) const = 0;
  virtual std::vector<AnalysisJob> list_jobs() const = 0;

  virtual void put_lexicon(const LexiconVersion& lexicon) = 0;
  virtual std::optional<LexiconVersion> get_lexicon(int version) const = 0;
  virtual std::optional<LexiconVersion> latest_lexicon() const = 0;
};

/// Opens (creating if needed) a store rooted at `root`:
///   <root>/marsad.db                    relational tables (SQLite)
///   <root>/<dataset_id>/posts.jsonl     post documents
std::unique_ptr<Store> open_local_store(const std::filesystem::path& root);

}  // namespace marsad::store
