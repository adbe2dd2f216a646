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

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "marsad/analysis.hpp"
#include "marsad/classify.hpp"
#include "marsad/config.hpp"
#include "marsad/connectors.hpp"
#include "marsad/ingest.hpp"
#include "marsad/jobs.hpp"
#include "marsad/store.hpp"

namespace marsad {

struct IngestOutcome {
  std::optional<std::string> dataset_id;  // unset when nothing was accepted
  ingest::ValidationReport report;
  std::optional<ingest::DatasetMetadata> metadata;
};

nlohmann::json to_json(const IngestOutcome& outcome);

struct FeedbackOutcome {
  int previous_version = 0;
  int version = 0;
  std::size_t annotations = 0;
  bool changed() const { return version != previous_version; }
};

/// Store, queue, classifiers and sources wired from one Config. The CLI and
/// the HTTP service both drive the engine through this type.
class Engine {
 public:
  explicit Engine(Config config);
  ~Engine();

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const Config& config() const { return config_; }
  store::Store& store() { return *store_; }
  jobs::JobQueue& queue() { return *queue_; }
  connectors::SourceRegistry& sources() { return *sources_; }
  classify::AdapterRegistry& adapters() { return adapters_; }

  IngestOutcome ingest(const std::string& name, std::string_view bytes, ingest::SourceFormat format,
                       const ingest::PostSchema& schema = ingest::PostSchema::defaults());
  IngestOutcome ingest_records(const std::string& name, std::span<const ingest::RawRecord> records,
                               const ingest::PostSchema& schema = ingest::PostSchema::defaults());

  /// Current lexicon: the latest stored version, else the built-in one (version 1).
  classify::Lexicon lexicon() const;
  AnalysisContext context() const;

  /// Job body used by workers.
  nlohmann::json analyze(const AnalysisJob& job);

  std::string submit(const jobs::SubmitRequest& request);
  /// Submits and runs queued work on the calling thread until the job is
  /// terminal. Returns the final job record.
  AnalysisJob run_sync(const jobs::SubmitRequest& request);

  FeedbackOutcome apply_feedback(const std::string& dataset_id);

  /// Throws Error(kNotFound) when the job has no stored result.
  std::string export_job(const std::string& job_id, ExportFormat format);

 private:
  Config config_;
  std::unique_ptr<store::Store> store_;
  std::unique_ptr<jobs::JobQueue> queue_;
  std::unique_ptr<connectors::SourceRegistry> sources_;
  classify::AdapterRegistry adapters_;
};

}  // namespace marsad
