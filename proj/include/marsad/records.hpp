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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "marsad/ingest.hpp"
#include "marsad/time.hpp"

namespace marsad {

enum class AnalysisKind {
  kSubtopics,
  kWordcloud,
  kSentiment,
  kPropaganda,
  kTrends,
  kSpatial,
  kNetwork,
  kPostAnalysis,
};

std::string_view to_string(AnalysisKind kind);
std::optional<AnalysisKind> parse_analysis_kind(std::string_view name);
const std::vector<AnalysisKind>& all_analysis_kinds();

/// Labels a user may assign to a post for `kind`. Empty for kinds that do
/// not label individual posts.
const std::vector<std::string>& label_set(AnalysisKind kind);

enum class DatasetStatus { kStored, kAnalyzing, kAnalyzed };

std::string_view to_string(DatasetStatus status);
std::optional<DatasetStatus> parse_dataset_status(std::string_view name);

struct DatasetRecord {
  std::string dataset_id;
  std::string name;
  Instant created_at{};
  ingest::DatasetMetadata metadata;
  DatasetStatus status = DatasetStatus::kStored;
};

struct AnalysisResult {
  std::string job_id;
  std::string dataset_id;
  AnalysisKind kind = AnalysisKind::kSentiment;
  nlohmann::json payload;
  Instant produced_at{};
};

struct Annotation {
  std::string annotation_id;
  std::string dataset_id;
  std::string post_id;
  AnalysisKind kind = AnalysisKind::kSentiment;
  std::string old_label;
  std::string new_label;
  std::string annotator;
  Instant created_at{};
};

enum class JobState { kQueued, kRunning, kDone, kFailed, kCancelled };

std::string_view to_string(JobState state);
std::optional<JobState> parse_job_state(std::string_view name);
bool is_terminal(JobState state);

struct AnalysisJob {
  std::string job_id;
  std::string dataset_id;
  AnalysisKind kind = AnalysisKind::kSentiment;
  int priority = 100;
  JobState state = JobState::kQueued;
  Instant submitted_at{};
  std::optional<Instant> started_at;
  std::optional<Instant> finished_at;
  std::optional<std::string> error;
  std::optional<std::string> webhook;
  std::uint64_t seed = 42;
  // Submission sequence; breaks ties between equal (priority, submitted_at).
  std::int64_t seq = 0;
};

nlohmann::json to_json(const DatasetRecord& record);
nlohmann::json to_json(const AnalysisResult& result);
nlohmann::json to_json(const Annotation& annotation);
nlohmann::json to_json(const AnalysisJob& job);

}  // namespace marsad
