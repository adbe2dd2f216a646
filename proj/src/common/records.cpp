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

#include "marsad/records.hpp"

#include <array>
#include <utility>

namespace marsad {
namespace {

constexpr std::array<std::pair<AnalysisKind, std::string_view>, 8> kKindNames{{
    {AnalysisKind::kSubtopics, "subtopics"},
    {AnalysisKind::kWordcloud, "wordcloud"},
    {AnalysisKind::kSentiment, "sentiment"},
    {AnalysisKind::kPropaganda, "propaganda"},
    {AnalysisKind::kTrends, "trends"},
    {AnalysisKind::kSpatial, "spatial"},
    {AnalysisKind::kNetwork, "network"},
    {AnalysisKind::kPostAnalysis, "post_analysis"},
}};

constexpr std::array<std::pair<JobState, std::string_view>, 5> kStateNames{{
    {JobState::kQueued, "queued"},
    {JobState::kRunning, "running"},
    {JobState::kDone, "done"},
    {JobState::kFailed, "failed"},
    {JobState::kCancelled, "cancelled"},
}};

constexpr std::array<std::pair<DatasetStatus, std::string_view>, 3> kStatusNames{{
    {DatasetStatus::kStored, "stored"},
    {DatasetStatus::kAnalyzing, "analyzing"},
    {DatasetStatus::kAnalyzed, "analyzed"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E value) {
  for (const auto& [v, name] : table)
    if (v == value) return name;
  return "unknown";
}

template <typename E, std::size_t N>
std::optional<E> value_of(const std::array<std::pair<E, std::string_view>, N>& table,
                          std::string_view name) {
  for (const auto& [v, n] : table)
    if (n == name) return v;
  return std::nullopt;
}

nlohmann::json optional_time(const std::optional<Instant>& t) {
  return t ? nlohmann::json(format_iso8601(*t)) : nlohmann::json(nullptr);
}

}  // namespace

std::string_view to_string(AnalysisKind kind) { return name_of(kKindNames, kind); }

std::optional<AnalysisKind> parse_analysis_kind(std::string_view name) {
  return value_of(kKindNames, name);
}

const std::vector<AnalysisKind>& all_analysis_kinds() {
  static const std::vector<AnalysisKind> kinds = [] {
    std::vector<AnalysisKind> v;
    for (const auto& [k, _] : kKindNames) v.push_back(k);
    return v;
  }();
  return kinds;
}

const std::vector<std::string>& label_set(AnalysisKind kind) {
  static const std::vector<std::string> sentiment{"positive", "negative", "neutral"};
  static const std::vector<std::string> propaganda{"propaganda", "none"};
  static const std::vector<std::string> empty;
  switch (kind) {
    case AnalysisKind::kSentiment: return sentiment;
    case AnalysisKind::kPropaganda: return propaganda;
    default: return empty;
  }
}

std::string_view to_string(DatasetStatus status) { return name_of(kStatusNames, status); }

std::optional<DatasetStatus> parse_dataset_status(std::string_view name) {
  return value_of(kStatusNames, name);
}

std::string_view to_string(JobState state) { return name_of(kStateNames, state); }

std::optional<JobState> parse_job_state(std::string_view name) {
  return value_of(kStateNames, name);
}

bool is_terminal(JobState state) {
  return state == JobState::kDone || state == JobState::kFailed ||
         state == JobState::kCancelled;
}

nlohmann::json to_json(const DatasetRecord& record) {
  return {
      {"dataset_id", record.dataset_id},
      {"name", record.name},
      {"created_at", format_iso8601(record.created_at)},
      {"status", to_string(record.status)},
      {"metadata", ingest::to_json(record.metadata)},
  };
}

nlohmann::json to_json(const AnalysisResult& result) {
  return {
      {"job_id", result.job_id},
      {"dataset_id", result.dataset_id},
      {"kind", to_string(result.kind)},
      {"produced_at", format_iso8601(result.produced_at)},
      {"payload", result.payload},
  };
}

nlohmann::json to_json(const Annotation& a) {
  return {
      {"annotation_id", a.annotation_id},
      {"dataset_id", a.dataset_id},
      {"post_id", a.post_id},
      {"kind", to_string(a.kind)},
      {"old_label", a.old_label},
      {"new_label", a.new_label},
      {"annotator", a.annotator},
      {"created_at", format_iso8601(a.created_at)},
  };
}

nlohmann::json to_json(const AnalysisJob& job) {
  return {
      {"job_id", job.job_id},
      {"dataset_id", job.dataset_id},
      {"kind", to_string(job.kind)},
      {"priority", job.priority},
      {"state", to_string(job.state)},
      {"submitted_at", format_iso8601(job.submitted_at)},
      {"started_at", optional_time(job.started_at)},
      {"finished_at", optional_time(job.finished_at)},
      {"error", job.error ? nlohmann::json(*job.error) : nlohmann::json(nullptr)},
      {"seed", job.seed},
  };
}

}  // namespace marsad
