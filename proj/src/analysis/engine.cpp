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

#include "marsad/engine.hpp"

#include <spdlog/spdlog.h>

#include "marsad/error.hpp"
#include "marsad/time.hpp"

namespace marsad {

nlohmann::json to_json(const IngestOutcome& outcome) {
  nlohmann::json j = {{"dataset_id", outcome.dataset_id ? nlohmann::json(*outcome.dataset_id) : nlohmann::json()},
                      {"validation_report", ingest::to_json(outcome.report)}};
  if (outcome.metadata) j["metadata"] = ingest::to_json(*outcome.metadata);
  return j;
}

Engine::Engine(Config config) : config_(std::move(config)) {
  store_ = store::open_local_store(config_.data_dir);
  queue_ = std::make_unique<jobs::JobQueue>(*store_, config_.queue);
  if (queue_->recovered() > 0)
    spdlog::warn("requeued {} job(s) left running by a previous process", queue_->recovered());
  sources_ = connectors::builtin_sources(config_.generic_http, config_.credentialed_stub);
  if (config_.sentiment_adapter)
    adapters_.add(classify::make_http_adapter(*config_.sentiment_adapter), true);
  if (config_.propaganda_adapter)
    adapters_.add(classify::make_http_adapter(*config_.propaganda_adapter), true);
}

Engine::~Engine() = default;

IngestOutcome Engine::ingest(const std::string& name, std::string_view bytes,
                             ingest::SourceFormat format, const ingest::PostSchema& schema) {
  auto records = ingest::decode_records(bytes, format);
  return ingest_records(name, records, schema);
}

IngestOutcome Engine::ingest_records(const std::string& name,
                                     std::span<const ingest::RawRecord> records,
                                     const ingest::PostSchema& schema) {
  auto parsed = ingest::validate_records(records, schema);
  IngestOutcome out;
  out.report = parsed.report;
  if (parsed.posts.empty()) return out;
  auto metadata = ingest::infer_metadata(parsed.posts, schema);
  out.dataset_id = store_->put_dataset(name, parsed.posts, metadata);
  out.metadata = std::move(metadata);
  spdlog::info("stored dataset {} ({} accepted, {} rejected)", *out.dataset_id,
               out.report.accepted, out.report.rejected.size());
  return out;
}

classify::Lexicon Engine::lexicon() const {
  if (auto latest = store_->latest_lexicon()) {
    auto lex = classify::lexicon_from_json(latest->content);
    lex.version = latest->version;
    return lex;
  }
  classify::Lexicon lex = classify::builtin_lexicon();
  lex.version = 1;
  return lex;
}

AnalysisContext Engine::context() const {
  AnalysisContext ctx;
  ctx.config = config_.analysis;
  ctx.lexicon = lexicon();
  if (config_.sentiment_adapter) ctx.sentiment = adapters_.get(config_.sentiment_adapter->id);
  if (config_.propaganda_adapter) ctx.propaganda = adapters_.get(config_.propaganda_adapter->id);
  return ctx;
}

nlohmann::json Engine::analyze(const AnalysisJob& job) {
  auto posts = store_->get_posts(job.dataset_id);
  return run_analysis(job.kind, posts, context(), job.seed);
}

std::string Engine::submit(const jobs::SubmitRequest& request) { return queue_->submit(request); }

AnalysisJob Engine::run_sync(const jobs::SubmitRequest& request) {
  std::string id = queue_->submit(request);
  auto fn = [this](const AnalysisJob& job) { return analyze(job); };
  while (!is_terminal(queue_->get(id).state)) {
    auto job = queue_->next_runnable();
    if (!job) {
      // Another process holds the running slot; wait for it.
      queue_->wait_for_work(std::chrono::milliseconds(100));
      continue;
    }
    jobs::run_job(*queue_, *job, fn);
  }
  return queue_->get(id);
}

FeedbackOutcome Engine::apply_feedback(const std::string& dataset_id) {
  auto annotations = store_->list_annotations(dataset_id);
  auto posts = store_->get_posts(dataset_id);
  classify::Lexicon current = lexicon();
  FeedbackOutcome out;
  out.annotations = annotations.size();
  out.previous_version = current.version;
  classify::Lexicon next =
      classify::apply_feedback(annotations, posts, current, config_.analysis.feedback_min_votes);
  out.version = next.version;
  if (next.version != current.version) {
    if (!store_->latest_lexicon())
      store_->put_lexicon({current.version, now_utc(), classify::to_json(current)});
    store_->put_lexicon({next.version, now_utc(), classify::to_json(next)});
    spdlog::info("lexicon updated to version {} from {} annotation(s)", next.version,
                 annotations.size());
  }
  return out;
}

std::string Engine::export_job(const std::string& job_id, ExportFormat format) {
  auto result = store_->get_result(job_id);
  if (!result) throw Error(Errc::kNotFound, "no result for job " + job_id);
  return export_payload(result->kind, result->payload, format);
}

}  // namespace marsad
