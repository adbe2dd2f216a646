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

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "json.hpp"
#include "marsad/records.hpp"
#include "marsad/store.hpp"

namespace marsad::jobs {

struct JobEvent {
  AnalysisJob job;
  JobState previous;
};

using JobListener = std::function<void(const JobEvent&)>;

struct QueueOptions {
  std::size_t worker_limit = 1;
  int default_priority = 100;
  std::uint64_t default_seed = 42;
};

struct Done {
  nlohmann::json payload;
};
struct Failed {
  std::string error;
};
using Outcome = std::variant<Done, Failed>;

struct SubmitRequest {
  std::string dataset_id;
  AnalysisKind kind = AnalysisKind::kSentiment;
  std::optional<int> priority;
  std::optional<std::string> webhook;
  std::optional<std::uint64_t> seed;
};

/// Persistent priority queue with a bounded number of running jobs.
///
/// Jobs start in order of (priority, submission); lower priority values run
/// sooner. At most `worker_limit` jobs are running at any time. On
/// construction, jobs left in `running` by a previous process are reset to
/// `queued`.
class JobQueue {
 public:
  JobQueue(store::Store& store, QueueOptions options = {});
  ~JobQueue();

  JobQueue(const JobQueue&) = delete;
  JobQueue& operator=(const JobQueue&) = delete;

  /// Throws Error(kUnknownDataset) and Error(kDuplicateJob).
  std::string submit(const SubmitRequest& request);

  /// Atomically claims the next runnable job, or returns nothing when the
  /// queue is empty or the worker limit is reached.
  std::optional<AnalysisJob> next_runnable();

  /// Finishes a running job. For Done the result is stored before the state
  /// flips. Throws Error(kIllegalTransition) unless the job is running.
  void complete(const std::string& job_id, Outcome outcome);

  /// Throws Error(kIllegalTransition) unless the job is queued.
  void cancel(const std::string& job_id);

  /// Throws Error(kNotFound).
  AnalysisJob get(const std::string& job_id) const;
  std::vector<AnalysisJob> list(const std::string& dataset_id = {}) const;
  /// 1-based position among queued jobs in scheduling order; 0 if not queued.
  std::size_t queue_position(const std::string& job_id) const;
  std::size_t running_count() const;

  /// Number of jobs reset from running to queued at construction.
  std::size_t recovered() const { return recovered_; }

  void subscribe(JobListener listener);

  /// Blocks until a job may be runnable or the timeout elapses.
  void wait_for_work(std::chrono::milliseconds timeout);
  /// Wakes every waiter; used for shutdown.
  void notify_all();

  const QueueOptions& options() const { return options_; }

 private:
  void emit(const AnalysisJob& job, JobState previous);
  AnalysisJob& find_locked(const std::string& job_id);
  std::vector<const AnalysisJob*> queued_in_order_locked() const;

  store::Store& store_;
  QueueOptions options_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::string, AnalysisJob> jobs_;
  std::int64_t next_seq_ = 1;
  std::size_t recovered_ = 0;
  std::vector<JobListener> listeners_;
};

/// Delivers `{job_id, state, dataset_id, kind}` to each job's webhook on
/// terminal transitions, from a background thread.
class WebhookNotifier {
 public:
  WebhookNotifier();
  ~WebhookNotifier();

  WebhookNotifier(const WebhookNotifier&) = delete;
  WebhookNotifier& operator=(const WebhookNotifier&) = delete;

  /// Registers with the queue.
  void attach(JobQueue& queue);
  void post(const std::string& url, nlohmann::json body);
  /// Waits until everything queued so far has been attempted.
  void flush();

 private:
  void run();

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::pair<std::string, nlohmann::json>> pending_;
  std::size_t in_flight_ = 0;
  bool stop_ = false;
  std::thread thread_;
};

nlohmann::json webhook_body(const AnalysisJob& job);

using AnalysisFn = std::function<nlohmann::json(const AnalysisJob&)>;

/// Background loops that run claimed jobs through `fn`. Exceptions thrown by
/// `fn` mark the job failed with the exception message.
class WorkerPool {
 public:
  WorkerPool(JobQueue& queue, AnalysisFn fn, std::size_t threads = 1);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  void stop();

 private:
  void loop();

  JobQueue& queue_;
  AnalysisFn fn_;
  std::atomic<bool> stop_{false};
  std::vector<std::thread> threads_;
};

/// Runs one claimed job to completion on the calling thread.
void run_job(JobQueue& queue, const AnalysisJob& job, const AnalysisFn& fn);

}  // namespace marsad::jobs
