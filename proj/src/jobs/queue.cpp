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

#include "httplib.h"
#include "marsad/error.hpp"
#include "marsad/jobs.hpp"
#include "../common/http_util.hpp"

namespace marsad::jobs {

JobQueue::JobQueue(store::Store& store, QueueOptions options)
    : store_(store), options_(options) {
  if (options_.worker_limit == 0) throw Error(Errc::kInvalidArgument, "worker_limit must be >= 1");
  for (auto& job : store_.list_jobs()) {
    next_seq_ = std::max(next_seq_, job.seq + 1);
    if (job.state == JobState::kRunning) {
      job.state = JobState::kQueued;
      job.started_at.reset();
      store_.update_job(job);
      ++recovered_;
    }
    jobs_.emplace(job.job_id, std::move(job));
  }
}

JobQueue::~JobQueue() = default;

std::string JobQueue::submit(const SubmitRequest& request) {
  if (!store_.has_dataset(request.dataset_id))
    throw Error(Errc::kUnknownDataset, "unknown dataset " + request.dataset_id);

  AnalysisJob job;
  {
    std::lock_guard lock(mu_);
    for (const auto& [id, existing] : jobs_) {
      if (existing.dataset_id == request.dataset_id && existing.kind == request.kind &&
          (existing.state == JobState::kQueued || existing.state == JobState::kRunning)) {
        throw Error(Errc::kDuplicateJob, "a " + std::string(to_string(request.kind)) +
                                             " job is already pending for this dataset: " + id);
      }
    }
    job.job_id = store::new_id();
    job.dataset_id = request.dataset_id;
    job.kind = request.kind;
    job.priority = request.priority.value_or(options_.default_priority);
    job.state = JobState::kQueued;
    job.submitted_at = now_utc();
    job.webhook = request.webhook;
    job.seed = request.seed.value_or(options_.default_seed);
    job.seq = next_seq_++;
    store_.insert_job(job);
    jobs_.emplace(job.job_id, job);
  }
  store_.advance_dataset_status(job.dataset_id, DatasetStatus::kAnalyzing);
  cv_.notify_all();
  return job.job_id;
}

std::vector<const AnalysisJob*> JobQueue::queued_in_order_locked() const {
  std::vector<const AnalysisJob*> queued;
  for (const auto& [id, job] : jobs_)
    if (job.state == JobState::kQueued) queued.push_back(&job);
  std::sort(queued.begin(), queued.end(), [](const AnalysisJob* a, const AnalysisJob* b) {
    return std::tie(a->priority, a->submitted_at, a->seq) <
           std::tie(b->priority, b->submitted_at, b->seq);
  });
  return queued;
}

std::optional<AnalysisJob> JobQueue::next_runnable() {
  AnalysisJob claimed;
  {
    std::lock_guard lock(mu_);
    std::size_t running = 0;
    for (const auto& [id, job] : jobs_)
      if (job.state == JobState::kRunning) ++running;
    if (running >= options_.worker_limit) return std::nullopt;
    auto queued = queued_in_order_locked();
    if (queued.empty()) return std::nullopt;
    AnalysisJob& job = jobs_.at(queued.front()->job_id);
    AnalysisJob next = job;
    next.state = JobState::kRunning;
    next.started_at = std::max(now_utc(), next.submitted_at);
    store_.update_job(next);
    job = next;
    claimed = next;
  }
  emit(claimed, JobState::kQueued);
  return claimed;
}

void JobQueue::complete(const std::string& job_id, Outcome outcome) {
  AnalysisJob finished;
  {
    std::lock_guard lock(mu_);
    AnalysisJob& job = find_locked(job_id);
    if (job.state != JobState::kRunning)
      throw Error(Errc::kIllegalTransition, "job " + job_id + " is " +
                                                std::string(to_string(job.state)) + ", not running");
    AnalysisJob next = job;
    next.finished_at = std::max(now_utc(), next.started_at.value_or(next.submitted_at));
    if (auto* done = std::get_if<Done>(&outcome)) {
      next.state = JobState::kDone;
      AnalysisResult result;
      result.job_id = job.job_id;
      result.dataset_id = job.dataset_id;
      result.kind = job.kind;
      result.payload = std::move(done->payload);
      result.produced_at = *next.finished_at;
      store_.finish_job(next, &result);
    } else {
      next.state = JobState::kFailed;
      next.error = std::get<Failed>(outcome).error;
      store_.finish_job(next, nullptr);
    }
    job = next;
    finished = next;
  }
  if (finished.state == JobState::kDone)
    store_.advance_dataset_status(finished.dataset_id, DatasetStatus::kAnalyzed);
  cv_.notify_all();
  emit(finished, JobState::kRunning);
}

void JobQueue::cancel(const std::string& job_id) {
  AnalysisJob cancelled;
  {
    std::lock_guard lock(mu_);
    AnalysisJob& job = find_locked(job_id);
    if (job.state != JobState::kQueued)
      throw Error(Errc::kIllegalTransition, "job " + job_id + " is " +
                                                std::string(to_string(job.state)) + ", not queued");
    AnalysisJob next = job;
    next.state = JobState::kCancelled;
    next.finished_at = std::max(now_utc(), next.submitted_at);
    store_.update_job(next);
    job = next;
    cancelled = next;
  }
  emit(cancelled, JobState::kQueued);
}

AnalysisJob JobQueue::get(const std::string& job_id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw Error(Errc::kNotFound, "unknown job " + job_id);
  return it->second;
}

std::vector<AnalysisJob> JobQueue::list(const std::string& dataset_id) const {
  std::lock_guard lock(mu_);
  std::vector<AnalysisJob> out;
  for (const auto& [id, job] : jobs_)
    if (dataset_id.empty() || job.dataset_id == dataset_id) out.push_back(job);
  std::sort(out.begin(), out.end(),
            [](const AnalysisJob& a, const AnalysisJob& b) { return a.seq < b.seq; });
  return out;
}

std::size_t JobQueue::queue_position(const std::string& job_id) const {
  std::lock_guard lock(mu_);
  auto queued = queued_in_order_locked();
  for (std::size_t i = 0; i < queued.size(); ++i)
    if (queued[i]->job_id == job_id) return i + 1;
  return 0;
}

std::size_t JobQueue::running_count() const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(std::count_if(jobs_.begin(), jobs_.end(), [](const auto& kv) {
    return kv.second.state == JobState::kRunning;
  }));
}

void JobQueue::subscribe(JobListener listener) {
  std::lock_guard lock(mu_);
  listeners_.push_back(std::move(listener));
}

void JobQueue::wait_for_work(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] {
    std::size_t running = 0;
    bool queued = false;
    for (const auto& [id, job] : jobs_) {
      running += job.state == JobState::kRunning;
      queued = queued || job.state == JobState::kQueued;
    }
    return queued && running < options_.worker_limit;
  });
}

void JobQueue::notify_all() { cv_.notify_all(); }

void JobQueue::emit(const AnalysisJob& job, JobState previous) {
  std::vector<JobListener> listeners;
  {
    std::lock_guard lock(mu_);
    listeners = listeners_;
  }
  JobEvent event{job, previous};
  for (const auto& listener : listeners) listener(event);
}

AnalysisJob& JobQueue::find_locked(const std::string& job_id) {
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw Error(Errc::kNotFound, "unknown job " + job_id);
  return it->second;
}

nlohmann::json webhook_body(const AnalysisJob& job) {
  return {{"job_id", job.job_id},
          {"state", to_string(job.state)},
          {"dataset_id", job.dataset_id},
          {"kind", to_string(job.kind)}};
}

WebhookNotifier::WebhookNotifier() : thread_([this] { run(); }) {}

WebhookNotifier::~WebhookNotifier() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  thread_.join();
}

void WebhookNotifier::attach(JobQueue& queue) {
  queue.subscribe([this](const JobEvent& event) {
    if (is_terminal(event.job.state) && event.job.webhook)
      post(*event.job.webhook, webhook_body(event.job));
  });
}

void WebhookNotifier::post(const std::string& url, nlohmann::json body) {
  {
    std::lock_guard lock(mu_);
    pending_.emplace_back(url, std::move(body));
  }
  cv_.notify_all();
}

void WebhookNotifier::flush() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return pending_.empty() && in_flight_ == 0; });
}

void WebhookNotifier::run() {
  std::unique_lock lock(mu_);
  while (true) {
    cv_.wait(lock, [&] { return stop_ || !pending_.empty(); });
    if (pending_.empty() && stop_) return;
    auto [url, body] = std::move(pending_.front());
    pending_.pop_front();
    ++in_flight_;
    lock.unlock();
    // Delivery is best effort: one attempt, failures are dropped.
    auto parts = detail::split_url(url);
    if (parts && detail::reachable_scheme(*parts)) {
      httplib::Client client(parts->origin);
      client.set_connection_timeout(std::chrono::seconds(5));
      client.set_read_timeout(std::chrono::seconds(5));
      client.Post(parts->path, body.dump(), "application/json");
    }
    lock.lock();
    --in_flight_;
    cv_.notify_all();
  }
}

void run_job(JobQueue& queue, const AnalysisJob& job, const AnalysisFn& fn) {
  Outcome outcome;
  try {
    outcome = Done{fn(job)};
  } catch (const Error& e) {
    outcome = Failed{std::string(to_string(e.code())) + ": " + e.what()};
  } catch (const std::exception& e) {
    outcome = Failed{e.what()};
  }
  queue.complete(job.job_id, std::move(outcome));
}

WorkerPool::WorkerPool(JobQueue& queue, AnalysisFn fn, std::size_t threads)
    : queue_(queue), fn_(std::move(fn)) {
  for (std::size_t i = 0; i < std::max<std::size_t>(threads, 1); ++i)
    threads_.emplace_back([this] { loop(); });
}

WorkerPool::~WorkerPool() { stop(); }

void WorkerPool::stop() {
  stop_ = true;
  queue_.notify_all();
  for (auto& t : threads_)
    if (t.joinable()) t.join();
}

void WorkerPool::loop() {
  while (!stop_) {
    auto job = queue_.next_runnable();
    if (!job) {
      queue_.wait_for_work(std::chrono::milliseconds(200));
      continue;
    }
    run_job(queue_, *job, fn_);
  }
}

}  // namespace marsad::jobs
