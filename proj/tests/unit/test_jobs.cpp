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

#include <atomic>
#include <thread>

#include "doctest.h"
#include "helpers.hpp"
#include "httplib.h"
#include "marsad/error.hpp"
#include "marsad/jobs.hpp"

using namespace marsad;
using marsad::testing::post;
using marsad::testing::TempDir;

namespace {

struct Fixture {
  TempDir dir;
  std::unique_ptr<store::Store> store = store::open_local_store(dir.path());
  std::string dataset;

  Fixture() {
    std::vector<ingest::Post> posts = {post("1", "hello world")};
    dataset = store->put_dataset("d", posts, ingest::infer_metadata(posts));
  }
};

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::kInternal;
}

}  // namespace

TEST_CASE("submit") {
  Fixture f;
  jobs::JobQueue q(*f.store);
  auto id = q.submit({f.dataset, AnalysisKind::kSentiment});
  CHECK(q.get(id).state == JobState::kQueued);
  CHECK(code_of([&] { q.submit({f.dataset, AnalysisKind::kSentiment}); }) == Errc::kDuplicateJob);
  CHECK(code_of([&] { q.submit({store::new_id(), AnalysisKind::kSentiment}); }) == Errc::kUnknownDataset);
  q.submit({f.dataset, AnalysisKind::kTrends});
  q.submit({f.dataset, AnalysisKind::kNetwork});
  CHECK(q.list(f.dataset).size() == 3);
  CHECK(q.queue_position(id) == 1);
  CHECK(f.store->get_dataset_record(f.dataset).status == DatasetStatus::kAnalyzing);
}

TEST_CASE("next_runnable: FIFO and worker limit") {
  Fixture f;
  jobs::JobQueue q(*f.store);
  CHECK(!q.next_runnable());
  auto a = q.submit({f.dataset, AnalysisKind::kSentiment});
  auto b = q.submit({f.dataset, AnalysisKind::kTrends});
  auto first = q.next_runnable();
  REQUIRE(first);
  CHECK(first->job_id == a);
  CHECK(!q.next_runnable());  // A running, B stays queued
  CHECK(q.get(b).state == JobState::kQueued);
  q.complete(a, jobs::Done{nlohmann::json::object()});
  CHECK(q.next_runnable()->job_id == b);
}

TEST_CASE("lower priority value runs first") {
  Fixture f;
  jobs::JobQueue q(*f.store);
  auto slow = q.submit({f.dataset, AnalysisKind::kSentiment, 200});
  auto fast = q.submit({f.dataset, AnalysisKind::kTrends, 10});
  CHECK(q.queue_position(fast) == 1);
  CHECK(q.queue_position(slow) == 2);
  CHECK(q.next_runnable()->job_id == fast);
}

TEST_CASE("complete") {
  Fixture f;
  jobs::JobQueue q(*f.store);
  auto a = q.submit({f.dataset, AnalysisKind::kSentiment});
  CHECK(code_of([&] { q.complete(a, jobs::Done{}); }) == Errc::kIllegalTransition);
  q.next_runnable();
  q.complete(a, jobs::Done{nlohmann::json{{"ok", true}}});
  auto job = q.get(a);
  CHECK(job.state == JobState::kDone);
  CHECK(f.store->get_result(a)->payload["ok"] == true);
  CHECK(job.submitted_at <= *job.started_at);
  CHECK(*job.started_at <= *job.finished_at);
  CHECK(f.store->get_dataset_record(f.dataset).status == DatasetStatus::kAnalyzed);

  auto b = q.submit({f.dataset, AnalysisKind::kTrends});
  q.next_runnable();
  q.complete(b, jobs::Failed{"oom"});
  CHECK(q.get(b).state == JobState::kFailed);
  CHECK(q.get(b).error == "oom");
  CHECK(!f.store->get_result(b));
  CHECK(f.store->get_job(b)->error == "oom");
}

TEST_CASE("cancel") {
  Fixture f;
  jobs::JobQueue q(*f.store);
  auto a = q.submit({f.dataset, AnalysisKind::kSentiment});
  auto b = q.submit({f.dataset, AnalysisKind::kTrends});
  auto c = q.submit({f.dataset, AnalysisKind::kNetwork});
  q.cancel(b);
  CHECK(q.get(b).state == JobState::kCancelled);
  q.next_runnable();
  CHECK(code_of([&] { q.cancel(a); }) == Errc::kIllegalTransition);
  q.complete(a, jobs::Done{});
  CHECK(q.next_runnable()->job_id == c);
  CHECK(code_of([&] { q.get(store::new_id()); }) == Errc::kNotFound);
}

TEST_CASE("restart requeues running jobs once") {
  Fixture f;
  std::string a;
  {
    jobs::JobQueue q(*f.store);
    a = q.submit({f.dataset, AnalysisKind::kSentiment});
    q.next_runnable();
  }
  jobs::JobQueue q2(*f.store);
  CHECK(q2.recovered() == 1);
  CHECK(q2.get(a).state == JobState::kQueued);
  CHECK(!q2.get(a).started_at);
  jobs::JobQueue q3(*f.store);
  CHECK(q3.recovered() == 0);
}

TEST_CASE("worker pool keeps execution serial") {
  Fixture f;
  jobs::JobQueue q(*f.store, {1});
  std::atomic<int> running{0}, max_running{0};
  std::mutex mu;
  std::vector<std::string> order;
  std::vector<std::string> ids;
  for (auto kind : all_analysis_kinds()) ids.push_back(q.submit({f.dataset, kind}));
  {
    jobs::WorkerPool pool(q, [&](const AnalysisJob& job) {
      int now = ++running;
      int prev = max_running.load();
      while (now > prev && !max_running.compare_exchange_weak(prev, now)) {}
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      {
        std::lock_guard lock(mu);
        order.push_back(job.job_id);
      }
      --running;
      if (job.kind == AnalysisKind::kNetwork) throw Error(Errc::kEmptyGraph, "no edges");
      return nlohmann::json::object();
    }, 3);
    for (int i = 0; i < 400 && order.size() < ids.size(); ++i)
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  CHECK(max_running == 1);
  CHECK(order == ids);
  for (const auto& id : ids) {
    auto job = q.get(id);
    if (job.kind == AnalysisKind::kNetwork) {
      CHECK(job.state == JobState::kFailed);
      CHECK(job.error->rfind("EMPTY_GRAPH", 0) == 0);
    } else {
      CHECK(job.state == JobState::kDone);
    }
  }
}

TEST_CASE("webhook receives terminal transitions") {
  Fixture f;
  httplib::Server hook;
  std::mutex mu;
  std::vector<nlohmann::json> bodies;
  hook.Post("/hook", [&](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mu);
    bodies.push_back(nlohmann::json::parse(req.body));
    res.status = 204;
  });
  int port = hook.bind_to_any_port("127.0.0.1");
  std::thread server([&] { hook.listen_after_bind(); });
  hook.wait_until_ready();
  {
    jobs::JobQueue q(*f.store);
    jobs::WebhookNotifier notifier;
    notifier.attach(q);
    auto url = "http://127.0.0.1:" + std::to_string(port) + "/hook";
    auto a = q.submit({f.dataset, AnalysisKind::kSentiment, std::nullopt, url});
    q.next_runnable();
    q.complete(a, jobs::Done{});
    notifier.flush();
    std::lock_guard lock(mu);
    REQUIRE(bodies.size() == 1);
    CHECK(bodies[0] == nlohmann::json{{"job_id", a}, {"state", "done"}, {"dataset_id", f.dataset}, {"kind", "sentiment"}});
  }
  hook.stop();
  server.join();
}

TEST_CASE("https webhooks are skipped without TLS support") {
  Fixture f;
  jobs::JobQueue q(*f.store);
  jobs::WebhookNotifier notifier;
  notifier.attach(q);
  auto a = q.submit({f.dataset, AnalysisKind::kSentiment, std::nullopt, "https://127.0.0.1:1/hook"});
  q.next_runnable();
  q.complete(a, jobs::Done{});
  notifier.flush();
  CHECK(q.get(a).state == JobState::kDone);
}
