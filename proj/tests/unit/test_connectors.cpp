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

#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "marsad/connectors.hpp"
#include "marsad/error.hpp"

using namespace marsad;
using namespace marsad::connectors;

namespace {

Errc code_of(const std::function<void()>& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  FAIL("expected an error");
  return Errc::kInternal;
}

struct FeedServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::string last_query, last_auth;

  FeedServer() {
    server.Get("/search", [this](const httplib::Request& req, httplib::Response& res) {
      last_query = req.get_param_value("q");
      last_auth = req.get_header_value("Authorization");
      nlohmann::json items = nlohmann::json::array();
      items.push_back({{"post_id", "x1"}, {"body", "match day in doha"}, {"created", "2024-03-01T10:00:00Z"},
                       {"user", {{"handle", "fan1"}}}, {"likes", 3}});
      items.push_back({{"post_id", "x2"}, {"body", "doha skyline"}, {"created", "2024-03-02T10:00:00Z"},
                       {"user", {{"handle", "fan2"}}}});
      items.push_back({{"post_id", "x3"}, {"body", ""}, {"created", "2024-03-03T10:00:00Z"}});
      res.set_content(items.dump(), "application/json");
    });
    server.Get("/busy", [](const httplib::Request&, httplib::Response& res) { res.status = 429; });
    server.Get("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FeedServer() {
    server.stop();
    thread.join();
  }
  GenericHttpConfig config(const std::string& path) const {
    GenericHttpConfig c;
    c.url_template = "http://127.0.0.1:" + std::to_string(port) + path;
    c.field_map = {{"id", "post_id"}, {"text", "body"}, {"timestamp", "created"}, {"author", "user.handle"}};
    c.timeout = std::chrono::milliseconds(2000);
    return c;
  }
};

}  // namespace

TEST_CASE("built-in sources and descriptor self-check") {
  auto reg = builtin_sources();
  auto list = reg->list();
  REQUIRE(list.size() == 3);
  std::map<std::string, Mode> modes;
  for (const auto& d : list) {
    modes[d.source_id] = d.mode;
    CHECK(check_descriptor(d).empty());
    CHECK(to_json(d)["source_id"] == d.source_id);
  }
  CHECK(modes.at("mock_local") == Mode::kFree);
  CHECK(modes.at("generic_http") == Mode::kFree);
  CHECK(modes.at("credentialed_stub") == Mode::kCredentialed);

  reg->add(make_mock_source("{\"id\":\"1\",\"text\":\"custom\",\"timestamp\":\"2024-01-01\"}\n"));
  CHECK(reg->list().size() == 3);  // same id replaces mock_local
  SourceDescriptor bad{"x", "X", Mode::kFree, {}, {"token"}};
  CHECK(!check_descriptor(bad).empty());
}

TEST_CASE("mock_local search") {
  auto reg = builtin_sources();
  SearchRequest req;
  req.query = "doha";
  req.limit = 5;
  auto records = reg->search("mock_local", req);
  REQUIRE(records.size() == 5);
  for (const auto& r : records) {
    auto text = r.fields.at("text");
    std::transform(text.begin(), text.end(), text.begin(), ::tolower);
    CHECK(text.find("doha") != std::string::npos);
  }
  auto parsed = ingest::validate_records(records, ingest::PostSchema::defaults());
  CHECK(parsed.report.accepted == 5);

  req.since = parse_iso8601("2024-03-05T00:00:00Z");
  for (const auto& r : reg->search("mock_local", req)) CHECK(*parse_iso8601(r.fields.at("timestamp")) >= *req.since);

  CHECK(code_of([&] { reg->search("nope", req); }) == Errc::kUnknownSource);
  req.limit = 0;
  CHECK(code_of([&] { reg->search("mock_local", req); }) == Errc::kInvalidArgument);
}

TEST_CASE("credential rules") {
  auto reg = builtin_sources();
  SearchRequest req;
  req.query = "doha";
  CHECK(code_of([&] { reg->search("credentialed_stub", req); }) == Errc::kCredentialsRequired);
  req.credentials = {{"token", "tok-123"}};
  CHECK(!reg->search("credentialed_stub", req).empty());
  CHECK(code_of([&] { reg->search("mock_local", req); }) == Errc::kCredentialsRejected);
  CHECK(scrub("bad token tok-123 here tok-123", req.credentials) == "bad token *** here ***");
}

TEST_CASE("generic_http against a loopback server") {
  FeedServer feed;
  auto reg = builtin_sources(feed.config("/search?q={query}&n={limit}"));
  SearchRequest req;
  req.query = "doha & more";
  req.limit = 10;
  auto records = reg->search("generic_http", req);
  CHECK(feed.last_query == "doha & more");
  CHECK(feed.last_auth.empty());
  REQUIRE(records.size() == 3);
  auto parsed = ingest::validate_records(records, ingest::PostSchema::defaults());
  CHECK(parsed.report.accepted == 2);
  REQUIRE(parsed.report.rejected.size() == 1);
  CHECK(parsed.report.rejected[0].code == ingest::RowError::kEmptyText);
  CHECK(parsed.posts[0].id == "x1");
  CHECK(parsed.posts[0].author == "fan1");
  CHECK(parsed.posts[0].likes == 3);

  req.limit = 1;
  CHECK(reg->search("generic_http", req).size() == 1);
}

TEST_CASE("generic_http errors") {
  FeedServer feed;
  SearchRequest req;
  req.query = "q";
  CHECK(code_of([&] { builtin_sources()->search("generic_http", req); }) == Errc::kInvalidArgument);
  CHECK(code_of([&] { builtin_sources(feed.config("/busy"))->search("generic_http", req); }) == Errc::kRateLimited);
  CHECK(code_of([&] { builtin_sources(feed.config("/broken"))->search("generic_http", req); }) ==
        Errc::kSourceUnreachable);
  GenericHttpConfig dead;
  dead.url_template = "http://127.0.0.1:1/search";
  dead.timeout = std::chrono::milliseconds(500);
  CHECK(code_of([&] { builtin_sources(dead)->search("generic_http", req); }) == Errc::kSourceUnreachable);
  dead.url_template = "https://127.0.0.1:1/search";
  CHECK(code_of([&] { builtin_sources(dead)->search("generic_http", req); }) == Errc::kSourceUnreachable);
}

TEST_CASE("credentialed stub forwards the token and scrubs it from errors") {
  FeedServer feed;
  auto reg = builtin_sources({}, feed.config("/search?q={query}"));
  SearchRequest req;
  req.query = "doha";
  req.credentials = {{"token", "very-secret-value"}};
  auto records = reg->search("credentialed_stub", req);
  CHECK(records.size() == 3);
  CHECK(feed.last_auth == "Bearer very-secret-value");

  GenericHttpConfig leaky;
  leaky.url_template = "http://127.0.0.1:1/search?key=very-secret-value";
  leaky.timeout = std::chrono::milliseconds(500);
  std::string message;
  CHECK(code_of([&] { builtin_sources({}, leaky)->search("credentialed_stub", req); }, &message) ==
        Errc::kSourceUnreachable);
  CHECK(message.find("very-secret-value") == std::string::npos);
}

TEST_CASE("per-source concurrency limit") {
  class SlowSource : public Source {
   public:
    const SourceDescriptor& descriptor() const override { return d_; }
    std::vector<ingest::RawRecord> fetch(const SearchRequest&) override {
      int now = ++active;
      int prev = peak.load();
      while (now > prev && !peak.compare_exchange_weak(prev, now)) {}
      std::this_thread::sleep_for(std::chrono::milliseconds(30));
      --active;
      return {};
    }
    std::atomic<int> active{0}, peak{0};

   private:
    SourceDescriptor d_{"slow", "Slow", Mode::kFree, {}, {}};
  };
  SourceRegistry reg(2);
  auto slow = std::make_shared<SlowSource>();
  reg.add(slow);
  std::vector<std::thread> threads;
  for (int i = 0; i < 6; ++i) threads.emplace_back([&] { reg.search("slow", SearchRequest{}); });
  for (auto& t : threads) t.join();
  CHECK(slow->peak <= 2);
  CHECK(slow->peak >= 1);
}
