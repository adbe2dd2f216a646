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

#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "marsad/analysis.hpp"
#include "marsad/engine.hpp"
#include "marsad/error.hpp"

using namespace marsad;
using marsad::testing::read_text;
using marsad::testing::TempDir;

namespace {

std::vector<ingest::Post> fixture_posts() {
  auto parsed = ingest::parse_dataset(read_text(MARSAD_FIXTURE), ingest::SourceFormat::kJsonl);
  REQUIRE(parsed.report.rejected.empty());
  return parsed.posts;
}

Config temp_config(const TempDir& dir) {
  Config c;
  c.data_dir = dir.path() / "data";
  return c;
}

}  // namespace

TEST_CASE("every kind produces a seeded, reproducible payload") {
  auto posts = fixture_posts();
  REQUIRE(posts.size() == 200);
  AnalysisContext ctx;
  for (auto kind : all_analysis_kinds()) {
    CAPTURE(to_string(kind));
    auto a = run_analysis(kind, posts, ctx, 42);
    auto b = run_analysis(kind, posts, ctx, 42);
    CHECK(a == b);
    CHECK(a["kind"] == to_string(kind));
    CHECK(a["seed"] == 42);
    CHECK(a["post_count"] == 200);
    for (auto fmt : {ExportFormat::kCsv, ExportFormat::kJson})
      CHECK(export_payload(kind, a, fmt) == export_payload(kind, b, fmt));
    auto csv = export_payload(kind, a, ExportFormat::kCsv);
    CHECK(csv.rfind(csv_header(kind) + "\r\n", 0) == 0);
  }
}

TEST_CASE("fixture payload contents") {
  auto posts = fixture_posts();
  AnalysisContext ctx;
  auto trends = run_analysis(AnalysisKind::kTrends, posts, ctx, 1);
  CHECK(trends["spike_detection"] == "ok");
  REQUIRE(trends["spikes"].size() >= 1);
  bool burst_found = false;
  for (const auto& s : trends["spikes"]) burst_found |= s["start"] == "2024-03-21T00:00:00Z";
  CHECK(burst_found);

  auto spatial = run_analysis(AnalysisKind::kSpatial, posts, ctx, 1);
  std::set<std::string> regions;
  for (const auto& r : spatial["regions"]) regions.insert(r["region"]);
  // Geotags jittered around Cairo may resolve to neighbouring Giza.
  CHECK(regions.count("Cairo") + regions.count("Doha") + regions.count("Dubai") == 3);
  for (const auto& r : regions) CHECK(std::set<std::string>{"Cairo", "Doha", "Dubai", "Giza"}.count(r) == 1);

  auto network = run_analysis(AnalysisKind::kNetwork, posts, ctx, 1);
  CHECK(network["edges"].size() > 0);
  std::set<std::string> top3;
  for (std::size_t i = 0; i < 3; ++i) top3.insert(network["top_influencers"][i]);
  CHECK(top3.count("user01") + top3.count("user08") + top3.count("user15") >= 2);

  auto sentiment = run_analysis(AnalysisKind::kSentiment, posts, ctx, 1);
  CHECK(sentiment["items"].size() == 200);
  CHECK(sentiment["lexicon_version"] == ctx.lexicon.version);

  auto pa = run_analysis(AnalysisKind::kPostAnalysis, posts, ctx, 1);
  CHECK(pa["records"].size() == 400);
}

TEST_CASE("short series and graphs without authors") {
  std::vector<ingest::Post> posts = {marsad::testing::post("1", "great match"), marsad::testing::post("2", "bad match")};
  AnalysisContext ctx;
  auto trends = run_analysis(AnalysisKind::kTrends, posts, ctx, 1);
  CHECK(trends["spike_detection"] == "series_too_short");
  CHECK(trends["spikes"].empty());
  try {
    run_analysis(AnalysisKind::kNetwork, posts, ctx, 1);
    FAIL("expected EMPTY_GRAPH");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kEmptyGraph);
  }
}

TEST_CASE("sentiment CSV export matches the golden file") {
  TempDir dir;
  Engine engine(temp_config(dir));
  auto outcome = engine.ingest("small", read_text(MARSAD_FIXTURE_DIR "/sentiment_small.jsonl"), ingest::SourceFormat::kJsonl);
  REQUIRE(outcome.dataset_id);
  auto job = engine.run_sync({*outcome.dataset_id, AnalysisKind::kSentiment});
  REQUIRE(job.state == JobState::kDone);
  CHECK(engine.export_job(job.job_id, ExportFormat::kCsv) == read_text(MARSAD_FIXTURE_DIR "/sentiment_small.golden.csv"));
  auto json_export = engine.export_job(job.job_id, ExportFormat::kJson);
  CHECK(nlohmann::json::parse(json_export) == engine.store().get_result(job.job_id)->payload);
  try {
    engine.export_job(store::new_id(), ExportFormat::kCsv);
    FAIL("expected NOT_FOUND");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kNotFound);
  }
}

TEST_CASE("engine: nothing stored when nothing is accepted") {
  TempDir dir;
  Engine engine(temp_config(dir));
  auto outcome = engine.ingest("bad", "{\"id\":\"1\"}\n", ingest::SourceFormat::kJsonl);
  CHECK(!outcome.dataset_id);
  CHECK(outcome.report.rejected.size() == 1);
  CHECK(engine.store().list_datasets(10).empty());
}

TEST_CASE("engine: failed jobs record the error code") {
  TempDir dir;
  auto config = temp_config(dir);
  classify::HttpAdapterOptions dead;
  dead.id = "sentiment-http";
  dead.kind = AnalysisKind::kSentiment;
  dead.url = "http://127.0.0.1:1/classify";
  dead.timeout = std::chrono::milliseconds(500);
  config.sentiment_adapter = dead;
  Engine engine(config);
  auto outcome = engine.ingest("small", read_text(MARSAD_FIXTURE_DIR "/sentiment_small.jsonl"), ingest::SourceFormat::kJsonl);
  auto job = engine.run_sync({*outcome.dataset_id, AnalysisKind::kSentiment});
  REQUIRE(job.state == JobState::kFailed);
  CHECK(job.error->rfind("ADAPTER_UNREACHABLE", 0) == 0);
  CHECK(!engine.store().get_result(job.job_id));

  // Authors without replies or mentions are isolated nodes with uniform rank.
  auto network = engine.run_sync({*outcome.dataset_id, AnalysisKind::kNetwork});
  REQUIRE(network.state == JobState::kDone);
  auto graph = engine.store().get_result(network.job_id)->payload;
  CHECK(graph["edges"].empty());
  REQUIRE(graph["nodes"].size() == 3);
  for (const auto& node : graph["nodes"]) CHECK(node["pagerank"].get<double>() == doctest::Approx(1.0 / 3));

  auto anonymous = *engine.ingest("anon", "{\"id\":\"1\",\"text\":\"hi\",\"timestamp\":\"2024-03-01\"}\n",
                                  ingest::SourceFormat::kJsonl).dataset_id;
  auto empty = engine.run_sync({anonymous, AnalysisKind::kNetwork});
  REQUIRE(empty.state == JobState::kFailed);
  CHECK(empty.error->rfind("EMPTY_GRAPH", 0) == 0);
}

TEST_CASE("engine: feedback creates a new lexicon version used by later jobs") {
  TempDir dir;
  Engine engine(temp_config(dir));
  std::string jsonl;
  for (int i = 0; i < 4; ++i)
    jsonl += "{\"id\":\"r" + std::to_string(i) + "\",\"text\":\"the count was rigged\",\"timestamp\":\"2024-03-01\"}\n";
  auto id = *engine.ingest("votes", jsonl, ingest::SourceFormat::kJsonl).dataset_id;
  CHECK(engine.lexicon().version == 1);
  auto first = engine.run_sync({id, AnalysisKind::kSentiment});
  CHECK(engine.store().get_result(first.job_id)->payload["items"][0]["label"] == "neutral");

  auto unchanged = engine.apply_feedback(id);
  CHECK(!unchanged.changed());
  for (int i = 0; i < 3; ++i)
    engine.store().record_annotation({"", id, "r" + std::to_string(i), AnalysisKind::kSentiment, "neutral",
                                      "negative", "tester", now_utc()});
  auto changed = engine.apply_feedback(id);
  CHECK(changed.changed());
  CHECK(changed.previous_version == 1);
  CHECK(changed.version == 2);
  CHECK(engine.store().get_lexicon(1));
  CHECK(engine.lexicon().negative.count("rigged") == 1);
  CHECK(!engine.apply_feedback(id).changed());

  auto second = engine.run_sync({id, AnalysisKind::kSentiment});
  auto payload = engine.store().get_result(second.job_id)->payload;
  CHECK(payload["lexicon_version"] == 2);
  CHECK(payload["items"][3]["label"] == "negative");
}

TEST_CASE("config parsing") {
  auto c = parse_config(R"(
[paths]
data_dir = store

[server]
port = 9090
cors_origin = http://localhost:5173

[auth]
tokens = alice:tok-a, bob:tok-b

[jobs]
worker_limit = 2

[classify]
sentiment_url = http://127.0.0.1:7000/classify
sentiment_token = abc
timeout_ms = 1500

[topics]
k = 3

[trends]
granularity = week
window = 5

[generic_http]
url_template = http://127.0.0.1:9/search?q={query}
map.text = body
)", "/srv/marsad");
  CHECK(c.data_dir == std::filesystem::path("/srv/marsad/store"));
  CHECK(c.server.port == 9090);
  CHECK(c.server.cors_origin == "http://localhost:5173");
  CHECK(c.tokens.at("tok-a") == "alice");
  CHECK(c.tokens.at("tok-b") == "bob");
  CHECK(c.queue.worker_limit == 2);
  REQUIRE(c.sentiment_adapter);
  CHECK(c.sentiment_adapter->token == "abc");
  CHECK(c.sentiment_adapter->timeout == std::chrono::milliseconds(1500));
  CHECK(!c.propaganda_adapter);
  CHECK(c.analysis.subtopics.k == 3u);
  CHECK(c.analysis.granularity == trends::Granularity::kWeek);
  CHECK(c.analysis.spike_window == 5);
  REQUIRE(c.generic_http);
  CHECK(c.generic_http->field_map.at("text") == "body");

  CHECK_THROWS_AS(parse_config("[jobs]\nworker_limit = 0\n", "."), Error);
  CHECK_THROWS_AS(parse_config("[auth]\ntokens = nocolon\n", "."), Error);
  CHECK_THROWS_AS(parse_config("[trends]\ngranularity = fortnight\n", "."), Error);
  auto example = parse_config(read_text(MARSAD_FIXTURE_DIR "/../../config/marsad.example.ini"), "/etc/marsad");
  CHECK(example.data_dir == std::filesystem::path("/etc/marsad/data"));
  CHECK(example.tokens.at("change-me") == "admin");
  CHECK(example.analysis.subtopics.restarts == 10u);
  CHECK(!example.sentiment_adapter);
  CHECK(!example.generic_http);
  auto defaults = parse_config("", ".");
  CHECK(defaults.queue.worker_limit == 1);
  CHECK(defaults.analysis.sentiment.positive == 0.2);
}
