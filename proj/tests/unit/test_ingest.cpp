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

#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "marsad/error.hpp"
#include "marsad/ingest.hpp"

using namespace marsad;
using namespace marsad::ingest;
using marsad::testing::at;

TEST_CASE("parse_dataset accepts a minimal record") {
  auto r = parse_dataset(R"({"id":"1","text":"hello","timestamp":"2024-01-01T00:00:00Z"})", SourceFormat::kJsonl);
  CHECK(r.report.accepted == 1);
  CHECK(r.report.rejected.empty());
  REQUIRE(r.posts.size() == 1);
  CHECK(r.posts[0].tokens == std::vector<std::string>{"hello"});
}

TEST_CASE("missing text is rejected at its row") {
  auto r = parse_dataset(
      "{\"id\":\"1\",\"text\":\"ok\",\"timestamp\":\"2024-01-01\"}\n{\"id\":\"2\",\"timestamp\":\"2024-01-01\"}\n",
      SourceFormat::kJsonl);
  CHECK(r.report.accepted == 1);
  REQUIRE(r.report.rejected.size() == 1);
  CHECK(r.report.rejected[0].row_index == 2);
  CHECK(r.report.rejected[0].code == RowError::kMissingField);
}

TEST_CASE("csv with one bad timestamp") {
  std::string csv =
      "id,text,timestamp\n"
      "1,first post,2024-01-01T00:00:00Z\n"
      "2,\"second, quoted\",2024-01-02T00:00:00Z\n"
      "3,third post,2024-01-03\n"
      "4,fourth post,not-a-date\n";
  auto r = parse_dataset(csv, SourceFormat::kCsv);
  CHECK(r.report.accepted == 3);
  REQUIRE(r.report.rejected.size() == 1);
  CHECK(r.report.rejected[0].row_index == 4);
  CHECK(r.report.rejected[0].code == RowError::kBadTimestamp);
  CHECK(r.posts[1].text == "second, quoted");
}

TEST_CASE("tsv and json array decode to the same posts") {
  auto tsv = parse_dataset("id\ttext\ttimestamp\na\thello there\t2024-01-01\n", SourceFormat::kTsv);
  auto js = parse_dataset(R"([{"id":"a","text":"hello there","timestamp":"2024-01-01"}])", SourceFormat::kJson);
  REQUIRE(tsv.posts.size() == 1);
  CHECK(tsv.posts == js.posts);
}

TEST_CASE("duplicate ids: first occurrence wins") {
  auto r = parse_dataset(
      "{\"id\":\"1\",\"text\":\"a1 first\",\"timestamp\":\"2024-01-01\"}\n"
      "{\"id\":\"1\",\"text\":\"a1 second\",\"timestamp\":\"2024-01-01\"}\n",
      SourceFormat::kJsonl);
  REQUIRE(r.posts.size() == 1);
  CHECK(r.posts[0].text == "a1 first");
  REQUIRE(r.report.rejected.size() == 1);
  CHECK(r.report.rejected[0].code == RowError::kDupId);
}

TEST_CASE("empty text and type mismatch") {
  auto r = parse_dataset(
      "{\"id\":\"1\",\"text\":\"   \",\"timestamp\":\"2024-01-01\"}\n"
      "{\"id\":\"2\",\"text\":\"fine\",\"timestamp\":\"2024-01-01\",\"likes\":\"many\"}\n"
      "not json at all\n",
      SourceFormat::kJsonl);
  CHECK(r.report.accepted == 0);
  REQUIRE(r.report.rejected.size() == 3);
  CHECK(r.report.rejected[0].code == RowError::kEmptyText);
  CHECK(r.report.rejected[1].code == RowError::kTypeMismatch);
  CHECK(r.report.rejected[2].code == RowError::kTypeMismatch);
}

TEST_CASE("undecodable input") {
  CHECK_THROWS_AS(decode_records("\xff\xfe broken", SourceFormat::kJsonl), Error);
  CHECK_THROWS_AS(decode_records("[{\"id\":", SourceFormat::kJson), Error);
  try {
    decode_records("\xc3\x28", SourceFormat::kCsv);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kUndecodableInput);
  }
}

TEST_CASE("schema invariants") {
  auto s = PostSchema::defaults();
  CHECK_NOTHROW(s.check());
  s.optional.insert("id");
  CHECK_THROWS_AS(s.check(), Error);
  auto t = PostSchema::defaults();
  t.optional.insert("mood");
  CHECK_THROWS_AS(t.check(), Error);
}

TEST_CASE("normalize_text examples") {
  CHECK(normalize_text("HeLLo  World") == "hello world");
  CHECK(normalize_text("\xd8\xa3\xd9\x8e\xd8\xad\xd9\x92\xd9\x85\xd9\x8e\xd8\xaf") == "\xd8\xa7\xd8\xad\xd9\x85\xd8\xaf");  // أَحْمَد -> احمد
  CHECK(normalize_text("\xd9\x83\xd9\x80\xd9\x80\xd8\xaa\xd8\xa7\xd8\xa8") == "\xd9\x83\xd8\xaa\xd8\xa7\xd8\xa8");  // tatweel removed
  CHECK(normalize_text("\xd8\xb9\xd9\x84\xd9\x89") == "\xd8\xb9\xd9\x84\xd9\x8a");  // alef maksura -> yeh
}

TEST_CASE("tokenize examples") {
  CHECK(tokenize("hello world", {}) == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize("a hello, world!", {"world"}) == std::vector<std::string>{"hello"});
  // احمد في الدوحة with the built-in stopwords
  auto toks = tokenize(normalize_text("\xd8\xa7\xd8\xad\xd9\x85\xd8\xaf \xd9\x81\xd9\x8a \xd8\xa7\xd9\x84\xd8\xaf\xd9\x88\xd8\xad\xd8\xa9"),
                       builtin_stopwords());
  CHECK(builtin_stopwords().count("\xd9\x81\xd9\x8a") == 1);
  CHECK(toks == std::vector<std::string>{"\xd8\xa7\xd8\xad\xd9\x85\xd8\xaf", "\xd8\xa7\xd9\x84\xd8\xaf\xd9\x88\xd8\xad\xd8\xa9"});
}

TEST_CASE("language detection") {
  CHECK(detect_language("hello world") == Lang::kEn);
  CHECK(detect_language("\xd8\xa7\xd9\x84\xd8\xaf\xd9\x88\xd8\xad\xd8\xa9 \xd8\xac\xd9\x85\xd9\x8a\xd9\x84\xd8\xa9") == Lang::kAr);
  CHECK(detect_language("12345 !!") == Lang::kUnknown);
}

TEST_CASE("find_phrase respects word boundaries") {
  auto spans = find_phrase("the regime and puppet regime", "regime");
  REQUIRE(spans.size() == 2);
  CHECK(spans[0] == Span{4, 10});
  CHECK(find_phrase("regimes", "regime").empty());
  CHECK(find_phrase("puppet regime!", "puppet regime").size() == 1);
}

TEST_CASE("infer_metadata examples") {
  std::vector<Post> one = {marsad::testing::post("1", "hello", "2024-03-01T10:00:00Z")};
  auto m = infer_metadata(one);
  CHECK(m.n_posts == 1);
  CHECK(m.first == m.last);

  auto two = one;
  two.push_back(marsad::testing::post("2", "world", "2024-03-02T10:00:00Z"));
  two[1].geo = Geo{25.0, 51.0};
  auto m2 = infer_metadata(two);
  CHECK(m2.field_fill_rates.at("lat") == doctest::Approx(0.5));
  CHECK(m2.last - m2.first == std::chrono::hours(24));

  CHECK_THROWS_AS(infer_metadata(std::vector<Post>{}), Error);
}

TEST_CASE("lang counts over a 30/70 fixture") {
  std::string jsonl;
  for (int i = 0; i < 100; ++i) {
    std::string text = i < 30 ? "\xd8\xa7\xd9\x84\xd8\xaf\xd9\x88\xd8\xad\xd8\xa9 \xd8\xac\xd9\x85\xd9\x8a\xd9\x84\xd8\xa9" : "doha is lovely";
    jsonl += "{\"id\":\"" + std::to_string(i) + "\",\"text\":\"" + text + "\",\"timestamp\":\"2024-01-01\"}\n";
  }
  auto r = parse_dataset(jsonl, SourceFormat::kJsonl);
  auto m = infer_metadata(r.posts);
  CHECK(m.lang_counts.at("ar") == 30);
  CHECK(m.lang_counts.at("en") == 70);
}

namespace {

std::string random_row(std::mt19937_64& rng, int i) {
  static const char* texts[] = {"hello world", "", "  ", "\xd8\xa7\xd9\x84\xd8\xaf\xd9\x88\xd8\xad\xd8\xa9", "a \\\"quote\\\"", "x"};
  static const char* stamps[] = {"2024-01-01T00:00:00Z", "2024-02-30", "yesterday", "2024-05-05 10:00", ""};
  std::uniform_int_distribution<int> pick(0, 9);
  switch (pick(rng)) {
    case 0:
      return "{broken";
    case 1:
      return "[1,2,3]";
    case 2:
      return "{\"text\":\"no id\",\"timestamp\":\"2024-01-01\"}";
    default:
      break;
  }
  std::string row = "{\"id\":\"" + std::to_string(i % 9000) + "\",\"text\":\"" + texts[pick(rng) % 6] +
                    "\",\"timestamp\":\"" + stamps[pick(rng) % 5] + "\"";
  if (pick(rng) < 3) row += ",\"likes\":" + std::string(pick(rng) < 5 ? "\"lots\"" : "12");
  if (pick(rng) < 3) row += ",\"lat\":25.3,\"lon\":51.5";
  if (pick(rng) < 2) row += ",\"mentions\":\"@a @b\",\"parent_id\":\"7\"";
  return row + "}";
}

}  // namespace

TEST_CASE("property: conservation, determinism and round-trip on fuzzed rows") {
  std::mt19937_64 rng(2024);
  std::string jsonl;
  for (int i = 0; i < 2000; ++i) jsonl += random_row(rng, i) + "\n";
  auto records = decode_records(jsonl, SourceFormat::kJsonl);
  auto r = validate_records(records, PostSchema::defaults());
  CHECK(r.report.total() == records.size());
  CHECK(r.report.total() == 2000);

  auto again = parse_dataset(jsonl, SourceFormat::kJsonl);
  CHECK(again.posts == r.posts);

  std::string round;
  for (const auto& p : r.posts) round += to_record_json(p).dump() + "\n";
  auto back = parse_dataset(round, SourceFormat::kJsonl);
  CHECK(back.report.rejected.empty());
  CHECK(back.posts == r.posts);

  for (const auto& p : r.posts) {
    CHECK(normalize_text(p.norm_text) == p.norm_text);
    for (const auto& t : p.tokens) CHECK(!t.empty());
    CHECK(post_from_document(to_document_json(p)) == p);
  }
}
