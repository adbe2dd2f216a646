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

#include "synthetic.hpp"

#include <cstdio>
#include <random>

namespace marsad::testing {

namespace {

const std::array<std::string, 8> kFiller = {"people", "city", "week", "news",
                                            "report", "local", "morning", "update"};
const std::array<std::string, 3> kPositive = {"great", "love", "happy"};
const std::array<std::string, 3> kNegative = {"bad", "terrible", "angry"};
const std::array<std::string, 3> kLoaded = {"traitors", "puppet regime", "barbaric"};

struct Place {
  const char* alias;
  double lat;
  double lon;
};
const std::array<Place, 3> kPlaces = {{{"doha", 25.2854, 51.531},
                                       {"dubai", 25.2048, 55.2708},
                                       {"cairo", 30.0444, 31.2357}}};

std::string iso(int day, int hour, int minute) {
  // March 2024 has 31 days; day is 1-based.
  char buf[32];
  std::snprintf(buf, sizeof buf, "2024-03-%02dT%02d:%02d:00Z", day, hour, minute);
  return buf;
}

std::string user(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "user%02zu", i);
  return buf;
}

}  // namespace

const std::array<KeywordSet, kTopicCount>& planted_topics() {
  static const std::array<KeywordSet, kTopicCount> topics = {{
      {"football", "league", "goal", "stadium", "coach", "striker", "match", "tournament", "referee",
       "penalty"},
      {"rainfall", "humidity", "forecast", "storm", "temperature", "drought", "sandstorm", "climate",
       "heatwave", "monsoon"},
      {"smartphone", "processor", "battery", "software", "laptop", "chipset", "firmware", "bandwidth",
       "gadget", "startup"},
  }};
  return topics;
}

std::vector<SyntheticPost> make_topic_corpus(std::uint64_t seed, std::size_t n_posts) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  const auto& topics = planted_topics();
  constexpr std::size_t kUsers = 20;

  std::vector<SyntheticPost> out;
  out.reserve(n_posts);
  for (std::size_t i = 0; i < n_posts; ++i) {
    SyntheticPost post;
    post.topic = i % kTopicCount;
    // Community by topic: users 1-7 talk football, 8-14 weather, 15-20 tech.
    std::size_t author = 1 + post.topic * 7 + uniform(post.topic == 2 ? 6 : 7);

    std::string text;
    auto add = [&](const std::string& word) {
      if (!text.empty()) text += ' ';
      text += word;
    };
    std::size_t n_keywords = 5 + uniform(3);
    for (std::size_t k = 0; k < n_keywords; ++k) add(topics[post.topic][uniform(kKeywordsPerTopic)]);
    add(kFiller[uniform(kFiller.size())]);
    if (chance(0.4)) add(kPositive[uniform(kPositive.size())]);
    else if (chance(0.4)) add(kNegative[uniform(kNegative.size())]);
    if (chance(0.1)) add(kLoaded[uniform(kLoaded.size())]);
    const Place* place = chance(0.3) ? &kPlaces[uniform(kPlaces.size())] : nullptr;
    if (place && chance(0.5)) add(std::string("in ") + place->alias);

    // Posts 60-89 land on one day; the rest spread over the month.
    int day = (i >= 60 && i < 90) ? 21 : 1 + static_cast<int>(uniform(30));
    nlohmann::json r = {{"id", "p" + std::to_string(1000 + i)},
                        {"text", text},
                        {"timestamp", iso(day, static_cast<int>(uniform(24)), static_cast<int>(uniform(60)))},
                        {"author", user(author)},
                        {"likes", uniform(50)},
                        {"shares", uniform(10)},
                        {"lang", "en"}};
    if (place) {
      r["lat"] = place->lat + (static_cast<double>(uniform(100)) - 50.0) / 1000.0;
      r["lon"] = place->lon + (static_cast<double>(uniform(100)) - 50.0) / 1000.0;
    }
    if (i >= kTopicCount && chance(0.3)) {
      // Replies stay inside the topic.
      std::size_t parent = post.topic + kTopicCount * uniform(i / kTopicCount);
      r["parent_id"] = "p" + std::to_string(1000 + parent);
    }
    if (chance(0.25)) {
      // Each community has a hub: its first user gets most mentions.
      std::size_t hub = 1 + post.topic * 7;
      std::size_t target = chance(0.7) ? hub : 1 + uniform(kUsers);
      r["mentions"] = "@" + user(target);
    }
    post.record = std::move(r);
    out.push_back(std::move(post));
  }
  return out;
}

std::string to_jsonl(const std::vector<SyntheticPost>& posts) {
  std::string out;
  for (const auto& p : posts) out += p.record.dump() + "\n";
  return out;
}

}  // namespace marsad::testing
