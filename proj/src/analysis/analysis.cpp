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

#include "marsad/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "marsad/error.hpp"
#include "marsad/network.hpp"
#include "marsad/topics.hpp"

namespace marsad {
namespace {

using nlohmann::json;

topics::Corpus corpus_of(std::span<const ingest::Post> posts) {
  topics::Corpus docs;
  docs.reserve(posts.size());
  for (const auto& p : posts) docs.push_back(p.tokens);
  return docs;
}

std::shared_ptr<classify::ClassifierAdapter> sentiment_adapter(const AnalysisContext& ctx) {
  if (ctx.sentiment) return ctx.sentiment;
  return classify::make_sentiment_baseline(ctx.lexicon, ctx.config.sentiment);
}

std::shared_ptr<classify::ClassifierAdapter> propaganda_adapter(const AnalysisContext& ctx) {
  if (ctx.propaganda) return ctx.propaganda;
  return classify::make_propaganda_baseline(classify::builtin_patterns(),
                                            ctx.config.propaganda_threshold);
}

std::vector<classify::ItemLabel> run_adapter(classify::ClassifierAdapter& adapter,
                                             std::span<const ingest::Post> posts) {
  auto labels = adapter.classify(posts);
  if (labels.size() != posts.size())
    throw Error(Errc::kBadAdapterResponse, "adapter " + adapter.id() + " returned " +
                                               std::to_string(labels.size()) + " labels for " +
                                               std::to_string(posts.size()) + " posts");
  return labels;
}

json subtopics(std::span<const ingest::Post> posts, const AnalysisContext& ctx, std::uint64_t seed) {
  auto set = topics::run_subtopics(corpus_of(posts), seed, ctx.config.subtopics);
  json out = topics::to_json(set);
  out.erase("assignments");
  for (auto& cluster : out["clusters"]) {
    json ids = json::array();
    std::size_t c = cluster["cluster"].get<std::size_t>();
    for (std::size_t i = 0; i < posts.size(); ++i)
      if (set.assignments[i] == c) ids.push_back(posts[i].id);
    cluster["post_ids"] = std::move(ids);
  }
  return out;
}

json sentiment(std::span<const ingest::Post> posts, const AnalysisContext& ctx) {
  auto adapter = sentiment_adapter(ctx);
  auto labels = run_adapter(*adapter, posts);
  std::map<std::string, std::size_t> summary{{"positive", 0}, {"negative", 0}, {"neutral", 0}};
  std::size_t errors = 0;
  json items = json::array();
  for (const auto& l : labels) {
    json item = {{"post_id", l.id}};
    if (l.error) {
      ++errors;
      item["label"] = nullptr;
      item["error"] = *l.error;
    } else {
      ++summary[l.label];
      item["label"] = l.label;
      item["score"] = l.score;
      item["degree"] = std::abs(l.score);
      if (!l.details.empty()) item["details"] = l.details;
    }
    items.push_back(std::move(item));
  }
  return {{"adapter", adapter->describe()},
          {"lexicon_version", ctx.lexicon.version},
          {"thresholds", {{"positive", ctx.config.sentiment.positive},
                          {"negative", ctx.config.sentiment.negative}}},
          {"summary", summary},
          {"errors", errors},
          {"items", std::move(items)}};
}

json propaganda(std::span<const ingest::Post> posts, const AnalysisContext& ctx) {
  auto adapter = propaganda_adapter(ctx);
  auto labels = run_adapter(*adapter, posts);
  std::size_t flagged = 0;
  std::size_t errors = 0;
  json items = json::array();
  for (const auto& l : labels) {
    json item = {{"post_id", l.id}};
    if (l.error) {
      ++errors;
      item["label"] = nullptr;
      item["error"] = *l.error;
      items.push_back(std::move(item));
      continue;
    }
    bool flag = l.details.contains("flag") ? l.details["flag"].get<bool>() : l.label == "propaganda";
    flagged += flag;
    item["label"] = l.label;
    item["flag"] = flag;
    item["score"] = l.score;
    item["technique"] = l.details.value("technique", json());
    item["spans"] = l.details.value("spans", json::array());
    items.push_back(std::move(item));
  }
  return {{"adapter", adapter->describe()},
          {"threshold", ctx.config.propaganda_threshold},
          {"flagged", flagged},
          {"errors", errors},
          {"items", std::move(items)}};
}

json trend_series(std::span<const ingest::Post> posts, const AnalysisContext& ctx) {
  auto series = trends::bucket_timeline(posts, ctx.config.granularity);
  auto z = trends::spike_scores(series, ctx.config.spike_window);
  std::vector<trends::Spike> spikes;
  std::string status = "ok";
  if (series.buckets.size() >= ctx.config.spike_window + 1)
    spikes = trends::detect_spikes(series, posts, ctx.config.spike_window, ctx.config.spike_z);
  else
    status = "series_too_short";
  json out = trends::to_json(series, z, spikes);
  out["window"] = ctx.config.spike_window;
  out["z_threshold"] = ctx.config.spike_z;
  out["spike_detection"] = status;
  return out;
}

std::vector<std::vector<trends::LocationMention>> locations_of(std::span<const ingest::Post> posts,
                                                               const AnalysisContext& ctx) {
  std::vector<std::vector<trends::LocationMention>> out;
  out.reserve(posts.size());
  for (const auto& p : posts) out.push_back(trends::extract_locations(p, *ctx.gazetteer));
  return out;
}

json spatial(std::span<const ingest::Post> posts, const AnalysisContext& ctx) {
  auto mentions = locations_of(posts, ctx);
  json out = trends::to_json(trends::aggregate_regions(mentions, *ctx.gazetteer));
  json per_post = json::array();
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (mentions[i].empty()) continue;
    json locs = json::array();
    for (const auto& m : mentions[i])
      locs.push_back({{"mention", m.mention}, {"region", m.region}, {"source", to_string(m.source)}});
    per_post.push_back({{"post_id", posts[i].id}, {"locations", std::move(locs)}});
  }
  out["posts"] = std::move(per_post);
  return out;
}

json graph(std::span<const ingest::Post> posts, const AnalysisContext& ctx) {
  auto g = network::build_graph(posts);
  auto metrics = network::centrality(g);
  return network::to_json(g, metrics, ctx.config.top_influencers);
}

json post_analysis(std::span<const ingest::Post> posts, const AnalysisContext& ctx) {
  auto sent = run_adapter(*sentiment_adapter(ctx), posts);
  auto prop = run_adapter(*propaganda_adapter(ctx), posts);
  std::vector<std::vector<std::string>> regions;
  for (const auto& mentions : locations_of(posts, ctx)) {
    std::vector<std::string> r;
    for (const auto& m : mentions)
      if (std::find(r.begin(), r.end(), m.region) == r.end()) r.push_back(m.region);
    regions.push_back(std::move(r));
  }
  json records = json::array();
  for (const auto& rec : classify::post_analysis(posts, sent, prop, regions))
    records.push_back(classify::to_json(rec));
  return {{"lexicon_version", ctx.lexicon.version}, {"records", std::move(records)}};
}

}  // namespace

json run_analysis(AnalysisKind kind, std::span<const ingest::Post> posts,
                  const AnalysisContext& ctx, std::uint64_t seed) {
  json out;
  switch (kind) {
    case AnalysisKind::kSubtopics: out = subtopics(posts, ctx, seed); break;
    case AnalysisKind::kWordcloud:
      out = topics::word_cloud_json(topics::word_cloud(corpus_of(posts)), ctx.config.wordcloud_terms);
      break;
    case AnalysisKind::kSentiment: out = sentiment(posts, ctx); break;
    case AnalysisKind::kPropaganda: out = propaganda(posts, ctx); break;
    case AnalysisKind::kTrends: out = trend_series(posts, ctx); break;
    case AnalysisKind::kSpatial: out = spatial(posts, ctx); break;
    case AnalysisKind::kNetwork: out = graph(posts, ctx); break;
    case AnalysisKind::kPostAnalysis: out = post_analysis(posts, ctx); break;
  }
  out["kind"] = to_string(kind);
  out["seed"] = seed;
  out["post_count"] = posts.size();
  return out;
}

std::optional<ExportFormat> parse_export_format(std::string_view name) {
  if (name == "csv") return ExportFormat::kCsv;
  if (name == "json") return ExportFormat::kJson;
  return std::nullopt;
}

namespace {

std::string cell(const json& v) {
  std::string s;
  if (v.is_null()) return s;
  if (v.is_string()) {
    s = v.get<std::string>();
  } else if (v.is_boolean()) {
    s = v.get<bool>() ? "true" : "false";
  } else if (v.is_number_float()) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v.get<double>());
    s.assign(buf, ptr);
  } else {
    s = v.dump();
  }
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

void row(std::string& out, std::initializer_list<json> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += cell(c);
    first = false;
  }
  out += "\r\n";
}

std::string join(const json& arr, std::string_view sep) {
  std::string s;
  for (const auto& v : arr) {
    if (!s.empty()) s += sep;
    s += v.is_string() ? v.get<std::string>() : v.dump();
  }
  return s;
}

}  // namespace

std::string csv_header(AnalysisKind kind) {
  switch (kind) {
    case AnalysisKind::kSentiment: return "post_id,label,score,degree";
    case AnalysisKind::kSubtopics: return "cluster,doc_count,rank,term,weight";
    case AnalysisKind::kWordcloud: return "term,frequency";
    case AnalysisKind::kPropaganda: return "post_id,flag,score,technique,spans";
    case AnalysisKind::kTrends: return "bucket_start,post_count,engagement,is_spike,z_score";
    case AnalysisKind::kSpatial: return "region,post_count,lat,lon";
    case AnalysisKind::kNetwork: return "node,in_degree,out_degree,pagerank";
    case AnalysisKind::kPostAnalysis: return "post_id,kind,label,degree,locations";
  }
  return {};
}

std::string export_payload(AnalysisKind kind, const json& payload, ExportFormat format) {
  if (format == ExportFormat::kJson) return payload.dump(2) + "\n";

  std::string out = csv_header(kind) + "\r\n";
  switch (kind) {
    case AnalysisKind::kSentiment:
      for (const auto& i : payload.at("items"))
        row(out, {i.at("post_id"), i.at("label"), i.value("score", json()), i.value("degree", json())});
      break;
    case AnalysisKind::kSubtopics:
      for (const auto& c : payload.at("clusters")) {
        std::size_t rank = 0;
        for (const auto& t : c.at("top_terms"))
          row(out, {c.at("cluster"), c.at("doc_count"), ++rank, t.at("term"), t.at("weight")});
      }
      break;
    case AnalysisKind::kWordcloud:
      for (const auto& t : payload.at("terms")) row(out, {t.at("term"), t.at("frequency")});
      break;
    case AnalysisKind::kPropaganda:
      for (const auto& i : payload.at("items")) {
        std::string spans;
        for (const auto& s : i.value("spans", json::array())) {
          if (!spans.empty()) spans += ';';
          spans += std::to_string(s.at("start").get<std::size_t>()) + "-" +
                   std::to_string(s.at("end").get<std::size_t>());
        }
        row(out, {i.at("post_id"), i.value("flag", json()), i.value("score", json()),
                  i.value("technique", json()), spans});
      }
      break;
    case AnalysisKind::kTrends:
      for (const auto& b : payload.at("buckets"))
        row(out, {b.at("start"), b.at("post_count"), b.at("engagement"), b.at("is_spike"), b.at("z_score")});
      break;
    case AnalysisKind::kSpatial:
      for (const auto& r : payload.at("regions"))
        row(out, {r.at("region"), r.at("post_count"), r.at("lat"), r.at("lon")});
      break;
    case AnalysisKind::kNetwork:
      for (const auto& n : payload.at("nodes"))
        row(out, {n.at("id"), n.at("in_degree"), n.at("out_degree"), n.at("pagerank")});
      break;
    case AnalysisKind::kPostAnalysis:
      for (const auto& r : payload.at("records"))
        row(out, {r.at("post_id"), r.at("kind"), r.at("label"), r.at("degree"), join(r.at("locations"), ";")});
      break;
  }
  return out;
}

}  // namespace marsad
