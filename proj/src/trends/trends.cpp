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

#include "marsad/trends.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "marsad/embedded_data.hpp"
#include "marsad/error.hpp"
#include "marsad/topics.hpp"

namespace marsad::trends {

using namespace std::chrono;

std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::kHour: return "hour";
    case Granularity::kDay: return "day";
    case Granularity::kWeek: return "week";
  }
  return "day";
}

std::optional<Granularity> parse_granularity(std::string_view name) {
  if (name == "hour") return Granularity::kHour;
  if (name == "day") return Granularity::kDay;
  if (name == "week") return Granularity::kWeek;
  return std::nullopt;
}

Instant bucket_start(Instant t, Granularity g) {
  switch (g) {
    case Granularity::kHour: return floor<hours>(t);
    case Granularity::kDay: return floor<days>(t);
    case Granularity::kWeek: {
      sys_days d = floor<days>(t);
      // weekday 0 is Sunday; shift so Monday starts the week.
      auto back = (weekday(d).c_encoding() + 6) % 7;
      return d - days(back);
    }
  }
  return t;
}

namespace {

Instant next_bucket(Instant start, Granularity g) {
  switch (g) {
    case Granularity::kHour: return start + hours(1);
    case Granularity::kDay: return start + days(1);
    case Granularity::kWeek: return start + days(7);
  }
  return start;
}

}  // namespace

TimeSeries bucket_timeline(std::span<const ingest::Post> posts, Granularity g) {
  TimeSeries series;
  series.granularity = g;
  if (posts.empty()) return series;
  auto [lo, hi] = std::minmax_element(posts.begin(), posts.end(), [](const auto& a, const auto& b) {
    return a.timestamp < b.timestamp;
  });
  Instant first = bucket_start(lo->timestamp, g);
  Instant last = bucket_start(hi->timestamp, g);
  for (Instant s = first; s <= last; s = next_bucket(s, g)) series.buckets.push_back({s, 0, 0});
  for (const auto& p : posts) {
    Instant s = bucket_start(p.timestamp, g);
    auto it = std::lower_bound(series.buckets.begin(), series.buckets.end(), s,
                               [](const Bucket& b, Instant v) { return b.start < v; });
    ++it->post_count;
    it->engagement += p.engagement();
  }
  return series;
}

std::vector<std::optional<double>> spike_scores(const TimeSeries& series, std::size_t window) {
  const auto& b = series.buckets;
  std::vector<std::optional<double>> out(b.size());
  if (window == 0) return out;
  for (std::size_t i = window; i < b.size(); ++i) {
    double mean = 0.0;
    for (std::size_t j = i + 1 - window; j <= i; ++j) mean += static_cast<double>(b[j].post_count);
    mean /= static_cast<double>(window);
    double var = 0.0;
    for (std::size_t j = i + 1 - window; j <= i; ++j) {
      double d = static_cast<double>(b[j].post_count) - mean;
      var += d * d;
    }
    double sd = std::sqrt(var / static_cast<double>(window));
    out[i] = sd > 0.0 ? (static_cast<double>(b[i].post_count) - mean) / sd : 0.0;
  }
  return out;
}

std::vector<Spike> detect_spikes(const TimeSeries& series, std::span<const ingest::Post> posts,
                                 std::size_t window, double z_threshold) {
  if (series.buckets.size() < window + 1)
    throw Error(Errc::kSeriesTooShort, "need at least " + std::to_string(window + 1) +
                                           " buckets, got " + std::to_string(series.buckets.size()));
  auto z = spike_scores(series, window);
  std::vector<Spike> out;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!z[i] || *z[i] < z_threshold) continue;
    Spike s{series.buckets[i].start, i, *z[i], {}};
    topics::Corpus docs;
    for (const auto& p : posts)
      if (bucket_start(p.timestamp, series.granularity) == s.start) docs.push_back(p.tokens);
    auto cloud = topics::word_cloud(docs);
    for (std::size_t t = 0; t < cloud.size() && t < 5; ++t) s.top_terms.push_back(cloud[t].first);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

double parse_coord(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(Errc::kInvalidArgument,
                "gazetteer line " + std::to_string(line_no) + ": bad coordinate '" + s + "'");
  return v;
}

}  // namespace

Gazetteer Gazetteer::from_csv(std::string_view csv) {
  Gazetteer g;
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 || line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 5)
      throw Error(Errc::kInvalidArgument,
                  "gazetteer line " + std::to_string(line_no) + ": expected 5 columns");
    GazetteerEntry e;
    e.region = cells[0];
    e.lang = cells[1];
    e.alias = ingest::normalize_text(cells[2]);
    e.lat = parse_coord(cells[3], line_no);
    e.lon = parse_coord(cells[4], line_no);
    if (e.region.empty() || e.alias.empty()) continue;
    g.regions_.try_emplace(e.region, RegionPoint{e.lat, e.lon});
    g.entries_.push_back(std::move(e));
  }
  return g;
}

const Gazetteer& Gazetteer::builtin() {
  static const Gazetteer g = from_csv(embedded::file("gazetteer.csv"));
  return g;
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kEarthKm = 6371.0088;
  constexpr double rad = std::numbers::pi / 180.0;
  double dlat = (lat2 - lat1) * rad;
  double dlon = (lon2 - lon1) * rad;
  double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
             std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthKm * std::asin(std::min(1.0, std::sqrt(a)));
}

std::optional<std::string> Gazetteer::nearest(double lat, double lon, double max_km) const {
  std::optional<std::string> best;
  double best_d = 0.0;
  for (const auto& [region, pt] : regions_) {  // map order: ties keep the smaller name
    double d = haversine_km(lat, lon, pt.lat, pt.lon);
    if (d > max_km) continue;
    if (!best || d < best_d) {
      best = region;
      best_d = d;
    }
  }
  return best;
}

std::string_view to_string(LocationSource s) {
  return s == LocationSource::kGeotag ? "geotag" : "text";
}

std::vector<LocationMention> extract_locations(const ingest::Post& post, const Gazetteer& gazetteer) {
  std::vector<LocationMention> out;
  if (post.geo) {
    std::ostringstream mention;
    mention << post.geo->lat << ',' << post.geo->lon;
    auto region = gazetteer.nearest(post.geo->lat, post.geo->lon);
    out.push_back({mention.str(), region.value_or(std::string(kOtherRegion)),
                   LocationSource::kGeotag});
  }
  struct Hit {
    ingest::Span span;
    const GazetteerEntry* entry;
  };
  std::vector<Hit> hits;
  for (const auto& e : gazetteer.entries())
    for (const auto& s : ingest::find_phrase(post.norm_text, e.alias)) hits.push_back({s, &e});
  // Longest alias wins where matches overlap ("new york" over "york").
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    auto la = a.span.end - a.span.begin;
    auto lb = b.span.end - b.span.begin;
    if (la != lb) return la > lb;
    if (a.span.begin != b.span.begin) return a.span.begin < b.span.begin;
    return a.entry->region < b.entry->region;
  });
  std::vector<Hit> kept;
  for (const auto& h : hits) {
    bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const Hit& k) {
      return h.span.begin < k.span.end && k.span.begin < h.span.end;
    });
    if (!overlaps) kept.push_back(h);
  }
  std::sort(kept.begin(), kept.end(),
            [](const Hit& a, const Hit& b) { return a.span.begin < b.span.begin; });
  for (const auto& h : kept)
    out.push_back({post.norm_text.substr(h.span.begin, h.span.end - h.span.begin), h.entry->region,
                   LocationSource::kText});
  return out;
}

RegionCounts aggregate_regions(const std::vector<std::vector<LocationMention>>& per_post,
                               const Gazetteer& gazetteer) {
  RegionCounts out;
  for (const auto& mentions : per_post) {
    std::set<std::string> regions;
    bool other = false;
    for (const auto& m : mentions) {
      if (m.region == kOtherRegion)
        other = true;
      else
        regions.insert(m.region);
    }
    if (regions.empty() && other) ++out.unresolved;
    for (const auto& r : regions) {
      auto& c = out.regions[r];
      ++c.post_count;
      if (auto it = gazetteer.regions().find(r); it != gazetteer.regions().end()) {
        c.lat = it->second.lat;
        c.lon = it->second.lon;
      }
    }
  }
  return out;
}

nlohmann::json to_json(const TimeSeries& series, const std::vector<std::optional<double>>& z,
                       const std::vector<Spike>& spikes) {
  std::set<std::size_t> flagged;
  for (const auto& s : spikes) flagged.insert(s.bucket);
  nlohmann::json buckets = nlohmann::json::array();
  for (std::size_t i = 0; i < series.buckets.size(); ++i) {
    const auto& b = series.buckets[i];
    buckets.push_back({{"start", format_iso8601(b.start)},
                       {"post_count", b.post_count},
                       {"engagement", b.engagement},
                       {"z_score", i < z.size() && z[i] ? nlohmann::json(*z[i]) : nlohmann::json()},
                       {"is_spike", flagged.contains(i)}});
  }
  nlohmann::json sp = nlohmann::json::array();
  for (const auto& s : spikes)
    sp.push_back({{"start", format_iso8601(s.start)}, {"z_score", s.z_score}, {"top_terms", s.top_terms}});
  return {{"granularity", to_string(series.granularity)},
          {"buckets", std::move(buckets)},
          {"spikes", std::move(sp)}};
}

nlohmann::json to_json(const RegionCounts& counts) {
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& [name, c] : counts.regions)
    regions.push_back({{"region", name}, {"post_count", c.post_count}, {"lat", c.lat}, {"lon", c.lon}});
  return {{"regions", std::move(regions)}, {"unresolved", counts.unresolved}};
}

}  // namespace marsad::trends
