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

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "marsad/ingest.hpp"
#include "marsad/time.hpp"

namespace marsad::trends {

enum class Granularity { kHour, kDay, kWeek };

std::string_view to_string(Granularity g);
std::optional<Granularity> parse_granularity(std::string_view name);

/// Start of the UTC bucket containing `t`. Weeks start on Monday.
Instant bucket_start(Instant t, Granularity g);

struct Bucket {
  Instant start{};
  std::size_t post_count = 0;
  std::int64_t engagement = 0;
  bool operator==(const Bucket&) const = default;
};

struct TimeSeries {
  Granularity granularity = Granularity::kDay;
  std::vector<Bucket> buckets;
};

/// Contiguous buckets from the earliest to the latest post, empty ones included.
TimeSeries bucket_timeline(std::span<const ingest::Post> posts, Granularity g);

/// z per bucket over a trailing window that includes the bucket itself
/// (population std; std = 0 gives z = 0). Buckets before index `window` have
/// no score.
std::vector<std::optional<double>> spike_scores(const TimeSeries& series, std::size_t window = 7);

struct Spike {
  Instant start{};
  std::size_t bucket = 0;
  double z_score = 0.0;
  std::vector<std::string> top_terms;
};

/// Throws Error(kSeriesTooShort) with fewer than window + 1 buckets. Top
/// terms come from the posts inside each flagged bucket.
std::vector<Spike> detect_spikes(const TimeSeries& series, std::span<const ingest::Post> posts,
                                 std::size_t window = 7, double z_threshold = 2.0);

struct GazetteerEntry {
  std::string region;
  std::string lang;
  std::string alias;  // normalized
  double lat = 0.0;
  double lon = 0.0;
};

struct RegionPoint {
  double lat = 0.0;
  double lon = 0.0;
};

class Gazetteer {
 public:
  /// CSV `region,lang,alias,lat,lon` with a header row.
  static Gazetteer from_csv(std::string_view csv);
  static const Gazetteer& builtin();

  const std::vector<GazetteerEntry>& entries() const { return entries_; }
  const std::map<std::string, RegionPoint>& regions() const { return regions_; }

  /// Nearest region within max_km, or nothing. Equidistant regions resolve to
  /// the lexicographically smaller name.
  std::optional<std::string> nearest(double lat, double lon, double max_km = 100.0) const;

 private:
  std::vector<GazetteerEntry> entries_;
  std::map<std::string, RegionPoint> regions_;  // first coordinates listed per region
};

double haversine_km(double lat1, double lon1, double lat2, double lon2);

inline constexpr std::string_view kOtherRegion = "other";

enum class LocationSource { kGeotag, kText };
std::string_view to_string(LocationSource s);

struct LocationMention {
  std::string mention;
  std::string region;
  LocationSource source = LocationSource::kText;
  bool operator==(const LocationMention&) const = default;
};

/// Geotag first (nearest region within 100 km, else "other"), then alias
/// matches in norm_text in order of position.
std::vector<LocationMention> extract_locations(const ingest::Post& post, const Gazetteer& gazetteer);

struct RegionCount {
  std::size_t post_count = 0;
  double lat = 0.0;
  double lon = 0.0;
};

struct RegionCounts {
  std::map<std::string, RegionCount> regions;
  /// Posts whose only locations were unresolved geotags.
  std::size_t unresolved = 0;
};

/// Counts each region once per post. "other" is tallied in `unresolved`.
RegionCounts aggregate_regions(const std::vector<std::vector<LocationMention>>& per_post,
                               const Gazetteer& gazetteer);

nlohmann::json to_json(const TimeSeries& series, const std::vector<std::optional<double>>& z,
                       const std::vector<Spike>& spikes);
nlohmann::json to_json(const RegionCounts& counts);

}  // namespace marsad::trends
