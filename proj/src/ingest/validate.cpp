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
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <unordered_set>
#include <variant>

#include "marsad/error.hpp"
#include "marsad/ingest.hpp"

namespace marsad::ingest {
namespace {

struct RowFailure {
  RowError code;
  std::string message;
};

std::optional<std::int64_t> parse_integer(const std::string& s) {
  std::string_view v = s;
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) return std::nullopt;
  return out;
}

std::optional<double> parse_float(const std::string& s) {
  if (s.empty() || std::isspace(static_cast<unsigned char>(s.front()))) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::vector<std::string> split_mentions(const std::string& raw) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    std::string_view v = current;
    while (!v.empty() && v.front() == '@') v.remove_prefix(1);
    if (!v.empty() && std::find(out.begin(), out.end(), v) == out.end()) out.emplace_back(v);
    current.clear();
  };
  for (char c : raw) {
    if (c == ',' || c == ';' || std::isspace(static_cast<unsigned char>(c)))
      flush();
    else
      current.push_back(c);
  }
  flush();
  return out;
}

const std::string* find_field(const RawRecord& record, const std::string& name) {
  auto it = record.fields.find(name);
  return it == record.fields.end() ? nullptr : &it->second;
}

std::string_view type_name(FieldType type) {
  switch (type) {
    case FieldType::kString: return "string";
    case FieldType::kInteger: return "integer";
    case FieldType::kFloat: return "float";
    case FieldType::kTimestamp: return "iso8601-timestamp";
  }
  return "string";
}

std::optional<FieldType> parse_type_name(std::string_view name) {
  if (name == "string") return FieldType::kString;
  if (name == "integer") return FieldType::kInteger;
  if (name == "float") return FieldType::kFloat;
  if (name == "iso8601-timestamp" || name == "timestamp") return FieldType::kTimestamp;
  return std::nullopt;
}

// Checks one row and builds its Post. Returns the failure for rejected rows.
std::variant<Post, RowFailure> check_row(const RawRecord& record, const PostSchema& schema,
                                         const TextOptions& options) {
  if (!record.decode_error.empty()) return RowFailure{RowError::kTypeMismatch, record.decode_error};

  for (const auto& name : schema.required) {
    const std::string* value = find_field(record, name);
    if (name == "text" && value != nullptr && is_blank(*value))
      return RowFailure{RowError::kEmptyText, "text is empty"};
    if (value == nullptr || is_blank(*value))
      return RowFailure{RowError::kMissingField, "missing required field '" + name + "'"};
  }

  for (const auto& [name, type] : schema.type_map) {
    const std::string* value = find_field(record, name);
    if (value == nullptr || value->empty()) continue;
    bool ok = true;
    switch (type) {
      case FieldType::kString: break;
      case FieldType::kInteger: ok = parse_integer(*value).has_value(); break;
      case FieldType::kFloat: ok = parse_float(*value).has_value(); break;
      case FieldType::kTimestamp:
        if (!parse_iso8601(*value))
          return RowFailure{RowError::kBadTimestamp,
                            "field '" + name + "' is not an ISO-8601 timestamp: '" + *value + "'"};
        break;
    }
    if (!ok) {
      return RowFailure{RowError::kTypeMismatch, "field '" + name + "' is not of type " +
                                                     std::string(type_name(type)) + ": '" +
                                                     *value + "'"};
    }
  }

  const std::string* timestamp = find_field(record, "timestamp");
  auto instant = parse_iso8601(*timestamp);
  if (!instant)
    return RowFailure{RowError::kBadTimestamp, "timestamp is not ISO-8601: '" + *timestamp + "'"};

  Post post;
  post.id = *find_field(record, "id");
  post.text = *find_field(record, "text");
  post.timestamp = *instant;

  auto optional_string = [&](const char* name) -> std::optional<std::string> {
    const std::string* v = find_field(record, name);
    if (v == nullptr || v->empty()) return std::nullopt;
    return *v;
  };
  post.author = optional_string("author");
  post.parent_id = optional_string("parent_id");
  if (auto mentions = optional_string("mentions")) post.mentions = split_mentions(*mentions);

  for (const char* name : {"likes", "shares"}) {
    auto raw = optional_string(name);
    if (!raw) continue;
    auto count = parse_integer(*raw);
    if (!count || *count < 0)
      return RowFailure{RowError::kTypeMismatch,
                        std::string("field '") + name + "' must be a non-negative integer"};
    (std::string_view(name) == "likes" ? post.likes : post.shares) = *count;
  }

  auto lat = optional_string("lat");
  auto lon = optional_string("lon");
  if (lat.has_value() != lon.has_value())
    return RowFailure{RowError::kMissingField, lat ? "lat given without lon" : "lon given without lat"};
  if (lat) {
    auto la = parse_float(*lat);
    auto lo = parse_float(*lon);
    if (!la || !lo || *la < -90 || *la > 90 || *lo < -180 || *lo > 180)
      return RowFailure{RowError::kTypeMismatch, "lat/lon out of range"};
    post.geo = Geo{*la, *lo};
  }

  if (auto lang = optional_string("lang")) {
    auto parsed = parse_lang(*lang);
    if (!parsed) return RowFailure{RowError::kTypeMismatch, "lang must be ar, en or unknown"};
    post.lang = *parsed;
  } else {
    post.lang = detect_language(post.text);
  }

  post.norm_text = normalize_text(post.text, post.lang);
  if (post.norm_text.empty())
    return RowFailure{RowError::kEmptyText, "text is empty after normalization"};
  post.tokens = tokenize(post.norm_text, options.stopword_set());
  return post;
}

}  // namespace

std::string_view to_string(RowError code) {
  switch (code) {
    case RowError::kMissingField: return "MISSING_FIELD";
    case RowError::kTypeMismatch: return "TYPE_MISMATCH";
    case RowError::kBadTimestamp: return "BAD_TIMESTAMP";
    case RowError::kEmptyText: return "EMPTY_TEXT";
    case RowError::kDupId: return "DUP_ID";
  }
  return "TYPE_MISMATCH";
}

std::string_view to_string(Lang lang) {
  switch (lang) {
    case Lang::kAr: return "ar";
    case Lang::kEn: return "en";
    case Lang::kUnknown: return "unknown";
  }
  return "unknown";
}

std::optional<Lang> parse_lang(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "ar") return Lang::kAr;
  if (lower == "en") return Lang::kEn;
  if (lower == "unknown") return Lang::kUnknown;
  return std::nullopt;
}

PostSchema PostSchema::defaults() {
  PostSchema schema;
  schema.required = {"id", "text", "timestamp"};
  schema.optional = {"author", "lat", "lon", "parent_id", "mentions", "likes", "shares", "lang"};
  schema.type_map = {
      {"id", FieldType::kString},       {"text", FieldType::kString},
      {"timestamp", FieldType::kTimestamp}, {"author", FieldType::kString},
      {"lat", FieldType::kFloat},       {"lon", FieldType::kFloat},
      {"parent_id", FieldType::kString}, {"mentions", FieldType::kString},
      {"likes", FieldType::kInteger},   {"shares", FieldType::kInteger},
      {"lang", FieldType::kString},
  };
  return schema;
}

PostSchema PostSchema::from_json(const nlohmann::json& j) {
  PostSchema schema = defaults();
  if (!j.is_object()) throw Error(Errc::kInvalidArgument, "schema must be a JSON object");
  auto read_set = [&](const char* key, std::set<std::string>& into) {
    if (!j.contains(key)) return;
    if (!j[key].is_array()) throw Error(Errc::kInvalidArgument, std::string(key) + " must be an array");
    into.clear();
    for (const auto& name : j[key]) {
      if (!name.is_string()) throw Error(Errc::kInvalidArgument, "field names must be strings");
      into.insert(name.get<std::string>());
    }
  };
  read_set("required", schema.required);
  read_set("optional", schema.optional);
  // A field promoted to required leaves the optional set.
  for (const auto& name : schema.required) schema.optional.erase(name);
  if (j.contains("types")) {
    if (!j["types"].is_object()) throw Error(Errc::kInvalidArgument, "types must be an object");
    for (const auto& [name, type] : j["types"].items()) {
      auto parsed = type.is_string() ? parse_type_name(type.get<std::string>()) : std::nullopt;
      if (!parsed) throw Error(Errc::kInvalidArgument, "unknown type for field '" + name + "'");
      schema.type_map[name] = *parsed;
    }
  }
  schema.check();
  return schema;
}

void PostSchema::check() const {
  for (const char* core : {"id", "text", "timestamp"}) {
    if (!required.contains(core))
      throw Error(Errc::kInvalidArgument, std::string("schema must require '") + core + "'");
  }
  for (const auto& name : required) {
    if (optional.contains(name))
      throw Error(Errc::kInvalidArgument, "field '" + name + "' is both required and optional");
    if (!type_map.contains(name))
      throw Error(Errc::kInvalidArgument, "field '" + name + "' has no type");
  }
  for (const auto& name : optional) {
    if (!type_map.contains(name))
      throw Error(Errc::kInvalidArgument, "field '" + name + "' has no type");
  }
  auto ts = type_map.find("timestamp");
  if (ts == type_map.end() || ts->second != FieldType::kTimestamp)
    throw Error(Errc::kInvalidArgument, "timestamp must have type iso8601-timestamp");
}

ParseResult validate_records(std::span<const RawRecord> records, const PostSchema& schema,
                             const TextOptions& options) {
  schema.check();
  ParseResult result;
  std::unordered_set<std::string> seen_ids;
  for (const auto& record : records) {
    auto outcome = check_row(record, schema, options);
    if (auto* failure = std::get_if<RowFailure>(&outcome)) {
      result.report.rejected.push_back({record.row_index, failure->code, std::move(failure->message)});
      continue;
    }
    auto& post = std::get<Post>(outcome);
    if (!seen_ids.insert(post.id).second) {
      result.report.rejected.push_back(
          {record.row_index, RowError::kDupId, "duplicate id '" + post.id + "'"});
      continue;
    }
    result.posts.push_back(std::move(post));
    ++result.report.accepted;
  }
  return result;
}

ParseResult parse_dataset(std::string_view bytes, SourceFormat format, const PostSchema& schema,
                          const TextOptions& options) {
  auto records = decode_records(bytes, format);
  return validate_records(records, schema, options);
}

DatasetMetadata infer_metadata(std::span<const Post> posts, const PostSchema& schema) {
  if (posts.empty()) throw Error(Errc::kEmptyDataset, "dataset has no posts");
  DatasetMetadata meta;
  meta.n_posts = posts.size();
  meta.first = posts.front().timestamp;
  meta.last = posts.front().timestamp;
  for (auto lang : {Lang::kAr, Lang::kEn, Lang::kUnknown}) meta.lang_counts[std::string(to_string(lang))] = 0;

  std::map<std::string, std::size_t> filled;
  for (const auto& name : schema.optional) filled[name] = 0;
  for (const auto& post : posts) {
    meta.first = std::min(meta.first, post.timestamp);
    meta.last = std::max(meta.last, post.timestamp);
    ++meta.lang_counts[std::string(to_string(post.lang))];
    auto mark = [&](const char* name, bool present) {
      auto it = filled.find(name);
      if (it != filled.end() && present) ++it->second;
    };
    mark("author", post.author.has_value());
    mark("lat", post.geo.has_value());
    mark("lon", post.geo.has_value());
    mark("parent_id", post.parent_id.has_value());
    mark("mentions", !post.mentions.empty());
    mark("likes", post.likes.has_value());
    mark("shares", post.shares.has_value());
    mark("lang", post.lang != Lang::kUnknown);
  }
  for (const auto& [name, count] : filled)
    meta.field_fill_rates[name] = static_cast<double>(count) / static_cast<double>(posts.size());
  return meta;
}

nlohmann::json to_json(const ValidationReport& report) {
  nlohmann::json rejected = nlohmann::json::array();
  for (const auto& r : report.rejected) {
    rejected.push_back({{"row_index", r.row_index}, {"error_code", to_string(r.code)}, {"message", r.message}});
  }
  return {{"accepted", report.accepted}, {"rejected", rejected}, {"total", report.total()}};
}

nlohmann::json to_json(const DatasetMetadata& m) {
  return {
      {"n_posts", m.n_posts},
      {"time_range", {format_iso8601(m.first), format_iso8601(m.last)}},
      {"lang_counts", m.lang_counts},
      {"field_fill_rates", m.field_fill_rates},
  };
}

DatasetMetadata metadata_from_json(const nlohmann::json& j) {
  DatasetMetadata m;
  m.n_posts = j.at("n_posts").get<std::size_t>();
  m.first = parse_iso8601(j.at("time_range").at(0).get<std::string>()).value();
  m.last = parse_iso8601(j.at("time_range").at(1).get<std::string>()).value();
  m.lang_counts = j.at("lang_counts").get<std::map<std::string, std::size_t>>();
  m.field_fill_rates = j.at("field_fill_rates").get<std::map<std::string, double>>();
  return m;
}

nlohmann::json to_record_json(const Post& post) {
  nlohmann::json j = {{"id", post.id}, {"text", post.text}, {"timestamp", format_iso8601(post.timestamp)}};
  if (post.author) j["author"] = *post.author;
  if (post.geo) {
    j["lat"] = post.geo->lat;
    j["lon"] = post.geo->lon;
  }
  if (post.parent_id) j["parent_id"] = *post.parent_id;
  if (!post.mentions.empty()) j["mentions"] = post.mentions;
  if (post.likes) j["likes"] = *post.likes;
  if (post.shares) j["shares"] = *post.shares;
  j["lang"] = to_string(post.lang);
  return j;
}

nlohmann::json to_document_json(const Post& post) {
  nlohmann::json j = to_record_json(post);
  j["norm_text"] = post.norm_text;
  j["tokens"] = post.tokens;
  return j;
}

Post post_from_document(const nlohmann::json& j) {
  Post post;
  post.id = j.at("id").get<std::string>();
  post.text = j.at("text").get<std::string>();
  post.norm_text = j.at("norm_text").get<std::string>();
  post.tokens = j.at("tokens").get<std::vector<std::string>>();
  auto ts = parse_iso8601(j.at("timestamp").get<std::string>());
  if (!ts) throw Error(Errc::kInternal, "stored post has a bad timestamp");
  post.timestamp = *ts;
  if (j.contains("author")) post.author = j["author"].get<std::string>();
  if (j.contains("lat")) post.geo = Geo{j["lat"].get<double>(), j["lon"].get<double>()};
  if (j.contains("parent_id")) post.parent_id = j["parent_id"].get<std::string>();
  if (j.contains("mentions")) post.mentions = j["mentions"].get<std::vector<std::string>>();
  if (j.contains("likes")) post.likes = j["likes"].get<std::int64_t>();
  if (j.contains("shares")) post.shares = j["shares"].get<std::int64_t>();
  post.lang = parse_lang(j.value("lang", "unknown")).value_or(Lang::kUnknown);
  return post;
}

}  // namespace marsad::ingest
