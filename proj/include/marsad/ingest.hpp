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
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "marsad/time.hpp"

namespace marsad::ingest {

enum class SourceFormat { kCsv, kTsv, kJson, kJsonl };

std::string_view to_string(SourceFormat format);
/// Accepts "csv", "tsv", "json", "jsonl" (case-insensitive).
std::optional<SourceFormat> parse_format(std::string_view name);

/// One row of an upload before validation. `decode_error` is non-empty when
/// the row could not be read as a record at all (bad JSON line, ragged CSV).
struct RawRecord {
  std::size_t row_index = 0;
  std::map<std::string, std::string> fields;
  SourceFormat source_format = SourceFormat::kJsonl;
  std::string decode_error;
};

enum class FieldType { kString, kInteger, kFloat, kTimestamp };

struct PostSchema {
  std::set<std::string> required;
  std::set<std::string> optional;
  std::map<std::string, FieldType> type_map;

  /// {id, text, timestamp} required; author, lat, lon, parent_id, mentions,
  /// likes, shares, lang optional.
  static PostSchema defaults();

  /// Parses `{"required": [...], "optional": [...], "types": {field: type}}`.
  /// Missing keys fall back to the defaults.
  static PostSchema from_json(const nlohmann::json& j);

  /// Throws Error(kInvalidArgument) when the invariants do not hold.
  void check() const;
};

enum class Lang { kAr, kEn, kUnknown };

std::string_view to_string(Lang lang);
std::optional<Lang> parse_lang(std::string_view name);

struct Geo {
  double lat = 0;
  double lon = 0;
  bool operator==(const Geo&) const = default;
};

struct Post {
  std::string id;
  std::string text;
  std::string norm_text;
  std::vector<std::string> tokens;
  std::optional<std::string> author;
  Instant timestamp{};
  std::optional<Geo> geo;
  std::optional<std::string> parent_id;
  std::vector<std::string> mentions;
  std::optional<std::int64_t> likes;
  std::optional<std::int64_t> shares;
  Lang lang = Lang::kUnknown;

  std::int64_t engagement() const { return likes.value_or(0) + shares.value_or(0); }
  bool operator==(const Post&) const = default;
};

enum class RowError { kMissingField, kTypeMismatch, kBadTimestamp, kEmptyText, kDupId };

std::string_view to_string(RowError code);

struct Rejection {
  std::size_t row_index = 0;
  RowError code = RowError::kMissingField;
  std::string message;
};

struct ValidationReport {
  std::size_t accepted = 0;
  std::vector<Rejection> rejected;

  std::size_t total() const { return accepted + rejected.size(); }
};

struct ParseResult {
  std::vector<Post> posts;
  ValidationReport report;
};

using StopwordSet = std::unordered_set<std::string>;

/// Built-in Arabic + English stopwords, already normalized.
const StopwordSet& builtin_stopwords();

struct TextOptions {
  /// Replaces the built-in stopword list when set.
  std::shared_ptr<const StopwordSet> stopwords;

  const StopwordSet& stopword_set() const {
    return stopwords ? *stopwords : builtin_stopwords();
  }
};

/// Splits an upload into raw rows. Throws Error(kUndecodableInput) when the
/// bytes are not UTF-8 or a JSON document does not parse.
std::vector<RawRecord> decode_records(std::string_view bytes, SourceFormat format);

/// Validates rows against the schema. Every row is either accepted or
/// rejected with exactly one reason; the first occurrence of an id wins.
ParseResult validate_records(std::span<const RawRecord> records, const PostSchema& schema,
                             const TextOptions& options = {});

ParseResult parse_dataset(std::string_view bytes, SourceFormat format,
                          const PostSchema& schema = PostSchema::defaults(),
                          const TextOptions& options = {});

bool is_valid_utf8(std::string_view bytes);

/// NFC, control characters stripped, lowercased, whitespace collapsed.
/// Unless the hint is `en`, Arabic diacritics (U+064B..U+065F) and tatweel
/// are removed, alef variants fold to bare alef and alef maksura to yeh.
std::string normalize_text(std::string_view text, Lang lang_hint = Lang::kUnknown);

/// Splits on whitespace, punctuation and symbols; drops tokens shorter than
/// two code points and stopwords. Order is preserved.
std::vector<std::string> tokenize(std::string_view norm_text, const StopwordSet& stopwords);

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const Span&) const = default;
};

/// Byte ranges where `phrase` occurs in `norm_text` starting and ending on
/// word boundaries (the separators used by tokenize). Matches may overlap.
std::vector<Span> find_phrase(std::string_view norm_text, std::string_view phrase);

/// ar when at least half the letters are Arabic, en when at least half are
/// Latin, unknown otherwise.
Lang detect_language(std::string_view text);

/// Builds a Post from text fields, deriving norm_text, tokens and lang.
Post make_post(std::string id, std::string text, Instant timestamp,
               const TextOptions& options = {});

struct DatasetMetadata {
  std::size_t n_posts = 0;
  Instant first{};
  Instant last{};
  std::map<std::string, std::size_t> lang_counts;
  std::map<std::string, double> field_fill_rates;

  bool operator==(const DatasetMetadata&) const = default;
};

/// Throws Error(kEmptyDataset) for an empty list.
DatasetMetadata infer_metadata(std::span<const Post> posts,
                               const PostSchema& schema = PostSchema::defaults());

nlohmann::json to_json(const ValidationReport& report);
nlohmann::json to_json(const DatasetMetadata& metadata);
DatasetMetadata metadata_from_json(const nlohmann::json& j);

/// Upload-shaped record: only the source fields, re-ingestable as JSONL.
nlohmann::json to_record_json(const Post& post);
/// Stored document: source fields plus norm_text and tokens.
nlohmann::json to_document_json(const Post& post);
Post post_from_document(const nlohmann::json& j);

}  // namespace marsad::ingest
