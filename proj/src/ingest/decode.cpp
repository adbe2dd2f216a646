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
#include <cctype>
#include <string>

#include "marsad/error.hpp"
#include "marsad/ingest.hpp"

namespace marsad::ingest {
namespace {

// RFC 4180 reader. Quoted fields may contain the delimiter, doubled quotes
// and line breaks; both LF and CRLF terminate records.
class DelimitedReader {
 public:
  DelimitedReader(std::string_view text, char delimiter) : text_(text), delim_(delimiter) {}

  bool next(std::vector<std::string>& cells) {
    cells.clear();
    if (pos_ >= text_.size()) return false;
    std::string cell;
    bool in_quotes = false;
    bool quoted_cell = false;
    while (pos_ < text_.size()) {
      char c = text_[pos_++];
      if (in_quotes) {
        if (c == '"') {
          if (pos_ < text_.size() && text_[pos_] == '"') {
            cell.push_back('"');
            ++pos_;
          } else {
            in_quotes = false;
          }
        } else {
          cell.push_back(c);
        }
        continue;
      }
      if (c == '"' && cell.empty() && !quoted_cell) {
        in_quotes = true;
        quoted_cell = true;
      } else if (c == delim_) {
        cells.push_back(std::move(cell));
        cell.clear();
        quoted_cell = false;
      } else if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') {
        ++pos_;
        break;
      } else if (c == '\n') {
        break;
      } else {
        cell.push_back(c);
      }
    }
    cells.push_back(std::move(cell));
    return true;
  }

 private:
  std::string_view text_;
  char delim_;
  std::size_t pos_ = 0;
};

bool blank_row(const std::vector<std::string>& cells) {
  return cells.size() == 1 && cells.front().empty();
}

std::string_view strip_bom(std::string_view bytes) {
  if (bytes.size() >= 3 && bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);
  return bytes;
}

std::vector<RawRecord> decode_delimited(std::string_view bytes, SourceFormat format) {
  DelimitedReader reader(bytes, format == SourceFormat::kTsv ? '\t' : ',');
  std::vector<std::string> header;
  std::vector<std::string> cells;
  while (reader.next(header) && blank_row(header)) {
  }
  std::vector<RawRecord> records;
  if (header.empty() || blank_row(header)) return records;
  for (auto& name : header) {
    auto first = name.find_first_not_of(" \t");
    auto last = name.find_last_not_of(" \t");
    name = first == std::string::npos ? std::string() : name.substr(first, last - first + 1);
  }

  std::size_t row = 0;
  while (reader.next(cells)) {
    if (blank_row(cells)) continue;
    RawRecord record;
    record.row_index = ++row;
    record.source_format = format;
    if (cells.size() > header.size()) {
      record.decode_error = "row has " + std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(header.size());
    }
    std::size_t n = std::min(cells.size(), header.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (header[i].empty() || cells[i].empty()) continue;
      record.fields.emplace(header[i], std::move(cells[i]));
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::string value_to_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    bool all_scalar = std::all_of(v.begin(), v.end(), [](const nlohmann::json& e) {
      return e.is_string() || e.is_number();
    });
    if (all_scalar) {
      std::string joined;
      for (const auto& e : v) {
        if (!joined.empty()) joined.push_back(',');
        joined += e.is_string() ? e.get<std::string>() : e.dump();
      }
      return joined;
    }
  }
  return v.dump();
}

RawRecord record_from_json(const nlohmann::json& value, std::size_t row, SourceFormat format) {
  RawRecord record;
  record.row_index = row;
  record.source_format = format;
  if (!value.is_object()) {
    record.decode_error = std::string("row is a JSON ") + value.type_name() + ", expected object";
    return record;
  }
  for (const auto& [key, v] : value.items()) {
    if (v.is_null()) continue;
    record.fields.emplace(key, value_to_string(v));
  }
  return record;
}

std::vector<RawRecord> decode_jsonl(std::string_view bytes) {
  std::vector<RawRecord> records;
  std::size_t pos = 0;
  std::size_t row = 0;
  while (pos < bytes.size()) {
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    std::string_view line = bytes.substr(pos, end - pos);
    pos = end + 1;
    if (std::all_of(line.begin(), line.end(),
                    [](char c) { return std::isspace(static_cast<unsigned char>(c)); }))
      continue;
    ++row;
    auto parsed = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded()) {
      RawRecord record;
      record.row_index = row;
      record.source_format = SourceFormat::kJsonl;
      record.decode_error = "line is not valid JSON";
      records.push_back(std::move(record));
      continue;
    }
    records.push_back(record_from_json(parsed, row, SourceFormat::kJsonl));
  }
  return records;
}

std::vector<RawRecord> decode_json(std::string_view bytes) {
  auto parsed = nlohmann::json::parse(bytes, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) throw Error(Errc::kUndecodableInput, "JSON document does not parse");
  if (!parsed.is_array())
    throw Error(Errc::kUndecodableInput, "JSON upload must be an array of objects");
  std::vector<RawRecord> records;
  records.reserve(parsed.size());
  std::size_t row = 0;
  for (const auto& element : parsed)
    records.push_back(record_from_json(element, ++row, SourceFormat::kJson));
  return records;
}

}  // namespace

std::string_view to_string(SourceFormat format) {
  switch (format) {
    case SourceFormat::kCsv: return "csv";
    case SourceFormat::kTsv: return "tsv";
    case SourceFormat::kJson: return "json";
    case SourceFormat::kJsonl: return "jsonl";
  }
  return "jsonl";
}

std::optional<SourceFormat> parse_format(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "csv") return SourceFormat::kCsv;
  if (lower == "tsv") return SourceFormat::kTsv;
  if (lower == "json") return SourceFormat::kJson;
  if (lower == "jsonl" || lower == "ndjson") return SourceFormat::kJsonl;
  return std::nullopt;
}

std::vector<RawRecord> decode_records(std::string_view bytes, SourceFormat format) {
  if (!is_valid_utf8(bytes)) throw Error(Errc::kUndecodableInput, "input is not valid UTF-8");
  bytes = strip_bom(bytes);
  switch (format) {
    case SourceFormat::kCsv:
    case SourceFormat::kTsv:
      return decode_delimited(bytes, format);
    case SourceFormat::kJson:
      return decode_json(bytes);
    case SourceFormat::kJsonl:
      return decode_jsonl(bytes);
  }
  throw Error(Errc::kUnknownFormat, "unsupported format");
}

}  // namespace marsad::ingest
