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

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "json.hpp"
#include "marsad/classify.hpp"
#include "marsad/config.hpp"
#include "marsad/ingest.hpp"
#include "marsad/records.hpp"
#include "marsad/trends.hpp"

namespace marsad {

struct AnalysisContext {
  AnalysisConfig config;
  classify::Lexicon lexicon = classify::builtin_lexicon();
  /// Baselines over `lexicon` / the built-in patterns when unset.
  std::shared_ptr<classify::ClassifierAdapter> sentiment;
  std::shared_ptr<classify::ClassifierAdapter> propaganda;
  const trends::Gazetteer* gazetteer = &trends::Gazetteer::builtin();
};

/// Runs one analysis kind and returns its result payload. The payload depends
/// only on the posts, the context and the seed.
nlohmann::json run_analysis(AnalysisKind kind, std::span<const ingest::Post> posts,
                            const AnalysisContext& context, std::uint64_t seed);

enum class ExportFormat { kCsv, kJson };
std::optional<ExportFormat> parse_export_format(std::string_view name);

/// Report file for a result payload: pretty JSON, or a CSV table per kind.
std::string export_payload(AnalysisKind kind, const nlohmann::json& payload, ExportFormat format);

/// Header row of the CSV export for a kind.
std::string csv_header(AnalysisKind kind);

}  // namespace marsad
