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

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace marsad {

/// A UTC instant with millisecond resolution.
using Instant = std::chrono::sys_time<std::chrono::milliseconds>;

/// Parses an ISO-8601 timestamp. Accepted forms:
///   YYYY-MM-DD
///   YYYY-MM-DD[T| ]hh:mm[:ss[.fff...]][Z|(+|-)hh[:]mm]
/// A missing zone designator is read as UTC. Fractions beyond milliseconds
/// are truncated.
std::optional<Instant> parse_iso8601(std::string_view text);

/// Formats as `YYYY-MM-DDThh:mm:ssZ`, or with a `.mmm` fraction when the
/// instant is not a whole second.
std::string format_iso8601(Instant t);

Instant now_utc();

}  // namespace marsad
