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

#include <stdexcept>
#include <string>
#include <string_view>

namespace marsad {

/// Engine error codes. The string form (to_string) is the wire name used in
/// API bodies and CLI output.
enum class Errc {
  kUndecodableInput,
  kUnknownFormat,
  kEmptyDataset,
  kNotFound,
  kForeignKey,
  kUnknownPost,
  kInvalidLabel,
  kUnknownDataset,
  kDuplicateJob,
  kIllegalTransition,
  kEmptyVocabulary,
  kTooFewDocs,
  kKExceedsDocs,
  kNegativeInput,
  kRankTooLarge,
  kAdapterUnreachable,
  kBadAdapterResponse,
  kSeriesTooShort,
  kEmptyGraph,
  kCredentialsRequired,
  kCredentialsRejected,
  kSourceUnreachable,
  kRateLimited,
  kUnknownSource,
  kUnknownKind,
  kInvalidArgument,
  kUnauthorized,
  kIo,
  kInternal,
};

std::string_view to_string(Errc code);

/// True for errors caused by caller input (bad ids, bad data, conflicts), as
/// opposed to environment or internal failures.
bool is_user_error(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace marsad
