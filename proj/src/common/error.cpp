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

#include "marsad/error.hpp"

namespace marsad {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::kUndecodableInput: return "UNDECODABLE_INPUT";
    case Errc::kUnknownFormat: return "UNKNOWN_FORMAT";
    case Errc::kEmptyDataset: return "EMPTY_DATASET";
    case Errc::kNotFound: return "NOT_FOUND";
    case Errc::kForeignKey: return "FOREIGN_KEY";
    case Errc::kUnknownPost: return "UNKNOWN_POST";
    case Errc::kInvalidLabel: return "INVALID_LABEL";
    case Errc::kUnknownDataset: return "UNKNOWN_DATASET";
    case Errc::kDuplicateJob: return "DUPLICATE_JOB";
    case Errc::kIllegalTransition: return "ILLEGAL_TRANSITION";
    case Errc::kEmptyVocabulary: return "EMPTY_VOCABULARY";
    case Errc::kTooFewDocs: return "TOO_FEW_DOCS";
    case Errc::kKExceedsDocs: return "K_EXCEEDS_DOCS";
    case Errc::kNegativeInput: return "NEGATIVE_INPUT";
    case Errc::kRankTooLarge: return "RANK_TOO_LARGE";
    case Errc::kAdapterUnreachable: return "ADAPTER_UNREACHABLE";
    case Errc::kBadAdapterResponse: return "BAD_ADAPTER_RESPONSE";
    case Errc::kSeriesTooShort: return "SERIES_TOO_SHORT";
    case Errc::kEmptyGraph: return "EMPTY_GRAPH";
    case Errc::kCredentialsRequired: return "CREDENTIALS_REQUIRED";
    case Errc::kCredentialsRejected: return "CREDENTIALS_REJECTED";
    case Errc::kSourceUnreachable: return "SOURCE_UNREACHABLE";
    case Errc::kRateLimited: return "RATE_LIMITED";
    case Errc::kUnknownSource: return "UNKNOWN_SOURCE";
    case Errc::kUnknownKind: return "UNKNOWN_KIND";
    case Errc::kInvalidArgument: return "INVALID_ARGUMENT";
    case Errc::kUnauthorized: return "UNAUTHORIZED";
    case Errc::kIo: return "IO_ERROR";
    case Errc::kInternal: return "INTERNAL";
  }
  return "INTERNAL";
}

bool is_user_error(Errc code) {
  switch (code) {
    case Errc::kAdapterUnreachable:
    case Errc::kBadAdapterResponse:
    case Errc::kSourceUnreachable:
    case Errc::kRateLimited:
    case Errc::kIo:
    case Errc::kInternal:
      return false;
    default:
      return true;
  }
}

}  // namespace marsad
