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
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "marsad/ingest.hpp"
#include "marsad/records.hpp"

namespace marsad::classify {

struct Lexicon {
  int version = 0;
  std::set<std::string> positive;
  std::set<std::string> negative;

  bool operator==(const Lexicon&) const = default;
};

/// Shipped English and Arabic polarity lists, normalized. A term listed on
/// both sides is dropped from both.
const Lexicon& builtin_lexicon();
Lexicon lexicon_from_lists(std::string_view positive, std::string_view negative);
nlohmann::json to_json(const Lexicon& lexicon);
Lexicon lexicon_from_json(const nlohmann::json& j);

struct SentimentThresholds {
  double positive = 0.2;
  double negative = -0.2;
};

struct SentimentLabel {
  std::string label;
  double score = 0.0;
  std::size_t positive_hits = 0;
  std::size_t negative_hits = 0;
};

std::string sentiment_label_for(double score, const SentimentThresholds& thresholds = {});

/// score = (p - n) / (p + n) over token hits, 0 without hits.
SentimentLabel classify_sentiment(const ingest::Post& post, const Lexicon& lexicon,
                                  const SentimentThresholds& thresholds = {});

struct Pattern {
  std::string technique;
  double weight = 0.0;
  std::string phrase;  // normalized
};

struct PatternSet {
  std::vector<Pattern> patterns;
};

/// Parses `technique<TAB>weight<TAB>phrase` lines; `#` starts a comment line.
PatternSet parse_patterns(std::string_view tsv);
const PatternSet& builtin_patterns();

struct PropagandaSpan {
  ingest::Span span;
  std::size_t pattern = 0;  // index into PatternSet::patterns
};

struct PropagandaLabel {
  bool flag = false;
  double score = 0.0;
  std::vector<PropagandaSpan> spans;  // sorted by begin, non-overlapping
  std::optional<std::string> technique;
};

/// Overlapping matches keep the longest; score sums the weights of distinct
/// matched patterns, capped at 1.
PropagandaLabel classify_propaganda(const ingest::Post& post, const PatternSet& patterns,
                                    double flag_threshold = 0.5);

nlohmann::json to_json(const PropagandaLabel& label, const PatternSet& patterns,
                       std::string_view norm_text);

/// One adapter output. `error` marks an item the adapter could not label.
struct ItemLabel {
  std::string id;
  std::string label;
  double score = 0.0;
  std::optional<std::string> error;
  nlohmann::json details = nlohmann::json::object();
};

class ClassifierAdapter {
 public:
  virtual ~ClassifierAdapter() = default;
  virtual const std::string& id() const = 0;
  virtual AnalysisKind kind() const = 0;
  /// One label per post, in order. Throws Error(kAdapterUnreachable),
  /// Error(kBadAdapterResponse).
  virtual std::vector<ItemLabel> classify(std::span<const ingest::Post> posts) = 0;
  virtual nlohmann::json describe() const = 0;
};

std::unique_ptr<ClassifierAdapter> make_sentiment_baseline(Lexicon lexicon,
                                                           SentimentThresholds thresholds = {});
std::unique_ptr<ClassifierAdapter> make_propaganda_baseline(PatternSet patterns,
                                                            double flag_threshold = 0.5);

struct HttpAdapterOptions {
  std::string id;
  AnalysisKind kind = AnalysisKind::kSentiment;
  std::string url;
  std::string token;
  std::chrono::milliseconds timeout{30000};
  std::size_t batch_size = 64;
  std::size_t max_in_flight = 4;
};

/// POSTs `{"kind", "items":[{"id","text"}]}` and expects
/// `{"labels":[{"id","label","score"}]}` with one entry per item in order.
std::unique_ptr<ClassifierAdapter> make_http_adapter(HttpAdapterOptions options);

/// Adapters by id, with one default per kind.
class AdapterRegistry {
 public:
  void add(std::shared_ptr<ClassifierAdapter> adapter, bool make_default = false);
  /// Throws Error(kNotFound).
  std::shared_ptr<ClassifierAdapter> get(const std::string& id) const;
  /// Throws Error(kNotFound) when no adapter serves the kind.
  std::shared_ptr<ClassifierAdapter> default_for(AnalysisKind kind) const;
  std::vector<std::shared_ptr<ClassifierAdapter>> list() const;

 private:
  std::map<std::string, std::shared_ptr<ClassifierAdapter>> adapters_;
  std::map<AnalysisKind, std::string> defaults_;
};

/// Updated lexicon after relabels. Only the latest sentiment annotation per
/// post counts; each such post votes once with each of its distinct tokens.
/// A token needing a side gets >= min_votes agreeing votes and more than the
/// opposite side; it then moves to that side. The version increments only if
/// the lexicon changed.
Lexicon apply_feedback(std::span<const Annotation> annotations,
                       std::span<const ingest::Post> posts, const Lexicon& lexicon,
                       std::size_t min_votes = 3);

struct PostAnalysis {
  std::string post_id;
  AnalysisKind kind = AnalysisKind::kSentiment;
  std::string label;
  double degree = 0.0;
  std::vector<std::string> locations;
};

/// Records sorted by kind (sentiment first), then degree desc, then post id.
std::vector<PostAnalysis> post_analysis(std::span<const ingest::Post> posts,
                                        std::span<const ItemLabel> sentiment,
                                        std::span<const ItemLabel> propaganda,
                                        const std::vector<std::vector<std::string>>& locations);

nlohmann::json to_json(const PostAnalysis& record);

}  // namespace marsad::classify
