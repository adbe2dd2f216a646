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
#include <charconv>
#include <map>
#include <sstream>

#include "marsad/classify.hpp"
#include "marsad/embedded_data.hpp"
#include "marsad/error.hpp"

namespace marsad::classify {
namespace {

std::vector<std::string> entries(std::string_view content) {
  std::vector<std::string> out;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::string norm = ingest::normalize_text(line);
    if (!norm.empty()) out.push_back(std::move(norm));
  }
  return out;
}

}  // namespace

Lexicon lexicon_from_lists(std::string_view positive, std::string_view negative) {
  Lexicon lex;
  for (auto& t : entries(positive)) lex.positive.insert(std::move(t));
  for (auto& t : entries(negative)) lex.negative.insert(std::move(t));
  std::vector<std::string> both;
  std::set_intersection(lex.positive.begin(), lex.positive.end(), lex.negative.begin(),
                        lex.negative.end(), std::back_inserter(both));
  for (const auto& t : both) {
    lex.positive.erase(t);
    lex.negative.erase(t);
  }
  return lex;
}

const Lexicon& builtin_lexicon() {
  static const Lexicon lex = [] {
    std::string pos = std::string(embedded::file("sentiment_en_positive.txt")) + "\n" +
                      std::string(embedded::file("sentiment_ar_positive.txt"));
    std::string neg = std::string(embedded::file("sentiment_en_negative.txt")) + "\n" +
                      std::string(embedded::file("sentiment_ar_negative.txt"));
    return lexicon_from_lists(pos, neg);
  }();
  return lex;
}

nlohmann::json to_json(const Lexicon& lexicon) {
  return {{"version", lexicon.version},
          {"positive", lexicon.positive},
          {"negative", lexicon.negative}};
}

Lexicon lexicon_from_json(const nlohmann::json& j) {
  Lexicon lex;
  lex.version = j.value("version", 0);
  lex.positive = j.at("positive").get<std::set<std::string>>();
  lex.negative = j.at("negative").get<std::set<std::string>>();
  return lex;
}

std::string sentiment_label_for(double score, const SentimentThresholds& thresholds) {
  if (score > thresholds.positive) return "positive";
  if (score < thresholds.negative) return "negative";
  return "neutral";
}

SentimentLabel classify_sentiment(const ingest::Post& post, const Lexicon& lexicon,
                                  const SentimentThresholds& thresholds) {
  SentimentLabel out;
  for (const auto& t : post.tokens) {
    if (lexicon.positive.contains(t)) ++out.positive_hits;
    if (lexicon.negative.contains(t)) ++out.negative_hits;
  }
  std::size_t hits = out.positive_hits + out.negative_hits;
  if (hits > 0)
    out.score = (static_cast<double>(out.positive_hits) - static_cast<double>(out.negative_hits)) /
                static_cast<double>(hits);
  out.label = sentiment_label_for(out.score, thresholds);
  return out;
}

PatternSet parse_patterns(std::string_view tsv) {
  PatternSet set;
  std::istringstream in{std::string(tsv)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos)
      throw Error(Errc::kInvalidArgument, "pattern line " + std::to_string(line_no) +
                                              ": expected technique, weight, phrase");
    Pattern p;
    p.technique = line.substr(0, t1);
    std::string weight = line.substr(t1 + 1, t2 - t1 - 1);
    auto [ptr, ec] = std::from_chars(weight.data(), weight.data() + weight.size(), p.weight);
    if (ec != std::errc() || ptr != weight.data() + weight.size() || p.weight < 0.0)
      throw Error(Errc::kInvalidArgument, "pattern line " + std::to_string(line_no) +
                                              ": bad weight '" + weight + "'");
    p.phrase = ingest::normalize_text(line.substr(t2 + 1));
    if (p.phrase.empty()) continue;
    set.patterns.push_back(std::move(p));
  }
  return set;
}

const PatternSet& builtin_patterns() {
  static const PatternSet set = parse_patterns(embedded::file("propaganda_patterns.tsv"));
  return set;
}

PropagandaLabel classify_propaganda(const ingest::Post& post, const PatternSet& patterns,
                                    double flag_threshold) {
  std::vector<PropagandaSpan> matches;
  for (std::size_t p = 0; p < patterns.patterns.size(); ++p)
    for (const auto& span : ingest::find_phrase(post.norm_text, patterns.patterns[p].phrase))
      matches.push_back({span, p});

  std::sort(matches.begin(), matches.end(), [&](const PropagandaSpan& a, const PropagandaSpan& b) {
    auto la = a.span.end - a.span.begin;
    auto lb = b.span.end - b.span.begin;
    if (la != lb) return la > lb;
    if (a.span.begin != b.span.begin) return a.span.begin < b.span.begin;
    double wa = patterns.patterns[a.pattern].weight;
    double wb = patterns.patterns[b.pattern].weight;
    if (wa != wb) return wa > wb;
    return a.pattern < b.pattern;
  });

  PropagandaLabel out;
  for (const auto& m : matches) {
    bool overlaps = std::any_of(out.spans.begin(), out.spans.end(), [&](const PropagandaSpan& k) {
      return m.span.begin < k.span.end && k.span.begin < m.span.end;
    });
    if (!overlaps) out.spans.push_back(m);
  }
  std::sort(out.spans.begin(), out.spans.end(),
            [](const PropagandaSpan& a, const PropagandaSpan& b) { return a.span.begin < b.span.begin; });

  std::set<std::size_t> distinct;
  for (const auto& s : out.spans) distinct.insert(s.pattern);
  double sum = 0.0;
  const Pattern* strongest = nullptr;
  for (auto p : distinct) {
    const Pattern& pat = patterns.patterns[p];
    sum += pat.weight;
    if (!strongest || pat.weight > strongest->weight ||
        (pat.weight == strongest->weight && pat.technique < strongest->technique))
      strongest = &pat;
  }
  out.score = std::min(1.0, sum);
  out.flag = out.score >= flag_threshold;
  if (strongest) out.technique = strongest->technique;
  return out;
}

nlohmann::json to_json(const PropagandaLabel& label, const PatternSet& patterns,
                       std::string_view norm_text) {
  nlohmann::json spans = nlohmann::json::array();
  for (const auto& s : label.spans)
    spans.push_back({{"start", s.span.begin},
                     {"end", s.span.end},
                     {"text", std::string(norm_text.substr(s.span.begin, s.span.end - s.span.begin))},
                     {"technique", patterns.patterns[s.pattern].technique}});
  return {{"flag", label.flag},
          {"score", label.score},
          {"technique", label.technique ? nlohmann::json(*label.technique) : nlohmann::json()},
          {"spans", std::move(spans)}};
}

namespace {

class SentimentBaseline : public ClassifierAdapter {
 public:
  SentimentBaseline(Lexicon lexicon, SentimentThresholds thresholds)
      : lexicon_(std::move(lexicon)), thresholds_(thresholds) {}

  const std::string& id() const override { return id_; }
  AnalysisKind kind() const override { return AnalysisKind::kSentiment; }

  std::vector<ItemLabel> classify(std::span<const ingest::Post> posts) override {
    std::vector<ItemLabel> out;
    out.reserve(posts.size());
    for (const auto& post : posts) {
      auto s = classify_sentiment(post, lexicon_, thresholds_);
      ItemLabel item{post.id, s.label, s.score, std::nullopt, nlohmann::json::object()};
      item.details["positive_hits"] = s.positive_hits;
      item.details["negative_hits"] = s.negative_hits;
      out.push_back(std::move(item));
    }
    return out;
  }

  nlohmann::json describe() const override {
    return {{"adapter_id", id_}, {"kind", "sentiment"}, {"endpoint", "builtin"},
            {"lexicon_version", lexicon_.version}, {"labels", label_set(AnalysisKind::kSentiment)}};
  }

 private:
  std::string id_ = "sentiment-baseline";
  Lexicon lexicon_;
  SentimentThresholds thresholds_;
};

class PropagandaBaseline : public ClassifierAdapter {
 public:
  PropagandaBaseline(PatternSet patterns, double threshold)
      : patterns_(std::move(patterns)), threshold_(threshold) {}

  const std::string& id() const override { return id_; }
  AnalysisKind kind() const override { return AnalysisKind::kPropaganda; }

  std::vector<ItemLabel> classify(std::span<const ingest::Post> posts) override {
    std::vector<ItemLabel> out;
    out.reserve(posts.size());
    for (const auto& post : posts) {
      auto p = classify_propaganda(post, patterns_, threshold_);
      out.push_back({post.id, p.flag ? "propaganda" : "none", p.score, std::nullopt,
                     to_json(p, patterns_, post.norm_text)});
    }
    return out;
  }

  nlohmann::json describe() const override {
    return {{"adapter_id", id_}, {"kind", "propaganda"}, {"endpoint", "builtin"},
            {"patterns", patterns_.patterns.size()}, {"labels", label_set(AnalysisKind::kPropaganda)}};
  }

 private:
  std::string id_ = "propaganda-baseline";
  PatternSet patterns_;
  double threshold_;
};

}  // namespace

std::unique_ptr<ClassifierAdapter> make_sentiment_baseline(Lexicon lexicon,
                                                           SentimentThresholds thresholds) {
  return std::make_unique<SentimentBaseline>(std::move(lexicon), thresholds);
}

std::unique_ptr<ClassifierAdapter> make_propaganda_baseline(PatternSet patterns,
                                                            double flag_threshold) {
  return std::make_unique<PropagandaBaseline>(std::move(patterns), flag_threshold);
}

void AdapterRegistry::add(std::shared_ptr<ClassifierAdapter> adapter, bool make_default) {
  const std::string id = adapter->id();
  AnalysisKind kind = adapter->kind();
  adapters_[id] = std::move(adapter);
  if (make_default || !defaults_.contains(kind)) defaults_[kind] = id;
}

std::shared_ptr<ClassifierAdapter> AdapterRegistry::get(const std::string& id) const {
  auto it = adapters_.find(id);
  if (it == adapters_.end()) throw Error(Errc::kNotFound, "unknown adapter " + id);
  return it->second;
}

std::shared_ptr<ClassifierAdapter> AdapterRegistry::default_for(AnalysisKind kind) const {
  auto it = defaults_.find(kind);
  if (it == defaults_.end())
    throw Error(Errc::kNotFound, "no adapter for " + std::string(to_string(kind)));
  return get(it->second);
}

std::vector<std::shared_ptr<ClassifierAdapter>> AdapterRegistry::list() const {
  std::vector<std::shared_ptr<ClassifierAdapter>> out;
  for (const auto& [id, a] : adapters_) out.push_back(a);
  return out;
}

Lexicon apply_feedback(std::span<const Annotation> annotations,
                       std::span<const ingest::Post> posts, const Lexicon& lexicon,
                       std::size_t min_votes) {
  std::map<std::string, const Annotation*> latest;
  for (const auto& a : annotations) {
    if (a.kind != AnalysisKind::kSentiment) continue;
    auto& slot = latest[a.post_id];
    if (!slot || std::tie(a.created_at, a.annotation_id) >=
                     std::tie(slot->created_at, slot->annotation_id))
      slot = &a;
  }
  std::map<std::string, const ingest::Post*> by_id;
  for (const auto& p : posts) by_id.emplace(p.id, &p);

  std::map<std::string, std::pair<std::size_t, std::size_t>> votes;  // (positive, negative)
  for (const auto& [post_id, a] : latest) {
    bool positive = a->new_label == "positive";
    if (!positive && a->new_label != "negative") continue;
    auto it = by_id.find(post_id);
    if (it == by_id.end()) continue;
    std::set<std::string> distinct(it->second->tokens.begin(), it->second->tokens.end());
    for (const auto& t : distinct) (positive ? votes[t].first : votes[t].second) += 1;
  }

  Lexicon next = lexicon;
  for (const auto& [token, v] : votes) {
    if (v.first >= min_votes && v.first > v.second) {
      next.negative.erase(token);
      next.positive.insert(token);
    } else if (v.second >= min_votes && v.second > v.first) {
      next.positive.erase(token);
      next.negative.insert(token);
    }
  }
  next.version = lexicon.version;
  if (next.positive != lexicon.positive || next.negative != lexicon.negative) ++next.version;
  return next;
}

std::vector<PostAnalysis> post_analysis(std::span<const ingest::Post> posts,
                                        std::span<const ItemLabel> sentiment,
                                        std::span<const ItemLabel> propaganda,
                                        const std::vector<std::vector<std::string>>& locations) {
  std::vector<PostAnalysis> out;
  auto locs = [&](std::size_t i) {
    return i < locations.size() ? locations[i] : std::vector<std::string>{};
  };
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (i < sentiment.size() && !sentiment[i].error)
      out.push_back({posts[i].id, AnalysisKind::kSentiment, sentiment[i].label,
                     std::abs(sentiment[i].score), locs(i)});
    if (i < propaganda.size() && !propaganda[i].error)
      out.push_back({posts[i].id, AnalysisKind::kPropaganda, propaganda[i].label,
                     propaganda[i].score, locs(i)});
  }
  std::sort(out.begin(), out.end(), [](const PostAnalysis& a, const PostAnalysis& b) {
    if (a.kind != b.kind) return a.kind == AnalysisKind::kSentiment;
    if (a.degree != b.degree) return a.degree > b.degree;
    return a.post_id < b.post_id;
  });
  return out;
}

nlohmann::json to_json(const PostAnalysis& record) {
  return {{"post_id", record.post_id},
          {"kind", to_string(record.kind)},
          {"label", record.label},
          {"degree", record.degree},
          {"locations", record.locations}};
}

}  // namespace marsad::classify
