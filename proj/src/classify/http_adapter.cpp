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

#include <future>
#include <semaphore>

#include "httplib.h"
#include "marsad/classify.hpp"
#include "marsad/error.hpp"
#include "../common/http_util.hpp"

namespace marsad::classify {
namespace {

class HttpAdapter : public ClassifierAdapter {
 public:
  explicit HttpAdapter(HttpAdapterOptions options)
      : options_(std::move(options)),
        in_flight_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(options_.max_in_flight, 1))) {
    auto parts = detail::split_url(options_.url);
    if (!parts) throw Error(Errc::kInvalidArgument, "adapter url must be http(s)://host[:port]/path");
    url_ = *parts;
    if (options_.batch_size == 0) options_.batch_size = 1;
  }

  const std::string& id() const override { return options_.id; }
  AnalysisKind kind() const override { return options_.kind; }

  std::vector<ItemLabel> classify(std::span<const ingest::Post> posts) override {
    std::vector<std::future<std::vector<ItemLabel>>> batches;
    for (std::size_t begin = 0; begin < posts.size(); begin += options_.batch_size) {
      auto batch = posts.subspan(begin, std::min(options_.batch_size, posts.size() - begin));
      batches.push_back(std::async(std::launch::async, [this, batch] {
        in_flight_.acquire();
        try {
          auto labels = call(batch);
          in_flight_.release();
          return labels;
        } catch (...) {
          in_flight_.release();
          throw;
        }
      }));
    }
    std::vector<ItemLabel> out;
    out.reserve(posts.size());
    std::exception_ptr first_error;
    for (auto& f : batches) {
      try {
        auto labels = f.get();
        out.insert(out.end(), std::make_move_iterator(labels.begin()),
                   std::make_move_iterator(labels.end()));
      } catch (...) {
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
  }

  nlohmann::json describe() const override {
    return {{"adapter_id", options_.id},
            {"kind", to_string(options_.kind)},
            {"endpoint", options_.url},
            {"labels", label_set(options_.kind)}};
  }

 private:
  std::vector<ItemLabel> call(std::span<const ingest::Post> batch) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& p : batch) items.push_back({{"id", p.id}, {"text", p.text}});
    nlohmann::json request = {{"kind", to_string(options_.kind)}, {"items", std::move(items)}};

    if (!detail::reachable_scheme(url_))
      throw Error(Errc::kAdapterUnreachable, "adapter " + options_.id + ": https is not supported in this build");
    httplib::Client client(url_.origin);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!options_.token.empty()) headers.emplace("Authorization", "Bearer " + options_.token);
    auto res = client.Post(url_.path, headers, request.dump(), "application/json");
    if (!res)
      throw Error(Errc::kAdapterUnreachable,
                  "adapter " + options_.id + ": " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
      throw Error(Errc::kAdapterUnreachable,
                  "adapter " + options_.id + " returned HTTP " + std::to_string(res->status));
    return parse(batch, res->body);
  }

  std::vector<ItemLabel> parse(std::span<const ingest::Post> batch, const std::string& body) {
    auto bad = [&](const std::string& why) {
      return Error(Errc::kBadAdapterResponse, "adapter " + options_.id + ": " + why);
    };
    nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("labels") || !doc["labels"].is_array())
      throw bad("response must be an object with a labels array");
    const auto& labels = doc["labels"];
    if (labels.size() != batch.size())
      throw bad("expected " + std::to_string(batch.size()) + " labels, got " +
                std::to_string(labels.size()));

    const auto& allowed = label_set(options_.kind);
    std::vector<ItemLabel> out;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& l = labels[i];
      if (!l.is_object() || l.value("id", std::string()) != batch[i].id)
        throw bad("label " + std::to_string(i) + " does not match item id " + batch[i].id);
      ItemLabel item;
      item.id = batch[i].id;
      if (l.contains("error")) {
        item.error = l["error"].is_string() ? l["error"].get<std::string>() : l["error"].dump();
      } else if (!l.contains("label") || !l["label"].is_string() || !l.contains("score") ||
                 !l["score"].is_number()) {
        item.error = "missing label or score";
      } else {
        item.label = l["label"].get<std::string>();
        item.score = l["score"].get<double>();
        if (std::find(allowed.begin(), allowed.end(), item.label) == allowed.end())
          item.error = "label '" + item.label + "' is outside the label set";
      }
      out.push_back(std::move(item));
    }
    return out;
  }

  HttpAdapterOptions options_;
  detail::UrlParts url_;
  std::counting_semaphore<> in_flight_;
};

}  // namespace

std::unique_ptr<ClassifierAdapter> make_http_adapter(HttpAdapterOptions options) {
  return std::make_unique<HttpAdapter>(std::move(options));
}

}  // namespace marsad::classify
