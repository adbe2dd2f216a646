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

#include "marsad/api.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <filesystem>

#include "httplib.h"
#include "marsad/time.hpp"

namespace marsad::api {

using nlohmann::json;

namespace {

bool constant_time_equal(std::string_view a, std::string_view b) {
  unsigned char diff = a.size() == b.size() ? 0 : 1;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    unsigned char x = i < a.size() ? static_cast<unsigned char>(a[i]) : 0;
    unsigned char y = i < b.size() ? static_cast<unsigned char>(b[i]) : 0;
    diff |= static_cast<unsigned char>(x ^ y);
  }
  return diff == 0;
}

}  // namespace

std::optional<std::string> auth_check(std::string_view header,
                                      const std::map<std::string, std::string>& tokens) {
  constexpr std::string_view kPrefix = "Bearer ";
  if (header.size() <= kPrefix.size() || header.substr(0, kPrefix.size()) != kPrefix)
    return std::nullopt;
  std::string_view presented = header.substr(kPrefix.size());
  std::optional<std::string> principal;
  for (const auto& [token, who] : tokens)  // no early exit
    if (constant_time_equal(presented, token) && !principal) principal = who;
  return principal;
}

int http_status(Errc code) {
  switch (code) {
    case Errc::kNotFound:
    case Errc::kUnknownDataset:
    case Errc::kUnknownPost:
    case Errc::kUnknownSource:
      return 404;
    case Errc::kDuplicateJob:
    case Errc::kIllegalTransition:
      return 409;
    case Errc::kUndecodableInput:
    case Errc::kEmptyDataset:
    case Errc::kInvalidLabel:
    case Errc::kForeignKey:
      return 422;
    case Errc::kUnauthorized:
      return 401;
    case Errc::kRateLimited:
      return 429;
    case Errc::kSourceUnreachable:
    case Errc::kAdapterUnreachable:
    case Errc::kBadAdapterResponse:
      return 502;
    case Errc::kIo:
    case Errc::kInternal:
      return 500;
    default:
      return 400;
  }
}

namespace {

json error_body(std::string_view code, std::string_view message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
  send(res, http_status(e.code()), error_body(to_string(e.code()), e.what()));
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object())
    throw Error(Errc::kInvalidArgument, "request body must be a JSON object");
  return body;
}

std::string required_string(const json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_string() || body[key].get<std::string>().empty())
    throw Error(Errc::kInvalidArgument, std::string("missing string field '") + key + "'");
  return body[key].get<std::string>();
}

std::size_t limit_param(const httplib::Request& req, std::size_t fallback = 50) {
  if (!req.has_param("limit")) return fallback;
  std::string v = req.get_param_value("limit");
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec != std::errc() || ptr != v.data() + v.size() || n == 0 || n > 1000)
    throw Error(Errc::kInvalidArgument, "limit must be an integer in [1, 1000]");
  return n;
}

AnalysisKind kind_param(const std::string& name) {
  auto kind = parse_analysis_kind(name);
  if (!kind) throw Error(Errc::kUnknownKind, "unknown analysis kind '" + name + "'");
  return *kind;
}

ingest::SourceFormat format_for(const std::string& explicit_format, const std::string& filename) {
  std::string name = explicit_format;
  if (name.empty()) {
    auto ext = std::filesystem::path(filename).extension().string();
    if (!ext.empty()) name = ext.substr(1);
  }
  auto f = ingest::parse_format(name);
  if (!f) throw Error(Errc::kUnknownFormat, "unknown or missing format '" + name + "'");
  return *f;
}

}  // namespace

struct Server::Impl {
  Engine& engine;
  httplib::Server http;
  jobs::WebhookNotifier webhooks;
  std::unique_ptr<jobs::WorkerPool> workers;
  int port = -1;

  explicit Impl(Engine& e) : engine(e) {
    webhooks.attach(engine.queue());
    routes();
  }

  std::string principal_of(const httplib::Request& req) const {
    return auth_check(req.get_header_value("Authorization"), engine.config().tokens).value_or("");
  }

  json job_json(const AnalysisJob& job) {
    json j = to_json(job);
    j["queue_position"] = engine.queue().queue_position(job.job_id);
    return j;
  }

  template <typename Fn>
  httplib::Server::Handler wrap(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, e);
      } catch (const json::exception& e) {
        send(res, 400, error_body("INVALID_ARGUMENT", e.what()));
      }
    };
  }

  void routes() {
    const auto& cfg = engine.config();
    http.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (req.path.rfind("/v1/", 0) != 0 || req.method == "OPTIONS")
        return httplib::Server::HandlerResponse::Unhandled;
      auto principal = auth_check(req.get_header_value("Authorization"), engine.config().tokens);
      if (!principal) {
        send(res, 401, error_body("UNAUTHORIZED", "missing or invalid bearer token"));
        return httplib::Server::HandlerResponse::Handled;
      }
      return httplib::Server::HandlerResponse::Unhandled;
    });
    http.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
      std::string who = principal_of(req);
      spdlog::info("audit principal={} {} {} -> {}", who.empty() ? "-" : who, req.method, req.path,
                   res.status);
    });
    if (!cfg.server.cors_origin.empty()) {
      std::string origin = cfg.server.cors_origin;
      http.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Access-Control-Allow-Headers", "Authorization, Content-Type");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
      });
    }
    http.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string what = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      spdlog::error("handler failed: {}", what);
      send(res, 500, error_body("INTERNAL", what));
    });
    if (!cfg.server.static_dir.empty() && std::filesystem::is_directory(cfg.server.static_dir))
      http.set_mount_point("/app", cfg.server.static_dir.string());

    http.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      send(res, 200, {{"status", "ok"}});
    });

    http.Post("/v1/datasets", wrap([this](const httplib::Request& req, httplib::Response& res) {
      std::string bytes, filename, format, name, schema_text;
      if (req.is_multipart_form_data()) {
        if (!req.has_file("file")) throw Error(Errc::kInvalidArgument, "multipart field 'file' is required");
        auto file = req.get_file_value("file");
        bytes = file.content;
        filename = file.filename;
        if (req.has_file("format")) format = req.get_file_value("format").content;
        if (req.has_file("name")) name = req.get_file_value("name").content;
        if (req.has_file("schema")) schema_text = req.get_file_value("schema").content;
      } else {
        bytes = req.body;
        format = req.get_param_value("format");
        name = req.get_param_value("name");
        schema_text = req.get_param_value("schema");
      }
      if (format.empty() && req.has_param("format")) format = req.get_param_value("format");
      auto fmt = format_for(format, filename);
      ingest::PostSchema schema = ingest::PostSchema::defaults();
      if (!schema_text.empty()) {
        json sj = json::parse(schema_text, nullptr, false);
        if (sj.is_discarded()) throw Error(Errc::kInvalidArgument, "schema is not valid JSON");
        schema = ingest::PostSchema::from_json(sj);
      }
      if (name.empty()) name = filename.empty() ? "upload" : filename;
      auto outcome = engine.ingest(name, bytes, fmt, schema);
      json body = to_json(outcome);
      if (!outcome.dataset_id) {
        body["error"] = {{"code", "EMPTY_DATASET"}, {"message", "no row passed validation"}};
        send(res, 422, body);
        return;
      }
      send(res, 201, body);
    }));

    http.Get("/v1/datasets", wrap([this](const httplib::Request& req, httplib::Response& res) {
      std::size_t limit = limit_param(req);
      auto items = engine.store().list_datasets(limit + 1, req.get_param_value("after"));
      json out = {{"items", json::array()}, {"next_after", nullptr}};
      for (std::size_t i = 0; i < items.size() && i < limit; ++i) out["items"].push_back(to_json(items[i]));
      if (items.size() > limit) out["next_after"] = items[limit - 1].dataset_id;
      send(res, 200, out);
    }));

    http.Get(R"(/v1/datasets/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
      send(res, 200, to_json(engine.store().get_dataset_record(req.matches[1])));
    }));

    http.Get(R"(/v1/datasets/([^/]+)/results)", wrap([this](const httplib::Request& req, httplib::Response& res) {
      std::optional<AnalysisKind> kind;
      if (req.has_param("kind")) kind = kind_param(req.get_param_value("kind"));
      json items = json::array();
      for (const auto& r : engine.store().get_results(req.matches[1], kind)) items.push_back(to_json(r));
      send(res, 200, {{"items", std::move(items)}});
    }));

    http.Get(R"(/v1/datasets/([^/]+)/annotations)", wrap([this](const httplib::Request& req, httplib::Response& res) {
      if (!engine.store().has_dataset(req.matches[1]))
        throw Error(Errc::kNotFound, "unknown dataset " + std::string(req.matches[1]));
      json items = json::array();
      for (const auto& a : engine.store().list_annotations(req.matches[1])) items.push_back(to_json(a));
      send(res, 200, {{"items", std::move(items)}});
    }));

    http.Post("/v1/jobs", wrap([this](const httplib::Request& req, httplib::Response& res) {
      json body = parse_body(req);
      jobs::SubmitRequest r;
      r.dataset_id = required_string(body, "dataset_id");
      r.kind = kind_param(required_string(body, "kind"));
      if (body.contains("priority")) r.priority = body["priority"].get<int>();
      if (body.contains("webhook")) {
        std::string hook = body["webhook"].get<std::string>();
        if (hook.rfind("http://", 0) != 0 && hook.rfind("https://", 0) != 0)
          throw Error(Errc::kInvalidArgument, "webhook must be an http(s) URL");
        r.webhook = hook;
      }
      if (body.contains("seed")) r.seed = body["seed"].get<std::uint64_t>();
      std::string id = engine.submit(r);
      send(res, 202, job_json(engine.queue().get(id)));
    }));

    http.Get("/v1/jobs", wrap([this](const httplib::Request& req, httplib::Response& res) {
      std::size_t limit = limit_param(req);
      auto all = engine.queue().list(req.get_param_value("dataset_id"));
      std::string after = req.get_param_value("after");
      auto it = all.begin();
      if (!after.empty()) {
        it = std::find_if(all.begin(), all.end(), [&](const AnalysisJob& j) { return j.job_id == after; });
        if (it != all.end()) ++it;
      }
      json out = {{"items", json::array()}, {"next_after", nullptr}};
      for (std::size_t n = 0; it != all.end(); ++it, ++n) {
        if (n == limit) {
          out["next_after"] = out["items"].back()["job_id"];
          break;
        }
        out["items"].push_back(job_json(*it));
      }
      send(res, 200, out);
    }));

    http.Get(R"(/v1/jobs/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
      send(res, 200, job_json(engine.queue().get(req.matches[1])));
    }));

    http.Delete(R"(/v1/jobs/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
      engine.queue().cancel(req.matches[1]);
      send(res, 200, job_json(engine.queue().get(req.matches[1])));
    }));

    http.Post("/v1/annotations", wrap([this](const httplib::Request& req, httplib::Response& res) {
      json body = parse_body(req);
      Annotation a;
      a.dataset_id = required_string(body, "dataset_id");
      a.post_id = required_string(body, "post_id");
      a.kind = kind_param(required_string(body, "kind"));
      a.new_label = required_string(body, "new_label");
      a.old_label = body.value("old_label", std::string());
      if (a.old_label.empty() && engine.store().has_dataset(a.dataset_id)) a.old_label = machine_label(a);
      a.annotator = principal_of(req);
      a.created_at = now_utc();
      std::string id = engine.store().record_annotation(a);
      a.annotation_id = id;
      send(res, 201, to_json(a));
    }));

    http.Post("/v1/feedback/apply", wrap([this](const httplib::Request& req, httplib::Response& res) {
      json body = parse_body(req);
      auto outcome = engine.apply_feedback(required_string(body, "dataset_id"));
      send(res, 200, {{"previous_version", outcome.previous_version},
                      {"version", outcome.version},
                      {"changed", outcome.changed()},
                      {"annotations", outcome.annotations}});
    }));

    http.Get(R"(/v1/export/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
      std::string fmt_name = req.has_param("format") ? req.get_param_value("format") : "json";
      auto fmt = parse_export_format(fmt_name);
      if (!fmt) throw Error(Errc::kUnknownFormat, "export format must be csv or json");
      std::string job_id = req.matches[1];
      std::string content = engine.export_job(job_id, *fmt);
      auto result = engine.store().get_result(job_id);
      std::string filename = std::string(to_string(result->kind)) + "-" + job_id + "." + fmt_name;
      res.set_header("Content-Disposition", "attachment; filename=\"" + filename + "\"");
      res.status = 200;
      res.set_content(content, *fmt == ExportFormat::kCsv ? "text/csv; charset=utf-8" : "application/json");
    }));

    http.Get("/v1/sources", wrap([this](const httplib::Request&, httplib::Response& res) {
      json items = json::array();
      for (const auto& d : engine.sources().list()) items.push_back(connectors::to_json(d));
      send(res, 200, {{"items", std::move(items)}});
    }));

    http.Post(R"(/v1/sources/([^/]+)/search)", wrap([this](const httplib::Request& req, httplib::Response& res) {
      json body = parse_body(req);
      connectors::SearchRequest r;
      r.query = body.value("query", std::string());
      r.limit = body.value("limit", std::size_t{100});
      auto timestamp = [&](const char* key) -> std::optional<Instant> {
        if (!body.contains(key)) return std::nullopt;
        auto t = parse_iso8601(body[key].get<std::string>());
        if (!t) throw Error(Errc::kInvalidArgument, std::string(key) + " is not an ISO-8601 timestamp");
        return t;
      };
      r.since = timestamp("since");
      r.until = timestamp("until");
      if (body.contains("credentials")) r.credentials = body["credentials"].get<connectors::Credentials>();
      std::string source_id = req.matches[1];
      auto records = engine.sources().search(source_id, r);
      json out = {{"source_id", source_id}, {"count", records.size()}, {"records", json::array()}};
      for (const auto& rec : records) out["records"].push_back(rec.fields);
      if (body.value("save", false)) {
        auto outcome = engine.ingest_records(body.value("name", source_id + ":" + r.query), records);
        out["dataset"] = to_json(outcome);
        send(res, outcome.dataset_id ? 201 : 422, out);
        return;
      }
      send(res, 200, out);
    }));

    http.Get("/v1/adapters", wrap([this](const httplib::Request&, httplib::Response& res) {
      json items = json::array();
      auto ctx = engine.context();
      for (AnalysisKind kind : {AnalysisKind::kSentiment, AnalysisKind::kPropaganda}) {
        auto adapter = kind == AnalysisKind::kSentiment ? ctx.sentiment : ctx.propaganda;
        if (adapter) {
          items.push_back(adapter->describe());
        } else if (kind == AnalysisKind::kSentiment) {
          items.push_back(classify::make_sentiment_baseline(ctx.lexicon)->describe());
        } else {
          items.push_back(classify::make_propaganda_baseline(classify::builtin_patterns())->describe());
        }
      }
      send(res, 200, {{"items", std::move(items)}});
    }));
  }

  // Latest machine label for the annotated post, or empty.
  std::string machine_label(const Annotation& a) {
    auto results = engine.store().get_results(a.dataset_id, a.kind);
    for (auto it = results.rbegin(); it != results.rend(); ++it)
      for (const auto& item : it->payload.value("items", json::array()))
        if (item.value("post_id", std::string()) == a.post_id && item["label"].is_string())
          return item["label"].get<std::string>();
    return {};
  }
};

Server::Server(Engine& engine) : impl_(std::make_unique<Impl>(engine)) {}

Server::~Server() { stop(); }

int Server::bind() {
  const auto& s = impl_->engine.config().server;
  impl_->http.new_task_queue = [n = s.threads] { return new httplib::ThreadPool(std::max<std::size_t>(n, 1)); };
  if (s.port == 0)
    impl_->port = impl_->http.bind_to_any_port(s.host);
  else
    impl_->port = impl_->http.bind_to_port(s.host, s.port) ? s.port : -1;
  return impl_->port;
}

void Server::run() {
  auto& engine = impl_->engine;
  impl_->workers = std::make_unique<jobs::WorkerPool>(
      engine.queue(), [&engine](const AnalysisJob& job) { return engine.analyze(job); },
      engine.config().queue.worker_limit);
  impl_->http.listen_after_bind();
}

void Server::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->workers) impl_->workers->stop();
  impl_->webhooks.flush();
}

}  // namespace marsad::api
