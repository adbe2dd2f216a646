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

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "marsad/api.hpp"
#include "marsad/engine.hpp"
#include "marsad/error.hpp"

namespace {

using marsad::Errc;
using marsad::Error;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kUserError = 1;
constexpr int kInternalError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_output(const std::string& content, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIo, "cannot write " + out_path);
  out << content;
  if (!out.flush()) throw Error(Errc::kIo, "cannot write " + out_path);
}

int exit_code_for_job_error(const std::string& message) {
  auto colon = message.find(':');
  std::string code = message.substr(0, colon);
  for (int i = 0; i <= static_cast<int>(Errc::kInternal); ++i) {
    auto c = static_cast<Errc>(i);
    if (marsad::to_string(c) == code) return marsad::is_user_error(c) ? kUserError : kInternalError;
  }
  return kInternalError;
}

marsad::api::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("marsad");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%Y-%m-%dT%H:%M:%S.%e] [%l] %v");

  CLI::App app{"marsad: social-media analytics engine"};
  app.require_subcommand(1);
  std::string config_path, data_dir;
  bool verbose = false;
  app.add_option("--config", config_path, "INI config file (default: $MARSAD_CONFIG)");
  app.add_option("--data-dir", data_dir, "Override paths.data_dir");
  app.add_flag("-v,--verbose", verbose, "Log progress at info level");

  auto* ingest_cmd = app.add_subcommand("ingest", "Validate and store a dataset file");
  std::string ingest_file, ingest_format, ingest_schema, ingest_name;
  ingest_cmd->add_option("file", ingest_file, "CSV, TSV, JSON or JSONL file")->required();
  ingest_cmd->add_option("--format", ingest_format, "csv|tsv|json|jsonl (default: file extension)");
  ingest_cmd->add_option("--schema", ingest_schema, "JSON schema file");
  ingest_cmd->add_option("--name", ingest_name, "Dataset name (default: file name)");

  auto* analyze_cmd = app.add_subcommand("analyze", "Run one analysis and print its result");
  std::string analyze_dataset, analyze_kind;
  std::uint64_t analyze_seed = 42;
  int analyze_priority = 100;
  analyze_cmd->add_option("dataset_id", analyze_dataset)->required();
  analyze_cmd->add_option("--kind", analyze_kind,
                          "subtopics|wordcloud|sentiment|propaganda|trends|spatial|network|post_analysis")
      ->required();
  analyze_cmd->add_option("--seed", analyze_seed, "Random seed")->capture_default_str();
  analyze_cmd->add_option("--priority", analyze_priority, "Queue priority (lower runs first)")
      ->capture_default_str();

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  int serve_port = -1;
  serve_cmd->add_option("--port", serve_port, "Override server.port");

  auto* export_cmd = app.add_subcommand("export", "Write a job's analysis report");
  std::string export_job, export_format = "json", export_out;
  export_cmd->add_option("job_id", export_job)->required();
  export_cmd->add_option("--format", export_format, "csv|json")->capture_default_str();
  export_cmd->add_option("--out", export_out, "Output file (default: stdout)");

  auto* sources_cmd = app.add_subcommand("sources", "Online data sources");
  sources_cmd->require_subcommand(1);
  sources_cmd->add_subcommand("list", "List configured sources");
  auto* search_cmd = sources_cmd->add_subcommand("search", "Search a source");
  std::string search_source, search_query, search_name, search_since, search_until;
  std::size_t search_limit = 100;
  std::vector<std::string> search_credentials;
  bool search_save = false;
  search_cmd->add_option("source_id", search_source)->required();
  search_cmd->add_option("--query", search_query, "Search terms");
  search_cmd->add_option("--limit", search_limit, "Maximum records")->capture_default_str();
  search_cmd->add_option("--since", search_since, "Earliest timestamp (ISO-8601)");
  search_cmd->add_option("--until", search_until, "Latest timestamp (ISO-8601)");
  search_cmd->add_option("--credential", search_credentials, "name=value (repeatable)");
  search_cmd->add_flag("--save", search_save, "Store the results as a dataset");
  search_cmd->add_option("--name", search_name, "Dataset name when saving");

  auto* feedback_cmd = app.add_subcommand("feedback", "Annotation feedback");
  feedback_cmd->require_subcommand(1);
  auto* apply_cmd = feedback_cmd->add_subcommand("apply", "Update the lexicon from relabels");
  std::string feedback_dataset;
  apply_cmd->add_option("dataset_id", feedback_dataset)->required();

  auto* jobs_cmd = app.add_subcommand("jobs", "List jobs");
  std::string jobs_dataset;
  jobs_cmd->add_option("--dataset", jobs_dataset, "Only jobs of this dataset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUserError;
  }
  spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

  try {
    marsad::Config config = marsad::load_config(config_path);
    if (!data_dir.empty()) config.data_dir = data_dir;

    if (*serve_cmd) {
      if (serve_port >= 0) config.server.port = serve_port;
      if (config.tokens.empty())
        throw Error(Errc::kInvalidArgument, "serve needs at least one token in [auth] tokens");
      spdlog::set_level(spdlog::level::info);
      marsad::Engine engine(config);
      marsad::api::Server server(engine);
      int port = server.bind();
      if (port < 0) throw Error(Errc::kIo, "cannot bind " + config.server.host + ":" +
                                               std::to_string(config.server.port));
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      spdlog::info("listening on {}:{}", config.server.host, port);
      server.run();
      g_server = nullptr;
      return kOk;
    }

    marsad::Engine engine(config);

    if (*ingest_cmd) {
      std::string bytes = read_file(ingest_file);
      std::string fmt_name = ingest_format;
      if (fmt_name.empty()) {
        auto ext = std::filesystem::path(ingest_file).extension().string();
        fmt_name = ext.empty() ? ext : ext.substr(1);
      }
      auto fmt = marsad::ingest::parse_format(fmt_name);
      if (!fmt) throw Error(Errc::kUnknownFormat, "unknown format '" + fmt_name + "'");
      auto schema = marsad::ingest::PostSchema::defaults();
      if (!ingest_schema.empty()) schema = marsad::ingest::PostSchema::from_json(json::parse(read_file(ingest_schema)));
      std::string name = ingest_name.empty() ? std::filesystem::path(ingest_file).filename().string() : ingest_name;
      auto outcome = engine.ingest(name, bytes, *fmt, schema);
      std::cout << marsad::to_json(outcome).dump(2) << "\n";
      if (!outcome.dataset_id) {
        std::cerr << "error: EMPTY_DATASET: no row passed validation\n";
        return kUserError;
      }
      std::cerr << "dataset " << *outcome.dataset_id << ": " << outcome.report.accepted
                << " accepted, " << outcome.report.rejected.size() << " rejected\n";
      return kOk;
    }

    if (*analyze_cmd) {
      auto kind = marsad::parse_analysis_kind(analyze_kind);
      if (!kind) throw Error(Errc::kUnknownKind, "unknown analysis kind '" + analyze_kind + "'");
      marsad::jobs::SubmitRequest request{analyze_dataset, *kind, analyze_priority, std::nullopt, analyze_seed};
      auto job = engine.run_sync(request);
      std::cerr << "job " << job.job_id << ": " << marsad::to_string(job.state) << "\n";
      if (job.state != marsad::JobState::kDone) {
        std::string message = job.error.value_or("job did not complete");
        std::cerr << "error: " << message << "\n";
        return exit_code_for_job_error(message);
      }
      std::cout << engine.store().get_result(job.job_id)->payload.dump(2) << "\n";
      return kOk;
    }

    if (*export_cmd) {
      auto fmt = marsad::parse_export_format(export_format);
      if (!fmt) throw Error(Errc::kUnknownFormat, "export format must be csv or json");
      write_output(engine.export_job(export_job, *fmt), export_out);
      return kOk;
    }

    if (*sources_cmd) {
      if (!*search_cmd) {
        json items = json::array();
        for (const auto& d : engine.sources().list()) items.push_back(marsad::connectors::to_json(d));
        std::cout << items.dump(2) << "\n";
        return kOk;
      }
      marsad::connectors::SearchRequest request;
      request.query = search_query;
      request.limit = search_limit;
      for (const auto& kv : search_credentials) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
          throw Error(Errc::kInvalidArgument, "--credential expects name=value");
        request.credentials[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      auto stamp = [](const std::string& s, const char* flag) -> std::optional<marsad::Instant> {
        if (s.empty()) return std::nullopt;
        auto t = marsad::parse_iso8601(s);
        if (!t) throw Error(Errc::kInvalidArgument, std::string(flag) + " is not an ISO-8601 timestamp");
        return t;
      };
      request.since = stamp(search_since, "--since");
      request.until = stamp(search_until, "--until");
      auto records = engine.sources().search(search_source, request);
      json out = {{"source_id", search_source}, {"count", records.size()}, {"records", json::array()}};
      for (const auto& r : records) out["records"].push_back(r.fields);
      int rc = kOk;
      if (search_save) {
        auto outcome = engine.ingest_records(search_name.empty() ? search_source + ":" + search_query : search_name, records);
        out["dataset"] = marsad::to_json(outcome);
        if (!outcome.dataset_id) rc = kUserError;
      }
      std::cout << out.dump(2) << "\n";
      return rc;
    }

    if (*feedback_cmd) {
      auto outcome = engine.apply_feedback(feedback_dataset);
      std::cout << json{{"previous_version", outcome.previous_version},
                        {"version", outcome.version},
                        {"changed", outcome.changed()},
                        {"annotations", outcome.annotations}}
                       .dump(2)
                << "\n";
      return kOk;
    }

    if (*jobs_cmd) {
      json items = json::array();
      for (const auto& j : engine.queue().list(jobs_dataset)) items.push_back(marsad::to_json(j));
      std::cout << items.dump(2) << "\n";
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << marsad::to_string(e.code()) << ": " << e.what() << "\n";
    return marsad::is_user_error(e.code()) ? kUserError : kInternalError;
  } catch (const json::exception& e) {
    std::cerr << "error: INVALID_ARGUMENT: " << e.what() << "\n";
    return kUserError;
  } catch (const std::exception& e) {
    std::cerr << "error: INTERNAL: " << e.what() << "\n";
    return kInternalError;
  }
  return kOk;
}
