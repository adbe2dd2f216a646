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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "marsad/analysis.hpp"
#include "marsad/classify.hpp"
#include "marsad/engine.hpp"
#include "marsad/error.hpp"
#include "marsad/ingest.hpp"
#include "marsad/network.hpp"
#include "marsad/topics.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

py::object to_python(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_python(const py::object& o) {
  return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

marsad::ingest::Lang lang_arg(const std::string& name) {
  auto lang = marsad::ingest::parse_lang(name);
  if (!lang) throw py::value_error("lang must be ar, en or unknown");
  return *lang;
}

marsad::ingest::SourceFormat format_arg(const std::string& name) {
  auto fmt = marsad::ingest::parse_format(name);
  if (!fmt) throw py::value_error("format must be csv, tsv, json or jsonl");
  return *fmt;
}

marsad::AnalysisKind kind_arg(const std::string& name) {
  auto kind = marsad::parse_analysis_kind(name);
  if (!kind) throw py::value_error("unknown analysis kind: " + name);
  return *kind;
}

marsad::ingest::Post text_post(const std::string& text) {
  return marsad::ingest::make_post("p", text, marsad::Instant{});
}

std::vector<marsad::ingest::Post> posts_from_jsonl(const std::string& jsonl) {
  return marsad::ingest::parse_dataset(jsonl, marsad::ingest::SourceFormat::kJsonl).posts;
}

}  // namespace

PYBIND11_MODULE(_marsad, m) {
  m.doc() = "Social-media analytics engine: ingestion, topics, classifiers, trends, networks.";

  static PyObject* error_type = py::exception<marsad::Error>(m, "MarsadError").ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const marsad::Error& e) {
      PyErr_SetString(error_type, (std::string(marsad::to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  m.def("normalize_text", [](const std::string& text, const std::string& lang) {
    return marsad::ingest::normalize_text(text, lang_arg(lang));
  }, py::arg("text"), py::arg("lang") = "unknown");

  m.def("tokenize", [](const std::string& text, const std::string& lang) {
    return marsad::ingest::tokenize(marsad::ingest::normalize_text(text, lang_arg(lang)),
                                    marsad::ingest::builtin_stopwords());
  }, py::arg("text"), py::arg("lang") = "unknown", "Normalizes, then tokenizes with the built-in stopwords.");

  m.def("detect_language", [](const std::string& text) {
    return std::string(marsad::ingest::to_string(marsad::ingest::detect_language(text)));
  });

  m.def("parse_dataset", [](const std::string& data, const std::string& format) {
    auto parsed = marsad::ingest::parse_dataset(data, format_arg(format));
    json posts = json::array();
    for (const auto& p : parsed.posts) posts.push_back(marsad::ingest::to_document_json(p));
    return to_python({{"posts", posts}, {"report", marsad::ingest::to_json(parsed.report)}});
  }, py::arg("data"), py::arg("format") = "jsonl");

  m.def("tfidf", [](const marsad::topics::Corpus& docs, std::size_t min_df, double max_df_ratio) {
    auto vocab = marsad::topics::build_vocabulary(docs, min_df, max_df_ratio);
    Eigen::MatrixXd dense = marsad::topics::tfidf_matrix(docs, vocab).dense();
    return py::make_tuple(vocab.terms, dense);
  }, py::arg("docs"), py::arg("min_df") = 2, py::arg("max_df_ratio") = 0.95,
     "Returns (terms, matrix) for token lists; rows are L2-normalized.");

  m.def("choose_k", &marsad::topics::choose_k, py::arg("n_docs"));

  m.def("kmeans", [](const Eigen::MatrixXd& x, std::size_t k, std::uint64_t seed, std::size_t max_iter, double tol) {
    auto c = marsad::topics::kmeans(marsad::topics::WeightedMatrix::from_dense(x), k, seed, max_iter, tol);
    py::dict out;
    out["assignments"] = c.assignments;
    out["centroids"] = c.centroids;
    out["inertia"] = c.inertia;
    out["inertia_trace"] = c.inertia_trace;
    out["iterations"] = c.iterations;
    return out;
  }, py::arg("x"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iter") = 100, py::arg("tol") = 1e-4);

  m.def("nmf", [](const Eigen::MatrixXd& v, std::size_t rank, std::uint64_t seed, std::size_t max_iter, double tol) {
    auto r = marsad::topics::nmf(v, rank, seed, max_iter, tol);
    return py::make_tuple(r.W, r.H, r.objective_trace);
  }, py::arg("v"), py::arg("rank") = 2, py::arg("seed") = 0, py::arg("max_iter") = 200, py::arg("tol") = 1e-4,
     "Returns (W, H, objective_trace).");

  m.def("pagerank", [](const Eigen::MatrixXd& w, double damping, double tol, std::size_t max_iter) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(w.rows()));
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) rows[i].push_back(w(i, j));
    return marsad::network::pagerank(rows, {damping, tol, max_iter});
  }, py::arg("weights"), py::arg("damping") = 0.85, py::arg("tol") = 1e-8, py::arg("max_iter") = 200);

  m.def("sentiment", [](const std::string& text) {
    auto label = marsad::classify::classify_sentiment(text_post(text), marsad::classify::builtin_lexicon());
    py::dict out;
    out["label"] = label.label;
    out["score"] = label.score;
    out["positive_hits"] = label.positive_hits;
    out["negative_hits"] = label.negative_hits;
    return out;
  }, py::arg("text"));

  m.def("propaganda", [](const std::string& text) {
    auto post = text_post(text);
    const auto& patterns = marsad::classify::builtin_patterns();
    return to_python(marsad::classify::to_json(marsad::classify::classify_propaganda(post, patterns), patterns,
                                               post.norm_text));
  }, py::arg("text"));

  m.def("run_analysis", [](const std::string& kind, const std::string& jsonl, std::uint64_t seed) {
    auto posts = posts_from_jsonl(jsonl);
    return to_python(marsad::run_analysis(kind_arg(kind), posts, marsad::AnalysisContext{}, seed));
  }, py::arg("kind"), py::arg("jsonl"), py::arg("seed") = 42, "Runs one analysis over JSONL posts.");

  m.def("export_payload", [](const std::string& kind, const py::object& payload, const std::string& format) {
    auto fmt = marsad::parse_export_format(format);
    if (!fmt) throw py::value_error("format must be csv or json");
    return marsad::export_payload(kind_arg(kind), from_python(payload), *fmt);
  }, py::arg("kind"), py::arg("payload"), py::arg("format") = "json");

  py::class_<marsad::Engine>(m, "Engine", "Persistent store, queue and analyses rooted at a data directory.")
      .def(py::init([](const std::string& data_dir) {
        marsad::Config config;
        config.data_dir = data_dir;
        return std::make_unique<marsad::Engine>(config);
      }), py::arg("data_dir"))
      .def("ingest", [](marsad::Engine& e, const std::string& name, const std::string& data, const std::string& format) {
        return to_python(marsad::to_json(e.ingest(name, data, format_arg(format))));
      }, py::arg("name"), py::arg("data"), py::arg("format") = "jsonl")
      .def("analyze", [](marsad::Engine& e, const std::string& dataset_id, const std::string& kind, std::uint64_t seed) {
        marsad::jobs::SubmitRequest request{dataset_id, kind_arg(kind), std::nullopt, std::nullopt, seed};
        marsad::AnalysisJob job;
        {
          py::gil_scoped_release release;
          job = e.run_sync(request);
        }
        return to_python(marsad::to_json(job));
      }, py::arg("dataset_id"), py::arg("kind"), py::arg("seed") = 42, "Runs a job to completion; returns the job record.")
      .def("result", [](marsad::Engine& e, const std::string& job_id) -> py::object {
        auto r = e.store().get_result(job_id);
        if (!r) return py::none();
        return to_python(r->payload);
      }, py::arg("job_id"))
      .def("export", [](marsad::Engine& e, const std::string& job_id, const std::string& format) {
        auto fmt = marsad::parse_export_format(format);
        if (!fmt) throw py::value_error("format must be csv or json");
        return e.export_job(job_id, *fmt);
      }, py::arg("job_id"), py::arg("format") = "json");
}
