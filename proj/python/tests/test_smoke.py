# Copyright 2026 The Marsad Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math
import os
from pathlib import Path

import numpy as np
import pytest

import marsad

FIXTURE = Path(os.environ.get("MARSAD_FIXTURE", Path(__file__).resolve().parents[2] / "tests/fixtures/posts_200.jsonl"))


def test_text_pipeline():
    assert marsad.tokenize("Great weather in Doha today!!") == ["great", "weather", "doha", "today"]
    assert marsad.normalize_text("HELLO   World") == "hello world"
    assert marsad.detect_language("الدوحة جميلة جدا") == "ar"


def test_tfidf_matches_brute_force():
    docs = [["rain", "rain", "storm"], ["storm", "sun"], ["sun", "rain"], ["sun", "sun", "wind"]]
    terms, matrix = marsad.tfidf(docs, min_df=1, max_df_ratio=1.0)
    assert terms == sorted({t for d in docs for t in d})
    n = len(docs)
    for i, doc in enumerate(docs):
        row = []
        for t in terms:
            df = sum(t in d for d in docs)
            row.append(doc.count(t) * (math.log((1 + n) / (1 + df)) + 1))
        norm = math.sqrt(sum(v * v for v in row))
        np.testing.assert_allclose(matrix[i], [v / norm for v in row], atol=1e-12)


def test_kmeans_and_nmf():
    x = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 10.0], [10.0, 11.0]])
    c = marsad.kmeans(x, 2, seed=3)
    a = c["assignments"]
    assert a[0] == a[1] and a[2] == a[3] and a[0] != a[2]
    assert c["inertia"] == pytest.approx(1.0)
    assert all(b <= s for s, b in zip(c["inertia_trace"], c["inertia_trace"][1:]))

    v = np.outer([1.0, 2.0, 3.0], [0.5, 1.0, 2.0])
    w, h, trace = marsad.nmf(v, rank=1, seed=1, max_iter=500, tol=1e-12)
    assert np.linalg.norm(v - w @ h) / np.linalg.norm(v) < 1e-3
    assert (w >= 0).all() and (h >= 0).all()
    assert all(b <= s + 1e-10 for s, b in zip(trace, trace[1:]))


def test_pagerank():
    assert marsad.pagerank(np.array([[0.0, 1.0], [1.0, 0.0]])) == pytest.approx([0.5, 0.5], abs=1e-12)
    ranks = marsad.pagerank(np.zeros((3, 3)))
    assert ranks == pytest.approx([1 / 3] * 3, abs=1e-12)


def test_classifier_baselines():
    s = marsad.sentiment("great day, love it")
    assert s["label"] == "positive" and s["score"] == 1.0
    p = marsad.propaganda("They are traitors to us")
    assert p["flag"] is True
    assert p["score"] == pytest.approx(0.6)


def test_errors_are_typed():
    with pytest.raises(marsad.MarsadError, match="NEGATIVE_INPUT"):
        marsad.nmf(np.array([[1.0, -1.0], [0.0, 1.0]]), rank=1)


def test_run_analysis_on_fixture():
    data = FIXTURE.read_text(encoding="utf-8")
    payload = marsad.run_analysis("subtopics", data, seed=42)
    assert payload["kind"] == "subtopics"
    assert payload["post_count"] == 200
    assert payload == marsad.run_analysis("subtopics", data, seed=42)
    csv = marsad.export_payload("sentiment", marsad.run_analysis("sentiment", data, seed=1), "csv")
    assert csv.startswith("post_id,label,score,degree\r\n")
    assert csv.count("\r\n") == 201


def test_engine_round_trip(tmp_path):
    engine = marsad.Engine(str(tmp_path / "data"))
    outcome = engine.ingest("fixture", FIXTURE.read_text(encoding="utf-8"))
    assert outcome["validation_report"]["accepted"] == 200
    job = engine.analyze(outcome["dataset_id"], "trends", seed=5)
    assert job["state"] == "done"
    assert engine.result(job["job_id"])["kind"] == "trends"
    assert engine.export(job["job_id"], "csv").startswith("bucket_start,")
