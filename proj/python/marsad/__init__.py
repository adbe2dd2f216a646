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

"""Python bindings for the marsad analytics engine."""

try:
    from marsad._marsad import *  # noqa: F401,F403  (installed wheel)
    from marsad._marsad import MarsadError
except ImportError:
    from _marsad import *  # noqa: F401,F403  (build tree)
    from _marsad import MarsadError

__all__ = [
    "Engine",
    "MarsadError",
    "choose_k",
    "detect_language",
    "export_payload",
    "kmeans",
    "nmf",
    "normalize_text",
    "pagerank",
    "parse_dataset",
    "propaganda",
    "run_analysis",
    "sentiment",
    "tfidf",
    "tokenize",
]
