# Copyright 2026 The crimepred Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python bindings for the crimepred native core.

Matrices are passed as 2-D float arrays and labels as integer arrays. Model
and run configurations are JSON strings or plain dicts.
"""

import json as _json

from . import _core
from ._core import (
    ArgumentError,
    Error,
    Model,
    StageError,
    balance,
    chi_square,
    load_csv_summary,
    mann_whitney_auc,
    mca,
    pearson,
    precision_recall_f1,
    roc_auc,
    run_analyze,
    run_report,
    set_max_jobs,
    shap,
    spearman,
    split_train_size,
)

__version__ = _core.__version__


def _dumps(config):
    return config if isinstance(config, str) else _json.dumps(config)


def fit(x, y, config):
    """Fits a classifier described by a model config (kind, params, seed)."""
    return _core.fit(x, y, _dumps(config))


def run_train(config):
    """Runs the full training pipeline; returns directory, manifest and report."""
    result = _core.run_train(_dumps(config))
    return {
        "directory": result["directory"],
        "manifest": _json.loads(result["manifest"]),
        "report": _json.loads(result["report"]),
    }


def model_from_json(text):
    return Model.from_json(_dumps(text))


__all__ = [
    "ArgumentError", "Error", "Model", "StageError", "balance", "chi_square", "fit",
    "load_csv_summary", "mann_whitney_auc", "mca", "model_from_json", "pearson",
    "precision_recall_f1", "roc_auc", "run_analyze", "run_report", "run_train",
    "set_max_jobs", "shap", "spearman", "split_train_size",
]
