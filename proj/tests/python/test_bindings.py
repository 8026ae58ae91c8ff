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

import json
import math
import os
import pathlib

import numpy as np
import pytest

import crimepred

CONFIG_DIR = pathlib.Path(__file__).resolve().parents[2] / "configs"


def blobs(n=200, seed=0):
    rng = np.random.default_rng(seed)
    y = (rng.random(n) < 0.3).astype(np.int32)
    x = rng.normal(size=(n, 3)) + y[:, None] * 1.5
    return x, y


def test_split_train_size():
    assert crimepred.split_train_size(7724493, 0.8) == 6179594
    assert crimepred.split_train_size(10, 0.8) == 8


def test_correlations_and_chi_square():
    assert crimepred.pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert crimepred.spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)
    stat, dof, p = crimepred.chi_square([[10, 20], [20, 10]])
    assert stat == pytest.approx(20 / 3)
    assert dof == 1
    assert p == pytest.approx(math.erfc(math.sqrt(stat / 2)))


def test_mca_inertia():
    cols = [["a", "b", "a", "c", "b", "c"], ["x", "y", "x", "y", "y", "x"]]
    out = crimepred.mca(cols, 2)
    assert out["total_inertia"] == pytest.approx(5 / 2 - 1)
    assert out["row_coordinates"].shape == (6, 2)


def test_balance_counts():
    x, y = blobs(300, 1)
    neg = int((y == 0).sum())
    bx, by = crimepred.balance(x, y, smote_k=3, oversample_ratio=0.5, undersample_ratio=1.0, seed=5)
    assert bx.shape[0] == by.shape[0]
    assert int(by.sum()) == neg // 2
    assert int((by == 0).sum()) == neg // 2


def test_metrics():
    y = np.array([0, 0, 1, 1], dtype=np.int32)
    assert crimepred.roc_auc(y, [0.1, 0.4, 0.35, 0.8]) == pytest.approx(0.75)
    assert crimepred.mann_whitney_auc(y, [0.1, 0.4, 0.35, 0.8]) == pytest.approx(0.75)
    p, r, f1 = crimepred.precision_recall_f1(y, np.array([0, 1, 1, 1], dtype=np.int32))
    assert (p, r) == pytest.approx((2 / 3, 1.0))
    assert f1 == pytest.approx(0.8)


@pytest.mark.parametrize("kind", ["knn", "logreg", "svc", "forest", "gbm"])
def test_fit_predict_round_trip(kind):
    x, y = blobs()
    model = crimepred.fit(x, y, {"kind": kind, "seed": 3})
    assert model.kind == kind
    proba = model.predict_proba(x)
    assert proba.shape == (200,)
    assert np.all((proba >= 0) & (proba <= 1))
    again = crimepred.model_from_json(model.to_json())
    np.testing.assert_array_equal(again.predict_proba(x), proba)
    with pytest.raises(crimepred.ArgumentError):
        model.predict(x[:, :2])


def test_shap_exact_matches_kernel():
    x, y = blobs()
    model = crimepred.fit(x, y, {"kind": "logreg"})
    exact = crimepred.shap(model, x[:3], x[:10], exact=True)
    kernel = crimepred.shap(model, x[:3], x[:10])
    for e, k in zip(exact, kernel):
        np.testing.assert_allclose(e["phi"], k["phi"], atol=1e-9)
        assert e["base_value"] + e["phi"].sum() == pytest.approx(e["prediction"])


def test_bad_config_raises():
    with pytest.raises(crimepred.ArgumentError):
        crimepred.fit(*blobs(), {"kind": "knn", "params": {"k": -1}})


def test_pipeline(tmp_path):
    data = tmp_path / "data.csv"
    synth = os.environ.get("CRIMEPRED_SYNTH")
    if not synth:
        pytest.skip("CRIMEPRED_SYNTH not set")
    assert os.system(f'"{synth}" --rows 1500 --seed 2 --out "{data}"') == 0
    artifacts = crimepred.run_analyze(str(data), str(tmp_path / "analysis"))
    assert "frequencies" in artifacts
    config = json.loads((CONFIG_DIR / "logreg.json").read_text())
    config.update(data=str(data), output=str(tmp_path / "run"), row_cap=1500)
    config["explain"].update(instances=4, background=4)
    result = crimepred.run_train(config)
    assert 0.0 <= result["report"]["f1"] <= 1.0
    assert (tmp_path / "run" / "manifest.json").exists()
    with pytest.raises(crimepred.StageError):
        crimepred.run_analyze(str(tmp_path / "missing.csv"), str(tmp_path / "none"))
