import json

import numpy as np
import pytest

from lambda_entangle import CurveDataset


def test_csv_format():
    ds = CurveDataset({"t_ns": [0.0, 1.5], "P": [1 / 3, float("nan")]})
    assert ds.to_csv(6) == "t_ns,P\n0,0.333333\n1.5,nan\n"
    assert ds.to_csv(17).splitlines()[1] == "0,0.33333333333333331"


def test_json_format_and_roundtrip(tmp_path):
    ds = CurveDataset({"x": np.arange(3.0), "y": [0.1, 0.2, np.inf]}, {"command": "demo"})
    doc = json.loads(ds.to_json(9))
    assert doc["meta"] == {"command": "demo"}
    assert doc["columns"]["x"] == [0.0, 1.0, 2.0]
    assert doc["columns"]["y"][2] is None
    out = tmp_path / "d.json"
    ds.write(out, "json")
    assert out.read_text() == ds.to_json(9)


def test_rejects_ragged_columns():
    with pytest.raises(ValueError):
        CurveDataset({"a": [1.0, 2.0], "b": [1.0]})
    with pytest.raises(ValueError):
        CurveDataset({"a": [1.0]}).render("xml")
