import json
import math

import numpy as np
import pytest

from vspm.io import atomic_write_text, csv_text, read_csv, write_csv, write_json
from vspm.thermal import Phase


def test_cell_formatting():
    text = csv_text(["a", "b", "c", "d", "e"], [[1 / 3, None, True, Phase.LIQUID, np.int64(4)], [math.nan, 1e-12, False, "x", 2.0]])
    assert text == "a,b,c,d,e\n0.333333333,,true,liquid,4\nnan,1e-12,false,x,2\n"


def test_round_trip_csv(tmp_path):
    path = tmp_path / "sub" / "t.csv"
    write_csv(path, ["x", "y"], [[1.5, 2], [3.25, -4]])
    assert read_csv(path) == (["x", "y"], [["1.5", "2"], ["3.25", "-4"]])


def test_failed_write_leaves_previous_file_intact(tmp_path):
    path = tmp_path / "out.csv"
    write_csv(path, ["x"], [[1.0]])

    def rows():
        yield [2.0]
        raise RuntimeError("boom")

    with pytest.raises(RuntimeError):
        write_csv(path, ["x"], rows())
    assert path.read_text() == "x\n1\n"
    assert [p.name for p in tmp_path.iterdir()] == ["out.csv"]


def test_atomic_write_cleans_temp_on_error(tmp_path):
    with pytest.raises(TypeError):
        atomic_write_text(tmp_path / "a.txt", 5)
    assert list(tmp_path.iterdir()) == []


def test_json_is_sorted_and_nan_free(tmp_path):
    path = tmp_path / "s.json"
    write_json(path, {"b": np.float64(1.5), "a": [math.nan, (1, 2)], "c": Phase.SOLID})
    assert json.loads(path.read_text()) == {"a": [None, [1, 2]], "b": 1.5, "c": "solid"}
    assert path.read_text().index('"a"') < path.read_text().index('"b"')
