import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwsystem.errors import InvalidField
from fwsystem.io import (read_csv, read_field_csv, read_state_csv, write_csv, write_field_csv, write_json,
                         write_state_csv)
from fwsystem.spectral import Field, Grid
from fwsystem.state import State

G = Grid(np.pi, 16)


@settings(max_examples=30, deadline=None)
@given(vals=st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=16, max_size=16))
def test_field_round_trip_lossless(tmp_path_factory, vals):
    p = tmp_path_factory.mktemp("io") / "f.csv"
    f = Field(G, np.array(vals))
    write_field_csv(p, f)
    back = read_field_csv(p, G)
    assert np.array_equal(back.values, f.values)


def test_state_round_trip(tmp_path, rng):
    s = State(G, rng.standard_normal(16), rng.standard_normal(16))
    write_state_csv(tmp_path / "s.csv", s)
    back = read_state_csv(tmp_path / "s.csv", G, t=0.5)
    assert np.array_equal(back.u, s.u) and np.array_equal(back.rho_bar, s.rho_bar) and back.t == 0.5


def test_grid_mismatch_rejected(tmp_path):
    write_field_csv(tmp_path / "f.csv", Field(G, np.zeros(16)))
    with pytest.raises(InvalidField):
        read_field_csv(tmp_path / "f.csv", Grid(np.pi, 32))
    with pytest.raises(InvalidField):
        read_field_csv(tmp_path / "f.csv", Grid(2.0, 16))


def test_missing_column(tmp_path):
    write_csv(tmp_path / "f.csv", ["x", "other"], zip(G.x, G.x))
    with pytest.raises(InvalidField):
        read_field_csv(tmp_path / "f.csv", G)


def test_empty_csv(tmp_path):
    (tmp_path / "e.csv").write_text("")
    with pytest.raises(InvalidField):
        read_csv(tmp_path / "e.csv")


def test_json_numpy_and_nonfinite(tmp_path):
    write_json(tmp_path / "a.json", {"b": np.float64(1.5), "a": np.arange(3), "n": np.nan, "t": np.bool_(True)})
    text = (tmp_path / "a.json").read_text()
    assert json.loads(text) == {"a": [0, 1, 2], "b": 1.5, "n": None, "t": True}
    assert text.index('"a"') < text.index('"b"')


def test_atomic_write_leaves_no_temp(tmp_path):
    write_csv(tmp_path / "sub" / "x.csv", ["a"], [[1.0]])
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["x.csv"]
