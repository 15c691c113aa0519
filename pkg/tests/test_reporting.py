import json
import math

import numpy as np
import pytest

from fdivkit.reporting import (Table, fmt, load_matrix, load_vector, parse_grid, read_config,
                               read_csv_table, svg_plot, to_json)


def test_fmt():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(123456789.123456789) == "123456789.123"
    assert fmt(0.0) == "0"
    assert fmt(None) == ""
    assert fmt("ok") == "ok"
    assert fmt(True) == "1" and fmt(np.bool_(False)) == "0"
    assert fmt(math.inf) == "inf" and fmt(-math.inf) == "-inf" and fmt(math.nan) == "nan"


def test_table_roundtrip():
    t = Table("demo", ["x", "y", "tag"], [[0.1, 2 / 3, "ok"], [1.0, None, "na"]],
              {"unit": "nats", "generator": "kl"})
    text = t.to_csv()
    assert text.splitlines()[0] == "# demo; generator=kl; unit=nats"
    back = read_csv_table(text)
    assert back.name == "demo" and back.meta == {"generator": "kl", "unit": "nats"}
    assert back.columns == ["x", "y", "tag"]
    assert back.rows[0][1] == pytest.approx(2 / 3, rel=1e-11)
    assert back.column("tag") == ["ok", "na"]


def test_read_config(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# comment\nr-grid = 0:1:3\nmu_step = 0.05   # trailing\n")
    assert read_config(p) == {"r_grid": "0:1:3", "mu_step": "0.05"}


def test_parse_grid():
    assert parse_grid("0:1:5") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_grid("0.1, 0.3") == [0.1, 0.3]
    with pytest.raises(ValueError):
        parse_grid("0:1:0")
    with pytest.raises(ValueError):
        parse_grid(",")


def test_loaders(tmp_path):
    assert load_vector("0.25,0.75").tolist() == [0.25, 0.75]
    v = tmp_path / "p.csv"
    v.write_text("# pmf\n0.2,0.8\n")
    assert load_vector(str(v)).tolist() == [0.2, 0.8]
    m = tmp_path / "m.csv"
    m.write_text("0,1\n1,0\n")
    assert load_matrix(str(m)).tolist() == [[0.0, 1.0], [1.0, 0.0]]
    col = tmp_path / "c.csv"
    col.write_text("0\n1\n")
    assert load_matrix(str(col)).shape == (2, 1)


def test_to_json_handles_numpy():
    s = to_json({"b": np.float64(0.5), "a": np.arange(2), "c": np.int64(3)})
    assert s == '{"a": [0, 1], "b": 0.5, "c": 3}'
    assert json.loads(to_json({"x": object()}))["x"].startswith("<object")


def test_svg_plot():
    svg = svg_plot({"a<b": ([0, 1, 2], [0, 1, 4]), "flat": ([0, 2], [1, math.nan])},
                   "x", "y", "t & u")
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count("<polyline") == 2
    assert "a&lt;b" in svg and "t &amp; u" in svg
    with pytest.raises(ValueError):
        svg_plot({"empty": ([], [])})
