import math
import re
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photontrap import ParameterError, canonical_state, node_times, run_conditional, run_trajectories
from photontrap.figures import figure2_curves, write_figure2
from photontrap.report import HEIGHT, MARGIN, parse_theta, render_chart, write_table

GOLDEN = Path(__file__).parent / "golden"


@pytest.mark.parametrize("n", range(2, 13))
@pytest.mark.parametrize("k", [1, 2, 3])
def test_parse_round_trips_node_times(n, k):
    expr = f"{k}*pi/sqrt({4 * n - 2})"
    assert abs(parse_theta(expr) - node_times(n, k)) <= 1e-15


@pytest.mark.parametrize("expr,value", [
    ("pi/sqrt(10)", math.pi / math.sqrt(10)),
    ("pi/(4*sqrt(6))", math.pi / (4 * math.sqrt(6))),
    ("-0.5 + 2", 1.5),
    ("(1+2)*3/4", 2.25),
    (0.25, 0.25),
])
def test_parse_examples(expr, value):
    assert parse_theta(expr) == value


@pytest.mark.parametrize("expr", [
    "__import__('os')", "pi**2", "sqrt(-1)", "1/0", "e", "sqrt(1, 2)", "1 +", "True", "'a'",
])
def test_parse_rejects(expr):
    with pytest.raises(ParameterError):
        parse_theta(expr)


@settings(max_examples=60)
@given(a=st.integers(1, 50), b=st.integers(1, 50))
def test_parse_integer_ratio(a, b):
    assert parse_theta(f"{a}*pi/sqrt({b})") == a * math.pi / math.sqrt(b)


def test_csv_rows(tmp_path):
    tr = run_conditional(canonical_state("computational", 3, mask=1), 3, np.pi / np.sqrt(10), 2, 1,
                         canonical_state("W1", 3))
    text = write_table(tr, "csv", tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text() == text
    rows = text.splitlines()
    assert rows[0] == "N,P,F,Y"
    assert rows[1] == "0,1.000000000000,0.333333333333,1.000000000000"
    assert float(rows[2].split(",")[1]) == pytest.approx(0.531928, abs=1e-6)


def test_json_table():
    s = run_trajectories(canonical_state("computational", 3, mask=1), 3, 0.5, 2, 1, 100, seed=4)
    text = write_table(s, "json")
    assert '"successes"' in text and text.endswith("\n")
    with pytest.raises(ParameterError):
        write_table(s, "xml")


def test_unwritable_path_raises_oserror(tmp_path):
    tr = run_conditional(canonical_state("W1", 2), 2, 0.3, 1, 1, canonical_state("W1", 2))
    with pytest.raises(OSError):
        write_table(tr, "csv", tmp_path / "missing" / "t.csv")


def test_single_point_series_is_marker_only():
    svg = render_chart([("one", [2.0], [0.5])])
    assert svg.count("<circle") == 1
    assert "<polyline" not in svg


def test_chart_structure_and_determinism():
    series = [("a", [0, 1, 2], [0.1, 0.4, 0.2]), ("b & c", [0, 2], [0.3, 0.3])]
    svg = render_chart(series, title="t", x_label="x", y_label="y")
    assert svg.startswith('<?xml version="1.0"')
    assert svg.count("<polyline") == 2
    assert "b &amp; c" in svg
    assert "-0<" not in svg
    assert svg == render_chart(series, title="t", x_label="x", y_label="y")


@pytest.mark.parametrize("series", [[], [("x", [], [])], [("x", [1, 2], [1])]])
def test_chart_rejects_bad_series(series):
    with pytest.raises(ParameterError):
        render_chart(series)


def test_figure2_golden(tmp_path):
    res = write_figure2(tmp_path)
    produced = res["paths"]["fidelity"].read_text()
    assert produced == (GOLDEN / "figure2_fidelity.svg").read_text()
    again = write_figure2(tmp_path / "again")
    for key in ("fidelity", "yield", "csv"):
        assert again["paths"][key].read_bytes() == res["paths"][key].read_bytes()


def test_golden_marker_position_matches_fidelity():
    # recover F_{5,3} from the pixel position of the sixth marker of series 0
    svg = (GOLDEN / "figure2_fidelity.svg").read_text()
    group = svg.split('<g id="series-0">')[1].split("</g>")[0]
    cy = [float(v) for v in re.findall(r'cy="([0-9.]+)"', group)]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
    F5 = 1 - (cy[5] - MARGIN["top"]) / ph
    assert F5 == pytest.approx(0.995330, abs=5e-5)


def test_figure2_curves_and_yields():
    curves = {c.label: c for c in figure2_curves(10)}
    c3 = next(c for c in curves.values() if c.n == 3)
    assert c3.F[5] == pytest.approx(0.995330266880745, abs=1e-9)
    for c in curves.values():
        assert np.all(np.diff(c.F) >= -1e-12)
        assert np.all(np.diff(c.Y) < 0)
        np.testing.assert_allclose(c.Y, np.cumprod(c.P), rtol=1e-12)
    labels = [c.label for c in curves.values()]
    assert any("[off-node]" in s for s in labels) and any("[node]" in s for s in labels)


def test_figure2_yield_chart_has_both_definitions(tmp_path):
    svg = write_figure2(tmp_path, 4)["paths"]["yield"].read_text()
    assert "Y per-step" in svg
