"""Fidelity and purification-yield curves for n = 3, 6, 9 (W-state generation)."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .protocol import run_conditional
from .report import parse_theta, render_chart
from .sector import canonical_state

# (n, theta expression, label); n = 9 appears twice: pi/(4 sqrt 2) = pi/sqrt(32)
# and the W1 node pi/sqrt(34).
FIGURE2_CASES = [
    (3, "pi/sqrt(10)", "n=3, theta=pi/sqrt(10)"),
    (6, "pi/sqrt(22)", "n=6, theta=pi/sqrt(22)"),
    (9, "pi/sqrt(32)", "n=9, theta=pi/sqrt(32) [off-node]"),
    (9, "pi/sqrt(34)", "n=9, theta=pi/sqrt(34) [node]"),
]


@dataclass(frozen=True)
class Curve:
    label: str
    n: int
    theta_expr: str
    theta: float
    N: np.ndarray
    P: np.ndarray
    F: np.ndarray
    Y: np.ndarray
    Y_per_step: np.ndarray


def figure2_curves(max_N: int = 10) -> list[Curve]:
    curves = []
    for n, expr, label in FIGURE2_CASES:
        theta = parse_theta(expr)
        start = canonical_state("computational", n, mask=1)
        tr = run_conditional(start, n, theta, max_N, 1, canonical_state("W1", n), keep_states=False)
        curves.append(Curve(label, n, expr, theta, tr.N, tr.P, tr.F, tr.Y, tr.P.copy()))
    return curves


def figure2_csv(curves: list[Curve]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "theta", "N", "P", "F", "Y", "Y_per_step"])
    for c in curves:
        for i in range(len(c.N)):
            w.writerow([c.n, c.theta_expr, int(c.N[i]), f"{c.P[i]:.12f}", f"{c.F[i]:.12f}",
                        f"{c.Y[i]:.12f}", f"{c.Y_per_step[i]:.12f}"])
    return buf.getvalue()


def write_figure2(outdir: str | Path, max_N: int = 10) -> dict:
    """Write ``figure2_fidelity.svg``, ``figure2_yield.svg`` and ``figure2.csv``.

    Returns the curves and the output paths.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    curves = figure2_curves(max_N)
    paths = {
        "fidelity": outdir / "figure2_fidelity.svg",
        "yield": outdir / "figure2_yield.svg",
        "csv": outdir / "figure2.csv",
    }
    render_chart([(c.label, c.N, c.F) for c in curves], paths["fidelity"],
                 title="Fidelity with W1 vs repetitions", x_label="N", y_label="F",
                 y_range=(0.0, 1.0))
    yield_series = []
    for c in curves:
        yield_series.append((f"Y {c.label}", c.N, c.Y))
        if not np.allclose(c.Y, c.Y_per_step, rtol=0, atol=1e-15):
            yield_series.append((f"Y per-step {c.label}", c.N, c.Y_per_step))
    render_chart(yield_series, paths["yield"], title="Purification yield vs repetitions",
                 x_label="N", y_label="Y", y_range=(0.0, 1.0))
    paths["csv"].write_text(figure2_csv(curves))
    return {"curves": curves, "paths": paths}
