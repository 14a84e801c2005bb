"""Tables, SVG line charts and the theta-expression parser used by the CLI."""

from __future__ import annotations

import ast
import math
import operator
from pathlib import Path
from typing import Sequence

from .errors import ParameterError

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
}
_NAMES = {"pi": math.pi}
_FUNCS = {"sqrt": math.sqrt}


def parse_theta(expr: str | float) -> float:
    """Evaluate ``pi``, ``sqrt(...)``, numbers, ``+ - * /`` and parentheses.

    >>> parse_theta("pi/sqrt(10)") == math.pi / math.sqrt(10)
    True
    """
    if isinstance(expr, (int, float)):
        value = float(expr)
    else:
        try:
            tree = ast.parse(str(expr).strip(), mode="eval")
        except SyntaxError as exc:
            raise ParameterError(f"cannot parse theta expression {expr!r}") from exc
        value = _eval(tree.body, expr)
    if not math.isfinite(value):
        raise ParameterError(f"theta expression {expr!r} is not finite")
    return value


def _eval(node, src):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        try:
            return _BINOPS[type(node.op)](_eval(node.left, src), _eval(node.right, src))
        except ZeroDivisionError as exc:
            raise ParameterError(f"division by zero in {src!r}") from exc
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand, src)
        return -v if isinstance(node.op, ast.USub) else v
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
        try:
            return _FUNCS[node.func.id](_eval(node.args[0], src))
        except ValueError as exc:
            raise ParameterError(f"invalid argument in {src!r}") from exc
    raise ParameterError(f"unsupported element in theta expression {src!r}")


def write_table(obj, fmt: str, path: str | Path | None = None) -> str:
    """Serialize a ProtocolTrace or TrajectoryStats as ``csv`` or ``json``.

    Writes to ``path`` when given and returns the text either way.
    """
    if fmt == "csv":
        text = obj.to_csv()
    elif fmt == "json":
        text = obj.dumps() + "\n"
    else:
        raise ParameterError(f"unknown table format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


# Fixed chart styling so output bytes are stable.
WIDTH, HEIGHT = 960, 520
MARGIN = dict(left=70, right=330, top=50, bottom=60)
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"]
FONT = 'font-family="Helvetica, Arial, sans-serif"'


def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;").replace('"', "&quot;"))


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step - 1e-9) * step
    out = []
    v = first
    while v <= hi + 1e-9 * step:
        out.append(round(v, 12) + 0.0)
        v += step
    return out


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def render_chart(series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
                 path: str | Path | None = None, title: str = "", x_label: str = "",
                 y_label: str = "", y_range: tuple[float, float] | None = None) -> str:
    """Standalone SVG line chart; one polyline per series plus point markers.

    A series with a single point is drawn as a marker only.
    """
    series = [(name, list(map(float, xs)), list(map(float, ys))) for name, xs, ys in series]
    if not series or not any(xs for _, xs, _ in series):
        raise ParameterError("render_chart needs at least one non-empty series")
    for name, xs, ys in series:
        if len(xs) != len(ys):
            raise ParameterError(f"series {name!r} has mismatched x/y lengths")
    all_x = [x for _, xs, _ in series for x in xs]
    all_y = [y for _, _, ys in series for y in ys]
    x0, x1 = min(all_x), max(all_x)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y_range is None:
        y0, y1 = min(all_y), max(all_y)
        if y1 == y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
    else:
        y0, y1 = y_range

    left, top = MARGIN["left"], MARGIN["top"]
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1 - (y - y0) / (y1 - y0)) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
    ]
    if title:
        out.append(f'<text x="{left + pw / 2:.2f}" y="28" text-anchor="middle" '
                   f'font-size="16" {FONT}>{_esc(title)}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" '
               f'stroke="#333333" stroke-width="1"/>')
    for t in _ticks(x0, x1):
        X = px(t)
        out.append(f'<line x1="{X:.2f}" y1="{top + ph}" x2="{X:.2f}" y2="{top + ph + 5}" stroke="#333333"/>')
        out.append(f'<text x="{X:.2f}" y="{top + ph + 20}" text-anchor="middle" '
                   f'font-size="12" {FONT}>{_fmt(t)}</text>')
    for t in _ticks(y0, y1):
        Y = py(t)
        out.append(f'<line x1="{left - 5}" y1="{Y:.2f}" x2="{left}" y2="{Y:.2f}" stroke="#333333"/>')
        out.append(f'<line x1="{left}" y1="{Y:.2f}" x2="{left + pw}" y2="{Y:.2f}" '
                   f'stroke="#dddddd" stroke-width="0.5"/>')
        out.append(f'<text x="{left - 8}" y="{Y + 4:.2f}" text-anchor="end" '
                   f'font-size="12" {FONT}>{_fmt(t)}</text>')
    if x_label:
        out.append(f'<text x="{left + pw / 2:.2f}" y="{HEIGHT - 15}" text-anchor="middle" '
                   f'font-size="14" {FONT}>{_esc(x_label)}</text>')
    if y_label:
        out.append(f'<text x="18" y="{top + ph / 2:.2f}" text-anchor="middle" font-size="14" '
                   f'transform="rotate(-90 18 {top + ph / 2:.2f})" {FONT}>{_esc(y_label)}</text>')

    for i, (name, xs, ys) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        pts = [(px(x), py(y)) for x, y in zip(xs, ys)]
        out.append(f'<g id="series-{i}">')
        if len(pts) > 1:
            coords = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
            out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.8"/>')
        for a, b in pts:
            out.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="3" fill="{color}"/>')
        out.append("</g>")
        ly = top + 10 + 20 * i
        lx = left + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 28}" y="{ly + 4}" font-size="12" {FONT}>{_esc(name)}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
