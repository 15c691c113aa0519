"""CSV, JSON, key-value config and minimal SVG output."""

import configparser
import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

SIG_DIGITS = 12


def fmt(x):
    """12 significant digits, '.' decimal; strings and None pass through."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    return f"{x:.{SIG_DIGITS}g}"


@dataclass
class Table:
    """A figure or sweep result: metadata header, named columns, rows."""

    name: str
    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def column(self, name):
        k = self.columns.index(name)
        return [r[k] for r in self.rows]

    def to_csv(self):
        buf = io.StringIO()
        meta = "; ".join(f"{k}={v}" for k, v in sorted(self.meta.items()))
        buf.write(f"# {self.name}; {meta}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([fmt(v) for v in r])
        return buf.getvalue()


def read_csv_table(text):
    """Inverse of Table.to_csv up to float formatting."""
    lines = text.splitlines()
    head = lines[0][2:].split("; ")
    meta = dict(item.split("=", 1) for item in head[1:] if "=" in item)
    reader = csv.reader(lines[1:])
    columns = next(reader)
    rows = []
    for r in reader:
        rows.append([_parse_cell(c) for c in r])
    return Table(head[0], columns, rows, meta)


def _parse_cell(c):
    try:
        return float(c)
    except ValueError:
        return c


def read_config(path):
    """Plain ``key = value`` lines; '#' starts a comment. Keys use dashes or underscores."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",),
                                       inline_comment_prefixes=("#",))
    parser.optionxform = str
    parser.read_string("[run]\n" + text)
    return {k.replace("-", "_"): v.strip() for k, v in parser["run"].items()}


def parse_grid(text):
    """'start:stop:steps' (inclusive, linear) or a comma-separated list."""
    text = str(text).strip()
    if ":" in text:
        start, stop, steps = text.split(":")
        steps = int(steps)
        if steps < 1:
            raise ValueError("grid needs at least one point")
        return [round(float(v), 12) for v in np.linspace(float(start), float(stop), steps)]
    vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise ValueError("grid is empty")
    return vals


def load_vector(text_or_path):
    """A pmf given inline as '0.5,0.5' or as a one-line CSV file."""
    s = str(text_or_path)
    if "," in s and not s.endswith(".csv"):
        return np.array([float(v) for v in s.split(",")])
    return np.atleast_1d(np.loadtxt(s, delimiter=",", comments="#", dtype=float)).ravel()


def load_matrix(path):
    return np.loadtxt(path, delimiter=",", comments="#", dtype=float, ndmin=2)


def to_json(obj):
    return json.dumps(obj, sort_keys=True, default=_default)


def _default(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if hasattr(x, "to_dict"):
        return x.to_dict()
    return str(x)


# svg ----------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def svg_plot(series, xlabel="", ylabel="", title="", width=640, height=420):
    """Polylines with axes, ticks and a legend. ``series`` maps label -> (xs, ys)."""
    pts = [(float(x), float(y)) for xs, ys in series.values() for x, y in zip(xs, ys)
           if math.isfinite(float(x)) and math.isfinite(float(y))]
    if not pts:
        raise ValueError("nothing finite to plot")
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    left, right, top, bottom = 70, 20, 40, 50
    pw, ph = width - left - right, height - top - bottom

    def sx(x):
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return top + ph - (y - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="13">{_esc(title)}</text>',
           f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
           f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>']
    for k in range(6):
        xv = x0 + (x1 - x0) * k / 5
        yv = y0 + (y1 - y0) * k / 5
        out.append(f'<line x1="{sx(xv):.1f}" y1="{top + ph}" x2="{sx(xv):.1f}" y2="{top + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{sx(xv):.1f}" y="{top + ph + 16}" text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<line x1="{left - 4}" y1="{sy(yv):.1f}" x2="{left}" y2="{sy(yv):.1f}" stroke="black"/>')
        out.append(f'<text x="{left - 6}" y="{sy(yv) + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(f'<text x="15" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 15 {top + ph / 2:.1f})">{_esc(ylabel)}</text>')
    for i, (label, (xs, ys)) in enumerate(series.items()):
        color = _PALETTE[i % len(_PALETTE)]
        coords = " ".join(f"{sx(float(x)):.2f},{sy(float(y)):.2f}" for x, y in zip(xs, ys)
                          if math.isfinite(float(x)) and math.isfinite(float(y)))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        ly = top + 14 * i + 8
        out.append(f'<line x1="{left + pw - 150}" y1="{ly}" x2="{left + pw - 130}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw - 125}" y="{ly + 4}">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
