"""CSV and SVG emission for experiment results."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

__all__ = ["RESULT_COLUMNS", "format_float", "write_rows", "loglog_svg"]

RESULT_COLUMNS = (
    "rung",
    "tau_sup",
    "jacobian_sup",
    "input_error",
    "feature_error",
    "bound",
    "alpha_input",
    "alpha_feature",
    "log_constant_feature",
    "residual_feature",
)


def format_float(value) -> str:
    """Round-trippable text for floats; empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return "nan"
    return format(value, ".17g")


def write_rows(path, columns, rows) -> None:
    """Write dict rows with a fixed column order and ``\\n`` line endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_float(row.get(c)) if not isinstance(row.get(c), str) else row[c]
                         for c in columns])
    Path(path).write_text(buf.getvalue())


def _ticks(lo: float, hi: float):
    return [10.0**k for k in range(math.floor(lo), math.ceil(hi) + 1)]


def loglog_svg(series, fit=None, title="", xlabel="||tau||_inf", ylabel="error",
               width=640, height=440) -> str:
    """Log-log scatter/line plot as an SVG document.

    ``series`` maps a legend label to ``(xs, ys)``; non-positive points are
    skipped. ``fit`` is an optional ``(alpha, log_constant, label)`` drawn as
    the line ``exp(log_constant) * x**alpha``.
    """
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    pts = [(x, y) for xs, ys in series.values() for x, y in zip(xs, ys) if x > 0 and y > 0]
    margin = {"l": 70, "r": 20, "t": 40, "b": 55}
    pw, ph = width - margin["l"] - margin["r"], height - margin["t"] - margin["b"]
    if pts:
        lx = [math.log10(x) for x, _ in pts]
        ly = [math.log10(y) for _, y in pts]
        x0, x1, y0, y1 = min(lx), max(lx), min(ly), max(ly)
    else:
        x0, x1, y0, y1 = -1.0, 0.0, -1.0, 0.0
    pad_x, pad_y = max(0.05 * (x1 - x0), 0.1), max(0.05 * (y1 - y0), 0.1)
    x0, x1, y0, y1 = x0 - pad_x, x1 + pad_x, y0 - pad_y, y1 + pad_y

    def sx(x):
        return margin["l"] + (math.log10(x) - x0) / (x1 - x0) * pw

    def sy(y):
        return margin["t"] + (y1 - math.log10(y)) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="14">{_esc(title)}</text>',
        f'<rect x="{margin["l"]}" y="{margin["t"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        if x0 <= math.log10(t) <= x1:
            x = sx(t)
            out.append(f'<line x1="{x:.2f}" y1="{margin["t"]}" x2="{x:.2f}" '
                       f'y2="{margin["t"] + ph}" stroke="#ddd"/>')
            out.append(f'<text x="{x:.2f}" y="{margin["t"] + ph + 16}" '
                       f'text-anchor="middle">{t:g}</text>')
    for t in _ticks(y0, y1):
        if y0 <= math.log10(t) <= y1:
            y = sy(t)
            out.append(f'<line x1="{margin["l"]}" y1="{y:.2f}" x2="{margin["l"] + pw}" '
                       f'y2="{y:.2f}" stroke="#ddd"/>')
            out.append(f'<text x="{margin["l"] - 6}" y="{y + 4:.2f}" '
                       f'text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{margin["l"] + pw / 2:.1f}" y="{height - 12}" '
               f'text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(f'<text x="16" y="{margin["t"] + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {margin["t"] + ph / 2:.1f})">{_esc(ylabel)}</text>')

    legend = []
    for i, (label, (xs, ys)) in enumerate(series.items()):
        color = colors[i % len(colors)]
        good = [(x, y) for x, y in zip(xs, ys) if x > 0 and y > 0]
        if len(good) > 1:
            path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in sorted(good))
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}"/>')
        for x, y in good:
            out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}"/>')
        legend.append((label, color, None))
    if fit is not None and pts:
        alpha, logc, label = fit
        xa, xb = 10 ** (x0 + pad_x), 10 ** (x1 - pad_x)
        ya, yb = math.exp(logc) * xa**alpha, math.exp(logc) * xb**alpha
        if ya > 0 and yb > 0:
            out.append(f'<line x1="{sx(xa):.2f}" y1="{sy(ya):.2f}" x2="{sx(xb):.2f}" '
                       f'y2="{sy(yb):.2f}" stroke="black" stroke-dasharray="6 4"/>')
            legend.append((label, "black", "6 4"))
    for i, (label, color, dash) in enumerate(legend):
        y = margin["t"] + 14 + 16 * i
        x = margin["l"] + 10
        style = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<line x1="{x}" y1="{y - 4}" x2="{x + 20}" y2="{y - 4}" '
                   f'stroke="{color}" stroke-width="2"{style}/>')
        out.append(f'<text x="{x + 26}" y="{y}">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(text: str) -> str:
    return str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
