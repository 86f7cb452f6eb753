"""File outputs: atomic writes, round-trip CSV formatting, and the SVG error
chart.  Everything here is deterministic given its inputs."""

import math
import os
import tempfile

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def format_float(x):
    """Shortest decimal that round-trips the double exactly."""
    return repr(float(x))


def atomic_write_text(path, text):
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, bool):
                cells.append("true" if cell else "false")
            elif isinstance(cell, float):
                cells.append(format_float(cell))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _ticks_log(lo, hi):
    lo_e = math.floor(math.log10(lo))
    hi_e = math.ceil(math.log10(hi))
    return [10.0 ** e for e in range(lo_e, hi_e + 1)]


def render_error_plot_svg(report, path):
    """Log-log chart of mean absolute error vs n with one-standard-deviation
    whiskers, one polyline per estimator."""
    rows = report.rows()
    if not rows:
        raise ValueError("nothing to report")
    width, height = 720, 480
    mleft, mright, mtop, mbot = 70, 20, 30, 50

    ns = sorted({n for (_, n) in rows})
    ys = []
    for (mean, std, _count, _fail) in rows.values():
        if mean > 0.0:
            ys.append(mean)
            if mean - std > 0.0:
                ys.append(mean - std)
            ys.append(mean + std)
    if not ys:
        ys = [1.0]
    x_lo, x_hi = min(ns), max(ns)
    y_lo, y_hi = min(ys), max(ys)
    if x_lo == x_hi:
        x_lo, x_hi = x_lo / 2.0, x_hi * 2.0
    if y_lo == y_hi:
        y_lo, y_hi = y_lo / 2.0, y_hi * 2.0

    def px(n):
        f = (math.log(n) - math.log(x_lo)) / (math.log(x_hi) - math.log(x_lo))
        return mleft + f * (width - mleft - mright)

    def py(v):
        f = (math.log(v) - math.log(y_lo)) / (math.log(y_hi) - math.log(y_lo))
        return height - mbot - f * (height - mtop - mbot)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{mleft}" y="{mtop}" width="{width - mleft - mright}" '
        f'height="{height - mtop - mbot}" fill="none" stroke="#888"/>',
    ]
    for tx in _ticks_log(x_lo, x_hi):
        if x_lo <= tx <= x_hi:
            parts.append(f'<line x1="{px(tx):.2f}" y1="{height - mbot}" x2="{px(tx):.2f}" '
                         f'y2="{height - mbot + 5}" stroke="#444"/>')
            parts.append(f'<text x="{px(tx):.2f}" y="{height - mbot + 18}" font-size="11" '
                         f'text-anchor="middle">{tx:g}</text>')
    for ty in _ticks_log(y_lo, y_hi):
        if y_lo <= ty <= y_hi:
            parts.append(f'<line x1="{mleft - 5}" y1="{py(ty):.2f}" x2="{mleft}" '
                         f'y2="{py(ty):.2f}" stroke="#444"/>')
            parts.append(f'<text x="{mleft - 8}" y="{py(ty):.2f}" font-size="11" '
                         f'text-anchor="end" dominant-baseline="middle">{ty:g}</text>')
    parts.append(f'<text x="{(mleft + width - mright) / 2:.0f}" y="{height - 12}" '
                 f'font-size="12" text-anchor="middle">n</text>')
    parts.append(f'<text x="16" y="{(mtop + height - mbot) / 2:.0f}" font-size="12" '
                 f'text-anchor="middle" transform="rotate(-90 16 '
                 f'{(mtop + height - mbot) / 2:.0f})">mean abs error</text>')

    for idx, estimator in enumerate(report.estimators):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = []
        for n in ns:
            cell = rows.get((estimator, n))
            if cell is None or cell[2] == 0 or cell[0] <= 0.0:
                continue
            mean, std, _count, _fail = cell
            x, y = px(n), py(mean)
            pts.append(f"{x:.2f},{y:.2f}")
            y_up = py(mean + std)
            y_dn = py(max(mean - std, mean * 1e-3))
            parts.append(f'<line x1="{x:.2f}" y1="{y_dn:.2f}" x2="{x:.2f}" y2="{y_up:.2f}" '
                         f'stroke="{color}" stroke-width="1"/>')
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}"/>')
        if pts:
            parts.append(f'<polyline points="{" ".join(pts)}" fill="none" '
                         f'stroke="{color}" stroke-width="1.5"/>')
        ly = mtop + 16 + 16 * idx
        parts.append(f'<line x1="{width - mright - 150}" y1="{ly}" '
                     f'x2="{width - mright - 126}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{width - mright - 120}" y="{ly + 4}" '
                     f'font-size="12">{estimator}</text>')

    parts.append("</svg>")
    atomic_write_text(path, "\n".join(parts) + "\n")
