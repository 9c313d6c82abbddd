"""Tiny dependency-free SVG line plots.

Just enough for the sweep figures: linear/log axes, a 1-2-5 tick ladder,
polyline curves with a fixed palette, and a legend.  Output is plain text
SVG, deterministic for identical input.
"""

from __future__ import annotations

import math

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
           "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")

_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 62, 16, 34, 46


def _linear_ticks(lo, hi, target=6):
    if not (hi > lo):
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _log_ticks(lo, hi):
    lo = max(lo, 1e-300)
    a, b = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
    return [10.0 ** k for k in range(a, b + 1)]


def _fmt(v):
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.0e}"
    return f"{v:g}"


class _Axis:
    def __init__(self, lo, hi, scale, span, offset):
        self.scale = scale
        if scale == "log":
            self.lo, self.hi = math.log10(max(lo, 1e-300)), math.log10(max(hi, 1e-299))
        else:
            self.lo, self.hi = lo, hi
        if self.hi - self.lo < 1e-12:
            self.hi = self.lo + 1.0
        self.span, self.offset = span, offset

    def pos(self, v):
        t = math.log10(max(v, 1e-300)) if self.scale == "log" else v
        return self.offset + (t - self.lo) / (self.hi - self.lo) * self.span


def line_plot(path, curves, title="", xlabel="", ylabel="",
              xscale="linear", yscale="linear", width=760, height=520):
    """Write an SVG line plot.

    curves: iterable of (label, x, y); non-finite y points are dropped.
    """
    pts = []
    for _, xs, ys in curves:
        for x, y in zip(xs, ys):
            if math.isfinite(x) and math.isfinite(y) and \
                    (yscale != "log" or y > 0) and (xscale != "log" or x > 0):
                pts.append((x, y))
    if not pts:
        raise ValueError("no finite data to plot")
    xlo, xhi = min(p[0] for p in pts), max(p[0] for p in pts)
    ylo, yhi = min(p[1] for p in pts), max(p[1] for p in pts)
    if yscale == "linear":
        pad = 0.05 * (yhi - ylo or abs(yhi) or 1.0)
        ylo, yhi = ylo - pad, yhi + pad
        if ylo > 0 and ylo < 0.3 * yhi:
            ylo = 0.0

    plot_w = width - _MARGIN_L - _MARGIN_R
    plot_h = height - _MARGIN_T - _MARGIN_B
    ax = _Axis(xlo, xhi, xscale, plot_w, _MARGIN_L)
    ay = _Axis(ylo, yhi, yscale, -plot_h, _MARGIN_T + plot_h)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#444"/>',
    ]
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
                   f'font-size="14">{title}</text>')

    xticks = _log_ticks(xlo, xhi) if xscale == "log" else _linear_ticks(xlo, xhi)
    for t in xticks:
        if xscale == "log" and not (xlo <= t <= xhi * 1.0001):
            continue
        px = ax.pos(t)
        if px < _MARGIN_L - 0.5 or px > _MARGIN_L + plot_w + 0.5:
            continue
        out.append(f'<line x1="{px:.1f}" y1="{_MARGIN_T + plot_h}" x2="{px:.1f}" '
                   f'y2="{_MARGIN_T + plot_h + 5}" stroke="#444"/>')
        out.append(f'<line x1="{px:.1f}" y1="{_MARGIN_T}" x2="{px:.1f}" '
                   f'y2="{_MARGIN_T + plot_h}" stroke="#ddd" stroke-width="0.6"/>')
        out.append(f'<text x="{px:.1f}" y="{_MARGIN_T + plot_h + 18}" '
                   f'text-anchor="middle">{_fmt(t)}</text>')
    yticks = _log_ticks(*(sorted((10 ** ay.lo, 10 ** ay.hi)))) if yscale == "log" \
        else _linear_ticks(ay.lo, ay.hi)
    for t in yticks:
        py = ay.pos(t)
        if py > _MARGIN_T + plot_h + 0.5 or py < _MARGIN_T - 0.5:
            continue
        out.append(f'<line x1="{_MARGIN_L - 5}" y1="{py:.1f}" x2="{_MARGIN_L}" '
                   f'y2="{py:.1f}" stroke="#444"/>')
        out.append(f'<line x1="{_MARGIN_L}" y1="{py:.1f}" x2="{_MARGIN_L + plot_w}" '
                   f'y2="{py:.1f}" stroke="#ddd" stroke-width="0.6"/>')
        out.append(f'<text x="{_MARGIN_L - 8}" y="{py + 4:.1f}" '
                   f'text-anchor="end">{_fmt(t)}</text>')
    if xlabel:
        out.append(f'<text x="{_MARGIN_L + plot_w / 2:.1f}" y="{height - 10}" '
                   f'text-anchor="middle">{xlabel}</text>')
    if ylabel:
        out.append(f'<text x="16" y="{_MARGIN_T + plot_h / 2:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {_MARGIN_T + plot_h / 2:.1f})">{ylabel}</text>')

    for i, (label, xs, ys) in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        segs, cur = [], []
        for x, y in zip(xs, ys):
            ok = math.isfinite(x) and math.isfinite(y) and \
                (yscale != "log" or y > 0) and (xscale != "log" or x > 0)
            if ok:
                cur.append(f"{ax.pos(x):.2f},{ay.pos(y):.2f}")
            elif cur:
                segs.append(cur)
                cur = []
        if cur:
            segs.append(cur)
        for seg in segs:
            if len(seg) > 1:
                out.append(f'<polyline points="{" ".join(seg)}" fill="none" '
                           f'stroke="{color}" stroke-width="1.6"/>')

    ly = _MARGIN_T + 10
    for i, (label, _, _) in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<line x1="{_MARGIN_L + plot_w - 150}" y1="{ly}" '
                   f'x2="{_MARGIN_L + plot_w - 126}" y2="{ly}" stroke="{color}" '
                   'stroke-width="1.6"/>')
        out.append(f'<text x="{_MARGIN_L + plot_w - 120}" y="{ly + 4}">{label}</text>')
        ly += 17

    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
