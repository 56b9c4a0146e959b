"""Minimal deterministic SVG line plots.

The CLI's figures are simple curves; hand-rolled SVG keeps them free of
plotting dependencies and byte-stable across environments. Everything is
formatted with fixed precision and no timestamps, so rerunning a command
reproduces the file exactly.
"""

from __future__ import annotations

import math

from .errors import ValidationError

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 34, 46


def nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    """Round tick positions covering [lo, hi] on the 1/2/5 ladder."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValidationError(f"cannot tick non-finite range [{lo}, {hi}]")
    if hi <= lo:
        hi = lo + (abs(lo) if lo != 0.0 else 1.0)
    raw = (hi - lo) / max(target, 2)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        step = mult * mag
        if raw <= step:
            break
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + step * 1e-9:
        ticks.append(0.0 if abs(t) < step * 1e-9 else t)
        t += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def line_plot(series, xlabel: str, ylabel: str, title: str,
              marker: tuple[float, float, str] | None = None) -> str:
    """SVG for one or more (label, xs, ys) series.

    `marker` drops an annotated point, e.g. the argmax of a sweep.
    """
    if not series:
        raise ValidationError("line_plot needs at least one series")
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    if not xs_all:
        raise ValidationError("line_plot got only empty series")
    if marker is not None:
        xs_all.append(marker[0])
        ys_all.append(marker[1])
    xt = nice_ticks(min(xs_all), max(xs_all))
    yt = nice_ticks(min(ys_all), max(ys_all))
    x0, x1 = min(xt[0], min(xs_all)), max(xt[-1], max(xs_all))
    y0, y1 = min(yt[0], min(ys_all)), max(yt[-1], max(ys_all))
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def px(x: float) -> float:
        return MARGIN_L + (x - x0) / (x1 - x0) * (WIDTH - MARGIN_L - MARGIN_R)

    def py(y: float) -> float:
        return HEIGHT - MARGIN_B - (y - y0) / (y1 - y0) * (
            HEIGHT - MARGIN_T - MARGIN_B)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]
    for t in xt:
        x = px(t)
        out.append(f'<line x1="{x:.2f}" y1="{py(y0):.2f}" x2="{x:.2f}" '
                   f'y2="{py(y1):.2f}" stroke="#ddd" stroke-width="1"/>')
        out.append(f'<text x="{x:.2f}" y="{HEIGHT - MARGIN_B + 16:.2f}" '
                   f'text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">{_fmt(t)}</text>')
    for t in yt:
        y = py(t)
        out.append(f'<line x1="{px(x0):.2f}" y1="{y:.2f}" x2="{px(x1):.2f}" '
                   f'y2="{y:.2f}" stroke="#ddd" stroke-width="1"/>')
        out.append(f'<text x="{MARGIN_L - 6:.2f}" y="{y + 4:.2f}" '
                   f'text-anchor="end" font-family="sans-serif" '
                   f'font-size="11">{_fmt(t)}</text>')
    out.append(f'<rect x="{MARGIN_L}" y="{MARGIN_T}" '
               f'width="{WIDTH - MARGIN_L - MARGIN_R}" '
               f'height="{HEIGHT - MARGIN_T - MARGIN_B}" fill="none" '
               f'stroke="#333" stroke-width="1"/>')
    out.append(f'<text x="{(MARGIN_L + WIDTH - MARGIN_R) / 2:.0f}" '
               f'y="{HEIGHT - 8}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12">{xlabel}</text>')
    out.append(f'<text x="16" y="{(MARGIN_T + HEIGHT - MARGIN_B) / 2:.0f}" '
               f'text-anchor="middle" font-family="sans-serif" font-size="12" '
               f'transform="rotate(-90 16 '
               f'{(MARGIN_T + HEIGHT - MARGIN_B) / 2:.0f})">{ylabel}</text>')

    for i, (label, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"/>')
        if len(series) > 1:
            ly = MARGIN_T + 16 + 16 * i
            out.append(f'<line x1="{WIDTH - MARGIN_R - 120}" y1="{ly}" '
                       f'x2="{WIDTH - MARGIN_R - 96}" y2="{ly}" '
                       f'stroke="{color}" stroke-width="1.5"/>')
            out.append(f'<text x="{WIDTH - MARGIN_R - 90}" y="{ly + 4}" '
                       f'font-family="sans-serif" font-size="11">{label}</text>')

    if marker is not None:
        mx, my, text = marker
        out.append(f'<circle cx="{px(mx):.2f}" cy="{py(my):.2f}" r="4" '
                   f'fill="none" stroke="#d62728" stroke-width="1.5"/>')
        out.append(f'<text x="{px(mx) + 8:.2f}" y="{py(my) - 8:.2f}" '
                   f'font-family="sans-serif" font-size="11" '
                   f'fill="#d62728">{text}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"
