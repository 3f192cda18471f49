"""Minimal static SVG line charts, written directly with no renderer."""

from __future__ import annotations

WIDTH, HEIGHT = 640, 420
MARGIN = 56
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo: float, hi: float, count: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / count
    return [lo + i * step for i in range(count + 1)]


def line_chart(series, x_label: str, y_label: str, title: str = "") -> str:
    """Render named (x, y) series as an SVG document string.

    ``series`` is a list of (name, [(x, y), ...]) pairs; points are drawn in
    the given order as one polyline per series with a small legend.
    """
    pts = [p for _, data in series for p in data]
    if not pts:
        raise ValueError("nothing to plot")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(0.0, min(ys)), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    inner_w = WIDTH - 2 * MARGIN
    inner_h = HEIGHT - 2 * MARGIN

    def sx(x):
        return MARGIN + (x - x_lo) / (x_hi - x_lo) * inner_w

    def sy(y):
        return HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * inner_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" '
                   f'font-size="15">{title}</text>')
    for tx in _ticks(x_lo, x_hi):
        out.append(f'<line x1="{sx(tx):.1f}" y1="{HEIGHT - MARGIN}" '
                   f'x2="{sx(tx):.1f}" y2="{HEIGHT - MARGIN + 5}" stroke="black"/>')
        out.append(f'<text x="{sx(tx):.1f}" y="{HEIGHT - MARGIN + 18}" '
                   f'text-anchor="middle" font-size="11">{tx:.3g}</text>')
    for ty in _ticks(y_lo, y_hi):
        out.append(f'<line x1="{MARGIN - 5}" y1="{sy(ty):.1f}" '
                   f'x2="{MARGIN}" y2="{sy(ty):.1f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN - 8}" y="{sy(ty) + 4:.1f}" '
                   f'text-anchor="end" font-size="11">{ty:.3g}</text>')
    out.append(f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" '
               f'font-size="12">{x_label}</text>')
    out.append(f'<text x="16" y="{HEIGHT / 2:.1f}" font-size="12" '
               f'transform="rotate(-90 16 {HEIGHT / 2:.1f})" '
               f'text-anchor="middle">{y_label}</text>')
    for idx, (name, data) in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in data)
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"/>')
        for x, y in data:
            out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.5" '
                       f'fill="{color}"/>')
        ly = MARGIN + 16 * idx
        out.append(f'<line x1="{WIDTH - MARGIN - 110}" y1="{ly}" '
                   f'x2="{WIDTH - MARGIN - 86}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="1.5"/>')
        out.append(f'<text x="{WIDTH - MARGIN - 80}" y="{ly + 4}" '
                   f'font-size="11">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
