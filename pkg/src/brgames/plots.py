"""Standalone SVG scatter of Pareto points; no plotting dependency."""
from __future__ import annotations

from xml.sax.saxutils import escape

WIDTH, HEIGHT, PAD = 480, 400, 60


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def pareto_svg(points, flags, x_label="x", y_label="y") -> str:
    """Scatter with front members filled and the dominated region shaded.

    The shaded region is the union of the lower-left quadrants of the front
    points, clipped to the plot box.
    """
    xs = [p.x for p in points]
    ys = [p.y for p in points]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    dx = (x1 - x0) or 1.0
    dy = (y1 - y0) or 1.0
    x0, x1 = x0 - 0.1 * dx, x1 + 0.1 * dx
    y0, y1 = y0 - 0.1 * dy, y1 + 0.1 * dy

    def sx(x):
        return PAD + (x - x0) / (x1 - x0) * (WIDTH - 2 * PAD)

    def sy(y):
        return HEIGHT - PAD - (y - y0) / (y1 - y0) * (HEIGHT - 2 * PAD)

    front = sorted((p for p, f in zip(points, flags) if f), key=lambda p: (p.x, -p.y))
    # staircase: left edge at x0, descending steps through front points
    poly = [(sx(x0), sy(y0))]
    prev_x = x0
    for p in front:
        poly.append((sx(prev_x), sy(p.y)))
        poly.append((sx(p.x), sy(p.y)))
        prev_x = p.x
    if front:
        poly.append((sx(front[-1].x), sy(y0)))
    path = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in poly)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<polygon class="dominated" points="{path}" fill="#cccccc" fill-opacity="0.6" stroke="none"/>',
        f'<rect x="{PAD}" y="{PAD}" width="{WIDTH - 2 * PAD}" height="{HEIGHT - 2 * PAD}" '
        'fill="none" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle" font-size="13">{escape(x_label)}</text>',
        f'<text x="15" y="{HEIGHT / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 15 {HEIGHT / 2})">{escape(y_label)}</text>',
        f'<text x="{PAD}" y="{HEIGHT - PAD + 15}" font-size="10">{_fmt(x0)}</text>',
        f'<text x="{WIDTH - PAD}" y="{HEIGHT - PAD + 15}" font-size="10" text-anchor="end">{_fmt(x1)}</text>',
        f'<text x="{PAD - 5}" y="{HEIGHT - PAD}" font-size="10" text-anchor="end">{_fmt(y0)}</text>',
        f'<text x="{PAD - 5}" y="{PAD + 10}" font-size="10" text-anchor="end">{_fmt(y1)}</text>',
    ]
    for p, f in zip(points, flags):
        cx, cy = sx(p.x), sy(p.y)
        fill = "#d62728" if f else "white"
        out.append(
            f'<circle class="{"front" if f else "dominated-point"}" data-solver="{escape(p.algorithm)}" '
            f'data-x="{p.x!r}" data-y="{p.y!r}" cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="5" '
            f'fill="{fill}" stroke="#d62728"/>'
        )
        out.append(f'<text x="{_fmt(cx + 7)}" y="{_fmt(cy - 7)}" font-size="11">{escape(p.algorithm)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
