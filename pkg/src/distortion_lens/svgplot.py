"""Self-contained SVG scatter plots, written directly for byte-reproducibility."""

from __future__ import annotations

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 24, 44, 56
N_TICKS = 5

POINT_COLOR = "#1f77b4"
LINE_COLOR = "#d62728"


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _ticks(lo: float, hi: float, n: int) -> list[float]:
    if hi == lo:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def scatter_svg(
    points: list[tuple[str, float, float]],
    slope: float | None,
    intercept: float | None,
    r2: float | None,
    title: str,
    x_label: str = "complexity score",
    y_label: str = "test accuracy",
) -> str:
    """SVG text for one measure's score-vs-accuracy scatter with its fit line."""
    xs = [p[1] for p in points]
    ys = [p[2] for p in points]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_pad = 0.05 * (x_hi - x_lo) or 0.5
    y_pad = 0.05 * (y_hi - y_lo) or 0.05
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x: float) -> float:
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<clipPath id="plot-area"><rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}"/></clipPath>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>',
        f'<text x="{WIDTH / 2:.6g}" y="24" text-anchor="middle" font-size="16">{title}</text>',
    ]
    for tx in _ticks(x_lo, x_hi, N_TICKS):
        px = sx(tx)
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{MARGIN_T + plot_h}" x2="{_fmt(px)}" y2="{MARGIN_T + plot_h + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_fmt(px)}" y="{MARGIN_T + plot_h + 20}" text-anchor="middle" font-size="11">{_fmt(tx)}</text>'
        )
    for ty in _ticks(y_lo, y_hi, N_TICKS):
        py = sy(ty)
        parts.append(
            f'<line x1="{MARGIN_L - 5}" y1="{_fmt(py)}" x2="{MARGIN_L}" y2="{_fmt(py)}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{MARGIN_L - 9}" y="{_fmt(py + 4)}" text-anchor="end" font-size="11">{_fmt(ty)}</text>'
        )
    parts.append(
        f'<text x="{WIDTH / 2:.6g}" y="{HEIGHT - 12}" text-anchor="middle" font-size="13">{x_label}</text>'
    )
    parts.append(
        f'<text x="18" y="{HEIGHT / 2:.6g}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {HEIGHT / 2:.6g})">{y_label}</text>'
    )
    if slope is not None and intercept is not None:
        line_y0 = slope * x_lo + intercept
        line_y1 = slope * x_hi + intercept
        parts.append(
            f'<line clip-path="url(#plot-area)" x1="{_fmt(sx(x_lo))}" y1="{_fmt(sy(line_y0))}" '
            f'x2="{_fmt(sx(x_hi))}" y2="{_fmt(sy(line_y1))}" stroke="{LINE_COLOR}" stroke-width="1.5"/>'
        )
    for model_id, x, y in points:
        parts.append(
            f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="4" fill="{POINT_COLOR}">'
            f"<title>{model_id}</title></circle>"
        )
    if r2 is not None:
        parts.append(
            f'<text x="{MARGIN_L + 10}" y="{MARGIN_T + 18}" font-size="13">r&#178; = {r2:.3f}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
