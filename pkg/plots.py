"""
Plots Module for adiabat

Minimal figure emitter for trajectories and ground-state studies. A Figure is
laid out once in pixel space and rendered either as an SVG document (always)
or rasterized through Pillow when PNG output is requested.

Figures included:
- graph_a: d_n vs d_psi from the initial GS, with the adiabatic slope line
- graph_b: distances to the instantaneous GS, with the origin marker
- graph_c: distance to the initial GS, dynamic vs instantaneous GS, with y = x
- epsilon_plot: epsilon(t), with the optional t_ref marker
- gs_pairs_figure: ground-state pairs and the fitted line
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union
from xml.sax.saxutils import escape

import numpy as np

from adiabaticity import TrajectoryRecord
from metrics import MetricPair

try:
    from PIL import Image, ImageDraw, ImageFont
    _PIL_AVAILABLE = True
except ImportError:
    Image = ImageDraw = ImageFont = None  # type: ignore
    _PIL_AVAILABLE = False

plots_logger = logging.getLogger("AdiabatPlots")

WIDTH = 640
HEIGHT = 480
MARGIN_LEFT = 70
MARGIN_RIGHT = 20
MARGIN_TOP = 40
MARGIN_BOTTOM = 55
N_TICKS = 5

PALETTE = ("#1f4e9a", "#c0392b", "#2e8b57", "#8e44ad")
GUIDE_COLOR = "#808080"
TEXT_HALF_HEIGHT = 6


@dataclass
class Series:
    label: str
    xs: np.ndarray
    ys: np.ndarray
    color: str = PALETTE[0]
    points: bool = False


@dataclass
class Guide:
    """Straight reference line y = slope * x + intercept, or a vertical line at x."""

    label: str
    slope: float = 0.0
    intercept: float = 0.0
    vertical_at: Optional[float] = None


@dataclass
class Marker:
    label: str
    x: float
    y: float


@dataclass
class Figure:
    title: str
    x_label: str
    y_label: str
    series: List[Series] = field(default_factory=list)
    guides: List[Guide] = field(default_factory=list)
    markers: List[Marker] = field(default_factory=list)
    include_origin: bool = True

    def bounds(self) -> Tuple[float, float, float, float]:
        xs = np.concatenate([s.xs for s in self.series] + [np.array([m.x for m in self.markers])])
        ys = np.concatenate([s.ys for s in self.series] + [np.array([m.y for m in self.markers])])
        xs = xs[np.isfinite(xs)]
        ys = ys[np.isfinite(ys)]
        if self.include_origin:
            xs = np.append(xs, 0.0)
            ys = np.append(ys, 0.0)
        x_lo, x_hi = _padded(xs)
        y_lo, y_hi = _padded(ys)
        return x_lo, x_hi, y_lo, y_hi


def _padded(values: np.ndarray) -> Tuple[float, float]:
    if values.size == 0:
        return 0.0, 1.0
    lo, hi = float(values.min()), float(values.max())
    span = hi - lo
    if span <= 0.0:
        span = abs(hi) or 1.0
    return lo - 0.05 * span, hi + 0.05 * span


class _Frame:
    """Maps data coordinates to pixels inside the plotting area."""

    def __init__(self, figure: Figure):
        self.x_lo, self.x_hi, self.y_lo, self.y_hi = figure.bounds()
        self.left = MARGIN_LEFT
        self.right = WIDTH - MARGIN_RIGHT
        self.top = MARGIN_TOP
        self.bottom = HEIGHT - MARGIN_BOTTOM

    def px(self, x: float) -> float:
        return self.left + (x - self.x_lo) / (self.x_hi - self.x_lo) * (self.right - self.left)

    def py(self, y: float) -> float:
        return self.bottom - (y - self.y_lo) / (self.y_hi - self.y_lo) * (self.bottom - self.top)

    def polyline(self, xs: np.ndarray, ys: np.ndarray) -> List[Tuple[float, float]]:
        keep = np.isfinite(xs) & np.isfinite(ys)
        return [(self.px(x), self.py(y)) for x, y in zip(xs[keep], ys[keep])]

    def guide_segment(self, guide: Guide) -> Optional[Tuple[Tuple[float, float], Tuple[float, float]]]:
        if guide.vertical_at is not None:
            if not self.x_lo <= guide.vertical_at <= self.x_hi:
                return None
            x = self.px(guide.vertical_at)
            return (x, self.top), (x, self.bottom)
        # Clip y = slope * x + intercept to the visible box
        xs = np.linspace(self.x_lo, self.x_hi, 2)
        ys = guide.slope * xs + guide.intercept
        if guide.slope != 0.0:
            if (ys > self.y_hi).all() or (ys < self.y_lo).all():
                return None
            y_clip = np.clip(ys, self.y_lo, self.y_hi)
            xs = (y_clip - guide.intercept) / guide.slope
            ys = y_clip
        (x0, x1), (y0, y1) = xs, ys
        return (self.px(x0), self.py(y0)), (self.px(x1), self.py(y1))

    def x_ticks(self) -> np.ndarray:
        return np.linspace(self.x_lo, self.x_hi, N_TICKS)

    def y_ticks(self) -> np.ndarray:
        return np.linspace(self.y_lo, self.y_hi, N_TICKS)


# ─── SVG ────────────────────────────────────────────────────────────────────


def render_svg(figure: Figure) -> str:
    frame = _Frame(figure)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{escape(figure.title)}</text>',
        f'<rect x="{frame.left}" y="{frame.top}" width="{frame.right - frame.left}" height="{frame.bottom - frame.top}" fill="none" stroke="black"/>',
    ]
    for x in frame.x_ticks():
        px = frame.px(x)
        out.append(f'<line x1="{px:.2f}" y1="{frame.bottom}" x2="{px:.2f}" y2="{frame.bottom + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{frame.bottom + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{x:.3g}</text>')
    for y in frame.y_ticks():
        py = frame.py(y)
        out.append(f'<line x1="{frame.left - 5}" y1="{py:.2f}" x2="{frame.left}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{frame.left - 8}" y="{py + 4:.2f}" text-anchor="end" font-family="sans-serif" font-size="11">{y:.3g}</text>')
    out.append(f'<text x="{(frame.left + frame.right) / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" font-size="13">{escape(figure.x_label)}</text>')
    out.append(
        f'<text x="16" y="{(frame.top + frame.bottom) / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 16 {(frame.top + frame.bottom) / 2:.1f})">{escape(figure.y_label)}</text>'
    )

    for guide in figure.guides:
        segment = frame.guide_segment(guide)
        if segment is None:
            continue
        (x0, y0), (x1, y1) = segment
        out.append(
            f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x1:.2f}" y2="{y1:.2f}" stroke="{GUIDE_COLOR}" '
            f'stroke-dasharray="6 4"><title>{escape(guide.label)}</title></line>'
        )
    for series in figure.series:
        coords = frame.polyline(series.xs, series.ys)
        if series.points:
            out.extend(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{series.color}"/>' for x, y in coords)
        elif coords:
            path = " ".join(f"{x:.2f},{y:.2f}" for x, y in coords)
            out.append(f'<polyline points="{path}" fill="none" stroke="{series.color}" stroke-width="1.5"><title>{escape(series.label)}</title></polyline>')
    for marker in figure.markers:
        x, y = frame.px(marker.x), frame.py(marker.y)
        out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="5" fill="none" stroke="black" stroke-width="1.5"/>')
        out.append(f'<text x="{x + 8:.2f}" y="{y - 8:.2f}" font-family="sans-serif" font-size="11">{escape(marker.label)}</text>')

    for i, series in enumerate(figure.series):
        y = frame.top + 16 + 16 * i
        out.append(f'<line x1="{frame.right - 150}" y1="{y - 4}" x2="{frame.right - 130}" y2="{y - 4}" stroke="{series.color}" stroke-width="2"/>')
        out.append(f'<text x="{frame.right - 124}" y="{y}" font-family="sans-serif" font-size="11">{escape(series.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path: Union[str, Path], figure: Figure) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_svg(figure))
    plots_logger.debug(f"Wrote {path}")
    return path


# ─── PNG ────────────────────────────────────────────────────────────────────


def _text(draw, xy, text: str, font, align: str = "left") -> None:
    """Draw text anchored by its left edge, centre or right edge, vertically centred."""
    x, y = xy
    width = draw.textlength(text, font=font)
    if align == "center":
        x -= width / 2
    elif align == "right":
        x -= width
    draw.text((x, y - TEXT_HALF_HEIGHT), text, fill="black", font=font)


def _dashed(draw, start, end, fill, dash: float = 6.0, gap: float = 4.0) -> None:
    (x0, y0), (x1, y1) = start, end
    length = float(np.hypot(x1 - x0, y1 - y0))
    if length == 0.0:
        return
    ux, uy = (x1 - x0) / length, (y1 - y0) / length
    pos = 0.0
    while pos < length:
        stop = min(pos + dash, length)
        draw.line([(x0 + ux * pos, y0 + uy * pos), (x0 + ux * stop, y0 + uy * stop)], fill=fill, width=1)
        pos = stop + gap


def write_png(path: Union[str, Path], figure: Figure) -> Optional[Path]:
    """Rasterize a figure with Pillow; returns None when Pillow is missing."""
    if not _PIL_AVAILABLE:
        plots_logger.warning("Pillow is not installed; skipping PNG output")
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = _Frame(figure)
    img = Image.new("RGB", (WIDTH, HEIGHT), (255, 255, 255))
    draw = ImageDraw.Draw(img)
    font = ImageFont.load_default()

    _text(draw, (WIDTH / 2, 18), figure.title, font, "center")
    draw.rectangle([frame.left, frame.top, frame.right, frame.bottom], outline="black")
    for x in frame.x_ticks():
        px = frame.px(x)
        draw.line([(px, frame.bottom), (px, frame.bottom + 5)], fill="black")
        _text(draw, (px, frame.bottom + 14), f"{x:.3g}", font, "center")
    for y in frame.y_ticks():
        py = frame.py(y)
        draw.line([(frame.left - 5, py), (frame.left, py)], fill="black")
        _text(draw, (frame.left - 8, py), f"{y:.3g}", font, "right")
    _text(draw, ((frame.left + frame.right) / 2, HEIGHT - 16), figure.x_label, font, "center")
    _text(draw, (8, frame.top - 10), figure.y_label, font)

    for guide in figure.guides:
        segment = frame.guide_segment(guide)
        if segment is not None:
            _dashed(draw, *segment, fill=GUIDE_COLOR)
    for series in figure.series:
        coords = frame.polyline(series.xs, series.ys)
        if series.points:
            for x, y in coords:
                draw.ellipse([x - 2.5, y - 2.5, x + 2.5, y + 2.5], fill=series.color)
        elif len(coords) > 1:
            draw.line(coords, fill=series.color, width=2)
    for marker in figure.markers:
        x, y = frame.px(marker.x), frame.py(marker.y)
        draw.ellipse([x - 5, y - 5, x + 5, y + 5], outline="black", width=2)
        _text(draw, (x + 8, y - 10), marker.label, font)
    for i, series in enumerate(figure.series):
        y = frame.top + 12 + 16 * i
        draw.line([(frame.right - 150, y), (frame.right - 130, y)], fill=series.color, width=2)
        _text(draw, (frame.right - 124, y), series.label, font)

    img.save(path, format="PNG")
    plots_logger.debug(f"Wrote {path}")
    return path


# ─── Figure Builders ────────────────────────────────────────────────────────


def _column(records: Sequence[TrajectoryRecord], name: str) -> np.ndarray:
    return np.array([getattr(r, name) for r in records], dtype=np.float64)


def graph_a(records: Sequence[TrajectoryRecord], slope: float, title: str = "") -> Figure:
    return Figure(
        title=title or "Distance from the initial ground state",
        x_label="D_psi(psi_0, psi(t))",
        y_label="D_n(n_0, n(t))",
        series=[Series("dynamic", _column(records, "d_psi_0t"), _column(records, "d_n_0t"))],
        guides=[Guide(f"adiabatic line, slope {slope:g}", slope=slope)],
    )


def graph_b(records: Sequence[TrajectoryRecord], title: str = "") -> Figure:
    return Figure(
        title=title or "Distance from the instantaneous ground state",
        x_label="D_psi(psi_GS(t), psi(t))",
        y_label="D_n(n_GS(t), n(t))",
        series=[Series("dynamic", _column(records, "d_psi_gst"), _column(records, "d_n_gst"))],
        markers=[Marker("adiabatic", 0.0, 0.0)],
    )


def graph_c(records: Sequence[TrajectoryRecord], t_ref: Optional[float] = None, title: str = "") -> Figure:
    """Both metrics against the initial GS: dynamic state (y) vs instantaneous GS (x)."""
    figure = Figure(
        title=title or "Dynamic state vs instantaneous ground state",
        x_label="D(initial GS, instantaneous GS)",
        y_label="D(initial GS, dynamic state)",
        series=[
            Series("wavefunction", _column(records, "d_psi_0gs"), _column(records, "d_psi_0t"), PALETTE[0]),
            Series("density", _column(records, "d_n_0gs"), _column(records, "d_n_0t"), PALETTE[1]),
        ],
        guides=[Guide("y = x", slope=1.0)],
    )
    if t_ref is not None and records:
        ref = min(records, key=lambda r: abs(r.t - t_ref))
        figure.markers.append(Marker(f"t_ref = {ref.t:g}", ref.d_psi_0gs, ref.d_psi_0t))
        figure.markers.append(Marker(f"t_ref = {ref.t:g}", ref.d_n_0gs, ref.d_n_0t))
    return figure


def epsilon_plot(records: Sequence[TrajectoryRecord], t_ref: Optional[float] = None, title: str = "") -> Figure:
    figure = Figure(
        title=title or "Adiabatic criterion",
        x_label="t (a.u.)",
        y_label="epsilon(t)",
        series=[Series("epsilon", _column(records, "t"), _column(records, "epsilon"))],
    )
    if t_ref is not None:
        figure.guides.append(Guide("t_ref", vertical_at=t_ref))
    return figure


def gs_pairs_figure(points: Sequence[MetricPair], slope: float, title: str = "") -> Figure:
    return Figure(
        title=title or "Ground-state pairs",
        x_label="D_psi",
        y_label="D_n",
        series=[Series("pairs", np.array([p.d_psi for p in points]), np.array([p.d_n for p in points]), points=True)],
        guides=[Guide(f"fit, slope {slope:.4g}", slope=slope)],
    )


def write_figure(out_dir: Union[str, Path], stem: str, figure: Figure, png: bool = False) -> List[Path]:
    out_dir = Path(out_dir)
    written = [write_svg(out_dir / f"{stem}.svg", figure)]
    if png:
        png_path = write_png(out_dir / f"{stem}.png", figure)
        if png_path is not None:
            written.append(png_path)
    return written


def write_trajectory_figures(
    out_dir: Union[str, Path],
    records: Sequence[TrajectoryRecord],
    slope: float,
    t_ref: Optional[float] = None,
    png: bool = False,
    label: str = "",
) -> List[Path]:
    """graph_a, graph_b, graph_c and epsilon figures for one run."""
    prefix = f"{label}: " if label else ""
    figures = {
        "graph_a": graph_a(records, slope, prefix + "distance from the initial ground state"),
        "graph_b": graph_b(records, prefix + "distance from the instantaneous ground state"),
        "graph_c": graph_c(records, t_ref, prefix + "dynamic state vs instantaneous ground state"),
        "epsilon": epsilon_plot(records, t_ref, prefix + "adiabatic criterion"),
    }
    written = []
    for stem, figure in figures.items():
        written += write_figure(out_dir, stem, figure, png)
    plots_logger.info(f"Wrote {len(written)} figure files to {out_dir}")
    return written
