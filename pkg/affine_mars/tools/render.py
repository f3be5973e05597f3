"""2차원 원천 공간의 MARS 분할을 결정적 SVG로 그린다.

대상 공간이 1차원이면 수직선, 2차원이면 격자로 그린다. 같은 입력이면 같은 바이트가 나온다.
"""
from __future__ import annotations

import html
import logging
from typing import Optional, Sequence

from sympy import Rational

from affine_mars.core import iset
from affine_mars.errors import RenderError
from affine_mars.mars import MarsPartition
from affine_mars.model import TilingSpec, tile_set

logger = logging.getLogger(__name__)

_MARS_COLORS = [
    "#4f81bd", "#c0504d", "#9bbb59", "#8064a2", "#4bacc6",
    "#f79646", "#2c4d75", "#772c2a", "#5f7530", "#4d3b62",
]

_CELL = 24
_MARGIN = 20
_LEGEND_ROW = 22


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tile_polygon(tiling: TilingSpec, t: Sequence[int]) -> list[tuple[Rational, Rational]]:
    """정수 점 사이를 지나도록 반 칸 당긴 타일 평행사변형 꼭짓점."""
    scaled = tiling.scaled
    half = [Rational(0), Rational(0)]
    for v, s in zip(scaled, tiling.sizes):
        half = [half[0] + v[0] / (2 * s), half[1] + v[1] / (2 * s)]
    corners = [(0, 0), (1, 0), (1, 1), (0, 1)]
    out = []
    for a, b in corners:
        x = (t[0] + a) * scaled[0][0] + (t[1] + b) * scaled[1][0] - half[0]
        y = (t[0] + a) * scaled[0][1] + (t[1] + b) * scaled[1][1] - half[1]
        out.append((Rational(x), Rational(y)))
    return out


class _Panel:
    """데이터 좌표 -> 픽셀 좌표 변환 (y축은 위로)."""

    def __init__(self, points: Sequence[tuple[float, float]], origin_x: int, origin_y: int) -> None:
        xs = [p[0] for p in points] or [0.0]
        ys = [p[1] for p in points] or [0.0]
        self.xmin, self.xmax = min(xs) - 1, max(xs) + 1
        self.ymin, self.ymax = min(ys) - 1, max(ys) + 1
        self.ox, self.oy = origin_x, origin_y

    @property
    def width(self) -> int:
        return int((self.xmax - self.xmin + 1) * _CELL)

    @property
    def height(self) -> int:
        return int((self.ymax - self.ymin + 1) * _CELL)

    def px(self, x: float) -> float:
        return self.ox + (x - self.xmin) * _CELL

    def py(self, y: float) -> float:
        return self.oy + (self.ymax - y) * _CELL

    def cell(self, x: int, y: int, cls: str) -> str:
        return (
            f'<rect class="{cls}" x="{_fmt(self.px(x - 0.5))}" y="{_fmt(self.py(y + 0.5))}" '
            f'width="{_CELL}" height="{_CELL}"/>'
        )

    def polygon(self, vertices: Sequence[tuple[Rational, Rational]], cls: str) -> str:
        pts = " ".join(f"{_fmt(self.px(float(x)))},{_fmt(self.py(float(y)))}" for x, y in vertices)
        return f'<polygon class="{cls}" points="{pts}"/>'


def _as_2d(p: Sequence[int]) -> tuple[int, int]:
    return (p[0], p[1]) if len(p) == 2 else (p[0], 0)


def render_svg(partition: MarsPartition, tiles: Optional[Sequence[Sequence[int]]] = None) -> str:
    """MARS 분할 SVG 문서를 반환한다. tiles는 테두리를 그릴 원천 타일 좌표 (기본: T(0))."""
    src, dst = partition.source, partition.destination
    if src.dim != 2 or dst.dim > 2:
        raise RenderError(f"rendering unsupported: 원천 차원 {src.dim}, 대상 차원 {dst.dim} (2 / 2 이하만 지원)")
    if not partition.mars:
        raise RenderError("rendering unsupported: 그릴 MARS가 없다")
    tiling = partition.tiling
    tile_list = [tuple(t) for t in (tiles or [partition.tile])]
    polygons = [_tile_polygon(tiling, t) for t in tile_list] if tiling.count == 2 else []

    mars_points = [[_as_2d(p) for p in iset.points(m.set)] for m in partition.mars]
    dest_coords: list[tuple[float, float]] = [(float(x), float(y)) for pts in mars_points for x, y in pts]
    overlay = src == dst
    if overlay:
        dest_coords += [(float(x), float(y)) for poly in polygons for x, y in poly]

    body: list[str] = []
    x0 = _MARGIN
    if not overlay:
        own = [_as_2d(p) for p in iset.points(tile_set(tiling, partition.tile))]
        src_coords = [(float(x), float(y)) for x, y in own] + [(float(x), float(y)) for poly in polygons for x, y in poly]
        src_panel = _Panel(src_coords, x0, _MARGIN + 16)
        body.append(f'<g id="source"><text x="{x0}" y="{_MARGIN}">{html.escape(src.name)}</text>')
        for x, y in own:
            body.append(
                f'<circle class="point" cx="{_fmt(src_panel.px(x))}" cy="{_fmt(src_panel.py(y))}" r="3"/>'
            )
        body.extend(src_panel.polygon(poly, "tile") for poly in polygons)
        body.append("</g>")
        x0 += src_panel.width + _MARGIN

    panel = _Panel(dest_coords, x0, _MARGIN + 16)
    body.append(f'<g id="destination"><text x="{x0}" y="{_MARGIN}">{html.escape(dst.name)}</text>')
    for k, pts in enumerate(mars_points):
        body.extend(panel.cell(x, y, f"fp mars-{k}") for x, y in pts)
    if overlay:
        body.extend(panel.polygon(poly, "tile") for poly in polygons)
    body.append("</g>")

    top = _MARGIN + 16 + panel.height + _MARGIN
    if not overlay:
        top = max(top, _MARGIN + 16 + src_panel.height + _MARGIN)
    body.append('<g id="legend">')
    for k, m in enumerate(partition.mars):
        y = top + k * _LEGEND_ROW
        sig = "{" + ", ".join(str(i) for i in m.signature) + "}"
        deltas = " ".join("(" + ",".join(str(v) for v in d) + ")" for d in m.deltas)
        body.append(f'<rect class="mars-{k}" x="{_MARGIN}" y="{y}" width="14" height="14"/>')
        body.append(f'<text x="{_MARGIN + 20}" y="{y + 12}">{html.escape(sig)} δ={html.escape(deltas)}</text>')
    body.append("</g>")

    width = x0 + panel.width + _MARGIN
    height = top + len(partition.mars) * _LEGEND_ROW + _MARGIN
    styles = [
        ".tile{fill:none;stroke:#222;stroke-width:1.5}",
        ".fp{stroke:#555;stroke-width:0.5}",
        ".point{fill:#222}",
        "text{font-family:monospace;font-size:12px}",
    ]
    styles += [f".mars-{k}{{fill:{_MARS_COLORS[k % len(_MARS_COLORS)]}}}" for k in range(len(partition.mars))]
    header = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    )
    logger.info("SVG 렌더: MARS %d개, %dx%d", len(partition.mars), width, height)
    return "\n".join([header, "<style>" + "".join(styles) + "</style>", *body, "</svg>"]) + "\n"


