"""독립 브루트포스 오라클: 점 단위 산술로 MARS를 다시 계산한다.

iset을 쓰지 않는다. 타일 점은 법선 내적 비교로, 풋프린트는 의존성을 점마다 적용해서,
시그니처는 pandas groupby로 구한다. model 외에는 기호 파이프라인과 코드를 공유하지 않는다.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from affine_mars import config
from affine_mars.errors import BoxTooSmallError, UnboundedSetError
from affine_mars.model import AffineFn, Program, Space, TilingSpec

logger = logging.getLogger(__name__)

Point = tuple[int, ...]
Delta = tuple[int, ...]
Box = Sequence[tuple[int, int]]


@dataclass
class SignatureGrouping:
    """시그니처(정렬된 타일 오프셋 목록) -> 정렬된 점 목록."""

    groups: dict[tuple[Delta, ...], list[Point]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.groups)

    def signatures(self) -> list[tuple[Delta, ...]]:
        return sorted(self.groups, key=lambda s: (len(s), s))

    def points(self) -> list[Point]:
        return sorted(p for pts in self.groups.values() for p in pts)

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {"signature": sig, "size": len(pts), "first": pts[0], "last": pts[-1]}
            for sig, pts in sorted(self.groups.items(), key=lambda kv: (len(kv[0]), kv[0]))
        ]
        return pd.DataFrame(rows, columns=["signature", "size", "first", "last"])


# ─── 타일 / 풋프린트 ──────────────────────────────────────────────────────────

def _region_box(
    tiling: TilingSpec,
    lows: Sequence[int],
    highs: Sequence[int],
    domain: Optional[Box],
) -> list[tuple[int, int]]:
    """타일 좌표 lows..highs 범위 전체를 덮는 탐색 박스.

    꼭짓점을 부동소수점으로 풀고 ±1 여유를 둔다. 슬래브 타일링은 도메인 경계를 그대로 쓴다.

    Args:
        tiling: 타일링.
        lows: 타일 좌표 하한 (포함).
        highs: 타일 좌표 상한 (포함).
        domain: 차원별 [lo, hi]. 있으면 박스를 자른다.
    """
    if tiling.count < tiling.space.dim:
        if domain is None:
            raise UnboundedSetError(
                f"공간 {tiling.space.name}의 타일이 유계가 아니다: domainBounds가 필요하다"
            )
        return [(int(lo), int(hi)) for lo, hi in domain]
    normals = np.array(tiling.normals, dtype=float)
    corners = [[s * lo, s * (hi + 1) - 1] for s, lo, hi in zip(tiling.sizes, lows, highs)]
    vertices = np.array([np.linalg.solve(normals, np.array(c, dtype=float)) for c in itertools.product(*corners)])
    lo = np.floor(vertices.min(axis=0)).astype(int) - 1
    hi = np.ceil(vertices.max(axis=0)).astype(int) + 1
    box = list(zip(lo.tolist(), hi.tolist()))
    if domain is not None:
        box = [(max(a, c), min(b, e)) for (a, b), (c, e) in zip(box, domain)]
    return box


def _grid(box: Box) -> np.ndarray:
    axes = [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in box]
    if any(len(a) == 0 for a in axes):
        return np.zeros((0, len(box)), dtype=np.int64)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def tile_index(tiling: TilingSpec, pts: np.ndarray) -> np.ndarray:
    """각 점이 속한 타일 좌표 floor(n_j·x / s_j) (N x count 배열)."""
    normals = np.array(tiling.normals, dtype=np.int64).reshape(tiling.count, tiling.space.dim)
    sizes = np.array(tiling.sizes, dtype=np.int64)
    return np.floor_divide(pts @ normals.T, sizes)


def tile_points(tiling: TilingSpec, t: Sequence[int], domain: Optional[Box] = None) -> np.ndarray:
    """T(t)의 정수 점 (사전식 순서, N x dim 배열). 내적 비교로만 판정한다."""
    pts = _grid(_region_box(tiling, t, t, domain))
    mask = np.all(tile_index(tiling, pts) == np.array(t, dtype=np.int64), axis=1)
    return pts[mask]


def _region(tiling: TilingSpec, radius: int, domain: Optional[Box]) -> tuple[np.ndarray, np.ndarray]:
    """|δ|∞ ≤ radius인 모든 타일의 점과 각 점의 타일 좌표."""
    lows, highs = [-radius] * tiling.count, [radius] * tiling.count
    pts = _grid(_region_box(tiling, lows, highs, domain))
    idx = tile_index(tiling, pts)
    keep = np.all(np.abs(idx) <= radius, axis=1)
    return pts[keep], idx[keep]


def _apply(dep: AffineFn, pts: np.ndarray) -> np.ndarray:
    A = np.array(dep.int_rows, dtype=np.int64).reshape(dep.target.dim, dep.source.dim)
    return pts @ A.T + np.array(dep.b, dtype=np.int64)


def _in_box(pts: np.ndarray, box: Optional[Box]) -> np.ndarray:
    if box is None:
        return pts
    lo = np.array([b[0] for b in box], dtype=np.int64)
    hi = np.array([b[1] for b in box], dtype=np.int64)
    return pts[np.all((pts >= lo) & (pts <= hi), axis=1)]


def _as_points(arr: np.ndarray) -> list[Point]:
    if len(arr) == 0:
        return []
    return [tuple(int(v) for v in row) for row in np.unique(arr, axis=0)]


def oracle_footprint(
    dep: AffineFn,
    tiling: TilingSpec,
    t: Sequence[int],
    data_box: Optional[Box] = None,
    domain: Optional[Box] = None,
) -> list[Point]:
    """{B(x) : x ∈ T(t)} ∩ data_box, 사전식 정렬."""
    return _as_points(_in_box(_apply(dep, tile_points(tiling, t, domain)), data_box))


def _combined(deps: Sequence[AffineFn], tiling: TilingSpec, t: Sequence[int], domain: Optional[Box]) -> np.ndarray:
    pts = tile_points(tiling, t, domain)
    images = [_apply(d, pts) for d in deps]
    if not images:
        return np.zeros((0, 0), dtype=np.int64)
    return np.unique(np.concatenate(images), axis=0)


def _frame(pts: np.ndarray, prefix: str = "y") -> pd.DataFrame:
    return pd.DataFrame(pts, columns=[f"{prefix}{i}" for i in range(pts.shape[1])])


def _hits(
    deps: Sequence[AffineFn],
    tiling: TilingSpec,
    reference: np.ndarray,
    radius: int,
    domain: Optional[Box],
) -> list[pd.DataFrame]:
    """의존성마다 (reference의 점 좌표, 그 점을 읽는 타일 좌표) 행을 구한다."""
    pts, idx = _region(tiling, radius, domain)
    coords = [f"y{i}" for i in range(reference.shape[1])]
    tcols = [f"t{j}" for j in range(tiling.count)]
    ref = _frame(reference).drop_duplicates()
    hits = []
    for dep in deps:
        frame = _frame(_apply(dep, pts))
        for j, col in enumerate(tcols):
            frame[col] = idx[:, j]
        hits.append(frame.merge(ref, on=coords, how="inner"))
    return hits


def _deltas(hit: pd.DataFrame, count: int) -> list[Delta]:
    return [tuple(row) for row in hit[[f"t{j}" for j in range(count)]].to_numpy(dtype=np.int64).tolist()]


def _warn_on_shell(deltas: set[Delta], radius: int) -> None:
    shell = sorted(d for d in deltas if d and max(abs(v) for v in d) == radius)
    if shell:
        logger.warning(
            "타일 박스 반경 %d의 가장자리 오프셋 %s가 소비 타일이다: 더 바깥 타일이 잘렸을 수 있다",
            radius, shell[:4],
        )


def _group(rows: pd.DataFrame, coords: list[str]) -> SignatureGrouping:
    """(점 좌표, delta) 행들을 점별 시그니처로 묶는다."""
    if rows.empty:
        return SignatureGrouping()
    grouping: dict[tuple[Delta, ...], list[Point]] = {}
    for key, sub in rows.groupby(coords, sort=True):
        point = tuple(int(v) for v in (key if isinstance(key, tuple) else (key,)))
        sig = tuple(sorted(set(sub["delta"])))
        grouping.setdefault(sig, []).append(point)
    return SignatureGrouping({sig: sorted(pts) for sig, pts in grouping.items()})


# ─── MARS 오라클 ──────────────────────────────────────────────────────────────

def _signatures(
    deps: Sequence[AffineFn],
    tiling: TilingSpec,
    reference: np.ndarray,
    tile_box: int,
    domain: Optional[Box],
) -> SignatureGrouping:
    """reference의 각 점을 소비하는 타일 오프셋 집합으로 묶는다."""
    if len(reference) == 0:
        return SignatureGrouping()
    coords = [f"y{i}" for i in range(reference.shape[1])]
    frames = []
    for hit in _hits(deps, tiling, reference, tile_box, domain):
        if hit.empty:
            continue
        frames.append(hit[coords].assign(delta=_deltas(hit, tiling.count)))
    if not frames:
        return SignatureGrouping()
    rows = pd.concat(frames, ignore_index=True)
    _warn_on_shell(set(rows["delta"]), tile_box)
    return _group(rows, coords)


def oracle_mars(
    program: Program,
    dest: Space,
    tile_box: Optional[int] = None,
    data_box: Optional[Box] = None,
) -> SignatureGrouping:
    """B<T(0)>의 각 점 y에 대해 {δ ∈ tileBox : y ∈ B<T(δ)>}를 계산해 시그니처별로 묶는다.

    Args:
        program: 분석할 프로그램.
        dest: 대상 공간. 들어오는 의존성은 모두 같은 원천 공간에서 와야 한다.
        tile_box: 타일 오프셋 반경 (∞-노름). None이면 config.TILE_BOX.
        data_box: 차원별 [lo, hi]. T(0)의 풋프린트를 담지 못하면 BoxTooSmallError.
    """
    deps = program.dependences_into(dest)
    if not deps:
        return SignatureGrouping()
    source = deps[0].source
    tiling = program.tiling_for(source)
    if tiling is None:
        raise BoxTooSmallError(f"공간 {source.name}에 타일링이 없다")
    radius = config.TILE_BOX if tile_box is None else tile_box
    domain = program.bounds_for(source)
    reference = _combined(deps, tiling, (0,) * tiling.count, domain)
    if data_box is not None and len(_in_box(reference, data_box)) != len(reference):
        raise BoxTooSmallError(f"데이터 박스 {list(data_box)}가 T(0)의 풋프린트를 담지 못한다")
    grouping = _signatures(deps, tiling, reference, radius, domain)
    logger.info("오라클 MARS: 시그니처 %d개, 점 %d개", len(grouping), len(reference))
    return grouping


def oracle_flow_mars(
    deps: Sequence[AffineFn],
    tiling: TilingSpec,
    tile_box: Optional[int] = None,
    domain: Optional[Box] = None,
) -> SignatureGrouping:
    """생산 타일 기준의 flow-in 그룹: 이웃 타일 T(τ), τ ≠ 0의 점 중 T(0)이 소비하는 것을
    소비 타일 집합별로 묶는다. 의존성은 타일된 공간을 자기 자신으로 보내야 한다."""
    if not deps:
        return SignatureGrouping()
    radius = config.TILE_BOX if tile_box is None else tile_box
    consumed = _in_box(_combined(deps, tiling, (0,) * tiling.count, domain), domain)
    idx = tile_index(tiling, consumed)
    keep = np.any(idx != 0, axis=1) & np.all(np.abs(idx) <= radius, axis=1)
    reference = consumed[keep]
    grouping = _signatures(deps, tiling, reference, radius, domain)
    logger.info("오라클 flow-in MARS: 시그니처 %d개, 점 %d개", len(grouping), len(reference))
    return grouping


def oracle_consumers(
    deps: Sequence[AffineFn],
    tiling: TilingSpec,
    tile_box: Optional[int] = None,
    domain: Optional[Box] = None,
) -> list[list[Delta]]:
    """의존성별 V_i(0): B_i<T(δ)>가 B<T(0)>와 겹치는 δ 목록."""
    radius = config.TILE_BOX if tile_box is None else tile_box
    reference = _combined(deps, tiling, (0,) * tiling.count, domain)
    if len(reference) == 0:
        return [[] for _ in deps]
    return [sorted(set(_deltas(hit, tiling.count))) for hit in _hits(deps, tiling, reference, radius, domain)]
