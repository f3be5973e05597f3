"""Z^d 위의 정수 집합 대수.

ISet은 셀(cell)의 합집합이고, 셀은 아핀 부등식/등식과 나눗셈 제약의 논리곱이다.
모든 연산은 정확하다. 사영(존재 한정자 제거)은 정수 전용 절차로 수행한다:

  1. 등식 소거: 계수 절댓값이 가장 작은 등식으로 변수를 치환하고, 계수가 1이
     아니면 나눗셈 제약을 추가한다.
  2. 나눗셈 제약이나 단위가 아닌 부등식 쌍에 걸린 유계 변수는 범위가 좁으면
     값마다 등식으로 고정한다.
  3. 그 밖에 나눗셈 제약에 걸린 변수는 모듈러스 lcm에 대한 잉여류로 분할한다.
  4. 부등식에만 걸린 변수는 한쪽 계수가 1이면 정확한 그림자(exact shadow)로,
     아니면 dark shadow와 splinter들의 합집합으로 소거한다.

셀 예산(config.MAX_CELLS)을 넘으면 추측하지 않고 UndecidedError를 던진다.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from math import gcd, lcm
from typing import Any, Iterable, Optional, Protocol, Sequence

import numpy as np

from affine_mars import config
from affine_mars.core.linalg import column_hermite_form, to_matrix
from affine_mars.errors import DimensionMismatchError, UnboundedSetError, UndecidedError

logger = logging.getLogger(__name__)

# 내부 표현: 행 = 계수들 + (상수,), 나눗셈 = (행, 모듈러스)
Row = tuple[int, ...]
DivRow = tuple[Row, int]
System = tuple[list[Row], list[Row], list[DivRow]]
Bounds = list[tuple[Optional[int], Optional[int]]]


class ConstraintKind(str, Enum):
    GE = ">=0"
    EQ = "=0"


@dataclass(frozen=True)
class AffineConstraint:
    """coeffs·x + constant {>=, =} 0."""

    coeffs: tuple[int, ...]
    constant: int
    kind: ConstraintKind = ConstraintKind.GE

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def value(self, point: Sequence[int]) -> int:
        return sum(c * x for c, x in zip(self.coeffs, point)) + self.constant

    def holds(self, point: Sequence[int]) -> bool:
        v = self.value(point)
        return v == 0 if self.kind == ConstraintKind.EQ else v >= 0


@dataclass(frozen=True)
class DivisibilityConstraint:
    """modulus | (coeffs·x + constant)."""

    coeffs: tuple[int, ...]
    constant: int
    modulus: int

    def __post_init__(self) -> None:
        if self.modulus <= 1:
            raise ValueError(f"modulus는 1보다 커야 한다: {self.modulus}")

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def holds(self, point: Sequence[int]) -> bool:
        return (sum(c * x for c, x in zip(self.coeffs, point)) + self.constant) % self.modulus == 0


@dataclass(frozen=True)
class Cell:
    dim: int
    ineqs: tuple[AffineConstraint, ...] = ()
    divs: tuple[DivisibilityConstraint, ...] = ()

    def __post_init__(self) -> None:
        for c in (*self.ineqs, *self.divs):
            if c.dim != self.dim:
                raise DimensionMismatchError(f"제약 차원 {c.dim} != 셀 차원 {self.dim}")

    def contains(self, point: Sequence[int]) -> bool:
        return all(c.holds(point) for c in self.ineqs) and all(d.holds(point) for d in self.divs)

    def system(self) -> System:
        ge = [c.coeffs + (c.constant,) for c in self.ineqs if c.kind == ConstraintKind.GE]
        eq = [c.coeffs + (c.constant,) for c in self.ineqs if c.kind == ConstraintKind.EQ]
        dv = [(d.coeffs + (d.constant,), d.modulus) for d in self.divs]
        return ge, eq, dv

    @classmethod
    def from_system(cls, dim: int, system: System) -> "Cell":
        ge, eq, dv = system
        ineqs = [AffineConstraint(tuple(r[:-1]), r[-1], ConstraintKind.GE) for r in ge]
        ineqs += [AffineConstraint(tuple(r[:-1]), r[-1], ConstraintKind.EQ) for r in eq]
        divs = [DivisibilityConstraint(tuple(r[:-1]), r[-1], m) for r, m in dv]
        return cls(dim, tuple(ineqs), tuple(divs))

    def sort_key(self) -> tuple:
        return (
            tuple((c.kind.value, c.coeffs, c.constant) for c in self.ineqs),
            tuple((d.coeffs, d.constant, d.modulus) for d in self.divs),
        )


@dataclass(frozen=True)
class ISet:
    """셀들의 합집합. 셀 리스트가 비면 공집합이다."""

    dim: int
    cells: tuple[Cell, ...] = ()

    def __post_init__(self) -> None:
        for cell in self.cells:
            if cell.dim != self.dim:
                raise DimensionMismatchError(f"셀 차원 {cell.dim} != 집합 차원 {self.dim}")

    # ── 생성자 ──

    @classmethod
    def empty(cls, dim: int) -> "ISet":
        return cls(dim, ())

    @classmethod
    def universe(cls, dim: int) -> "ISet":
        return cls(dim, (Cell(dim),))

    @classmethod
    def box(cls, bounds: Sequence[tuple[int, int]]) -> "ISet":
        """닫힌 구간 박스 {lo_i <= x_i <= hi_i}."""
        dim = len(bounds)
        ge = []
        for i, (lo, hi) in enumerate(bounds):
            unit = tuple(int(j == i) for j in range(dim))
            ge.append(unit + (-int(lo),))
            ge.append(_neg(unit) + (int(hi),))
        return _from_systems(dim, [(ge, [], [])])

    @classmethod
    def point(cls, coords: Sequence[int]) -> "ISet":
        return cls.box([(int(c), int(c)) for c in coords])

    @classmethod
    def from_constraints(
        cls,
        dim: int,
        ineqs: Iterable[tuple[Sequence[int], int, str]] = (),
        divs: Iterable[tuple[Sequence[int], int, int]] = (),
    ) -> "ISet":
        """(coeffs, const, ">=0"|"=0") 와 (coeffs, const, mod) 튜플로 단일 셀 집합을 만든다."""
        cell = Cell(
            dim,
            tuple(AffineConstraint(tuple(c), k, ConstraintKind(kind)) for c, k, kind in ineqs),
            tuple(DivisibilityConstraint(tuple(c), k, m) for c, k, m in divs),
        )
        return _from_systems(dim, [cell.system()])

    # ── 질의 ──

    def contains(self, point: Sequence[int]) -> bool:
        return any(cell.contains(point) for cell in self.cells)

    def __contains__(self, point: object) -> bool:
        return self.contains(point)  # type: ignore[arg-type]

    # ── 직렬화 ──

    def to_json(self) -> dict[str, Any]:
        return {
            "dim": self.dim,
            "cells": [
                {
                    "ineqs": [[*c.coeffs, c.constant, c.kind.value] for c in cell.ineqs],
                    "divs": [[*d.coeffs, d.constant, d.modulus] for d in cell.divs],
                }
                for cell in self.cells
            ],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "ISet":
        dim = int(data["dim"])
        cells = []
        for raw in data.get("cells", []):
            ineqs = tuple(
                AffineConstraint(tuple(int(v) for v in c[:dim]), int(c[dim]), ConstraintKind(c[dim + 1]))
                for c in raw.get("ineqs", [])
            )
            divs = tuple(
                DivisibilityConstraint(tuple(int(v) for v in d[:dim]), int(d[dim]), int(d[dim + 1]))
                for d in raw.get("divs", [])
            )
            cells.append(Cell(dim, ineqs, divs))
        return cls(dim, tuple(cells))


class AffineLike(Protocol):
    """image/preimage가 받는 아핀 함수: x -> A x + b (A는 정수 행렬)."""

    A: Any
    b: Any


# ─── 정규화 ───────────────────────────────────────────────────────────────────

def _gcd_all(values: Iterable[int]) -> int:
    g = 0
    for v in values:
        g = gcd(g, v)
    return g


def _leading_sign(coeffs: Sequence[int]) -> int:
    for c in coeffs:
        if c:
            return 1 if c > 0 else -1
    return 0


def _neg(row: Row) -> Row:
    return tuple(-v for v in row)


def _normalize(system: System) -> Optional[System]:
    """제약을 정규형으로 만든다. 명백히 공집합이면 None.

    부등식은 계수 gcd로 나누고 상수를 내림하며, 같은 계수의 부등식은 가장 강한 것만 남긴다.
    반대 방향 쌍은 모순이거나 등식으로 합친다. 결과는 정렬되어 있다.
    """
    ge, eq, dv = system

    eqs: dict[Row, int] = {}
    for r in eq:
        c, k = r[:-1], r[-1]
        g = _gcd_all(c)
        if g == 0:
            if k != 0:
                return None
            continue
        if k % g:
            return None
        c, k = tuple(v // g for v in c), k // g
        if _leading_sign(c) < 0:
            c, k = _neg(c), -k
        if eqs.setdefault(c, k) != k:
            return None

    tight: dict[Row, int] = {}
    for r in ge:
        c, k = r[:-1], r[-1]
        g = _gcd_all(c)
        if g == 0:
            if k < 0:
                return None
            continue
        c, k = tuple(v // g for v in c), k // g
        if c not in tight or k < tight[c]:
            tight[c] = k

    # 등식과 같은 방향의 부등식은 상수 비교로 판정
    for c, k in eqs.items():
        if c in tight:
            if tight.pop(c) - k < 0:
                return None
        nc = _neg(c)
        if nc in tight:
            if tight.pop(nc) + k < 0:
                return None

    for c in sorted(tight):
        if c not in tight:
            continue
        nc = _neg(c)
        if nc not in tight:
            continue
        total = tight[c] + tight[nc]
        if total < 0:
            return None
        if total == 0:
            k = tight.pop(c)
            tight.pop(nc)
            if _leading_sign(c) < 0:
                c, k = nc, -k
            eqs[c] = k

    divs: set[DivRow] = set()
    for r, m in dv:
        c = tuple(v % m for v in r[:-1])
        k = r[-1] % m
        g = _gcd_all((*c, m))
        if k % g:
            return None
        m //= g
        if m == 1:
            continue
        divs.add((tuple(v // g for v in c) + (k // g,), m))

    return (
        sorted(c + (k,) for c, k in tight.items()),
        sorted(c + (k,) for c, k in eqs.items()),
        sorted(divs),
    )


# ─── 정확 사영 ────────────────────────────────────────────────────────────────

def _uses(system: System, k: int) -> bool:
    ge, eq, dv = system
    return any(r[k] for r in ge) or any(r[k] for r in eq) or any(r[k] for r, _ in dv)


def _substitute_equality(system: System, e: Row, k: int) -> System:
    """등식 e (a x_k + R = 0)로 x_k를 소거한다. |a| > 1이면 |a| | R을 추가한다."""
    ge, eq, dv = system
    a = e[k]
    sa, aa = (1 if a > 0 else -1), abs(a)

    def sub(r: Row) -> tuple[Row, int]:
        c = r[k]
        if not c:
            return r, 1
        return tuple(aa * ri - c * sa * ei for ri, ei in zip(r, e)), aa

    new_ge = [sub(r)[0] for r in ge]
    new_eq = [sub(r)[0] for r in eq if r != e]
    new_dv = []
    for r, m in dv:
        nr, scale = sub(r)
        new_dv.append((nr, m * scale))
    if aa > 1:
        rest = tuple(0 if i == k else v for i, v in enumerate(e))
        new_dv.append((rest, aa))
    return new_ge, new_eq, new_dv


def _split_residues(system: System, k: int) -> list[System]:
    """x_k = L·x_k' + rho (rho = 0..L-1)로 치환해 나눗셈 제약에서 x_k를 없앤다."""
    ge, eq, dv = system
    L = 1
    for r, m in dv:
        if r[k]:
            L = lcm(L, m)

    def sub(r: Row, rho: int) -> Row:
        c = r[k]
        if not c:
            return r
        out = list(r)
        out[k] = c * L
        out[-1] = r[-1] + c * rho
        return tuple(out)

    return [
        ([sub(r, rho) for r in ge], [sub(r, rho) for r in eq], [(sub(r, rho), m) for r, m in dv])
        for rho in range(L)
    ]


def _eliminate_inequality_var(system: System, k: int) -> list[System]:
    ge, eq, dv = system
    lower = [r for r in ge if r[k] > 0]
    upper = [r for r in ge if r[k] < 0]
    rest = [r for r in ge if not r[k]]
    if not lower or not upper:
        return [(rest, eq, dv)]

    exact = all(lo[k] == 1 or up[k] == -1 for lo in lower for up in upper)
    shadow = []
    for lo in lower:
        a = lo[k]
        for up in upper:
            b = -up[k]
            comb = tuple(a * u + b * l for u, l in zip(up, lo))
            if not exact:
                comb = comb[:-1] + (comb[-1] - (a - 1) * (b - 1),)
            shadow.append(comb)
    result: list[System] = [(rest + shadow, eq, dv)]
    if exact:
        return result

    # splinter: dark shadow 밖의 정수 해는 어떤 하한에 가까이 붙어 있다
    m = max(-up[k] for up in upper)
    for lo in lower:
        a = lo[k]
        for i in range((m * a - a - m) // m + 1):
            result.append((ge, eq + [lo[:-1] + (lo[-1] - i,)], dv))
    return result


def _split_values(system: System, live: Sequence[int]) -> Optional[list[System]]:
    """정수 범위가 가장 좁은 live 변수를 값마다 등식으로 고정한다.

    유계가 아니거나 범위가 config.SPLIT_VALUES보다 넓으면 None. 유리 그림자가 비면 [].
    """
    ge, eq, dv = system
    rows = ge + eq + [r for r, _ in dv]
    n = len(rows[0]) - 1
    bounds = _coordinate_bounds(n, system, only=live)
    if bounds is None:
        return []
    best: Optional[tuple[int, int, int]] = None
    for k in live:
        lo, hi = bounds[k]
        if lo is None or hi is None:
            continue
        if best is None or hi - lo < best[2] - best[1]:
            best = (k, lo, hi)
    if best is None or best[2] - best[1] + 1 > config.SPLIT_VALUES:
        return None
    k, lo, hi = best
    unit = tuple(int(j == k) for j in range(n))
    return [(ge, eq + [unit + (-v,)], dv) for v in range(lo, hi + 1)]


def _eliminate(system: System, elim: Sequence[int], first_only: bool = False) -> list[System]:
    """elim 변수들을 정확히 소거한 셀 시스템 목록(합집합)을 반환한다.

    결과 시스템에서 elim 변수의 계수는 모두 0이다 (열은 유지된다). 나눗셈 제약이나
    단위 계수가 아닌 부등식 쌍에 걸린 변수는 범위가 좁으면 값별로 나눠 splinter를 피한다.
    """
    work: list[System] = [system]
    out: list[System] = []
    steps = 0
    limit = config.MAX_CELLS
    while work:
        steps += 1
        if steps > limit:
            raise UndecidedError(f"정수 사영 예산 초과 (MARS_MAX_CELLS={limit})")
        current = _normalize(work.pop())
        if current is None:
            continue
        live = [k for k in elim if _uses(current, k)]
        if not live:
            out.append(current)
            if first_only:
                break
            continue

        ge, eq, dv = current
        best: Optional[tuple[Row, int]] = None
        for r in eq:
            for k in live:
                if r[k] and (best is None or abs(r[k]) < abs(best[0][best[1]])):
                    best = (r, k)
        if best is not None:
            work.append(_substitute_equality(current, *best))
            continue

        def cost(j: int) -> tuple[int, int]:
            lows = sum(1 for r in ge if r[j] > 0)
            ups = sum(1 for r in ge if r[j] < 0)
            inexact = any(r[j] > 1 for r in ge) and any(r[j] < -1 for r in ge)
            return int(inexact), lows * ups

        k_div = next((k for k in live if any(r[k] for r, _ in dv)), None)
        k_ineq = min(live, key=cost)
        if k_div is not None or cost(k_ineq)[0]:
            fixed = _split_values(current, live)
            if fixed is not None:
                work.extend(fixed)
                continue
        if k_div is not None:
            work.extend(_split_residues(current, k_div))
            continue

        work.extend(_eliminate_inequality_var(current, k_ineq))

    logger.debug("정수 사영: 소거 %d개 변수, %d 단계, 결과 셀 %d개", len(elim), steps, len(out))
    return out


# ─── 경계 / 열거 ──────────────────────────────────────────────────────────────

def _real_shadow(rows: list[Row], k: int) -> list[Row]:
    lower = [r for r in rows if r[k] > 0]
    upper = [r for r in rows if r[k] < 0]
    out = [r for r in rows if not r[k]]
    for lo in lower:
        for up in upper:
            out.append(tuple(lo[k] * u - up[k] * l for u, l in zip(up, lo)))
    return out


def _coordinate_bounds(n: int, system: System, only: Optional[Sequence[int]] = None) -> Optional[Bounds]:
    """유리 그림자로 구한 좌표별 정수 경계. 모순이 드러나면 None.

    only를 주면 그 좌표만 계산하고 나머지는 (None, None)으로 둔다.
    """
    ge, eq, _ = system
    base = list(ge) + list(eq) + [_neg(r) for r in eq]
    wanted = set(range(n) if only is None else only)
    bounds: Bounds = []
    for j in range(n):
        if j not in wanted:
            bounds.append((None, None))
            continue
        rows = base
        others = [k for k in range(n) if k != j]
        while True:
            normalized = _normalize((rows, [], []))
            if normalized is None:
                return None
            rows = normalized[0] + normalized[1] + [_neg(r) for r in normalized[1]]
            live = [k for k in others if any(r[k] for r in rows)]
            if not live:
                break
            k = min(live, key=lambda v: sum(1 for r in rows if r[v] > 0) * sum(1 for r in rows if r[v] < 0))
            rows = _real_shadow(rows, k)
        lo: Optional[int] = None
        hi: Optional[int] = None
        for r in rows:
            c, k = r[j], r[-1]
            if c == 1:
                lo = -k if lo is None else max(lo, -k)
            elif c == -1:
                hi = k if hi is None else min(hi, k)
        if lo is not None and hi is not None and lo > hi:
            return None
        bounds.append((lo, hi))
    return bounds


def _grid(bounds: Sequence[tuple[int, int]]) -> np.ndarray:
    """박스 안 모든 정수 점 (사전식 순서)."""
    if not bounds:
        return np.zeros((1, 0), dtype=np.int64)
    axes = [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _box_volume(bounds: Sequence[tuple[int, int]]) -> int:
    vol = 1
    for lo, hi in bounds:
        vol *= max(hi - lo + 1, 0)
    return vol


def _mask(points: np.ndarray, system: System) -> np.ndarray:
    ge, eq, dv = system
    mask = np.ones(len(points), dtype=bool)
    for r in ge:
        mask &= points @ np.asarray(r[:-1], dtype=np.int64) + r[-1] >= 0
    for r in eq:
        mask &= points @ np.asarray(r[:-1], dtype=np.int64) + r[-1] == 0
    for r, m in dv:
        mask &= (points @ np.asarray(r[:-1], dtype=np.int64) + r[-1]) % m == 0
    return mask


def _clip(bounds: Bounds, box: Sequence[tuple[int, int]]) -> Optional[list[tuple[int, int]]]:
    out = []
    for (lo, hi), (blo, bhi) in zip(bounds, box):
        lo = blo if lo is None else max(lo, blo)
        hi = bhi if hi is None else min(hi, bhi)
        if lo > hi:
            return None
        out.append((lo, hi))
    return out


def _finite(bounds: Optional[Bounds]) -> Optional[list[tuple[int, int]]]:
    if bounds is None or any(lo is None or hi is None for lo, hi in bounds):
        return None
    return [(lo, hi) for lo, hi in bounds]  # type: ignore[misc]


@lru_cache(maxsize=8192)
def _cell_bounds(cell: Cell) -> Optional[tuple[tuple[Optional[int], Optional[int]], ...]]:
    bounds = _coordinate_bounds(cell.dim, cell.system())
    return None if bounds is None else tuple(bounds)


def _cell_box(cell: Cell) -> Optional[list[tuple[int, int]]]:
    """셀을 담는 유한 정수 박스. 유리 그림자가 비었거나 유계가 아니면 None."""
    bounds = _cell_bounds(cell)
    return _finite(list(bounds)) if bounds is not None else None


def _tighter(*boxes: Optional[Sequence[tuple[int, int]]]) -> Optional[Sequence[tuple[int, int]]]:
    known = [b for b in boxes if b is not None]
    return min(known, key=_box_volume) if known else None


def _system_is_empty(n: int, system: System, within: Optional[Sequence[tuple[int, int]]] = None) -> bool:
    """within은 시스템의 모든 정수 해를 담는 유한 박스 (알고 있을 때)."""
    current = _normalize(system)
    if current is None:
        return True
    if n == 0:
        return False
    if within is not None and _box_volume(within) <= config.FAST_ENUM:
        return not bool(_mask(_grid(within), current).any())
    bounds = _coordinate_bounds(n, current)
    if bounds is None:
        return True
    if all(lo is not None and hi is not None for lo, hi in bounds):
        finite = [(lo, hi) for lo, hi in bounds]  # type: ignore[misc]
        if _box_volume(finite) <= config.FAST_ENUM:
            return not bool(_mask(_grid(finite), current).any())
    return not _eliminate(current, range(n), first_only=True)


def _from_systems(dim: int, systems: Iterable[System], drop_empty: bool = False) -> ISet:
    seen: dict[tuple, Cell] = {}
    for system in systems:
        normalized = _normalize(system)
        if normalized is None:
            continue
        if drop_empty and _system_is_empty(dim, normalized):
            continue
        cell = Cell.from_system(dim, normalized)
        seen.setdefault(cell.sort_key(), cell)
    return ISet(dim, tuple(seen[key] for key in sorted(seen)))


def _check_dims(a: ISet, b: ISet) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"집합 차원 불일치: {a.dim} != {b.dim}")


# ─── 집합 연산 ────────────────────────────────────────────────────────────────

def intersect(a: ISet, b: ISet) -> ISet:
    """정확한 교집합 (셀 쌍의 제약 결합)."""
    _check_dims(a, b)
    systems = []
    for ca, cb in itertools.product(a.cells, b.cells):
        ga, ea, da = ca.system()
        gb, eb, db = cb.system()
        system = (ga + gb, ea + eb, da + db)
        if not _system_is_empty(a.dim, system, _tighter(_cell_box(ca), _cell_box(cb))):
            systems.append(system)
    return _from_systems(a.dim, systems)


def _nonempty_cells(cells: Iterable[Cell]) -> list[System]:
    return [c.system() for c in cells if not _system_is_empty(c.dim, c.system(), _cell_box(c))]


def union(a: ISet, b: ISet) -> ISet:
    _check_dims(a, b)
    return _from_systems(a.dim, _nonempty_cells((*a.cells, *b.cells)))


def union_all(dim: int, sets: Iterable[ISet]) -> ISet:
    cells: list[Cell] = []
    for s in sets:
        if s.dim != dim:
            raise DimensionMismatchError(f"집합 차원 불일치: {s.dim} != {dim}")
        cells.extend(s.cells)
    return _from_systems(dim, _nonempty_cells(cells))


def _complement_pieces(cell: Cell) -> list[tuple[System, System]]:
    """셀의 여집합을 서로소 조각으로 나눈다: (추가할 부정 제약, 앞선 제약들)."""
    ge, eq, dv = cell.system()
    atoms: list[tuple[str, Any]] = [("ge", r) for r in ge] + [("eq", r) for r in eq] + [("dv", d) for d in dv]
    pieces: list[tuple[System, System]] = []
    prefix: System = ([], [], [])
    for tag, atom in atoms:
        if tag == "ge":
            negs: list[System] = [([_neg(atom[:-1]) + (-atom[-1] - 1,)], [], [])]
        elif tag == "eq":
            negs = [
                ([atom[:-1] + (atom[-1] - 1,)], [], []),
                ([_neg(atom[:-1]) + (-atom[-1] - 1,)], [], []),
            ]
        else:
            r, m = atom
            negs = [([], [], [(r[:-1] + (r[-1] - rho,), m)]) for rho in range(1, m)]
        for neg in negs:
            pieces.append((neg, (list(prefix[0]), list(prefix[1]), list(prefix[2]))))
        if tag == "ge":
            prefix[0].append(atom)
        elif tag == "eq":
            prefix[1].append(atom)
        else:
            prefix[2].append(atom)
    return pieces


def _cell_minus(dim: int, a: System, b: Cell) -> list[System]:
    ga, ea, da = a
    gb, eb, db = b.system()
    # 모든 조각은 a 안에 있으므로 a의 박스 하나로 공집합 판정을 끝낸다
    within = _finite(_coordinate_bounds(dim, a)) if dim else None
    if _system_is_empty(dim, (ga + gb, ea + eb, da + db), _tighter(within, _cell_box(b))):
        return [a]
    out = []
    for neg, prefix in _complement_pieces(b):
        system = (ga + prefix[0] + neg[0], ea + prefix[1] + neg[1], da + prefix[2] + neg[2])
        normalized = _normalize(system)
        if normalized is not None and not _system_is_empty(dim, normalized, within):
            out.append(normalized)
    return out


def subtract(a: ISet, b: ISet) -> ISet:
    """정확한 차집합. 셀 개수는 제약 수에 따라 지수적으로 늘 수 있다."""
    _check_dims(a, b)
    current = [c.system() for c in a.cells]
    for cb in b.cells:
        nxt: list[System] = []
        for sys_a in current:
            nxt.extend(_cell_minus(a.dim, sys_a, cb))
        current = nxt
        if not current:
            break
    return _from_systems(a.dim, current)


def translate(s: ISet, v: Sequence[int]) -> ISet:
    """{x + v : x in s}."""
    if len(v) != s.dim:
        raise DimensionMismatchError(f"이동 벡터 차원 {len(v)} != {s.dim}")
    v = [int(x) for x in v]

    def shift(r: Row) -> Row:
        return r[:-1] + (r[-1] - sum(c * x for c, x in zip(r[:-1], v)),)

    systems = []
    for cell in s.cells:
        ge, eq, dv = cell.system()
        systems.append(([shift(r) for r in ge], [shift(r) for r in eq], [(shift(r), m) for r, m in dv]))
    return _from_systems(s.dim, systems)


def _int_affine(f: AffineLike) -> tuple[list[list[int]], list[int]]:
    A = f.A.tolist() if hasattr(f.A, "tolist") else f.A
    b = list(f.b)
    return [[int(x) for x in row] for row in A], [int(x) for x in b]


def preimage(f: AffineLike, s: ISet) -> ISet:
    """{x : A x + b in s}. 직접 치환이므로 정확하다."""
    A, b = _int_affine(f)
    if len(A) != s.dim:
        raise DimensionMismatchError(f"함수 출력 차원 {len(A)} != 집합 차원 {s.dim}")
    n = len(A[0]) if A else 0

    def pull(r: Row) -> Row:
        c = r[:-1]
        coeffs = tuple(sum(c[i] * A[i][j] for i in range(len(A))) for j in range(n))
        return coeffs + (sum(ci * bi for ci, bi in zip(c, b)) + r[-1],)

    systems = []
    for cell in s.cells:
        ge, eq, dv = cell.system()
        systems.append(([pull(r) for r in ge], [pull(r) for r in eq], [(pull(r), m) for r, m in dv]))
    return _from_systems(n, systems)


def image(f: AffineLike, s: ISet) -> ISet:
    """{A x + b : x in s}의 정확한 정수 상.

    A의 열 Hermite 정규형 A U = [H | 0]로 x = U z를 치환하고, y = H z_r + b 등식을 붙인
    뒤 z를 정확히 소거한다. H 피벗에서 나오는 나눗셈 제약이 상 격자를 표현한다.

    Args:
        f: 정수 행렬 A와 벡터 b를 가진 아핀 함수
        s: 입력 집합 (차원은 A의 열 수)

    Raises:
        UndecidedError: 사영이 config.MAX_CELLS 예산을 넘을 때
    """
    A, b = _int_affine(f)
    m = len(A)
    n = len(A[0]) if A else s.dim
    if n != s.dim:
        raise DimensionMismatchError(f"함수 입력 차원 {n} != 집합 차원 {s.dim}")
    H, U = column_hermite_form(to_matrix(A, cols=n))
    r = H.cols
    Ui = [[int(U[i, j]) for j in range(n)] for i in range(n)]
    Hi = [[int(H[i, j]) for j in range(r)] for i in range(m)]

    # 변수 순서: y_0..y_{m-1}, z_0..z_{n-1}
    def lift(row: Row) -> Row:
        c = row[:-1]
        zc = tuple(sum(c[i] * Ui[i][j] for i in range(n)) for j in range(n))
        return (0,) * m + zc + (row[-1],)

    links = []
    for i in range(m):
        y = tuple(int(i == j) for j in range(m))
        z = tuple(-Hi[i][j] if j < r else 0 for j in range(n))
        links.append(y + z + (-b[i],))

    systems: list[System] = []
    elim = list(range(m, m + n))
    for cell in s.cells:
        ge, eq, dv = cell.system()
        lifted: System = ([lift(x) for x in ge], [lift(x) for x in eq] + links, [(lift(x), md) for x, md in dv])
        for out in _eliminate(lifted, elim):
            systems.append(_drop_columns(out, elim))
    return _from_systems(m, systems, drop_empty=True)


def _drop_columns(system: System, cols: Sequence[int]) -> System:
    drop = set(cols)

    def keep(r: Row) -> Row:
        return tuple(v for i, v in enumerate(r[:-1]) if i not in drop) + (r[-1],)

    ge, eq, dv = system
    return [keep(r) for r in ge], [keep(r) for r in eq], [(keep(r), m) for r, m in dv]


def project_out(s: ISet, keep: int) -> ISet:
    """앞쪽 keep개 좌표로의 정확한 정수 사영 {x_<keep : ∃ x_>=keep, x in s}."""
    if not 0 <= keep <= s.dim:
        raise DimensionMismatchError(f"keep={keep}가 차원 {s.dim} 범위를 벗어남")
    elim = list(range(keep, s.dim))
    systems = []
    for cell in s.cells:
        for out in _eliminate(cell.system(), elim):
            systems.append(_drop_columns(out, elim))
    return _from_systems(keep, systems, drop_empty=True)


# ─── 판정 / 열거 ──────────────────────────────────────────────────────────────

def is_empty(s: ISet) -> bool:
    """정수 점이 하나도 없으면 True. 예산 초과 시 UndecidedError."""
    return all(_system_is_empty(s.dim, cell.system(), _cell_box(cell)) for cell in s.cells)


def _hull(cells: Iterable[Cell]) -> Optional[list[tuple[int, int]]]:
    """셀들을 모두 담는 유한 박스. 유계가 아닌 셀이 있으면 None."""
    box: Optional[list[tuple[int, int]]] = None
    for cell in cells:
        if _cell_bounds(cell) is None:
            continue
        own = _cell_box(cell)
        if own is None:
            return None
        box = own if box is None else [(min(a, lo), max(b, hi)) for (a, b), (lo, hi) in zip(box, own)]
    return box or []


def _members(s: ISet, grid: np.ndarray) -> np.ndarray:
    mask = np.zeros(len(grid), dtype=bool)
    for cell in s.cells:
        mask |= _mask(grid, cell.system())
    return mask


def equal(a: ISet, b: ISet) -> bool:
    """유계이고 작은 두 집합은 공통 박스의 점 열거로, 그 밖에는 양방향 차집합으로 비교한다."""
    _check_dims(a, b)
    box = _hull((*a.cells, *b.cells))
    if box is not None and a.dim and _box_volume(box) <= config.FAST_ENUM:
        if not box:
            return True
        grid = _grid(box)
        return bool(np.array_equal(_members(a, grid), _members(b, grid)))
    return is_empty(subtract(a, b)) and is_empty(subtract(b, a))


def bounding_box(s: ISet) -> Optional[list[tuple[int, int]]]:
    """모든 셀을 담는 정수 박스. 유리수 그림자가 비면 None, 유계가 아니면 UnboundedSetError."""
    box: Optional[list[tuple[int, int]]] = None
    for cell in s.cells:
        bounds = _cell_bounds(cell)
        if bounds is None:
            continue
        if any(lo is None or hi is None for lo, hi in bounds):
            raise UnboundedSetError(f"유계가 아닌 셀: {bounds}")
        if box is None:
            box = [(lo, hi) for lo, hi in bounds]  # type: ignore[misc]
        else:
            box = [(min(a, lo), max(b, hi)) for (a, b), (lo, hi) in zip(box, bounds)]  # type: ignore[type-var]
    return box


def enumerate_points(s: ISet, box: Sequence[tuple[int, int]]) -> list[tuple[int, ...]]:
    """box(닫힌 구간) 안의 모든 정수 점을 사전식 순서로 반환한다."""
    if len(box) != s.dim:
        raise DimensionMismatchError(f"박스 차원 {len(box)} != 집합 차원 {s.dim}")
    found: set[tuple[int, ...]] = set()
    for cell in s.cells:
        system = _normalize(cell.system())
        if system is None:
            continue
        bounds = _coordinate_bounds(s.dim, system)
        if bounds is None:
            continue
        clipped = _clip(bounds, box)
        if clipped is None:
            continue
        if _box_volume(clipped) > config.ENUM_LIMIT:
            raise UndecidedError(f"열거 한도 초과: {_box_volume(clipped)} > {config.ENUM_LIMIT}")
        grid = _grid(clipped)
        for p in grid[_mask(grid, system)]:
            found.add(tuple(int(x) for x in p))
    return sorted(found)


def points(s: ISet) -> list[tuple[int, ...]]:
    """유계 집합의 모든 정수 점."""
    box = bounding_box(s)
    if box is None:
        return []
    return enumerate_points(s, box)


def count(s: ISet) -> int:
    return len(points(s))


def lexmin(s: ISet) -> Optional[tuple[int, ...]]:
    pts = points(s)
    return pts[0] if pts else None
