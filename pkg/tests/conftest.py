"""
Pytest configuration and shared fixtures for affine-mars tests.

This file is automatically discovered by pytest and provides:
- Loaded example programs (single dependence, Jacobi 1D, counterexample, matmul)
- Small program builders for ad-hoc dependences and tilings
- Marker hooks
"""

from pathlib import Path
from typing import Sequence

import pytest

from affine_mars.model import AffineFn, Program, Space, SpaceKind, TilingSpec, load_program_file

PROGRAMS_DIR = Path(__file__).resolve().parent.parent / "affine_mars" / "programs"


# ============================================================================
# Example programs
# ============================================================================

def load_example(name: str) -> Program:
    return load_program_file(PROGRAMS_DIR / f"{name}.json")


@pytest.fixture
def programs_dir() -> Path:
    return PROGRAMS_DIR


@pytest.fixture
def single_dep() -> Program:
    """(i, j) -> (i), 법선 (1,1),(-1,1), s=4."""
    return load_example("single_dep")


@pytest.fixture
def jacobi() -> Program:
    """Jacobi 1D: B1=(i-1, j-1), B2=(i, j-1), B3=(i+1, j-1), s=4."""
    return load_example("jacobi1d")


@pytest.fixture
def multi_null() -> Program:
    """B1=(i-j), B2=(i+j), 표준 타일링 s=4."""
    return load_example("multi_null")


@pytest.fixture
def matmul() -> Program:
    """(i, j, k) -> (i, k), 표준 4x4x4 타일링."""
    return load_example("matmul")


@pytest.fixture
def tiled_destination() -> Program:
    return load_example("tiled_destination")


# ============================================================================
# Builders
# ============================================================================

def space(name: str, dim: int, kind: SpaceKind = SpaceKind.ITERATION) -> Space:
    return Space(name, dim, kind)


def dep(source: Space, target: Space, A: Sequence[Sequence[int]], b: Sequence[int], name: str = "") -> AffineFn:
    return AffineFn.of(source, target, A, b, name)


def tiling(sp: Space, normals: Sequence[Sequence[int]], sizes: Sequence[int]) -> TilingSpec:
    return TilingSpec(sp, tuple(tuple(n) for n in normals), tuple(sizes))


def jacobi_tiling(sp: Space, size: int = 4) -> TilingSpec:
    return tiling(sp, [(1, 1), (-1, 1)], [size, size])


def canonical_tiling(sp: Space, size: int = 4) -> TilingSpec:
    return tiling(sp, [tuple(int(i == j) for j in range(sp.dim)) for i in range(sp.dim)], [size] * sp.dim)


def program_text(name: str) -> str:
    return (PROGRAMS_DIR / f"{name}.json").read_text(encoding="utf-8")


# ============================================================================
# Pytest Hooks
# ============================================================================

def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line("markers", "unit: Unit tests")
    config.addinivalue_line("markers", "integration: Integration tests")
    config.addinivalue_line("markers", "slow: Slow running tests")


def pytest_collection_modifyitems(config, items):
    """Modify test collection to add markers automatically."""
    for item in items:
        # Auto-mark based on file path
        if "integration" in str(item.fspath):
            item.add_marker(pytest.mark.integration)
        elif "unit" in str(item.fspath):
            item.add_marker(pytest.mark.unit)
