"""affine_mars.mars 단위 테스트."""
import logging
from dataclasses import replace

import pytest

from affine_mars import config, mars
from affine_mars.core import iset
from affine_mars.core.iset import ISet
from affine_mars.core.linalg import to_vector
from affine_mars.errors import (
    FamilyBlowupError,
    MultipleNullSpacesError,
    ProgramError,
    UnboundedSetError,
    UndecidedError,
)
from affine_mars.mars import Verdict
from affine_mars.model import SpaceKind, TilingSpec, tile_set
from tests.conftest import canonical_tiling, dep, jacobi_tiling, space, tiling


def _setup(program, dest="A"):
    target = program.space(dest)
    deps = program.dependences_into(target)
    return deps, program.tiling_for(deps[0].source)


def _points(s):
    return [p[0] if len(p) == 1 else p for p in iset.points(s)]


@pytest.fixture
def line_pair():
    """B1=(i), B2=(i+1): 같은 선형 부분, 다른 오프셋."""
    S, A = space("S", 2), space("A", 1, SpaceKind.DATA)
    return [dep(S, A, [[1, 0]], [0]), dep(S, A, [[1, 0]], [1])], jacobi_tiling(S)


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------

class TestClassify:
    def test_jacobi_is_uniform(self, jacobi):
        deps, _ = _setup(jacobi, "S")
        assert mars.classify(deps).verdict == Verdict.UNIFORM

    def test_same_linear_part(self, line_pair):
        deps, _ = line_pair
        assert mars.classify(deps).verdict == Verdict.UNIFORMLY_INTERSECTING

    def test_shared_null_space(self):
        S, A = space("S", 2), space("A", 1)
        deps = [dep(S, A, [[1, 0]], [0]), dep(S, A, [[2, 0]], [0])]
        cls = mars.classify(deps)
        assert cls.verdict == Verdict.SHARED_NULL_SPACE
        assert cls.admits_mars

    def test_multiple_null_spaces(self, multi_null):
        deps, _ = _setup(multi_null)
        cls = mars.classify(deps)
        assert cls.verdict == Verdict.MULTIPLE_NULL_SPACES
        assert not cls.admits_mars
        assert len(cls.kernels) == 2

    def test_mixed_targets_rejected(self):
        S, A, B = space("S", 2), space("A", 1), space("B", 1)
        with pytest.raises(ProgramError):
            mars.classify([dep(S, A, [[1, 0]], [0]), dep(S, B, [[1, 0]], [0])])

    def test_empty_rejected(self):
        with pytest.raises(ProgramError):
            mars.classify([])


# ---------------------------------------------------------------------------
# footprint
# ---------------------------------------------------------------------------

class TestFootprint:
    def test_single_dep(self, single_dep):
        deps, t = _setup(single_dep)
        assert _points(mars.combined_footprint(deps, t, (0, 0))) == [-1, 0, 1]

    def test_identity_is_tile(self):
        S = space("S", 2)
        t = canonical_tiling(S)
        F = mars.combined_footprint([dep(S, S, [[1, 0], [0, 1]], [0, 0])], t, (0, 0))
        assert iset.equal(F, tile_set(t, (0, 0)))

    def test_matmul_block(self, matmul):
        deps, t = _setup(matmul)
        F = mars.combined_footprint(deps, t, (0, 0, 0))
        assert iset.equal(F, ISet.box([(0, 3), (0, 3)]))

    def test_counterexample_footprint(self, multi_null):
        deps, t = _setup(multi_null)
        assert _points(mars.combined_footprint(deps, t, (0, 0))) == list(range(-3, 7))

    def test_unbounded(self):
        S = space("S", 2)
        slab = TilingSpec(S, ((1, 0),), (4,))
        with pytest.raises(UnboundedSetError):
            mars.combined_footprint([dep(S, S, [[1, 0], [0, 1]], [0, 0])], slab, (0,))

    def test_slab_projected_along_kernel_is_bounded(self):
        S, A = space("S", 2), space("A", 1)
        slab = TilingSpec(S, ((1, 0),), (4,))
        F = mars.combined_footprint([dep(S, A, [[1, 0]], [0])], slab, (1,))
        assert _points(F) == [4, 5, 6, 7]


# ---------------------------------------------------------------------------
# offset_families
# ---------------------------------------------------------------------------

class TestOffsetFamilies:
    def test_single_dep(self, single_dep):
        deps, t = _setup(single_dep)
        fams = mars.offset_families(deps, t)
        assert [f.example_delta for f in fams] == [(0, 0), (-1, 0), (0, -1)]
        assert [f.w for f in fams] == [to_vector([0, 0]), to_vector([-2, 0]), to_vector([2, 0])]
        assert [f.index for f in fams] == [0, 1, 2]
        assert fams[1].image_shift == (-2,)

    def test_jacobi_offsets(self, jacobi):
        deps, t = _setup(jacobi, "S")
        fams = mars.offset_families(deps, t)
        assert {f.example_delta for f in fams} == {
            (0, 0), (-1, 0), (0, 1), (-1, 1), (1, 0), (0, -1), (1, -1),
        }
        assert fams[0].example_delta == (0, 0)
        keys = [mars.delta_key(f.example_delta) for f in fams[1:]]
        assert keys == sorted(keys)

    def test_matmul_single_family(self, matmul):
        deps, t = _setup(matmul)
        fams = mars.offset_families(deps, t)
        assert len(fams) == 1
        assert fams[0].example_delta == (0, 0, 0)

    def test_same_linear_part(self, line_pair):
        deps, t = line_pair
        fams = mars.offset_families(deps, t)
        assert [f.example_delta for f in fams] == [(0, 0), (-1, 0), (0, -1)]

    def test_refuses_multiple_null_spaces(self, multi_null):
        deps, t = _setup(multi_null)
        with pytest.raises(MultipleNullSpacesError, match="MultipleNullSpaces"):
            mars.offset_families(deps, t)

    @pytest.mark.parametrize("name", ["single_dep", "jacobi", "matmul"])
    def test_wider_coset_search_finds_same_families(self, name, request, mocker):
        program = request.getfixturevalue(name)
        deps, t = _setup(program, "S" if name == "jacobi" else "A")
        before = {f.w for f in mars.offset_families(deps, t)}
        mocker.patch.object(config, "COSET_RADIUS", config.COSET_RADIUS + 1)
        assert {f.w for f in mars.offset_families(deps, t)} == before

    @pytest.mark.parametrize("name", ["single_dep", "jacobi"])
    def test_every_consumer_in_wider_shell_has_family(self, name, request):
        """패밀리 대표보다 한 칸 넓은 박스의 소비 타일도 모두 어떤 패밀리에 속한다"""
        program = request.getfixturevalue(name)
        deps, t = _setup(program, "S" if name == "jacobi" else "A")
        p = mars.build_mars(deps, t)
        radius = max(abs(v) for f in p.offsets for v in f.example_delta) + 1
        consumers = {d for per_dep in mars.consumer_tiles(deps, t, radius) for d in per_dep}
        assert consumers
        assert all(mars.family_of(p, d) is not None for d in consumers)
        assert {mars.family_of(p, d) for d in consumers} == {f.index for f in p.offsets}


# ---------------------------------------------------------------------------
# verify_invariance
# ---------------------------------------------------------------------------

class TestVerifyInvariance:
    def test_single_dep_passes(self, single_dep):
        deps, t = _setup(single_dep)
        verdict = mars.verify_invariance(deps, t, samples=[(0, 0), (3, -2), (5, 5)])
        assert verdict.passed
        assert verdict.witness is None
        assert verdict.checked == 6

    def test_jacobi_passes(self, jacobi):
        deps, t = _setup(jacobi, "S")
        assert mars.verify_invariance(deps, t).passed

    def test_counterexample_has_witness(self, multi_null):
        deps, t = _setup(multi_null)
        verdict = mars.verify_invariance(deps, t)
        assert not verdict.passed
        tile, delta = verdict.witness
        moved_tile = tuple(a + b for a, b in zip(tile, delta))
        before = mars.combined_footprint(deps, t, tile)
        after = mars.combined_footprint(deps, t, moved_tile)
        # 평행이동이라면 lexmin끼리 대응해야 한다
        u = tuple(y - x for x, y in zip(iset.lexmin(before), iset.lexmin(after)))
        assert not iset.equal(after, iset.translate(before, u))

    def test_explicit_deltas(self, multi_null):
        deps, t = _setup(multi_null)
        assert mars.verify_invariance(deps, t, deltas=[(-1, 0)]).passed

    def test_default_samples(self):
        assert mars.default_samples(2) == [(0, 0), (3, -2), (5, 5)]

    def test_non_integral_shift_warns(self, caplog):
        """A·N·δ가 정수가 아니면 최소점 차이로 대신하고 경고한다"""
        S, A = space("S", 2), space("A", 1)
        deps = [dep(S, A, [[1, 0]], [0])]
        with caplog.at_level(logging.WARNING, logger="affine_mars.mars"):
            mars.verify_invariance(deps, jacobi_tiling(S, size=3), deltas=[(1, 0)])
        assert any("정수가 아니다" in r.getMessage() for r in caplog.records)


# ---------------------------------------------------------------------------
# build_mars
# ---------------------------------------------------------------------------

class TestBuildMars:
    def test_single_dep_three_sets(self, single_dep):
        deps, t = _setup(single_dep)
        p = mars.build_mars(deps, t)
        assert [m.signature for m in p.mars] == [(0,), (0, 1), (0, 2)]
        assert [_points(m.set) for m in p.mars] == [[0], [-1], [1]]
        assert p.mars[1].deltas == ((0, 0), (-1, 0))
        assert p.invariance.passed
        assert mars.check_partition(p)

    def test_same_linear_part(self, line_pair):
        deps, t = line_pair
        p = mars.build_mars(deps, t)
        assert [m.signature for m in p.mars] == [(0, 1), (0, 2)]
        assert [_points(m.set) for m in p.mars] == [[-1, 0], [1, 2]]

    def test_jacobi_partition(self, jacobi):
        deps, t = _setup(jacobi, "S")
        p = mars.build_mars(deps, t)
        assert mars.check_partition(p)
        assert all(m.signature[0] == 0 for m in p.mars)
        used = {i for m in p.mars for i in m.signature}
        assert used == set(range(7))
        keys = [(len(m.signature), m.signature) for m in p.mars]
        assert keys == sorted(keys)

    def test_matmul_block(self, matmul):
        deps, t = _setup(matmul)
        p = mars.build_mars(deps, t)
        assert len(p.mars) == 1
        assert iset.equal(p.mars[0].set, ISet.box([(0, 3), (0, 3)]))

    def test_other_tile_is_translate(self, single_dep):
        deps, t = _setup(single_dep)
        base = mars.build_mars(deps, t)
        moved = mars.build_mars(deps, t, tile=(1, 0))
        assert [m.signature for m in moved.mars] == [m.signature for m in base.mars]
        for a, b in zip(base.mars, moved.mars):
            assert iset.equal(b.set, iset.translate(a.set, (2,)))

    def test_family_blowup(self, jacobi):
        deps, t = _setup(jacobi, "S")
        with pytest.raises(FamilyBlowupError):
            mars.build_mars(deps, t, max_families=2)

    def test_family_blowup_from_config(self, jacobi, mocker):
        """상한을 주지 않으면 config.MAX_FAMILIES를 호출 시점에 읽는다"""
        mocker.patch.object(config, "MAX_FAMILIES", 3)
        deps, t = _setup(jacobi, "S")
        with pytest.raises(FamilyBlowupError):
            mars.build_mars(deps, t)

    def test_refuses_multiple_null_spaces(self, multi_null):
        deps, t = _setup(multi_null)
        with pytest.raises(MultipleNullSpacesError):
            mars.build_mars(deps, t)

    def test_footprints_computed_once_per_dependence(self, jacobi, mocker):
        """정수 이동 타일링에서는 상을 의존성마다 한 번만 계산한다"""
        deps, t = _setup(jacobi, "S")
        spy = mocker.spy(iset, "image")
        mars.build_mars(deps, t)
        assert spy.call_count == len(deps)

    def test_reuses_families_and_invariance(self, single_dep, mocker):
        deps, t = _setup(single_dep)
        base = mars.build_mars(deps, t)
        families = mocker.spy(mars, "offset_families")
        invariance = mocker.spy(mars, "verify_invariance")
        moved = mars.build_mars(deps, t, tile=(1, 0), families=base.offsets, invariance=base.invariance)
        assert families.call_count == 0
        assert invariance.call_count == 0
        assert moved.invariance is base.invariance
        for a, b in zip(base.mars, moved.mars):
            assert iset.equal(b.set, iset.translate(a.set, (2,)))


class TestPartitionHelpers:
    def test_family_of(self, single_dep):
        deps, t = _setup(single_dep)
        p = mars.build_mars(deps, t)
        assert mars.family_of(p, (0, 0)) == 0
        assert mars.family_of(p, (-1, 0)) == 1
        assert mars.family_of(p, (0, 1)) == 1
        assert mars.family_of(p, (1, 0)) == 2
        assert mars.family_of(p, (5, 0)) is None

    def test_restrict_outside_tile(self, jacobi):
        deps, t = _setup(jacobi, "S")
        p = mars.restrict_outside_tile(mars.build_mars(deps, t))
        own = tile_set(t, (0, 0))
        assert p.mars
        for m in p.mars:
            assert not iset.is_empty(m.set)
            assert iset.is_empty(iset.intersect(m.set, own))
        assert mars.check_partition(p)

    def test_check_partition_detects_overlap(self, single_dep):
        deps, t = _setup(single_dep)
        p = mars.build_mars(deps, t)
        broken = replace(p, mars=(p.mars[0], replace(p.mars[1], set=p.footprint)))
        assert not mars.check_partition(broken)

    def test_check_partition_falls_back_to_symbolic(self, single_dep, mocker):
        deps, t = _setup(single_dep)
        p = mars.build_mars(deps, t)
        mocker.patch.object(mars, "_check_by_points", side_effect=UndecidedError("열거 한도 초과"))
        assert mars.check_partition(p)
        broken = replace(p, mars=(p.mars[0], replace(p.mars[1], set=p.footprint)))
        assert not mars.check_partition(broken)


# ---------------------------------------------------------------------------
# 다중 null space 진단
# ---------------------------------------------------------------------------

class TestConsumerTiles:
    def test_jacobi_per_dependence(self, jacobi):
        deps, t = _setup(jacobi, "S")
        v1, v2, v3 = mars.consumer_tiles(deps, t, 1)
        assert v1 == sorted([(0, -1), (0, 0), (1, -1), (1, 0)])
        assert v2 == sorted([(0, 0), (1, 0), (0, -1), (-1, 0), (0, 1)])
        assert v3 == sorted([(0, 0), (-1, 0), (0, 1), (-1, 1)])


class TestFDPartition:
    def test_jacobi_families(self, jacobi):
        deps, t = _setup(jacobi, "S")
        report = mars.fd_partition(deps, t)
        assert [f.deps for f in report.families] == [(1,), (3,), (1, 2), (2, 3), (1, 2, 3)]
        assert report.family((1, 2, 3)).tiles == ((0, 0),)
        assert report.family((1,)).tiles == ((1, -1),)
        assert len(report.consumers) == 7

    def test_counterexample_families(self, multi_null):
        deps, t = _setup(multi_null)
        report = mars.fd_partition(deps, t, box=3)
        assert report.box == 3
        for key in [(1,), (2,), (1, 2)]:
            fam = report.family(key)
            assert fam is not None and fam.tiles
            assert [i for i, _ in fam.projections] == list(key)

    def test_single_dep_only_family_one(self, single_dep):
        deps, t = _setup(single_dep)
        report = mars.fd_partition(deps, t, box=2)
        assert [f.deps for f in report.families] == [(1,)]


# ---------------------------------------------------------------------------
# 타일된 대상 공간
# ---------------------------------------------------------------------------

class TestTiledDestination:
    def _line(self, size):
        S, A = space("S", 2), space("A", 1, SpaceKind.DATA)
        return [dep(S, A, [[1, 0]], [0])], jacobi_tiling(S), tiling(A, [(1,)], [size])

    def test_identity_canonical(self):
        S, D = space("S", 2), space("D", 2)
        report = mars.tiled_destination_condition(
            [dep(S, D, [[1, 0], [0, 1]], [0, 0])], canonical_tiling(S), canonical_tiling(D)
        )
        assert report.passed
        by_pair = {(t.source_hyperplane, t.dest_hyperplane): t for t in report.triples}
        assert by_pair[(1, 1)].status == "pass" and by_pair[(1, 1)].multiplier == 1
        assert by_pair[(2, 2)].status == "pass"
        assert by_pair[(1, 2)].status == "orthogonal-skipped"
        assert by_pair[(2, 1)].status == "orthogonal-skipped"

    def test_line_tiling_divides(self):
        deps, src, dst = self._line(2)
        report = mars.tiled_destination_condition(deps, src, dst)
        assert report.passed
        assert report.triples[0].dot == 2
        assert report.triples[0].multiplier == 1

    def test_line_tiling_does_not_divide(self):
        deps, src, dst = self._line(3)
        report = mars.tiled_destination_condition(deps, src, dst)
        assert not report.passed
        assert report.triples[0].status == "fail"

    def test_destination_consumers(self):
        deps, src, dst = self._line(2)
        tiles = mars.destination_consumers(deps, src, dst, (0,), box=1)
        assert tiles == [(-1, -1), (0, -1), (0, 0), (1, 0), (1, 1)]
