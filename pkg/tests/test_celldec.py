"""Tests for cylindrical cell decompositions, regular complexes and components."""
import pytest

from config import Config
from conftest import random_set
from errors import DimensionMismatch, NotCompact, UnsupportedGeometry
from services import celldec, stratal
from services.celldec import NEG_INF, POS_INF, CellFn, CellKind
from services.qlin import INF, Atom, LinForm, Region
from services.stratal import SemilinearSet

x0, x1 = LinForm.var(0), LinForm.var(1)
ZERO = CellFn.affine(LinForm.const(0))


def two_segments():
    return stratal.union(SemilinearSet.interval(0, 1, lo_closed=True, hi_closed=True),
                         SemilinearSet.interval(2, 3, lo_closed=True, hi_closed=True))


def square():
    atoms = [Atom.le(-x0), Atom.le(x0.shift(-1)), Atom.le(-x1), Atom.le(x1.shift(-1))]
    return SemilinearSet.stratum(2, {0, 1}, Region.of_atoms({0, 1}, atoms))


def test_line_decomposition_cells(segment):
    decomposition = celldec.decompose([segment])
    kinds = [(c.kind, c.dim) for c in decomposition.cells]
    # (-inf,0) {0} (0,1) {1} (1,inf) {inf}
    assert kinds == [(CellKind.BAND, 1), (CellKind.GRAPH, 0), (CellKind.BAND, 1),
                     (CellKind.GRAPH, 0), (CellKind.BAND, 1), (CellKind.GRAPH, 0)]
    assert decomposition.cells[-1].support == frozenset()
    assert celldec.is_partition(decomposition)
    assert celldec.is_adapted(decomposition, segment)
    assert len(decomposition.cells_in(segment)) == 3


def test_decomposition_of_plane_is_partition():
    decomposition = celldec.decompose([square()])
    assert celldec.is_partition(decomposition)
    assert celldec.is_adapted(decomposition, square())
    assert len(decomposition.projection(1)) == 6


def test_decompose_rejects_mixed_dimensions(segment):
    with pytest.raises(DimensionMismatch):
        celldec.decompose([segment, square()])


def test_components():
    assert len(celldec.connected_components(two_segments())) == 2
    assert len(celldec.connected_components(square())) == 1
    assert celldec.connected_components(SemilinearSet.empty(2)) == []
    assert len(celldec.connected_components(SemilinearSet.interval(0, INF, hi_closed=True))) == 1


def test_components_through_infinity():
    ray = stratal.union(SemilinearSet.interval(2, INF), SemilinearSet.point([INF]))
    assert len(celldec.connected_components(ray)) == 1
    apart = stratal.union(ray, SemilinearSet.point([-5]))
    assert len(celldec.connected_components(apart)) == 2


def test_regular_complex_of_square():
    R = celldec.refine_to_complex(celldec.decompose([square()]), square())
    assert sorted(R.dims) == [0, 0, 0, 0, 1, 1, 1, 1, 2]
    assert R.is_graded()
    top = R.dims.index(2)
    assert len(R.faces[top]) == 8


def test_refine_needs_compact_roi():
    ray = SemilinearSet.interval(0, INF)
    with pytest.raises(NotCompact):
        celldec.refine_to_complex(celldec.decompose([ray]), ray)


def test_sphere_audit_is_configurable(monkeypatch, segment):
    monkeypatch.setattr(Config, 'AUDIT_BOUNDARIES', False)
    R = celldec.refine_to_complex(celldec.decompose([segment]), segment)
    assert sorted(R.dims) == [0, 0, 1]


def test_cell_from_levels_and_core():
    quadrant = celldec.cell_from_levels([('band', ZERO, POS_INF), ('band', ZERO, POS_INF)])
    assert quadrant.dim == 2
    core = celldec.cell_core(quadrant, 1, 3)
    assert stratal.is_definably_compact(core)
    assert core.contains([1, 1]) and core.contains([2, 2]) and not core.contains([3, 1])
    assert celldec.is_thick(quadrant, 1, 3)


def test_cell_core_needs_nonnegative_orthant():
    line = celldec.cell_from_levels([('band', NEG_INF, POS_INF)])
    with pytest.raises(UnsupportedGeometry):
        celldec.cell_core(line, 1, 3)


def test_cell_from_levels_rejects_bad_bounds():
    with pytest.raises(UnsupportedGeometry):
        celldec.cell_from_levels([('band', POS_INF, ZERO)])
    one = CellFn.affine(LinForm.const(1))
    with pytest.raises(UnsupportedGeometry):
        celldec.cell_from_levels([('band', one, ZERO)])
    with pytest.raises(UnsupportedGeometry):
        celldec.cell_from_levels([('band', CellFn.affine(x1), POS_INF), ('graph', ZERO, None)])


def test_contraction_reaches_a_point():
    wedge = celldec.cell_from_levels([('band', ZERO, POS_INF), ('band', ZERO, CellFn.affine(x0))])
    chain = celldec.contract_to_point(wedge)
    assert [c.dim for c in chain] == [2, 1, 0]
    assert chain[-1].as_set().sample() is not None


def bounded_below():
    side = SemilinearSet.interval(-6, INF, lo_closed=True, hi_closed=True)
    return stratal.product(side, side)


def test_random_decompositions_partition_and_adapt(rng):
    for _ in range(8):
        targets = [random_set(rng, 2, max_atoms=2), random_set(rng, 2, max_atoms=2)]
        decomposition = celldec.decompose(targets)
        assert celldec.is_partition(decomposition)
        assert all(celldec.is_adapted(decomposition, s) for s in targets)
        assert all(len(celldec.connected_components(c.as_set())) == 1 for c in decomposition.cells)


def test_random_decompositions_project_to_lower_levels(rng):
    for _ in range(8):
        decomposition = celldec.decompose([random_set(rng, 2)])
        line = decomposition.projection(1)
        for i, a in enumerate(line):
            for b in line[i + 1:]:
                assert stratal.intersect(a.as_set(), b.as_set()).is_empty()
        covered = stratal.union_all(1, (c.as_set() for c in line))
        assert stratal.equals(covered, SemilinearSet.full(1))
        keys = {c.key for c in line}
        for cell in decomposition.cells:
            assert cell.levels()[0].key in keys


def test_random_complexes_satisfy_frontier_condition(rng):
    for _ in range(6):
        roi = stratal.closure(stratal.intersect(random_set(rng, 2, max_atoms=2), bounded_below()))
        R = celldec.refine_to_complex(celldec.decompose([roi]), roi)
        assert stratal.equals(stratal.union_all(2, (c.as_set() for c in R.cells)), roi)
        for i in range(len(R.cells)):
            faces = stratal.union_all(2, [R.cell_set(j) for j in R.faces[i]] + [R.cell_set(i)])
            assert stratal.equals(stratal.closure(R.cell_set(i)), faces)


def test_cores_grow_and_exhaust_the_cell():
    quadrant = celldec.cell_from_levels([('band', ZERO, POS_INF), ('band', ZERO, POS_INF)])
    small = celldec.cell_core(quadrant, 1, 3)
    large = celldec.cell_core(quadrant, '1/2', 4)
    assert stratal.subset(small, large)
    assert stratal.subset(large, quadrant.as_set())
    atoms = [Atom.le((-x0).shift(1)), Atom.le(x0.shift(-2)), Atom.le((-x1).shift(1)), Atom.le(x1.shift(-5))]
    K = SemilinearSet.stratum(2, {0, 1}, Region.of_atoms({0, 1}, atoms))
    assert not stratal.subset(K, small)
    assert stratal.subset(K, celldec.cell_core(quadrant, '1/2', 12))


def test_refinement_cap_counts_every_initial_cell(segment):
    decomposition = celldec.decompose([segment, SemilinearSet.point([5])])
    assert len(decomposition.cells) == 8
    assert len(decomposition.cells_in(segment)) == 3
    assert celldec.refinement_cap(decomposition) == Config.REFINE_FACTOR * 64
