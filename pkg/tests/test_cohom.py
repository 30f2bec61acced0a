"""Tests for cohomology of compact sets, compact supports and the axioms they satisfy."""
from fractions import Fraction

import pytest

from errors import NotCompact, NotLocallyClosed, UnsupportedGeometry
from models.reports import BettiReport, CoeffRing
from services import celldec, cohom, simplicial, stratal
from services.celldec import POS_INF, CellFn
from services.qlin import INF, Atom, LinForm, Region
from services.stratal import SemilinearSet

x0, x1 = LinForm.var(0), LinForm.var(1)
ZERO = CellFn.affine(LinForm.const(0))


def closed_square():
    atoms = [Atom.le(-x0), Atom.le(x0.shift(-1)), Atom.le(-x1), Atom.le(x1.shift(-1))]
    return SemilinearSet.stratum(2, {0, 1}, Region.of_atoms({0, 1}, atoms))


def square_boundary():
    inner = [Atom.lt(-x0), Atom.lt(x0.shift(-1)), Atom.lt(-x1), Atom.lt(x1.shift(-1))]
    return stratal.difference(closed_square(), SemilinearSet.stratum(2, {0, 1}, Region.of_atoms({0, 1}, inner)))


def half_plane(atom):
    return SemilinearSet.stratum(2, {0, 1}, Region.of_atoms({0, 1}, [atom]))


def test_report_trims_and_checks_euler():
    report = BettiReport.of(CoeffRing.Q, [1, 1, 0, 0])
    assert report.ranks == [1, 1] and report.euler == 0
    with pytest.raises(ValueError):
        BettiReport(coeff=CoeffRing.Q, ranks=[1], euler=3)


def test_simplicial_circle():
    # boundary of a triangle as a face poset: vertices 0,1,2 and edges 3,4,5
    faces = {0: frozenset(), 1: frozenset(), 2: frozenset(),
             3: frozenset({0, 1}), 4: frozenset({1, 2}), 5: frozenset({0, 2})}
    dims = {0: 0, 1: 0, 2: 0, 3: 1, 4: 1, 5: 1}
    K = simplicial.chain_complex(faces, dims, faces)
    assert K.count(0) == 6 and K.count(1) == 6
    for coeff in CoeffRing:
        ranks, torsion = simplicial.cohomology(K, coeff)
        assert ranks == [1, 1]
        assert torsion == [[], []]


@pytest.mark.parametrize('coeff', list(CoeffRing))
def test_point_and_segment(coeff, segment):
    assert cohom.betti(SemilinearSet.point([0]), coeff).ranks == [1]
    assert cohom.betti(segment, coeff).ranks == [1]
    assert cohom.betti(SemilinearSet.empty(1), coeff).ranks == []


def test_betti_of_compact_sets():
    assert cohom.betti(square_boundary()).ranks == [1, 1]
    assert cohom.betti(closed_square(), CoeffRing.Z2).ranks == [1]
    two = stratal.union(SemilinearSet.point([0]), SemilinearSet.point([INF]))
    assert cohom.betti(two).ranks == [2]
    assert cohom.betti(SemilinearSet.interval(0, INF, lo_closed=True, hi_closed=True)).ranks == [1]


def test_betti_requires_compact():
    with pytest.raises(NotCompact):
        cohom.betti(SemilinearSet.interval(0, 1))


def test_betti_c_of_intervals():
    assert cohom.betti_c(SemilinearSet.interval(0, 1)).ranks == [0, 1]
    assert cohom.betti_c(SemilinearSet.interval(0, 1, lo_closed=True)).ranks == []
    assert cohom.betti_c(SemilinearSet.point(['1/2'])).ranks == [1]
    assert cohom.betti_c(SemilinearSet.interval(None, INF)).ranks == [0, 1]


def test_betti_c_full_embedding_agrees():
    s = SemilinearSet.interval(0, 1)
    assert cohom.betti_c(s, full_embedding=True).ranks == cohom.betti_c(s).ranks


def test_betti_c_rejects_non_locally_closed():
    square = Region.of_atoms({0, 1}, [Atom.lt(-x0), Atom.lt(x0.shift(-1)), Atom.lt(-x1), Atom.lt(x1.shift(-1))])
    s = stratal.union(SemilinearSet.stratum(2, {0, 1}, square), SemilinearSet.point([0, 0]))
    with pytest.raises(NotLocallyClosed):
        cohom.betti_c(s)


def test_euler_characteristic_is_additive(segment):
    pieces = [SemilinearSet.point([0]), SemilinearSet.interval(0, 1), SemilinearSet.point([1])]
    assert cohom.euler_c(segment) == sum(cohom.euler_c(p) for p in pieces) == 1


def test_pair_sequence_bookkeeping():
    assert cohom.exactness_of_pair(SemilinearSet.interval(0, 1))
    assert cohom.exactness_of_pair(SemilinearSet.interval(0, 1, lo_closed=True))


def test_restriction_rank():
    circle = square_boundary()
    corner = SemilinearSet.point([0, 0])
    assert cohom.restriction_map_rank(circle, corner, CoeffRing.Q, 0) == 1
    assert cohom.restriction_map_rank(circle, corner, CoeffRing.Q, 1) == 0


def test_restriction_rank_edge_cases(segment):
    circle = square_boundary()
    assert cohom.restriction_map_rank(segment, segment, CoeffRing.Q, 0) == 1
    assert cohom.restriction_map_rank(circle, circle, CoeffRing.Q, 1) == 1
    assert cohom.restriction_map_rank(circle, circle, CoeffRing.Z2, 1) == 1
    assert cohom.restriction_map_rank(segment, SemilinearSet.empty(1), CoeffRing.Q, 0) == 0
    ends = stratal.union(SemilinearSet.point([0]), SemilinearSet.point([1]))
    assert cohom.restriction_map_rank(segment, ends, CoeffRing.Q, 0) == 1
    with pytest.raises(ValueError):
        cohom.restriction_map_rank(segment, SemilinearSet.interval(0, 1), CoeffRing.Q, 0)


def test_mayer_vietoris_on_circle_split_into_arcs():
    X = square_boundary()
    U = stratal.intersect(X, half_plane(Atom.le(x0.shift(Fraction(-1, 2)))))
    V = stratal.intersect(X, half_plane(Atom.le((-x0).shift(Fraction(1, 2)))))
    report = cohom.mv_check(X, U, V)
    assert report.exact, report.failures
    assert report.b_x[:2] == [1, 1]
    assert report.b_uv[0] == 2
    assert report.connecting_ranks[0] == 1


def test_mayer_vietoris_rejects_bad_cover(segment):
    with pytest.raises(ValueError):
        cohom.mv_check(segment, SemilinearSet.point([0]), SemilinearSet.point([1]))


def test_homotopy_invariance(segment):
    assert cohom.homotopy_check(segment, 0, 1)
    assert cohom.homotopy_check(SemilinearSet.interval(0, 1), 0, 1)
    report = cohom.homotopy_report(SemilinearSet.point([2]), '-1', '1/2')
    assert report.holds and report.betti[0].ranks == [1]


def test_interval_set_validates_endpoints():
    with pytest.raises(ValueError):
        cohom.interval_set(1, 0)
    with pytest.raises(ValueError):
        cohom.interval_set(INF, 0)


@pytest.mark.parametrize('r, expected', [(1, [2]), (2, [1, 1]), (3, [1, 0, 1])])
def test_complement_of_core(r, expected):
    levels = [('band', ZERO, POS_INF)] * r + [('graph', ZERO, None)] * (3 - r)
    cell = celldec.cell_from_levels(levels)
    assert cohom.complement_table(cell, 1, 3).ranks == expected


def test_complement_of_core_rejects_bad_parameters():
    cell = celldec.cell_from_levels([('band', ZERO, POS_INF)])
    with pytest.raises(UnsupportedGeometry):
        cohom.complement_table(cell, 2, 3)


def test_cores_are_acyclic():
    quadrant = celldec.cell_from_levels([('band', ZERO, POS_INF), ('band', ZERO, POS_INF)])
    assert cohom.cell_acyclic(quadrant, 1, 3)


def test_diagonal_slab_reaches_infinity_along_the_diagonal():
    """{0 <= x, x <= y <= x + 1, 0 <= z <= 1} in G_inf^3, unbounded only along x = y."""
    x2 = LinForm.var(2)
    atoms = [Atom.le(-x0), Atom.le(x0 - x1), Atom.le(x1 - x0.shift(1)), Atom.le(-x2), Atom.le(x2.shift(-1))]
    slab = SemilinearSet.stratum(3, {0, 1, 2}, Region.of_atoms({0, 1, 2}, atoms))
    closed = stratal.closure(slab)
    assert closed.contains([INF, INF, 0]) and not closed.contains([INF, 0, 0])
    assert cohom.betti_c(slab).ranks == []
    assert cohom.betti(closed).ranks == [1]
