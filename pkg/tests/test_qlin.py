"""Tests for exact linear arithmetic over Q and Fourier-Motzkin elimination."""
from fractions import Fraction

import pytest

from conftest import grid, random_region
from errors import InfinityArithmeticError
from services import qlin
from services.qlin import INF, Atom, ExtRat, LinForm, Quantifier, Region, Rel

x0, x1, x2 = LinForm.var(0), LinForm.var(1), LinForm.var(2)


def test_extended_rationals_order_and_arithmetic():
    assert ExtRat.of('inf') is INF
    assert ExtRat.of('1/2') == ExtRat(Fraction(1, 2))
    assert ExtRat.of(5) < INF
    assert not INF < ExtRat.of(10 ** 9)
    assert ExtRat.of(2) + INF == INF
    assert str(ExtRat.of(Fraction(-3, 4))) == '-3/4'
    assert str(INF) == 'inf'


@pytest.mark.parametrize('op', [lambda: INF - ExtRat.of(1), lambda: ExtRat.of(1) - INF, lambda: -INF])
def test_subtraction_with_inf_is_rejected(op):
    with pytest.raises(InfinityArithmeticError):
        op()


def test_linform_algebra():
    f = LinForm.of({0: 2, 1: -1}, 3)
    assert f.coeff(0) == 2 and f.coeff(2) == 0
    assert (f - f).is_constant
    assert f.substitute(0, x1.shift(1)).coeff(1) == 1
    assert f.evaluate({0: Fraction(1), 1: Fraction(4)}) == 1
    assert f.max_var == 1


def test_simplify_detects_contradiction_and_pins_equalities():
    assert qlin.simplify_atoms([Atom.le(x0), Atom.le(-x0 + LinForm.const(1))]) is None
    assert qlin.simplify_atoms([Atom.lt(x0), Atom.le(-x0)]) is None
    pinned = qlin.simplify_atoms([Atom.le(x0.shift(-1)), Atom.le((-x0).shift(1))])
    assert pinned == (Atom.eq(x0.shift(-1)),)


def test_simplify_keeps_tightest_bound():
    atoms = qlin.simplify_atoms([Atom.le(x0.shift(-3)), Atom.lt(x0.shift(-1)), Atom.le(x0.shift(-1))])
    assert atoms == (Atom.lt(x0.shift(-1)),)


def test_projection_of_strict_chain():
    body = Region.of_atoms({0, 1}, [Atom.lt(x0 - x1), Atom.lt(x1.shift(-1))])
    shadow = qlin.project(body, {0})
    assert qlin.equivalent(shadow, Region.of_atoms({0}, [Atom.lt(x0.shift(-1))]))


def test_existential_divisibility_is_trivial_over_q():
    body = Region.of_atoms({0, 1}, [Atom.eq(x0 - x1.scale(2))])
    assert qlin.equivalent(qlin.qe([(Quantifier.EXISTS, 1)], body), Region.top({0}))


def test_universal_quantifier():
    below = Region.of_atoms({0, 1}, [Atom.le(x1 - x0)])
    assert qlin.qe([(Quantifier.FORALL, 1)], below).is_empty()
    either = qlin.union(below, Region.of_atoms({0, 1}, [Atom.lt(x0 - x1)]))
    assert qlin.equivalent(qlin.qe([(Quantifier.FORALL, 1)], either), Region.top({0}))


def test_complement_and_difference():
    neg = Region.of_atoms({0}, [Atom.lt(x0)])
    nonneg = qlin.complement(neg)
    assert nonneg.contains({0: Fraction(0)})
    assert not nonneg.contains({0: Fraction(-1, 3)})
    assert qlin.equivalent(qlin.union(neg, nonneg), Region.top({0}))
    assert qlin.difference(neg, neg).is_empty()


def test_dimension_counts_implicit_equalities():
    diagonal = Region.of_atoms({0, 1}, [Atom.le(x0 - x1), Atom.le(x1 - x0)])
    assert qlin.dimension(diagonal) == 1
    box = Region.of_atoms({0, 1}, [Atom.lt(-x0), Atom.lt(x0.shift(-1)), Atom.lt(-x1), Atom.lt(x1.shift(-1))])
    assert qlin.dimension(box) == 2
    assert qlin.dimension(Region.empty({0})) == -1
    assert qlin.dimension(Region.top(())) == 0


def test_sample_point_lies_in_region(rng):
    for _ in range(100):
        region = random_region(rng, {0, 1, 2}, max_atoms=4)
        point = qlin.sample_point(region)
        if point is None:
            assert region.is_empty()
        else:
            assert region.contains(point)


def test_closure_within_relaxes_strict_atoms():
    open_interval = Region.of_atoms({0}, [Atom.lt(-x0), Atom.lt(x0.shift(-1))])
    closed = qlin.closure_within(open_interval)
    assert closed.contains({0: Fraction(0)}) and closed.contains({0: Fraction(1)})
    assert all(a.rel is not Rel.LT for p in closed.disjuncts for a in p.atoms)


def test_projection_agrees_with_pointwise_oracle(rng):
    """Projecting out x2 agrees with deciding each fiber on a grid of (x0, x1)."""
    points = [{0: a, 1: b} for a in grid(-3, 3, Fraction(3, 4)) for b in grid(-3, 3, Fraction(3, 4))]
    for _ in range(40):
        body = random_region(rng, {0, 1, 2}, max_atoms=3, max_disjuncts=2, lo=-3, hi=3)
        shadow = qlin.project(body, {0, 1})
        for point in points:
            fiber = qlin.assign(body, point)
            assert shadow.contains(point) == (not fiber.is_empty())


def test_quantifiers_are_dual(rng):
    """forall of the complement is the complement of exists."""
    for _ in range(25):
        body = random_region(rng, {0, 1, 2}, max_atoms=3, max_disjuncts=2, lo=-3, hi=3)
        every = qlin.qe([(Quantifier.FORALL, 2)], qlin.complement(body))
        some = qlin.qe([(Quantifier.EXISTS, 2)], body)
        assert qlin.equivalent(every, qlin.complement(some))


def test_region_dimension_is_monotone(rng):
    for _ in range(25):
        a = random_region(rng, {0, 1}, max_atoms=3, max_disjuncts=2)
        b = random_region(rng, {0, 1}, max_atoms=3, max_disjuncts=2)
        assert qlin.dimension(qlin.intersect(a, b)) <= min(qlin.dimension(a), qlin.dimension(b))
        assert qlin.dimension(a) <= 2
