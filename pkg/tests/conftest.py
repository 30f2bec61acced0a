"""Shared fixtures and seeded generators of regions and semilinear sets."""
import os
import random
import sys
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from services.qlin import Atom, LinForm, Polyhedron, Region  # noqa: E402
from services.stratal import SemilinearSet, all_supports  # noqa: E402

COEFFS = (-1, 0, 1)


def random_atom(rng: random.Random, scope, lo=-5, hi=5) -> Atom:
    variables = sorted(scope)
    while True:
        coeffs = {v: rng.choice(COEFFS) for v in variables}
        if any(coeffs.values()):
            break
    form = LinForm.of(coeffs, rng.randint(lo, hi))
    return rng.choice([Atom.lt, Atom.le, Atom.le, Atom.eq])(form)


def random_region(rng: random.Random, scope, max_atoms=3, max_disjuncts=2, lo=-5, hi=5) -> Region:
    scope = frozenset(scope)
    if not scope:
        return Region.top(scope) if rng.random() < 0.5 else Region.empty(scope)
    polys = []
    for _ in range(rng.randint(1, max_disjuncts)):
        atoms = tuple(random_atom(rng, scope, lo, hi) for _ in range(rng.randint(1, max_atoms)))
        polys.append(Polyhedron(scope, atoms))
    return Region(scope, tuple(polys))


def random_set(rng: random.Random, n=2, **kwargs) -> SemilinearSet:
    pieces = {}
    for support in all_supports(n):
        if rng.random() < 0.5:
            pieces[support] = random_region(rng, support, **kwargs)
    return SemilinearSet.from_pieces(n, pieces)


def grid(lo=-6, hi=6, pitch=Fraction(1, 2)):
    values = []
    v = Fraction(lo)
    while v <= hi:
        values.append(v)
        v += pitch
    return values


@pytest.fixture
def rng():
    return random.Random(20240601)


@pytest.fixture
def segment():
    """[0, 1] in Gamma_infinity."""
    return SemilinearSet.interval(0, 1, lo_closed=True, hi_closed=True)
