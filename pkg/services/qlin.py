"""Exact rational linear arithmetic and quantifier elimination over (Q, <, +).

Everything here is an immutable value. Regions are kept in disjunctive
normal form; projections use Fourier-Motzkin elimination with exact
strictness tracking, and universal quantifiers go through complementation.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import total_ordering
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from config import Config
from errors import InfinityArithmeticError

logger = logging.getLogger(__name__)

Rat = Fraction

Point = Mapping[int, Fraction]


def rat(value) -> Fraction:
    """Coerce an int, Fraction or "p/q" string to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def format_rat(value: Fraction) -> str:
    """Render a rational as "p/q" (or "p" when integral)."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@total_ordering
@dataclass(frozen=True)
class ExtRat:
    """An element of Gamma_infinity: a rational or the top element."""
    value: Optional[Fraction]

    @classmethod
    def of(cls, value) -> 'ExtRat':
        if isinstance(value, ExtRat):
            return value
        if value is None:
            return INF
        if isinstance(value, str) and value.strip() in ('inf', '∞'):
            return INF
        return cls(rat(value))

    @property
    def is_inf(self) -> bool:
        return self.value is None

    def __lt__(self, other):
        other = ExtRat.of(other)
        if self.is_inf:
            return False
        if other.is_inf:
            return True
        return self.value < other.value

    def __add__(self, other):
        other = ExtRat.of(other)
        if self.is_inf or other.is_inf:
            return INF
        return ExtRat(self.value + other.value)

    __radd__ = __add__

    def __sub__(self, other):
        other = ExtRat.of(other)
        if self.is_inf or other.is_inf:
            raise InfinityArithmeticError("subtraction involving inf has no value")
        return ExtRat(self.value - other.value)

    def __neg__(self):
        if self.is_inf:
            raise InfinityArithmeticError("negation of inf has no value")
        return ExtRat(-self.value)

    def __str__(self):
        return 'inf' if self.is_inf else format_rat(self.value)


INF = ExtRat(None)


class Rel(str, Enum):
    LT = '<'
    LE = '<='
    EQ = '='


class Quantifier(str, Enum):
    EXISTS = 'exists'
    FORALL = 'forall'


@dataclass(frozen=True)
class LinForm:
    """Affine form sum(a_i * x_i) + c over finite coordinates."""
    coeffs: Tuple[Tuple[int, Fraction], ...] = ()
    constant: Fraction = Fraction(0)
    _map: Dict[int, Fraction] = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, '_map', dict(self.coeffs))

    @staticmethod
    def of(coeffs: Optional[Mapping[int, object]] = None, constant=0) -> 'LinForm':
        items = []
        for index, value in (coeffs or {}).items():
            value = rat(value)
            if value != 0:
                items.append((index, value))
        return LinForm(tuple(sorted(items)), rat(constant))

    @staticmethod
    def var(index: int, coeff=1) -> 'LinForm':
        return LinForm.of({index: coeff})

    @staticmethod
    def const(value) -> 'LinForm':
        return LinForm((), rat(value))

    def coeff(self, index: int) -> Fraction:
        return self._map.get(index, Fraction(0))

    @property
    def variables(self) -> FrozenSet[int]:
        return frozenset(self._map)

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    @property
    def max_var(self) -> int:
        return self.coeffs[-1][0] if self.coeffs else -1

    def __add__(self, other: 'LinForm') -> 'LinForm':
        merged = dict(self._map)
        for index, value in other.coeffs:
            merged[index] = merged.get(index, Fraction(0)) + value
        return LinForm.of(merged, self.constant + other.constant)

    def __sub__(self, other: 'LinForm') -> 'LinForm':
        return self + other.scale(-1)

    def __neg__(self) -> 'LinForm':
        return self.scale(-1)

    def scale(self, factor) -> 'LinForm':
        factor = rat(factor)
        if factor == 0:
            return LinForm.const(0)
        return LinForm(tuple((i, c * factor) for i, c in self.coeffs), self.constant * factor)

    def shift(self, amount) -> 'LinForm':
        return LinForm(self.coeffs, self.constant + rat(amount))

    def without(self, index: int) -> 'LinForm':
        return LinForm(tuple((i, c) for i, c in self.coeffs if i != index), self.constant)

    def substitute(self, index: int, replacement: 'LinForm') -> 'LinForm':
        coeff = self.coeff(index)
        if coeff == 0:
            return self
        return self.without(index) + replacement.scale(coeff)

    def assign(self, values: Point) -> 'LinForm':
        """Substitute known values for some of the variables."""
        constant = self.constant
        rest = []
        for index, coeff in self.coeffs:
            if index in values:
                constant += coeff * values[index]
            else:
                rest.append((index, coeff))
        return LinForm(tuple(rest), constant)

    def evaluate(self, point: Point) -> Fraction:
        return self.constant + sum((c * point[i] for i, c in self.coeffs), Fraction(0))

    def rename(self, mapping: Mapping[int, int]) -> 'LinForm':
        return LinForm.of({mapping[i]: c for i, c in self.coeffs}, self.constant)

    def __str__(self):
        parts = [f"{format_rat(c)}*x{i}" for i, c in self.coeffs]
        if self.constant != 0 or not parts:
            parts.append(format_rat(self.constant))
        return ' + '.join(parts)


@dataclass(frozen=True)
class Atom:
    """The condition `form rel 0`."""
    form: LinForm
    rel: Rel

    @staticmethod
    def lt(form: LinForm) -> 'Atom':
        return Atom(form, Rel.LT)

    @staticmethod
    def le(form: LinForm) -> 'Atom':
        return Atom(form, Rel.LE)

    @staticmethod
    def eq(form: LinForm) -> 'Atom':
        return Atom(form, Rel.EQ)

    @property
    def variables(self) -> FrozenSet[int]:
        return self.form.variables

    def truth(self, value: Fraction) -> bool:
        if self.rel is Rel.LT:
            return value < 0
        if self.rel is Rel.LE:
            return value <= 0
        return value == 0

    def holds(self, point: Point) -> bool:
        return self.truth(self.form.evaluate(point))

    def negations(self) -> Tuple['Atom', ...]:
        """Atoms whose disjunction is the negation of this one."""
        if self.rel is Rel.LT:
            return (Atom.le(-self.form),)
        if self.rel is Rel.LE:
            return (Atom.lt(-self.form),)
        return (Atom.lt(self.form), Atom.lt(-self.form))

    def relaxed(self) -> 'Atom':
        return Atom.le(self.form) if self.rel is Rel.LT else self

    def normalized(self) -> 'Atom':
        if self.form.is_constant:
            return self
        lead = self.form.coeffs[-1][1]
        factor = 1 / lead if self.rel is Rel.EQ else 1 / abs(lead)
        return Atom(self.form.scale(factor), self.rel)

    def substitute(self, index: int, replacement: LinForm) -> 'Atom':
        return Atom(self.form.substitute(index, replacement), self.rel)

    def assign(self, values: Point) -> 'Atom':
        return Atom(self.form.assign(values), self.rel)

    def rename(self, mapping: Mapping[int, int]) -> 'Atom':
        return Atom(self.form.rename(mapping), self.rel)

    def __str__(self):
        return f"{self.form} {self.rel.value} 0"


def _atom_key(atom: Atom):
    return (atom.rel.value, atom.form.coeffs, atom.form.constant)


@dataclass(frozen=True)
class Polyhedron:
    """Conjunction of atoms over the coordinates in `scope`."""
    scope: FrozenSet[int]
    atoms: Tuple[Atom, ...] = ()

    def contains(self, point: Point) -> bool:
        return all(atom.holds(point) for atom in self.atoms)

    def conjoin(self, other: 'Polyhedron') -> 'Polyhedron':
        return Polyhedron(self.scope | other.scope, self.atoms + other.atoms)

    def add(self, *atoms: Atom) -> 'Polyhedron':
        return Polyhedron(self.scope, self.atoms + tuple(atoms))

    def relaxed(self) -> 'Polyhedron':
        return Polyhedron(self.scope, tuple(atom.relaxed() for atom in self.atoms))

    def rename(self, mapping: Mapping[int, int]) -> 'Polyhedron':
        return Polyhedron(frozenset(mapping[i] for i in self.scope),
                          tuple(atom.rename(mapping) for atom in self.atoms))

    def is_empty(self) -> bool:
        return atoms_empty(self.atoms)


@dataclass(frozen=True)
class Region:
    """Finite union of polyhedra sharing one scope; no disjuncts means empty."""
    scope: FrozenSet[int]
    disjuncts: Tuple[Polyhedron, ...] = ()

    @staticmethod
    def top(scope: Iterable[int]) -> 'Region':
        scope = frozenset(scope)
        return Region(scope, (Polyhedron(scope, ()),))

    @staticmethod
    def empty(scope: Iterable[int]) -> 'Region':
        return Region(frozenset(scope), ())

    @staticmethod
    def of_atoms(scope: Iterable[int], atoms: Iterable[Atom]) -> 'Region':
        scope = frozenset(scope)
        return Region(scope, (Polyhedron(scope, tuple(atoms)),))

    def contains(self, point: Point) -> bool:
        return any(p.contains(point) for p in self.disjuncts)

    def widen(self, scope: Iterable[int]) -> 'Region':
        """Same denotation constraints, read in a larger coordinate scope."""
        scope = frozenset(scope) | self.scope
        return Region(scope, tuple(Polyhedron(scope, p.atoms) for p in self.disjuncts))

    def union(self, other: 'Region') -> 'Region':
        return union(self, other)

    def intersect(self, other: 'Region') -> 'Region':
        return intersect(self, other)

    def complement(self) -> 'Region':
        return complement(self)

    def difference(self, other: 'Region') -> 'Region':
        return difference(self, other)

    def is_empty(self) -> bool:
        return is_empty(self)

    def rename(self, mapping: Mapping[int, int]) -> 'Region':
        return Region(frozenset(mapping[i] for i in self.scope),
                      tuple(p.rename(mapping) for p in self.disjuncts))

    def __str__(self):
        if not self.disjuncts:
            return 'false'
        parts = []
        for p in self.disjuncts:
            parts.append(' & '.join(str(a) for a in p.atoms) or 'true')
        return ' | '.join(f"({part})" for part in parts)


# ---------------------------------------------------------------------------
# Atom-level machinery


def simplify_atoms(atoms: Iterable[Atom]) -> Optional[Tuple[Atom, ...]]:
    """Normalize, drop trivial and subsumed atoms; None when contradictory."""
    best: Dict[tuple, Atom] = {}
    equalities: Dict[tuple, Atom] = {}
    for atom in atoms:
        if atom.form.is_constant:
            if not atom.truth(atom.form.constant):
                return None
            continue
        atom = atom.normalized()
        key = atom.form.coeffs
        if atom.rel is Rel.EQ:
            previous = equalities.get(key)
            if previous is not None and previous.form.constant != atom.form.constant:
                return None
            equalities[key] = atom
            continue
        previous = best.get(key)
        if previous is None or _tighter(atom, previous):
            best[key] = atom
    # v.x + a <= 0 together with -v.x + b <= 0 pins v.x into [b, -a]
    for key in list(best):
        if key not in best:
            continue
        opposite = tuple((i, -c) for i, c in key)
        if opposite not in best:
            continue
        upper, lower = best[key], best[opposite]
        lo, hi = lower.form.constant, -upper.form.constant
        if lo > hi or (lo == hi and Rel.LT in (upper.rel, lower.rel)):
            return None
        if lo == hi:
            pinned = Atom.eq(upper.form).normalized()
            previous = equalities.get(pinned.form.coeffs)
            if previous is not None and previous.form.constant != pinned.form.constant:
                return None
            equalities[pinned.form.coeffs] = pinned
            del best[key]
            del best[opposite]
    ordered = sorted(equalities.values(), key=_atom_key) + sorted(best.values(), key=_atom_key)
    return tuple(ordered)


def _tighter(a: Atom, b: Atom) -> bool:
    if a.form.constant != b.form.constant:
        return a.form.constant > b.form.constant
    return a.rel is Rel.LT and b.rel is Rel.LE


def _variables(atoms: Iterable[Atom]) -> FrozenSet[int]:
    out = set()
    for atom in atoms:
        out.update(atom.form.variables)
    return frozenset(out)


def _eliminate(atoms: Tuple[Atom, ...], var: int) -> Optional[Tuple[Atom, ...]]:
    """One Fourier-Motzkin step; equalities are used by substitution first."""
    pivot = next((a for a in atoms if a.rel is Rel.EQ and a.form.coeff(var) != 0), None)
    if pivot is not None:
        coeff = pivot.form.coeff(var)
        replacement = pivot.form.without(var).scale(-1 / coeff)
        rest = [a.substitute(var, replacement) for a in atoms if a is not pivot]
        return simplify_atoms(rest)
    lowers, uppers, others = [], [], []
    for atom in atoms:
        coeff = atom.form.coeff(var)
        if coeff == 0:
            others.append(atom)
        elif coeff > 0:
            uppers.append(atom)
        else:
            lowers.append(atom)
    for upper in uppers:
        cu = upper.form.coeff(var)
        for lower in lowers:
            cl = lower.form.coeff(var)
            form = upper.form.scale(-cl) + lower.form.scale(cu)
            rel = Rel.LT if Rel.LT in (upper.rel, lower.rel) else Rel.LE
            others.append(Atom(form.without(var), rel))
    return simplify_atoms(others)


def _pick_var(atoms: Sequence[Atom], candidates: Iterable[int]) -> int:
    candidates = sorted(candidates)
    for atom in atoms:
        if atom.rel is Rel.EQ:
            hit = [v for v in candidates if atom.form.coeff(v) != 0]
            if hit:
                return hit[0]

    def cost(v):
        pos = sum(1 for a in atoms if a.form.coeff(v) > 0)
        neg = sum(1 for a in atoms if a.form.coeff(v) < 0)
        return pos * neg - pos - neg

    return min(candidates, key=lambda v: (cost(v), v))


def atoms_empty(atoms: Iterable[Atom], prune: bool = True) -> bool:
    """Decide unsatisfiability of a conjunction over Q."""
    current = simplify_atoms(atoms)
    if current is None:
        return True
    remaining = _variables(current)
    while remaining:
        var = _pick_var(current, remaining)
        current = _eliminate(current, var)
        if current is None:
            return True
        if prune and len(current) > Config.PRUNE_THRESHOLD:
            current = prune_atoms(current)
        remaining = _variables(current)
    return False


def prune_atoms(atoms: Tuple[Atom, ...]) -> Tuple[Atom, ...]:
    """Drop every inequality implied by the others."""
    kept = list(atoms)
    for atom in list(atoms):
        if atom.rel is Rel.EQ:
            continue
        rest = [a for a in kept if a is not atom]
        if atoms_empty(rest + list(atom.negations()), prune=False):
            kept = rest
    return tuple(kept)


def _project_atoms(atoms: Tuple[Atom, ...], drop: Iterable[int]) -> Optional[Tuple[Atom, ...]]:
    current = simplify_atoms(atoms)
    for var in sorted(drop):
        if current is None:
            return None
        if any(a.form.coeff(var) != 0 for a in current):
            current = _eliminate(current, var)
            if current is not None and len(current) > Config.PRUNE_THRESHOLD:
                current = prune_atoms(current)
    return current


# ---------------------------------------------------------------------------
# Region operations


def _canonical(scope: FrozenSet[int], polys: Iterable[Polyhedron]) -> Region:
    """Drop empty and syntactically subsumed disjuncts."""
    kept: List[Polyhedron] = []
    seen = set()
    for poly in polys:
        atoms = simplify_atoms(poly.atoms)
        if atoms is None or atoms in seen or atoms_empty(atoms):
            continue
        seen.add(atoms)
        kept.append(Polyhedron(scope, atoms))
    out = []
    for i, poly in enumerate(kept):
        mine = set(poly.atoms)
        subsumed = False
        for j, other in enumerate(kept):
            if i == j:
                continue
            theirs = set(other.atoms)
            if theirs <= mine and (theirs != mine or j < i):
                subsumed = True
                break
        if not subsumed:
            out.append(poly)
    return Region(scope, tuple(out))


def normalize(region: Region) -> Region:
    return _canonical(region.scope, region.disjuncts)


def union(a: Region, b: Region) -> Region:
    scope = a.scope | b.scope
    return _canonical(scope, a.widen(scope).disjuncts + b.widen(scope).disjuncts)


def intersect(a: Region, b: Region) -> Region:
    scope = a.scope | b.scope
    polys = [Polyhedron(scope, p.atoms + q.atoms) for p in a.disjuncts for q in b.disjuncts]
    return _canonical(scope, polys)


def complement(region: Region) -> Region:
    """Complement within the region's own scope, distributed back to DNF."""
    scope = region.scope
    result = [Polyhedron(scope, ())]
    for poly in region.disjuncts:
        atoms = simplify_atoms(poly.atoms)
        if atoms is None:
            continue
        if not atoms:
            return Region.empty(scope)
        negated = [n for atom in atoms for n in atom.negations()]
        grown = [Polyhedron(scope, q.atoms + (n,)) for q in result for n in negated]
        result = list(_canonical(scope, grown).disjuncts)
        if not result:
            break
    return Region(scope, tuple(result))


def difference(a: Region, b: Region) -> Region:
    scope = a.scope | b.scope
    return intersect(a.widen(scope), complement(b.widen(scope)))


def is_empty(region: Region) -> bool:
    return all(atoms_empty(p.atoms) for p in region.disjuncts)


def subset(a: Region, b: Region) -> bool:
    return is_empty(difference(a, b))


def equivalent(a: Region, b: Region) -> bool:
    return subset(a, b) and subset(b, a)


def fm_eliminate(region: Region, var: int) -> Region:
    """Exact projection of `region` along coordinate `var`."""
    scope = region.scope - {var}
    polys = []
    for poly in region.disjuncts:
        atoms = _project_atoms(poly.atoms, [var])
        if atoms is not None:
            polys.append(Polyhedron(scope, atoms))
    return _canonical(scope, polys)


def project(region: Region, keep: Iterable[int]) -> Region:
    """Existentially eliminate every coordinate outside `keep`."""
    keep = frozenset(keep) & region.scope
    drop = sorted(region.scope - keep)
    polys = []
    for poly in region.disjuncts:
        atoms = _project_atoms(poly.atoms, drop)
        if atoms is not None:
            polys.append(Polyhedron(keep, atoms))
    return _canonical(keep, polys)


def qe(prefix: Sequence[Tuple[Quantifier, int]], body: Region) -> Region:
    """Eliminate a quantifier prefix, innermost first."""
    region = body
    for quantifier, var in reversed(list(prefix)):
        if var not in region.scope:
            region = region.widen(region.scope | {var})
        if quantifier is Quantifier.EXISTS:
            region = fm_eliminate(region, var)
        else:
            region = complement(fm_eliminate(complement(region), var))
    return region


def assign(region: Region, values: Point) -> Region:
    """Fix some coordinates to rational values, shrinking the scope."""
    scope = region.scope - frozenset(values)
    polys = [Polyhedron(scope, tuple(a.assign(values) for a in p.atoms)) for p in region.disjuncts]
    return _canonical(scope, polys)


def closure_within(region: Region) -> Region:
    """Topological closure inside Q^scope.

    Each nonempty convex disjunct closes to its relaxation, and closure
    commutes with finite unions.
    """
    region = normalize(region)
    return _canonical(region.scope, [p.relaxed() for p in region.disjuncts])


def _rank(rows: List[List[Fraction]], width: int) -> int:
    if not rows or width == 0:
        return 0
    data = [[QQ(v.numerator, v.denominator) for v in row] for row in rows]
    return DomainMatrix(data, (len(rows), width), QQ).rank()


def polyhedron_dimension(poly: Polyhedron) -> int:
    atoms = simplify_atoms(poly.atoms)
    if atoms is None or atoms_empty(atoms):
        return -1
    variables = sorted(poly.scope)
    if not variables:
        return 0
    implied = []
    for atom in atoms:
        if atom.rel is Rel.EQ:
            implied.append(atom.form)
        elif atom.rel is Rel.LE:
            others = [a for a in atoms if a is not atom]
            if atoms_empty(others + [Atom.lt(atom.form)]):
                implied.append(atom.form)
    rows = [[form.coeff(v) for v in variables] for form in implied]
    return len(variables) - _rank(rows, len(variables))


def dimension(region: Region) -> int:
    """-1 for the empty region, else the largest disjunct dimension."""
    return max((polyhedron_dimension(p) for p in region.disjuncts), default=-1)


def _pick_value(stage: Tuple[Atom, ...], var: int, point: Dict[int, Fraction]) -> Fraction:
    lower: Optional[Tuple[Fraction, bool]] = None
    upper: Optional[Tuple[Fraction, bool]] = None
    for atom in stage:
        form = atom.form.assign(point)
        coeff = form.coeff(var)
        if coeff == 0:
            continue
        bound = -form.constant / coeff
        if atom.rel is Rel.EQ:
            return bound
        strict = atom.rel is Rel.LT
        if coeff > 0:
            if upper is None or bound < upper[0] or (bound == upper[0] and strict):
                upper = (bound, strict)
        else:
            if lower is None or bound > lower[0] or (bound == lower[0] and strict):
                lower = (bound, strict)
    if lower and upper:
        if lower[0] == upper[0]:
            return lower[0]
        return (lower[0] + upper[0]) / 2
    if lower:
        return lower[0] + 1 if lower[1] else lower[0]
    if upper:
        return upper[0] - 1 if upper[1] else upper[0]
    return Fraction(0)


def _sample_atoms(atoms: Tuple[Atom, ...], scope: FrozenSet[int]) -> Optional[Dict[int, Fraction]]:
    current = simplify_atoms(atoms)
    if current is None:
        return None
    stages, order = [], []
    remaining = _variables(current)
    while remaining:
        var = _pick_var(current, remaining)
        stages.append(current)
        order.append(var)
        current = _eliminate(current, var)
        if current is None:
            return None
        remaining = _variables(current)
    point: Dict[int, Fraction] = {}
    for var, stage in zip(reversed(order), reversed(stages)):
        point[var] = _pick_value(stage, var, point)
    for var in scope:
        point.setdefault(var, Fraction(0))
    return point


def sample_point(region: Region) -> Optional[Dict[int, Fraction]]:
    """A rational witness of a nonempty region, found by back-substitution."""
    for poly in region.disjuncts:
        point = _sample_atoms(poly.atoms, region.scope)
        if point is not None:
            return point
    return None
