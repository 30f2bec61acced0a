"""Definable subsets of Gamma_infinity^n stored stratum by stratum, and their topology."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product as cartesian
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from errors import DimensionMismatch, NotLocallyClosed
from services import qlin
from services.qlin import INF, Atom, ExtRat, LinForm, Polyhedron, Region

logger = logging.getLogger(__name__)

Support = FrozenSet[int]
GPoint = Tuple[ExtRat, ...]


def all_supports(n: int) -> Iterator[Support]:
    """Every support L of {0..n-1}, smallest first."""
    for size in range(n + 1):
        for combo in combinations(range(n), size):
            yield frozenset(combo)


def support_of(point: Sequence[ExtRat]) -> Support:
    return frozenset(i for i, v in enumerate(point) if not ExtRat.of(v).is_inf)


def format_point(point: Sequence[ExtRat]) -> str:
    return '(' + ', '.join(str(ExtRat.of(v)) for v in point) + ')'


@dataclass(frozen=True, eq=False)
class SemilinearSet:
    """Union over supports L of an embedded Region with scope L.

    Coordinates outside L are infinite. Equality of denotations is decided
    with `equals`, never by comparing pieces.
    """
    ambient_dim: int
    pieces: Mapping[Support, Region] = field(default_factory=dict)

    @staticmethod
    def from_pieces(n: int, pieces: Mapping[Iterable[int], Region]) -> 'SemilinearSet':
        merged: Dict[Support, Region] = {}
        for support, region in pieces.items():
            support = frozenset(support)
            if region.scope != support:
                region = region.widen(support)
            if support in merged:
                region = qlin.union(merged[support], region)
            merged[support] = region
        kept = {L: qlin.normalize(r) for L, r in merged.items()}
        kept = {L: r for L, r in kept.items() if r.disjuncts}
        return SemilinearSet(n, dict(sorted(kept.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))))

    @staticmethod
    def empty(n: int) -> 'SemilinearSet':
        return SemilinearSet(n, {})

    @staticmethod
    def full(n: int) -> 'SemilinearSet':
        return SemilinearSet(n, {L: Region.top(L) for L in all_supports(n)})

    @staticmethod
    def stratum(n: int, support: Iterable[int], region: Optional[Region] = None) -> 'SemilinearSet':
        support = frozenset(support)
        return SemilinearSet.from_pieces(n, {support: region if region is not None else Region.top(support)})

    @staticmethod
    def point(coords: Sequence[object]) -> 'SemilinearSet':
        values = [ExtRat.of(v) for v in coords]
        support = support_of(values)
        atoms = [Atom.eq(LinForm.var(i).shift(-values[i].value)) for i in sorted(support)]
        return SemilinearSet.stratum(len(values), support, Region.of_atoms(support, atoms))

    @staticmethod
    def interval(lo=None, hi=INF, lo_closed=False, hi_closed=False) -> 'SemilinearSet':
        """An interval of Gamma_infinity; lo None is unbounded below, hi INF may include the top."""
        hi = ExtRat.of(hi)
        atoms = []
        if lo is not None:
            lo = qlin.rat(lo)
            atoms.append(Atom(LinForm.of({0: -1}, lo), qlin.Rel.LE if lo_closed else qlin.Rel.LT))
        if not hi.is_inf:
            atoms.append(Atom(LinForm.of({0: 1}, -hi.value), qlin.Rel.LE if hi_closed else qlin.Rel.LT))
        pieces = {frozenset({0}): Region.of_atoms({0}, atoms)}
        if hi.is_inf and hi_closed:
            pieces[frozenset()] = Region.top(())
        return SemilinearSet.from_pieces(1, pieces)

    def region(self, support: Iterable[int]) -> Region:
        support = frozenset(support)
        return self.pieces.get(support, Region.empty(support))

    def contains(self, point: Sequence[object]) -> bool:
        values = [ExtRat.of(v) for v in point]
        if len(values) != self.ambient_dim:
            raise DimensionMismatch(f"point of length {len(values)} in G^{self.ambient_dim}")
        support = support_of(values)
        region = self.pieces.get(support)
        if region is None:
            return False
        return region.contains({i: values[i].value for i in support})

    def is_empty(self) -> bool:
        return all(r.is_empty() for r in self.pieces.values())

    def sample(self) -> Optional[GPoint]:
        for support, region in self.pieces.items():
            found = qlin.sample_point(region)
            if found is not None:
                return tuple(ExtRat(found[i]) if i in support else INF for i in range(self.ambient_dim))
        return None

    def describe(self) -> Dict[str, str]:
        out = {}
        for support, region in self.pieces.items():
            label = '{' + ','.join(f"x{i}" for i in sorted(support)) + '}'
            out[label] = str(region)
        return out

    def __repr__(self):
        return f"SemilinearSet(n={self.ambient_dim}, pieces={self.describe()})"

    def union(self, other):
        return union(self, other)

    def intersect(self, other):
        return intersect(self, other)

    def complement(self):
        return complement(self)

    def difference(self, other):
        return difference(self, other)


def _check_dims(a: SemilinearSet, b: SemilinearSet):
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatch(f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}")


def union(a: SemilinearSet, b: SemilinearSet) -> SemilinearSet:
    _check_dims(a, b)
    pieces = dict(a.pieces)
    for support, region in b.pieces.items():
        pieces[support] = qlin.union(pieces[support], region) if support in pieces else region
    return SemilinearSet.from_pieces(a.ambient_dim, pieces)


def union_all(n: int, sets: Iterable[SemilinearSet]) -> SemilinearSet:
    out = SemilinearSet.empty(n)
    for s in sets:
        out = union(out, s)
    return out


def intersect(a: SemilinearSet, b: SemilinearSet) -> SemilinearSet:
    _check_dims(a, b)
    pieces = {L: qlin.intersect(r, b.pieces[L]) for L, r in a.pieces.items() if L in b.pieces}
    return SemilinearSet.from_pieces(a.ambient_dim, pieces)


def complement(a: SemilinearSet) -> SemilinearSet:
    pieces = {}
    for support in all_supports(a.ambient_dim):
        region = a.pieces.get(support)
        pieces[support] = Region.top(support) if region is None else qlin.complement(region)
    return SemilinearSet.from_pieces(a.ambient_dim, pieces)


def difference(a: SemilinearSet, b: SemilinearSet) -> SemilinearSet:
    _check_dims(a, b)
    pieces = {}
    for support, region in a.pieces.items():
        other = b.pieces.get(support)
        pieces[support] = region if other is None else qlin.difference(region, other)
    return SemilinearSet.from_pieces(a.ambient_dim, pieces)


def subset(a: SemilinearSet, b: SemilinearSet) -> bool:
    return difference(a, b).is_empty()


def equals(a: SemilinearSet, b: SemilinearSet) -> bool:
    return subset(a, b) and subset(b, a)


# ---------------------------------------------------------------------------
# Topology


def _escapes(atoms: Sequence[Atom], escaping: Support) -> bool:
    """Whether the polyhedron admits points with every coordinate in `escaping`
    unbounded while the remaining coordinates stay fixed.

    Equivalent to a recession direction d with d = 0 off `escaping` and
    d_j >= 1 on it.
    """
    system = []
    for atom in atoms:
        form = LinForm(tuple((i, c) for i, c in atom.form.coeffs if i in escaping), Fraction(0))
        system.append(Atom(form, qlin.Rel.EQ if atom.rel is qlin.Rel.EQ else qlin.Rel.LE))
    system.extend(Atom.le(LinForm.of({j: -1}, 1)) for j in escaping)
    return not qlin.atoms_empty(system)


def polyhedron_closure(support: Support, poly: Polyhedron) -> Dict[Support, Region]:
    """Closure in Gamma_infinity^n of one convex piece living in stratum `support`.

    The result has at most one polyhedron per stratum L contained in `support`:
    the relaxed projection onto L when the piece can escape to infinity along
    support minus L, nothing otherwise.
    """
    atoms = qlin.simplify_atoms(poly.atoms)
    if atoms is None or qlin.atoms_empty(atoms):
        return {}
    base = Region(support, (Polyhedron(support, atoms),))
    out = {}
    for target in all_supports(len(support)):
        target = frozenset(sorted(support)[i] for i in target)
        escaping = support - target
        if escaping and not _escapes(atoms, escaping):
            continue
        limit = qlin.closure_within(qlin.project(base, target))
        if limit.disjuncts:
            out[target] = limit
    return out


def closure(s: SemilinearSet) -> SemilinearSet:
    """Smallest closed definable superset, computed piece by piece."""
    pieces: Dict[Support, Region] = {}
    for support, region in s.pieces.items():
        for poly in region.disjuncts:
            for target, limit in polyhedron_closure(support, poly).items():
                pieces[target] = qlin.union(pieces[target], limit) if target in pieces else limit
    return SemilinearSet.from_pieces(s.ambient_dim, pieces)


def interior(s: SemilinearSet) -> SemilinearSet:
    return complement(closure(complement(s)))


def frontier(s: SemilinearSet) -> SemilinearSet:
    return difference(closure(s), s)


def is_closed(s: SemilinearSet) -> bool:
    return subset(closure(s), s)


def is_open(s: SemilinearSet) -> bool:
    return is_closed(complement(s))


def is_closed_in(a: SemilinearSet, ambient: SemilinearSet) -> bool:
    """Whether `a` is closed relative to `ambient` (a assumed inside ambient)."""
    return subset(intersect(closure(a), ambient), a)


def not_locally_closed_witness(s: SemilinearSet) -> Optional[GPoint]:
    """A point of `s` in the closure of its frontier, or None when `s` is locally closed."""
    front = frontier(s)
    bad = intersect(closure(front), s)
    return bad.sample()


def is_locally_closed(s: SemilinearSet) -> bool:
    return is_closed(frontier(s))


def _coordinate_lower_bound(region: Region, index: int) -> Optional[Fraction]:
    line = qlin.project(region, {index})
    if not line.disjuncts:
        return Fraction(0)
    best = None
    for poly in line.disjuncts:
        bound = None
        for atom in poly.atoms:
            coeff = atom.form.coeff(index)
            if coeff < 0 or atom.rel is qlin.Rel.EQ:
                value = -atom.form.constant / coeff
                bound = value if bound is None else max(bound, value)
        if bound is None:
            return None
        best = bound if best is None else min(best, bound)
    return best


def lower_bound(s: SemilinearSet) -> Optional[Fraction]:
    """A rational c with s inside [c, inf]^n, or None when some coordinate is unbounded below."""
    best = Fraction(0)
    for support, region in s.pieces.items():
        for index in sorted(support):
            bound = _coordinate_lower_bound(region, index)
            if bound is None:
                return None
            best = min(best, bound)
    return best


def coordinate_bounded_below(s: SemilinearSet) -> Tuple[bool, ...]:
    flags = []
    for index in range(s.ambient_dim):
        ok = True
        for support, region in s.pieces.items():
            if index in support and _coordinate_lower_bound(region, index) is None:
                ok = False
                break
        flags.append(ok)
    return tuple(flags)


def is_bounded(s: SemilinearSet) -> bool:
    return lower_bound(s) is not None


def is_definably_compact(s: SemilinearSet) -> bool:
    return is_bounded(s) and is_closed(s)


def dimension(s: SemilinearSet) -> int:
    return max((qlin.dimension(r) for r in s.pieces.values()), default=-1)


# ---------------------------------------------------------------------------
# Coordinate maps


def _map_form(form: LinForm, images: Mapping[int, LinForm]) -> LinForm:
    out = LinForm.const(form.constant)
    for index, coeff in form.coeffs:
        out = out + images[index].scale(coeff)
    return out


def _map_region(region: Region, scope: Iterable[int], images: Mapping[int, LinForm],
                extra: Sequence[Atom] = ()) -> Region:
    scope = frozenset(scope)
    polys = []
    for poly in region.disjuncts:
        atoms = tuple(Atom(_map_form(a.form, images), a.rel) for a in poly.atoms) + tuple(extra)
        polys.append(Polyhedron(scope, atoms))
    return Region(scope, tuple(polys))


def permute(s: SemilinearSet, order: Sequence[int]) -> SemilinearSet:
    """New coordinate i is old coordinate order[i]."""
    if sorted(order) != list(range(s.ambient_dim)):
        raise DimensionMismatch(f"{list(order)} is not a permutation of {s.ambient_dim} coordinates")
    new_index = {old: new for new, old in enumerate(order)}
    pieces = {frozenset(new_index[i] for i in L): r.rename(new_index) for L, r in s.pieces.items()}
    return SemilinearSet.from_pieces(s.ambient_dim, pieces)


def product(a: SemilinearSet, b: SemilinearSet) -> SemilinearSet:
    shift = {i: i + a.ambient_dim for i in range(b.ambient_dim)}
    pieces = {}
    for La, ra in a.pieces.items():
        for Lb, rb in b.pieces.items():
            support = La | frozenset(shift[i] for i in Lb)
            pieces[support] = qlin.intersect(ra.widen(support), rb.rename(shift).widen(support))
    return SemilinearSet.from_pieces(a.ambient_dim + b.ambient_dim, pieces)


def fiber(s: SemilinearSet, index: int, value: object) -> SemilinearSet:
    """The set {y : (y with value inserted at `index`) in s} in Gamma_infinity^(n-1)."""
    value = ExtRat.of(value)
    down = {i: (i if i < index else i - 1) for i in range(s.ambient_dim) if i != index}
    pieces = {}
    for support, region in s.pieces.items():
        if value.is_inf == (index in support):
            continue
        if not value.is_inf:
            region = qlin.assign(region, {index: value.value})
        pieces[frozenset(down[i] for i in support if i != index)] = region.rename(down)
    return SemilinearSet.from_pieces(s.ambient_dim - 1, pieces)


# ---------------------------------------------------------------------------
# Boxes, completions, compact pairs


@dataclass(frozen=True)
class BoxNbhd:
    """Basic open box: per coordinate (lo, hi) with lo None for -inf.

    hi == INF denotes (lo, inf], which contains the top element.
    """
    intervals: Tuple[Tuple[Optional[Fraction], ExtRat], ...]

    @staticmethod
    def around(point: Sequence[object], eps, big) -> 'BoxNbhd':
        eps, big = qlin.rat(eps), qlin.rat(big)
        intervals = []
        for v in point:
            v = ExtRat.of(v)
            if v.is_inf:
                intervals.append((big, INF))
            else:
                intervals.append((v.value - eps, ExtRat(v.value + eps)))
        return BoxNbhd(tuple(intervals))

    def as_set(self) -> SemilinearSet:
        n = len(self.intervals)
        pieces = {}
        for support in all_supports(n):
            if any(i not in support and not hi.is_inf for i, (_, hi) in enumerate(self.intervals)):
                continue
            atoms = []
            for i in sorted(support):
                lo, hi = self.intervals[i]
                if lo is not None:
                    atoms.append(Atom.lt(LinForm.of({i: -1}, lo)))
                if not hi.is_inf:
                    atoms.append(Atom.lt(LinForm.of({i: 1}, -hi.value)))
            pieces[support] = Region.of_atoms(support, atoms)
        return SemilinearSet.from_pieces(n, pieces)

    def contains(self, point: Sequence[object]) -> bool:
        return self.as_set().contains(point)

    def meets(self, s: SemilinearSet) -> bool:
        return not intersect(self.as_set(), s).is_empty()


@dataclass(frozen=True)
class Completion:
    """Coordinate layout of the map into [0, inf]^m.

    Split coordinates go through p(x) = (-x, 0) for x < 0 and (0, x)
    otherwise, with p(inf) = (0, inf); the others are kept as they are.
    """
    split: Tuple[bool, ...]

    @staticmethod
    def full(n: int) -> 'Completion':
        return Completion(tuple([True] * n))

    @property
    def source_dim(self) -> int:
        return len(self.split)

    @property
    def target_dim(self) -> int:
        return sum(2 if flag else 1 for flag in self.split)

    def targets(self, index: int) -> Tuple[int, ...]:
        start = sum(2 if flag else 1 for flag in self.split[:index])
        return (start, start + 1) if self.split[index] else (start,)

    def embed_point(self, point: Sequence[object]) -> GPoint:
        out: List[ExtRat] = []
        for v, flag in zip(point, self.split):
            v = ExtRat.of(v)
            if not flag:
                out.append(v)
            elif v.is_inf:
                out.extend([ExtRat(Fraction(0)), INF])
            elif v.value < 0:
                out.extend([ExtRat(-v.value), ExtRat(Fraction(0))])
            else:
                out.extend([ExtRat(Fraction(0)), v])
        return tuple(out)

    def apply(self, s: SemilinearSet) -> SemilinearSet:
        if s.ambient_dim != self.source_dim:
            raise DimensionMismatch(f"layout for G^{self.source_dim} applied to G^{s.ambient_dim}")
        pieces: Dict[Support, Region] = {}
        for support, region in s.pieces.items():
            split_finite = [i for i in sorted(support) if self.split[i]]
            for branch in cartesian((False, True), repeat=len(split_finite)):
                negative = dict(zip(split_finite, branch))
                images, extra, target = {}, [], set()
                for i in range(self.source_dim):
                    slots = self.targets(i)
                    if not self.split[i]:
                        if i in support:
                            images[i] = LinForm.var(slots[0])
                            target.add(slots[0])
                        continue
                    u, v = slots
                    target.add(u)
                    if i not in support:
                        extra.append(Atom.eq(LinForm.var(u)))
                    elif negative[i]:
                        target.add(v)
                        images[i] = LinForm.var(u, -1)
                        extra += [Atom.lt(LinForm.var(u, -1)), Atom.eq(LinForm.var(v))]
                    else:
                        target.add(v)
                        images[i] = LinForm.var(v)
                        extra += [Atom.eq(LinForm.var(u)), Atom.le(LinForm.var(v, -1))]
                mapped = _map_region(region, target, images, extra)
                key = frozenset(target)
                pieces[key] = qlin.union(pieces[key], mapped) if key in pieces else mapped
        return SemilinearSet.from_pieces(self.target_dim, pieces)


def completion_embed(s: SemilinearSet, split: Optional[Sequence[bool]] = None) -> SemilinearSet:
    """Image of `s` in [0, inf]^(2n) under p on every coordinate (or on `split` ones)."""
    layout = Completion.full(s.ambient_dim) if split is None else Completion(tuple(split))
    return layout.apply(s)


@dataclass(frozen=True, eq=False)
class CompactPair:
    P: SemilinearSet
    Q: SemilinearSet
    X_dim: int
    completion: Completion
    embedded: SemilinearSet


def compact_pair(s: SemilinearSet, full_embedding: bool = False) -> CompactPair:
    """Definably compact P with closed Q such that P minus Q is the embedded image of s.

    Coordinates bounded below are left alone, so a bounded locally closed
    set is paired with its own closure.
    """
    witness = not_locally_closed_witness(s)
    if witness is not None:
        raise NotLocallyClosed(f"set is not open in its closure at {format_point(witness)}", witness)
    if full_embedding:
        layout = Completion.full(s.ambient_dim)
    else:
        layout = Completion(tuple(not ok for ok in coordinate_bounded_below(s)))
    embedded = layout.apply(s) if any(layout.split) else s
    P = closure(embedded)
    Q = difference(P, embedded)
    logger.debug(f"Compact pair in G^{P.ambient_dim}: split={layout.split}")
    return CompactPair(P=P, Q=Q, X_dim=dimension(s), completion=layout, embedded=embedded)


@dataclass(frozen=True, eq=False)
class NonNormalityExample:
    U: SemilinearSet
    C: SemilinearSet
    D: SemilinearSet


def definably_normal_witness_example(a=0) -> NonNormalityExample:
    """U = G^2 minus (inf, a) with disjoint closed C = G x {a}, D = {inf} x (G minus {a})."""
    a = qlin.rat(a)
    at_a = Atom.eq(LinForm.of({1: 1}, -a))
    C = SemilinearSet.stratum(2, {0, 1}, Region.of_atoms({0, 1}, [at_a]))
    off_a = Region({1}, (Polyhedron(frozenset({1}), (Atom.lt(LinForm.of({1: 1}, -a)),)),
                         Polyhedron(frozenset({1}), (Atom.lt(LinForm.of({1: -1}, a)),))))
    D = SemilinearSet.from_pieces(2, {frozenset({1}): off_a, frozenset(): Region.top(())})
    U = difference(SemilinearSet.full(2), SemilinearSet.point([INF, a]))
    return NonNormalityExample(U=U, C=C, D=D)
