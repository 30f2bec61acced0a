"""Order complexes of face posets and simplicial cochain algebra over Q, Z and Z/2."""
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from sympy.polys.domains import GF, QQ, ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import invariant_factors

from models.reports import CoeffRing

logger = logging.getLogger(__name__)

Simplex = Tuple[int, ...]
Cochain = Dict[Simplex, object]


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    """Simplices grouped by dimension; each simplex is a chain c0 < c1 < ... of poset elements."""
    vertices: Tuple[int, ...]
    simplices: Tuple[Tuple[Simplex, ...], ...]
    _members: FrozenSet[Simplex] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, '_members', frozenset(s for group in self.simplices for s in group))

    @property
    def dimension(self) -> int:
        return len(self.simplices) - 1

    def count(self, p: int) -> int:
        return len(self.simplices[p]) if 0 <= p < len(self.simplices) else 0

    def of_dim(self, p: int) -> Tuple[Simplex, ...]:
        return self.simplices[p] if 0 <= p < len(self.simplices) else ()

    def __contains__(self, simplex: Simplex) -> bool:
        return simplex in self._members

    def restrict(self, vertices: Iterable[int]) -> 'SimplicialComplex':
        """Full subcomplex on the given vertices."""
        keep = frozenset(vertices)
        groups = [tuple(s for s in group if all(v in keep for v in s)) for group in self.simplices]
        while groups and not groups[-1]:
            groups.pop()
        return SimplicialComplex(tuple(v for v in self.vertices if v in keep), tuple(groups))


def chain_complex(faces: Mapping[int, FrozenSet[int]], dims: Mapping[int, int],
                  members: Iterable[int]) -> SimplicialComplex:
    """Order complex of the face poset restricted to `members`.

    `faces[c]` lists the proper faces of c; chains ending at each element
    are memoized so every chain is built once.
    """
    members = sorted(set(members), key=lambda c: (dims[c], c))
    keep = set(members)
    ending: Dict[int, List[Simplex]] = {}
    for cell in members:
        chains = [(cell,)]
        for face in sorted(faces[cell] & keep, key=lambda c: (dims[c], c)):
            chains.extend(chain + (cell,) for chain in ending[face])
        ending[cell] = chains
    groups: Dict[int, List[Simplex]] = {}
    for chains in ending.values():
        for chain in chains:
            groups.setdefault(len(chain) - 1, []).append(chain)
    top = max(groups, default=-1)
    simplices = tuple(tuple(sorted(groups.get(p, []))) for p in range(top + 1))
    return SimplicialComplex(tuple(members), simplices)


def _field(coeff: CoeffRing):
    return GF(2) if coeff is CoeffRing.Z2 else QQ


def _cells(K: SimplicialComplex, p: int, excluded: Optional[SimplicialComplex]) -> List[Simplex]:
    if excluded is None:
        return list(K.of_dim(p))
    return [s for s in K.of_dim(p) if s not in excluded]


def boundary_matrix(K: SimplicialComplex, p: int,
                    excluded: Optional[SimplicialComplex] = None) -> DomainMatrix:
    """Integer matrix of d_p: C_p -> C_(p-1), relative to `excluded` when given."""
    cols = _cells(K, p, excluded)
    rows = _cells(K, p - 1, excluded) if p > 0 else []
    row_index = {s: i for i, s in enumerate(rows)}
    entries: Dict[int, Dict[int, object]] = {}
    for j, simplex in enumerate(cols):
        for i in range(len(simplex)):
            r = row_index.get(simplex[:i] + simplex[i + 1:])
            if r is not None:
                entries.setdefault(r, {})[j] = ZZ(-1 if i % 2 else 1)
    return DomainMatrix(entries, (len(rows), len(cols)), ZZ)


def _rank(matrix: DomainMatrix, domain) -> int:
    rows, cols = matrix.shape
    if rows == 0 or cols == 0:
        return 0
    return matrix.convert_to(domain).rank()


def cohomology(K: SimplicialComplex, coeff: CoeffRing,
               excluded: Optional[SimplicialComplex] = None) -> Tuple[List[int], List[List[int]]]:
    """Ranks and Z torsion of H^p(K, excluded), unreduced."""
    domain = _field(coeff)
    top = K.dimension
    counts = [len(_cells(K, p, excluded)) for p in range(top + 1)]
    matrices = {p: boundary_matrix(K, p, excluded) for p in range(1, top + 1)}
    ranks_d = {p: _rank(m, domain) for p, m in matrices.items()}
    ranks = []
    torsion: List[List[int]] = []
    for p in range(top + 1):
        ranks.append(counts[p] - ranks_d.get(p, 0) - ranks_d.get(p + 1, 0))
        if coeff is CoeffRing.Z and p in matrices and 0 not in matrices[p].shape:
            factors = invariant_factors(matrices[p].to_dense())
            torsion.append(sorted(int(f) for f in factors if abs(int(f)) > 1))
        else:
            torsion.append([])
    return ranks, torsion


def _rows(matrix: DomainMatrix) -> List[List[object]]:
    return matrix.to_dense().to_list()


def cocycles(K: SimplicialComplex, p: int, coeff: CoeffRing) -> List[Cochain]:
    """A basis of Z^p(K) over the coefficient field."""
    domain = _field(coeff)
    basis = list(K.of_dim(p))
    if not basis:
        return []
    up = boundary_matrix(K, p + 1)
    if up.shape[1] == 0:
        one = domain.one
        return [{s: one} for s in basis]
    coboundary = up.transpose().convert_to(domain)
    null = coboundary.nullspace()
    out = []
    for row in _rows(null):
        out.append({s: v for s, v in zip(basis, row) if v})
    return out


def coboundaries(K: SimplicialComplex, p: int, coeff: CoeffRing) -> List[Cochain]:
    """Spanning cochains of B^p(K): the rows of d_p."""
    if p == 0:
        return []
    domain = _field(coeff)
    basis = list(K.of_dim(p))
    matrix = boundary_matrix(K, p).convert_to(domain)
    if 0 in matrix.shape:
        return []
    return [{s: v for s, v in zip(basis, row) if v} for row in _rows(matrix)]


def coboundary_of(K: SimplicialComplex, cochain: Cochain, p: int, coeff: CoeffRing) -> Cochain:
    """delta of a p-cochain, as a (p+1)-cochain on K."""
    domain = _field(coeff)
    out: Cochain = {}
    for simplex in K.of_dim(p + 1):
        total = domain.zero
        for i in range(len(simplex)):
            value = cochain.get(simplex[:i] + simplex[i + 1:])
            if value:
                total = total + value if i % 2 == 0 else total - value
        if total:
            out[simplex] = total
    return out


def _matrix(vectors: Sequence[Cochain], basis: Sequence[Simplex], domain) -> DomainMatrix:
    index = {s: i for i, s in enumerate(basis)}
    entries: Dict[int, Dict[int, object]] = {}
    for r, vector in enumerate(vectors):
        for simplex, value in vector.items():
            if value and simplex in index:
                entries.setdefault(r, {})[index[simplex]] = domain.convert(value)
    return DomainMatrix(entries, (len(vectors), len(basis)), domain)


def image_rank(images: Sequence[Cochain], boundaries: Sequence[Cochain],
               basis: Sequence[Simplex], coeff: CoeffRing) -> int:
    """Rank of the span of `images` modulo the span of `boundaries`."""
    domain = _field(coeff)
    if not basis:
        return 0
    combined = _rank(_matrix(list(images) + list(boundaries), basis, domain), domain)
    return combined - _rank(_matrix(list(boundaries), basis, domain), domain)


def restrict(cochain: Cochain, K: SimplicialComplex) -> Cochain:
    return {s: v for s, v in cochain.items() if s in K}
