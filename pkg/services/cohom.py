"""Cohomology of definably compact sets and compactly supported cohomology of locally closed sets."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from errors import InternalInvariantError, NotCompact, UnsupportedGeometry
from models.reports import BettiReport, CoeffRing
from services import celldec, qlin, simplicial, stratal
from services.celldec import Cell, RegularComplex
from services.qlin import ExtRat
from services.simplicial import SimplicialComplex
from services.stratal import SemilinearSet

logger = logging.getLogger(__name__)


def order_complex(R: RegularComplex, members=None) -> SimplicialComplex:
    """Chains of the face poset, restricted to `members` (all cells by default)."""
    members = range(len(R.cells)) if members is None else members
    return simplicial.chain_complex(R.face_map(), dict(enumerate(R.dims)), members)


def _report(coeff: CoeffRing, ranks: List[int], torsion: List[List[int]]) -> BettiReport:
    return BettiReport.of(coeff, ranks, torsion if coeff is CoeffRing.Z else None)


def complex_for(targets: Sequence[SemilinearSet], roi: SemilinearSet) -> RegularComplex:
    decomposition = celldec.decompose(list(targets), roi.ambient_dim)
    return celldec.refine_to_complex(decomposition, roi)


def betti(Z: SemilinearSet, coeff: CoeffRing = CoeffRing.Q, targets: Sequence[SemilinearSet] = ()) -> BettiReport:
    """Unreduced H^p of a definably compact set."""
    coeff = CoeffRing(coeff)
    if Z.is_empty():
        return BettiReport.of(coeff, [])
    if not stratal.is_definably_compact(Z):
        raise NotCompact("betti needs a closed and bounded set")
    R = complex_for(list(targets) + [Z], Z)
    ranks, torsion = simplicial.cohomology(order_complex(R), coeff)
    return _report(coeff, ranks, torsion)


def betti_c(X: SemilinearSet, coeff: CoeffRing = CoeffRing.Q, full_embedding: bool = False,
            targets: Sequence[SemilinearSet] = ()) -> BettiReport:
    """H^p_c as the relative cohomology of the compact pair built from a completion."""
    coeff = CoeffRing(coeff)
    if X.is_empty():
        return BettiReport.of(coeff, [])
    pair = stratal.compact_pair(X, full_embedding=full_embedding)
    extra = list(targets) if pair.P.ambient_dim == X.ambient_dim else []
    R = complex_for(extra + [pair.P, pair.Q], pair.P)
    K = order_complex(R)
    L = order_complex(R, R.members(pair.Q))
    ranks, torsion = simplicial.cohomology(K, coeff, excluded=L)
    report = _report(coeff, ranks, torsion)
    if len(report.ranks) > pair.X_dim + 1:
        raise InternalInvariantError(
            f"H^p_c nonzero in degree {len(report.ranks) - 1} above dimension {pair.X_dim}")
    return report


def restriction_map_rank(P: SemilinearSet, Q: SemilinearSet, coeff: CoeffRing, degree: int) -> int:
    """Rank of H^degree(P) -> H^degree(Q) induced by the inclusion Q in P."""
    coeff = CoeffRing(coeff)
    if not coeff.is_field:
        raise ValueError("map ranks need field coefficients")
    if Q.is_empty() or P.is_empty():
        return 0
    if not stratal.subset(Q, P) or not stratal.is_closed(Q):
        raise ValueError("Q must be a closed subset of P")
    R = complex_for([P, Q], P)
    K = order_complex(R)
    L = order_complex(R, R.members(Q))
    return _map_rank(K, [L], degree, coeff)


def _map_rank(source: SimplicialComplex, targets: Sequence[SimplicialComplex], degree: int,
              coeff: CoeffRing) -> int:
    """Rank of the restriction H^p(source) -> sum of H^p(target)."""
    basis, boundaries = [], []
    for slot, target in enumerate(targets):
        basis.extend((slot, s) for s in target.of_dim(degree))
        boundaries.extend({(slot, s): v for s, v in b.items()} for b in simplicial.coboundaries(target, degree, coeff))
    images = []
    for z in simplicial.cocycles(source, degree, coeff):
        image = {}
        for slot, target in enumerate(targets):
            for s, v in simplicial.restrict(z, target).items():
                image[(slot, s)] = v
        images.append(image)
    return simplicial.image_rank(images, boundaries, basis, coeff)


@dataclass
class ExactnessReport:
    """Groups and map ranks along the Mayer-Vietoris sequence of X = U cup V."""
    coeff: CoeffRing
    b_x: List[int]
    b_u: List[int]
    b_v: List[int]
    b_uv: List[int]
    restrict_ranks: List[int]
    difference_ranks: List[int]
    connecting_ranks: List[int]
    failures: List[str] = field(default_factory=list)

    @property
    def exact(self) -> bool:
        return not self.failures

    def as_dict(self) -> Dict[str, object]:
        return {
            'exact': self.exact,
            'H_X': self.b_x,
            'H_U': self.b_u,
            'H_V': self.b_v,
            'H_UV': self.b_uv,
            'restrict_ranks': self.restrict_ranks,
            'difference_ranks': self.difference_ranks,
            'connecting_ranks': self.connecting_ranks,
            'failures': self.failures,
        }


def _betti_of(K: SimplicialComplex, coeff: CoeffRing, top: int) -> List[int]:
    ranks, _ = simplicial.cohomology(K, coeff) if K.simplices else ([], [])
    return [ranks[p] if p < len(ranks) else 0 for p in range(top + 1)]


def _connecting_rank(X: SimplicialComplex, U: SimplicialComplex, UV: SimplicialComplex,
                     degree: int, coeff: CoeffRing) -> int:
    """Rank of H^p(U cap V) -> H^(p+1)(X) by the zig-zag through U."""
    images = []
    for z in simplicial.cocycles(UV, degree, coeff):
        lifted = simplicial.coboundary_of(U, z, degree, coeff)
        images.append({s: v for s, v in lifted.items() if s not in UV})
    basis = list(X.of_dim(degree + 1))
    return simplicial.image_rank(images, simplicial.coboundaries(X, degree + 1, coeff), basis, coeff)


def mv_check(X: SemilinearSet, U: SemilinearSet, V: SemilinearSet, coeff: CoeffRing = CoeffRing.Q) -> ExactnessReport:
    """Verify the rank conditions of exactness for closed U, V covering compact X."""
    coeff = CoeffRing(coeff)
    if not coeff.is_field:
        raise ValueError("exactness audit needs field coefficients")
    if not stratal.equals(stratal.union(U, V), X):
        raise ValueError("U and V do not cover X")
    for name, piece in (('X', X), ('U', U), ('V', V)):
        if not stratal.is_definably_compact(piece):
            raise NotCompact(f"{name} is not definably compact")
    UV = stratal.intersect(U, V)
    R = complex_for([X, U, V, UV], X)
    K_X = order_complex(R)
    K_U = order_complex(R, R.members(U))
    K_V = order_complex(R, R.members(V))
    K_UV = order_complex(R, R.members(UV))
    top = max(K_X.dimension, 0)
    report = ExactnessReport(
        coeff=coeff,
        b_x=_betti_of(K_X, coeff, top),
        b_u=_betti_of(K_U, coeff, top),
        b_v=_betti_of(K_V, coeff, top),
        b_uv=_betti_of(K_UV, coeff, top),
        restrict_ranks=[_map_rank(K_X, [K_U, K_V], p, coeff) for p in range(top + 1)],
        difference_ranks=[],
        connecting_ranks=[],
    )
    for p in range(top + 1):
        # (a, b) -> a|UV - b|UV, computed from a basis of Z(U) + Z(V)
        images, basis, boundaries = [], list(K_UV.of_dim(p)), simplicial.coboundaries(K_UV, p, coeff)
        for z in simplicial.cocycles(K_U, p, coeff):
            images.append(simplicial.restrict(z, K_UV))
        for z in simplicial.cocycles(K_V, p, coeff):
            images.append({s: -v for s, v in simplicial.restrict(z, K_UV).items()})
        report.difference_ranks.append(simplicial.image_rank(images, boundaries, basis, coeff))
        report.connecting_ranks.append(_connecting_rank(K_X, K_U, K_UV, p, coeff) if p < top else 0)
    for p in range(top + 1):
        into_x = report.connecting_ranks[p - 1] if p > 0 else 0
        if report.b_x[p] != into_x + report.restrict_ranks[p]:
            report.failures.append(f"not exact at H^{p}(X)")
        if report.b_u[p] + report.b_v[p] != report.restrict_ranks[p] + report.difference_ranks[p]:
            report.failures.append(f"not exact at H^{p}(U)+H^{p}(V)")
        if report.b_uv[p] != report.difference_ranks[p] + report.connecting_ranks[p]:
            report.failures.append(f"not exact at H^{p}(U cap V)")
    logger.debug(f"Mayer-Vietoris audit: {report.as_dict()}")
    return report


def interval_set(a, b) -> SemilinearSet:
    a, b = ExtRat.of(a), ExtRat.of(b)
    if a.is_inf or not a < b:
        raise ValueError("interval needs finite a < b")
    return SemilinearSet.interval(a.value, b, lo_closed=True, hi_closed=True)


@dataclass
class HomotopyReport:
    holds: bool
    betti: Optional[Tuple[BettiReport, BettiReport]]
    betti_c: Tuple[BettiReport, BettiReport]


def homotopy_report(X: SemilinearSet, a, b, coeff: CoeffRing = CoeffRing.Q) -> HomotopyReport:
    """Compare X x [a, b] with X: H^* when X is compact, H^*_c always."""
    coeff = CoeffRing(coeff)
    Y = stratal.product(X, interval_set(a, b))
    pair = None
    if stratal.is_definably_compact(X):
        pair = (betti(Y, coeff), betti(X, coeff))
    compact_support = (betti_c(Y, coeff), betti_c(X, coeff))
    holds = compact_support[0].ranks == compact_support[1].ranks
    if pair is not None:
        holds = holds and pair[0].ranks == pair[1].ranks
    return HomotopyReport(holds=holds, betti=pair, betti_c=compact_support)


def homotopy_check(X: SemilinearSet, a, b, coeff: CoeffRing = CoeffRing.Q) -> bool:
    return homotopy_report(X, a, b, coeff).holds


def collar_model(cell: Cell, t, s) -> SemilinearSet:
    """Compact deformation retract of C minus C_(t,s) for a thick cell."""
    t, s = qlin.rat(t), qlin.rat(s)
    inner = celldec.cell_core(cell, t, s)
    outer = celldec.cell_core(cell, t / 2, 2 * s)
    return stratal.intersect(outer, stratal.closure(stratal.difference(cell.as_set(), inner)))


def complement_table(cell: Cell, t, s, coeff: CoeffRing = CoeffRing.Q) -> BettiReport:
    """H^* of a cell with its core C_(t,s) removed."""
    t, s = qlin.rat(t), qlin.rat(s)
    if cell.dim < 1:
        raise UnsupportedGeometry("complement table needs a cell of positive dimension", cell)
    if not 0 < t < s / 2:
        raise UnsupportedGeometry(f"need 0 < t < s/2, got t={t}, s={s}", cell)
    if not celldec.is_thick(cell, t, s):
        raise UnsupportedGeometry(f"cell {cell.describe()} is thinner than 2t over its core", cell)
    return betti(collar_model(cell, t, s), coeff)


def cell_acyclic(cell: Cell, t, s, coeff: CoeffRing = CoeffRing.Q) -> bool:
    """Every core along the contraction of a cell to a point has the cohomology of a point.

    The core C_(t,s) is the compact model of the cell: it is a deformation
    retract of C once t is small and s large.
    """
    return all(betti(celldec.cell_core(c, t, s), coeff).ranks == [1] for c in celldec.contract_to_point(cell))


def euler_c(X: SemilinearSet) -> int:
    return betti_c(X, CoeffRing.Q).euler


def exactness_of_pair(X: SemilinearSet, coeff: CoeffRing = CoeffRing.Q) -> bool:
    """Rank bookkeeping of the pair sequence: rank H^l_c(X) = ker(H^l(P)->H^l(Q)) + coker(H^(l-1)(P)->H^(l-1)(Q))."""
    coeff = CoeffRing(coeff)
    pair = stratal.compact_pair(X)
    R = complex_for([pair.P, pair.Q], pair.P)
    K = order_complex(R)
    L = order_complex(R, R.members(pair.Q))
    top = max(K.dimension, 0)
    b_p = _betti_of(K, coeff, top + 1)
    b_q = _betti_of(L, coeff, top + 1)
    ranks, _ = simplicial.cohomology(K, coeff, excluded=L)
    rel = [ranks[p] if p < len(ranks) else 0 for p in range(top + 2)]
    maps = [_map_rank(K, [L], p, coeff) if L.simplices else 0 for p in range(top + 2)]
    for l in range(top + 2):
        kernel = b_p[l] - maps[l]
        cokernel = (b_q[l - 1] - maps[l - 1]) if l > 0 else 0
        if rel[l] != kernel + cokernel:
            return False
    return True
