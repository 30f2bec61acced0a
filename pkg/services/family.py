"""One-parameter families: partition the parameter line so fiber invariants stay constant."""
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, List, Optional, Tuple

from config import Config
from errors import SemilinError
from models.reports import BettiReport, CoeffRing, IntervalPayload, PiecePayload
from services import celldec, cohom, stratal
from services.celldec import Cell, CellKind
from services.qlin import INF, ExtRat
from services.stratal import SemilinearSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParamInterval:
    """An open interval (lo, hi) of Gamma, or a point [lo, lo] of Gamma_infinity.

    lo None stands for -inf; an open interval with hi == INF stops short of inf.
    """
    kind: str
    lo: Optional[ExtRat]
    hi: Optional[ExtRat]

    @staticmethod
    def point(value) -> 'ParamInterval':
        value = ExtRat.of(value)
        return ParamInterval('point', value, value)

    @staticmethod
    def open(lo, hi) -> 'ParamInterval':
        return ParamInterval('open', None if lo is None else ExtRat.of(lo), ExtRat.of(hi))

    @property
    def is_point(self) -> bool:
        return self.kind == 'point'

    def contains(self, value) -> bool:
        value = ExtRat.of(value)
        if self.is_point:
            return value == self.lo
        if value.is_inf:
            return False
        return (self.lo is None or self.lo < value) and value < self.hi

    def sample(self) -> ExtRat:
        """Midpoint, b+1 above the last section, a-1 below the first, the point itself."""
        if self.is_point:
            return self.lo
        if self.lo is None and self.hi.is_inf:
            return ExtRat(Fraction(0))
        if self.lo is None:
            return ExtRat(self.hi.value - 1)
        if self.hi.is_inf:
            return ExtRat(self.lo.value + 1)
        return ExtRat((self.lo.value + self.hi.value) / 2)

    def random_inside(self, rng: random.Random) -> ExtRat:
        if self.is_point:
            return self.lo
        step = Fraction(rng.randint(1, 99), 100)
        if self.lo is None and self.hi.is_inf:
            return ExtRat(Fraction(rng.randint(-50, 50)) + step)
        if self.lo is None:
            return ExtRat(self.hi.value - rng.randint(0, 20) - step)
        if self.hi.is_inf:
            return ExtRat(self.lo.value + rng.randint(0, 20) + step)
        return ExtRat(self.lo.value + (self.hi.value - self.lo.value) * step)

    def split(self, at: ExtRat) -> List['ParamInterval']:
        if self.is_point or not self.contains(at):
            return [self]
        return [ParamInterval.open(self.lo, at), ParamInterval.point(at), ParamInterval.open(at, self.hi)]

    def payload(self) -> IntervalPayload:
        return IntervalPayload(kind=self.kind,
                               lo=None if self.lo is None else str(self.lo),
                               hi=None if self.hi is None else str(self.hi))

    def __str__(self):
        if self.is_point:
            return f"{{{self.lo}}}"
        lo = '-inf' if self.lo is None else str(self.lo)
        return f"({lo}, {self.hi})"


@dataclass(frozen=True)
class FiberRecord:
    pi0: Optional[int]
    betti: Optional[BettiReport] = None
    betti_c: Optional[BettiReport] = None
    diagnostics: Tuple[str, ...] = ()

    def same_invariants(self, other: 'FiberRecord') -> bool:
        def ranks(report):
            return None if report is None else report.ranks
        return (self.pi0 == other.pi0 and ranks(self.betti) == ranks(other.betti)
                and ranks(self.betti_c) == ranks(other.betti_c))


@dataclass(frozen=True)
class FamilyPiece:
    interval: ParamInterval
    record: FiberRecord
    sample: ExtRat
    fiber_cells: int
    certified: bool = False
    diagnostics: Tuple[str, ...] = ()

    def payload(self) -> PiecePayload:
        return PiecePayload(interval=self.interval.payload(), pi0=self.record.pi0,
                            betti=self.record.betti, betti_c=self.record.betti_c,
                            sample=str(self.sample), fiber_cells=self.fiber_cells,
                            certified=self.certified,
                            diagnostics=list(self.record.diagnostics + self.diagnostics))


@dataclass(frozen=True)
class FamilyPartition:
    """Pieces in increasing parameter order, pairwise disjoint and covering Gamma_infinity."""
    pieces: Tuple[FamilyPiece, ...]
    param: int
    coeff: CoeffRing

    def piece_at(self, value) -> FamilyPiece:
        value = ExtRat.of(value)
        for piece in self.pieces:
            if piece.interval.contains(value):
                return piece
        raise ValueError(f"no piece contains {value}")

    def refine(self, points: Iterable[object]) -> 'FamilyPartition':
        """Split open pieces at extra parameters; sub-pieces keep the parent's record."""
        pieces = list(self.pieces)
        for at in sorted({ExtRat.of(p) for p in points}):
            out = []
            for piece in pieces:
                parts = piece.interval.split(at)
                out.extend(replace(piece, interval=part, sample=part.sample()) for part in parts)
            pieces = out
        return FamilyPartition(tuple(pieces), self.param, self.coeff)

    def is_cover(self) -> bool:
        """Consecutive pieces share endpoints and the ends are -inf and the point inf."""
        pieces = self.pieces
        if not pieces or pieces[0].interval.lo is not None or not pieces[-1].interval.is_point:
            return False
        if not pieces[-1].interval.lo.is_inf:
            return False
        for left, right in zip(pieces, pieces[1:]):
            if left.interval.is_point == right.interval.is_point:
                return False
            if left.interval.hi != right.interval.lo:
                return False
        return True


def fiber_record(fiber: SemilinearSet, coeff: CoeffRing, with_cohomology: bool = True) -> FiberRecord:
    components = celldec.connected_components(fiber)
    if not with_cohomology:
        return FiberRecord(pi0=len(components))
    notes = []
    betti = betti_c = None
    if fiber.is_empty():
        empty = BettiReport.of(coeff, [])
        return FiberRecord(pi0=0, betti=empty, betti_c=empty)
    if stratal.is_definably_compact(fiber):
        betti = cohom.betti(fiber, coeff)
    else:
        notes.append("fiber is not definably compact; betti omitted")
    witness = stratal.not_locally_closed_witness(fiber)
    if witness is None:
        betti_c = cohom.betti_c(fiber, coeff)
    else:
        notes.append(f"fiber is not locally closed at {stratal.format_point(witness)}; betti_c omitted")
    return FiberRecord(pi0=len(components), betti=betti, betti_c=betti_c, diagnostics=tuple(notes))


def _interval_of(cell: Cell) -> ParamInterval:
    if cell.kind is CellKind.GRAPH:
        if not cell.graph.is_affine:
            return ParamInterval.point(INF)
        return ParamInterval.point(cell.sample[0])
    lo = None if not cell.lower.is_affine else ExtRat(cell.lower.form.constant)
    hi = INF if not cell.upper.is_affine else ExtRat(cell.upper.form.constant)
    return ParamInterval('open', lo, hi)


def _scan_piece(Zp: SemilinearSet, decomposition, cell: Cell, coeff: CoeffRing,
                with_cohomology: bool, seed: int) -> FamilyPiece:
    interval = _interval_of(cell)
    sample = interval.sample()
    fiber_cells = sum(1 for c in decomposition.cells if c.key[:1] == cell.key)
    try:
        record = fiber_record(stratal.fiber(Zp, 0, sample), coeff, with_cohomology)
    except SemilinError as e:
        logger.error(f"Error computing fiber invariants at {sample}: {e}")
        return FamilyPiece(interval, FiberRecord(pi0=None, diagnostics=(str(e),)), sample, fiber_cells)
    certified, notes = True, []
    if not interval.is_point:
        rng = random.Random(f"{seed}:{interval}")
        for _ in range(Config.RESAMPLES):
            other = interval.random_inside(rng)
            try:
                again = fiber_record(stratal.fiber(Zp, 0, other), coeff, with_cohomology)
            except SemilinError as e:
                again, notes = None, notes + [f"resample at {other} failed: {e}"]
            if again is None or not again.same_invariants(record):
                certified = False
                notes.append(f"fiber invariants at {other} differ from the sample")
    return FamilyPiece(interval, record, sample, fiber_cells, certified, tuple(notes))


def family_scan(Z: SemilinearSet, param: Optional[int] = None, coeff: CoeffRing = CoeffRing.Q,
                with_cohomology: bool = True, seed: Optional[int] = None,
                parallel: Optional[bool] = None) -> FamilyPartition:
    """Partition the parameter coordinate into intervals with constant fiber invariants."""
    coeff = CoeffRing(coeff)
    param = Z.ambient_dim - 1 if param is None else param
    seed = Config.SEED if seed is None else seed
    parallel = Config.PARALLEL if parallel is None else parallel
    order = [param] + [i for i in range(Z.ambient_dim) if i != param]
    Zp = stratal.permute(Z, order)
    decomposition = celldec.decompose([Zp])
    axis = decomposition.projection(1)

    def run(cell):
        return _scan_piece(Zp, decomposition, cell, coeff, with_cohomology, seed)

    if parallel and len(axis) > 1:
        with ThreadPoolExecutor(max_workers=Config.WORKERS) as pool:
            pieces = list(pool.map(run, axis))
    else:
        pieces = [run(cell) for cell in axis]
    logger.info(f"Family scan over x{param}: {len(pieces)} pieces")
    return FamilyPartition(tuple(pieces), param, coeff)


def pi0_scan(Z: SemilinearSet, param: Optional[int] = None, **kwargs) -> FamilyPartition:
    return family_scan(Z, param, with_cohomology=False, **kwargs)
