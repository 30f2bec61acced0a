"""Pydantic models for command reports and their JSON envelope."""
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class CoeffRing(str, Enum):
    """Constant coefficient ring for cohomology."""
    Q = 'Q'
    Z = 'Z'
    Z2 = 'Z2'

    @property
    def is_field(self) -> bool:
        return self is not CoeffRing.Z


class BettiReport(BaseModel):
    """Ranks (and Z torsion) of H^p or H^p_c, one entry per degree."""
    model_config = ConfigDict(frozen=True)

    coeff: CoeffRing
    ranks: List[int] = Field(default_factory=list)
    torsion: List[List[int]] = Field(default_factory=list)
    euler: int = 0

    @model_validator(mode='after')
    def check_euler(self):
        if any(r < 0 for r in self.ranks):
            raise ValueError("ranks must be nonnegative")
        expected = sum((-1) ** p * r for p, r in enumerate(self.ranks))
        if self.euler != expected:
            raise ValueError(f"euler {self.euler} does not match ranks {self.ranks}")
        return self

    @classmethod
    def of(cls, coeff: CoeffRing, ranks: List[int], torsion: Optional[List[List[int]]] = None) -> 'BettiReport':
        """Build a report, trimming trailing degrees with no rank and no torsion."""
        ranks = list(ranks)
        torsion = [list(t) for t in (torsion or [])]
        torsion += [[] for _ in range(len(ranks) - len(torsion))]
        ranks += [0] * (len(torsion) - len(ranks))
        while ranks and ranks[-1] == 0 and not torsion[-1]:
            ranks.pop()
            torsion.pop()
        euler = sum((-1) ** p * r for p, r in enumerate(ranks))
        return cls(coeff=coeff, ranks=ranks, torsion=torsion, euler=euler)

    def rank(self, degree: int) -> int:
        return self.ranks[degree] if 0 <= degree < len(self.ranks) else 0


class IntervalPayload(BaseModel):
    """A parameter interval; `lo` None means -inf, "inf" means the top element."""
    kind: str
    lo: Optional[str] = None
    hi: Optional[str] = None


class PiecePayload(BaseModel):
    interval: IntervalPayload
    pi0: Optional[int] = None
    betti: Optional[BettiReport] = None
    betti_c: Optional[BettiReport] = None
    sample: Optional[str] = None
    fiber_cells: Optional[int] = None
    certified: bool = False
    diagnostics: List[str] = Field(default_factory=list)


class CommandReport(BaseModel):
    command: str
    input: str
    ok: bool
    result: Dict[str, Any] = Field(default_factory=dict)
    diagnostics: List[str] = Field(default_factory=list)
    ms: float = 0


class ReportEnvelope(BaseModel):
    version: int = 1
    reports: List[CommandReport] = Field(default_factory=list)
