"""Syntax tree of the set-description script language.

Nodes are frozen dataclasses; source spans are carried for diagnostics but
excluded from equality, so a printed and re-parsed script compares equal.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple, Union

INF_NAME = 'inf'


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    offset: int = 0
    length: int = 0


def _span():
    return field(default=None, compare=False, repr=False)


# -- linear terms and formulas ------------------------------------------------

@dataclass(frozen=True)
class Term:
    """coeff * name; name None is a constant, INF_NAME is the literal inf."""
    coeff: Fraction
    name: Optional[str] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class LinExpr:
    terms: Tuple[Term, ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Compare:
    lhs: LinExpr
    rel: str
    rhs: LinExpr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class BoolConst:
    value: bool
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Not:
    body: 'Formula'
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class And:
    left: 'Formula'
    right: 'Formula'
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Or:
    left: 'Formula'
    right: 'Formula'
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Quant:
    kind: str  # 'exists' | 'forall'
    var: str
    body: 'Formula'
    span: Optional[Span] = _span()


Formula = Union[Compare, BoolConst, Not, And, Or, Quant]


# -- set expressions ------------------------------------------------------------

@dataclass(frozen=True)
class Comprehension:
    """{ (x, inf, y) | formula }; None marks an inf position."""
    coords: Tuple[Optional[str], ...]
    body: Formula
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class SetRef:
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class SetUnary:
    op: str  # 'closure' | 'interior'
    arg: 'SetExpr'
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class SetBinary:
    op: str  # 'union' | 'intersect' | 'minus'
    left: 'SetExpr'
    right: 'SetExpr'
    span: Optional[Span] = _span()


SetExpr = Union[Comprehension, SetRef, SetUnary, SetBinary]


# -- declarations and commands ----------------------------------------------

@dataclass(frozen=True)
class SetDecl:
    name: str
    dim: int
    expr: SetExpr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class FamilyDecl:
    name: str
    dim: int
    param: str
    expr: SetExpr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Binding:
    """One coordinate of a cell: a band (lower, upper) or a graph {lower}."""
    var: str
    kind: str  # 'band' | 'graph'
    lower: LinExpr
    upper: Optional[LinExpr] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Command:
    """verb with its arguments as written: names, properties and numbers."""
    verb: str
    args: Tuple[str, ...] = ()
    cell: Tuple[Binding, ...] = ()
    span: Optional[Span] = _span()

    @property
    def target(self) -> str:
        if self.verb == 'table':
            return '[' + ', '.join(b.var for b in self.cell) + ']'
        return self.args[0] if self.args else ''


Item = Union[SetDecl, FamilyDecl, Command]


@dataclass(frozen=True)
class Script:
    items: Tuple[Item, ...] = ()

    @property
    def declarations(self) -> Tuple[Item, ...]:
        return tuple(i for i in self.items if not isinstance(i, Command))

    @property
    def commands(self) -> Tuple[Command, ...]:
        return tuple(i for i in self.items if isinstance(i, Command))
