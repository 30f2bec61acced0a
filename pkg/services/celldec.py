"""Cylindrical cell decompositions of Gamma_infinity^n, regular complexes and components.

Coordinates are lifted in order 0, 1, ..., n-1, so every prefix of a cell
is a cell of the decomposition of the first coordinates. Cells whose
coordinate is infinite are the graphs of the constant function inf.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx

from config import Config
from errors import DimensionMismatch, NotCompact, UnsupportedGeometry
from models.reports import CoeffRing
from services import qlin, simplicial, stratal
from services.qlin import INF, Atom, ExtRat, LinForm, Polyhedron, Region
from services.stratal import SemilinearSet, Support

logger = logging.getLogger(__name__)

CellKey = Tuple[int, ...]


class FnKind(str, Enum):
    AFFINE = 'affine'
    INF = 'inf'
    NEG_INF = '-inf'


@dataclass(frozen=True)
class CellFn:
    """Bound function of a cell: affine in the base coordinates, or a constant end."""
    kind: FnKind
    form: Optional[LinForm] = None

    @staticmethod
    def affine(form: LinForm) -> 'CellFn':
        return CellFn(FnKind.AFFINE, form)

    @property
    def is_affine(self) -> bool:
        return self.kind is FnKind.AFFINE

    def value(self, point: Mapping[int, Fraction]) -> Fraction:
        return self.form.evaluate(point)

    def __str__(self):
        if self.kind is FnKind.AFFINE:
            return str(self.form)
        return self.kind.value


POS_INF = CellFn(FnKind.INF)
NEG_INF = CellFn(FnKind.NEG_INF)


class CellKind(str, Enum):
    ROOT = 'root'
    BAND = 'band'
    GRAPH = 'graph'


@dataclass(frozen=True, eq=False)
class Cell:
    """A cell of Gamma_infinity^(depth+1).

    `atoms` is the full defining conjunction over `support`; `sample` holds
    the finite coordinates of a point of the cell.
    """
    key: CellKey
    depth: int
    kind: CellKind
    support: Support
    atoms: Tuple[Atom, ...]
    sample: Mapping[int, Fraction]
    dim: int
    base: Optional['Cell'] = None
    lower: Optional[CellFn] = None
    upper: Optional[CellFn] = None
    graph: Optional[CellFn] = None

    @property
    def width(self) -> int:
        return self.depth + 1

    @property
    def polyhedron(self) -> Polyhedron:
        return Polyhedron(self.support, self.atoms)

    @property
    def region(self) -> Region:
        return Region(self.support, (self.polyhedron,))

    @property
    def point(self) -> stratal.GPoint:
        return tuple(ExtRat(self.sample[i]) if i in self.support else INF for i in range(self.width))

    def as_set(self) -> SemilinearSet:
        return SemilinearSet.from_pieces(self.width, {self.support: self.region})

    def levels(self) -> List['Cell']:
        chain, cell = [], self
        while cell is not None and cell.kind is not CellKind.ROOT:
            chain.append(cell)
            cell = cell.base
        return list(reversed(chain))

    def describe(self) -> str:
        parts = []
        for level in self.levels():
            x = f"x{level.depth}"
            if level.kind is CellKind.GRAPH:
                parts.append(f"{x} = {level.graph}")
            else:
                parts.append(f"{level.lower} < {x} < {level.upper}")
        return ' ; '.join(parts) or 'point'

    def __repr__(self):
        return f"Cell(key={self.key}, dim={self.dim}, {self.describe()})"


def root_cell() -> Cell:
    return Cell(key=(), depth=-1, kind=CellKind.ROOT, support=frozenset(), atoms=(), sample={}, dim=0)


def _level_atoms(depth: int, kind: CellKind, lower=None, upper=None, graph=None) -> List[Atom]:
    x = LinForm.var(depth)
    if kind is CellKind.GRAPH:
        return [Atom.eq(x - graph.form)] if graph.is_affine else []
    atoms = []
    if lower.is_affine:
        atoms.append(Atom.lt(lower.form - x))
    if upper.is_affine:
        atoms.append(Atom.lt(x - upper.form))
    return atoms


def _band_sample(lower: CellFn, upper: CellFn, point: Mapping[int, Fraction]) -> Fraction:
    if lower.is_affine and upper.is_affine:
        return (lower.value(point) + upper.value(point)) / 2
    if upper.is_affine:
        return upper.value(point) - 1
    if lower.is_affine:
        return lower.value(point) + 1
    return Fraction(0)


def make_band(base: Cell, index: int, lower: CellFn, upper: CellFn) -> Cell:
    depth = base.depth + 1
    support = base.support | {depth}
    sample = dict(base.sample)
    sample[depth] = _band_sample(lower, upper, base.sample)
    atoms = base.atoms + tuple(_level_atoms(depth, CellKind.BAND, lower=lower, upper=upper))
    return Cell(key=base.key + (index,), depth=depth, kind=CellKind.BAND, support=support,
                atoms=atoms, sample=sample, dim=base.dim + 1, base=base, lower=lower, upper=upper)


def make_graph(base: Cell, index: int, h: CellFn) -> Cell:
    depth = base.depth + 1
    sample = dict(base.sample)
    support = base.support
    if h.is_affine:
        support = support | {depth}
        sample[depth] = h.value(base.sample)
    atoms = base.atoms + tuple(_level_atoms(depth, CellKind.GRAPH, graph=h))
    return Cell(key=base.key + (index,), depth=depth, kind=CellKind.GRAPH, support=support,
                atoms=atoms, sample=sample, dim=base.dim, base=base, graph=h)


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Cells of Gamma_infinity^n, organized as a tree by coordinate prefix."""
    ambient_dim: int
    levels: Tuple[Tuple[Cell, ...], ...]
    children: Mapping[CellKey, Tuple[Cell, ...]]
    targets: Tuple[SemilinearSet, ...] = ()

    @property
    def root(self) -> Cell:
        return self.levels[0][0]

    @property
    def cells(self) -> Tuple[Cell, ...]:
        return self.levels[self.ambient_dim]

    def cells_in(self, s: SemilinearSet) -> List[Cell]:
        """Cells whose sample point lies in s; all of them when s is a union of cells."""
        return [c for c in self.cells if s.contains(c.point)]

    def projection(self, k: int) -> Tuple[Cell, ...]:
        """The induced decomposition of the first k coordinates."""
        return self.levels[k]


# ---------------------------------------------------------------------------
# Decomposition


SectionKey = Tuple[int, Support]


def _section(form: LinForm) -> Tuple[int, LinForm]:
    """Solve form = 0 for its largest variable: x_k = section."""
    k = form.max_var
    lead = form.coeff(k)
    return k, form.scale(-1 / lead).without(k)


def _form_key(form: LinForm):
    return (form.coeffs, form.constant)


def _collect_sections(targets: Sequence[SemilinearSet]) -> Dict[SectionKey, Set[LinForm]]:
    sections: Dict[SectionKey, Set[LinForm]] = {}
    for target in targets:
        for support, region in target.pieces.items():
            for poly in region.disjuncts:
                atoms = qlin.simplify_atoms(poly.atoms) or ()
                for atom in atoms:
                    k, section = _section(atom.form)
                    prefix = frozenset(i for i in support if i <= k)
                    sections.setdefault((k, prefix), set()).add(section)
    return sections


def _project_sections(sections: Dict[SectionKey, Set[LinForm]], n: int) -> Dict[SectionKey, Set[LinForm]]:
    """Close the section table under pairwise differences, top level first."""
    for k in range(n - 1, 0, -1):
        for (level, prefix), forms in sorted(sections.items(), key=lambda kv: sorted(kv[0][1])):
            if level != k:
                continue
            ordered = sorted(forms, key=_form_key)
            base = prefix - {k}
            for i, a in enumerate(ordered):
                for b in ordered[i + 1:]:
                    diff = a - b
                    if diff.is_constant:
                        continue
                    m, section = _section(diff)
                    key = (m, frozenset(j for j in base if j <= m))
                    sections.setdefault(key, set()).add(section)
    return sections


def _lift(base: Cell, forms: Iterable[LinForm]) -> List[Cell]:
    values: Dict[Fraction, LinForm] = {}
    for form in sorted(forms, key=_form_key):
        value = form.evaluate(base.sample)
        values.setdefault(value, form)
    ordered = [CellFn.affine(values[v]) for v in sorted(values)]
    bounds = [NEG_INF] + ordered + [POS_INF]
    cells, index = [], 0
    for i in range(len(bounds) - 1):
        cells.append(make_band(base, index, bounds[i], bounds[i + 1]))
        index += 1
        if i + 1 < len(bounds) - 1:
            cells.append(make_graph(base, index, bounds[i + 1]))
            index += 1
    cells.append(make_graph(base, index, POS_INF))
    return cells


def decompose(targets: Sequence[SemilinearSet], ambient_dim: Optional[int] = None) -> Decomposition:
    """Decomposition of Gamma_infinity^n partitioning every target.

    The result depends only on the set of boundary sections, not on the
    order of `targets`.
    """
    if ambient_dim is None:
        if not targets:
            raise ValueError("ambient dimension required when there are no targets")
        ambient_dim = targets[0].ambient_dim
    for target in targets:
        if target.ambient_dim != ambient_dim:
            raise DimensionMismatch(f"target in G^{target.ambient_dim}, expected G^{ambient_dim}")
    sections = _project_sections(_collect_sections(targets), ambient_dim)
    root = root_cell()
    levels: List[Tuple[Cell, ...]] = [(root,)]
    children: Dict[CellKey, Tuple[Cell, ...]] = {}
    for k in range(ambient_dim):
        layer: List[Cell] = []
        for base in levels[-1]:
            forms = sections.get((k, base.support | {k}), ())
            lifted = tuple(_lift(base, forms))
            children[base.key] = lifted
            layer.extend(lifted)
        levels.append(tuple(layer))
    logger.debug(f"Decomposed G^{ambient_dim}: {len(levels[-1])} cells from {len(targets)} targets")
    return Decomposition(ambient_dim, tuple(levels), children, tuple(targets))


def is_partition(decomposition: Decomposition) -> bool:
    """Cells are pairwise disjoint and cover Gamma_infinity^n."""
    cells = decomposition.cells
    n = decomposition.ambient_dim
    for i, a in enumerate(cells):
        for b in cells[i + 1:]:
            if a.support == b.support and not qlin.intersect(a.region, b.region).is_empty():
                return False
    covered = stratal.union_all(n, (c.as_set() for c in cells))
    return stratal.equals(covered, SemilinearSet.full(n))


def is_adapted(decomposition: Decomposition, target: SemilinearSet) -> bool:
    inside = stratal.union_all(decomposition.ambient_dim, (c.as_set() for c in decomposition.cells_in(target)))
    return stratal.equals(inside, target)


# ---------------------------------------------------------------------------
# Closures and meeting cells


def cell_closure(cell: Cell) -> Dict[Support, Region]:
    return stratal.polyhedron_closure(cell.support, cell.polyhedron)


def _prefix_meets(cell: Cell, pieces: Mapping[Support, Region]) -> bool:
    for support, region in pieces.items():
        if frozenset(i for i in support if i < cell.width) != cell.support:
            continue
        if not qlin.intersect(region, cell.region).is_empty():
            return True
    return False


def meeting_cells(decomposition: Decomposition, pieces: Mapping[Support, Region]) -> List[Cell]:
    """Top-level cells meeting the set given by `pieces`, pruning whole subtrees."""
    layer = [decomposition.root]
    for _ in range(decomposition.ambient_dim):
        layer = [child for cell in layer for child in decomposition.children[cell.key]
                 if _prefix_meets(child, pieces)]
    return layer


def _inside(cell: Cell, pieces: Mapping[Support, Region]) -> bool:
    region = pieces.get(cell.support)
    return region is not None and qlin.subset(cell.region, region)


def connected_components(s: SemilinearSet) -> List[SemilinearSet]:
    """Definably connected components of s, as unions of cells."""
    if s.is_empty():
        return []
    decomposition = decompose([s])
    cells = decomposition.cells_in(s)
    inside = {c.key for c in cells}
    graph = nx.Graph()
    graph.add_nodes_from(inside)
    for cell in cells:
        for other in meeting_cells(decomposition, cell_closure(cell)):
            if other.key in inside and other.key != cell.key:
                graph.add_edge(cell.key, other.key)
    by_key = {c.key: c for c in cells}
    components = []
    for keys in sorted(nx.connected_components(graph), key=min):
        pieces: Dict[Support, Region] = {}
        for key in sorted(keys):
            cell = by_key[key]
            pieces[cell.support] = qlin.union(pieces[cell.support], cell.region) if cell.support in pieces else cell.region
        components.append(SemilinearSet.from_pieces(s.ambient_dim, pieces))
    logger.debug(f"{len(components)} components from {len(cells)} cells")
    return components


# ---------------------------------------------------------------------------
# Regular complexes


@dataclass(frozen=True, eq=False)
class RegularComplex:
    """Cells of a compact set with their proper faces; faces[i] indexes into cells."""
    ambient_dim: int
    cells: Tuple[Cell, ...]
    faces: Tuple[FrozenSet[int], ...]

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(c.dim for c in self.cells)

    @property
    def dimension(self) -> int:
        return max(self.dims, default=-1)

    def members(self, s: SemilinearSet) -> FrozenSet[int]:
        """Indices of cells lying in s (s a union of cells)."""
        return frozenset(i for i, c in enumerate(self.cells) if s.contains(c.point))

    def cell_set(self, index: int) -> SemilinearSet:
        return self.cells[index].as_set()

    def face_map(self) -> Dict[int, FrozenSet[int]]:
        return dict(enumerate(self.faces))

    def is_graded(self) -> bool:
        return all(self.cells[f].dim < c.dim for c, fs in zip(self.cells, self.faces) for f in fs)


def _sphere_ranks(d: int) -> List[int]:
    if d == 1:
        return [2]
    return [1] + [0] * (d - 2) + [1]


def audit_boundaries(R: RegularComplex):
    """Every cell's boundary must have the cohomology of a sphere of one dimension less."""
    faces = R.face_map()
    dims = dict(enumerate(R.dims))
    for index, cell in enumerate(R.cells):
        if cell.dim == 0:
            if R.faces[index]:
                raise UnsupportedGeometry(f"point cell {cell.describe()} has faces", cell)
            continue
        boundary = simplicial.chain_complex(faces, dims, R.faces[index])
        ranks, _ = simplicial.cohomology(boundary, CoeffRing.Z2)
        while ranks and ranks[-1] == 0:
            ranks.pop()
        if ranks != _sphere_ranks(cell.dim):
            raise UnsupportedGeometry(
                f"boundary of cell {cell.describe()} has cohomology {ranks}, not a sphere", cell)


def refinement_cap(decomposition: Decomposition) -> int:
    """Round limit for refinement: factor times the square of the initial cell count."""
    start = max(len(decomposition.cells), 1)
    return max(Config.REFINE_FACTOR * start * start, 4)


def refine_to_complex(decomposition: Decomposition, roi: SemilinearSet) -> RegularComplex:
    """Regular complex partitioning the compact set `roi`.

    Re-decomposes with the closures of offending cells added as targets
    until every cell's closure is a union of cells.
    """
    if not stratal.is_definably_compact(roi):
        raise NotCompact("region of interest is not definably compact")
    n = decomposition.ambient_dim
    targets = list(decomposition.targets) + [roi]
    cap = refinement_cap(decomposition)
    previous = -1
    for round_no in range(cap):
        current = decompose(targets, n)
        if len(current.cells) == previous:
            raise UnsupportedGeometry(f"refinement stalled at {previous} cells")
        previous = len(current.cells)
        cells = current.cells_in(roi)
        index = {c.key: i for i, c in enumerate(cells)}
        faces: List[FrozenSet[int]] = []
        pending: List[Dict[Support, Region]] = []
        for cell in cells:
            closure = cell_closure(cell)
            found = set()
            for other in meeting_cells(current, closure):
                if other.key == cell.key:
                    continue
                if other.key not in index or not _inside(other, closure):
                    pending.append(closure)
                    break
                found.add(index[other.key])
            faces.append(frozenset(found))
        logger.debug(f"Refinement round {round_no}: {len(cells)} cells, {len(pending)} pending closures")
        if not pending:
            complex_ = RegularComplex(n, tuple(cells), tuple(faces))
            if not complex_.is_graded():
                raise UnsupportedGeometry("face relation is not graded by dimension")
            if Config.AUDIT_BOUNDARIES:
                audit_boundaries(complex_)
            logger.info(f"Regular complex in G^{n}: {len(cells)} cells after {round_no + 1} rounds")
            return complex_
        targets.extend(SemilinearSet.from_pieces(n, closure) for closure in pending)
    raise UnsupportedGeometry(f"frontier condition not reached after {cap} rounds")


# ---------------------------------------------------------------------------
# Cells built from explicit bounds, cores and contractions


def cell_from_levels(levels: Sequence[Tuple[str, CellFn, Optional[CellFn]]]) -> Cell:
    """Build a cell from per-coordinate ('band', f, g) or ('graph', h, None) entries.

    Bounds may only use earlier finite coordinates; f < g must hold on the base.
    """
    cell = root_cell()
    for depth, (kind, first, second) in enumerate(levels):
        for fn in (first, second):
            if fn is not None and fn.is_affine and not fn.form.variables <= cell.support:
                raise UnsupportedGeometry(f"bound {fn} at x{depth} uses coordinates outside the base", cell)
        if kind == CellKind.GRAPH.value:
            if first.kind is FnKind.NEG_INF:
                raise UnsupportedGeometry(f"graph of -inf at x{depth}", cell)
            cell = make_graph(cell, 0, first)
            continue
        if first.kind is FnKind.INF or second.kind is FnKind.NEG_INF:
            raise UnsupportedGeometry(f"empty band at x{depth}", cell)
        if first.is_affine and second.is_affine:
            gap = Atom.le(second.form - first.form)
            if not qlin.intersect(cell.region, Region.of_atoms(cell.support, [gap])).is_empty():
                raise UnsupportedGeometry(f"band at x{depth} needs {first} < {second} on its base", cell)
        cell = make_band(cell, 0, first, second)
    return cell


def _in_nonnegative_orthant(cell: Cell) -> bool:
    bound = stratal.lower_bound(cell.as_set())
    return bound is not None and bound >= 0


def _conjoin(polys: List[Tuple[Atom, ...]], options: List[List[Atom]]) -> List[Tuple[Atom, ...]]:
    return [p + tuple(option) for p in polys for option in options]


def cell_core(cell: Cell, t, s) -> SemilinearSet:
    """The closed bounded core C_(t,s) of a cell inside [0, inf]^m."""
    t, s = qlin.rat(t), qlin.rat(s)
    if t <= 0 or s <= 0:
        raise ValueError("core parameters must be positive")
    if not _in_nonnegative_orthant(cell):
        raise UnsupportedGeometry(f"cell {cell.describe()} is not inside [0, inf]^{cell.width}", cell)
    polys: List[Tuple[Atom, ...]] = [()]
    for level in cell.levels():
        x = LinForm.var(level.depth)
        if level.kind is CellKind.GRAPH:
            if level.graph.is_affine:
                polys = _conjoin(polys, [[Atom.eq(x - level.graph.form)]])
            continue
        f, g = level.lower, level.upper
        if not f.is_affine:
            raise UnsupportedGeometry(f"band at x{level.depth} is unbounded below", cell)
        if g.is_affine:
            wide = [Atom.le(f.form.shift(t) - x), Atom.le(x - g.form.shift(-t))]
            thin = [Atom.le(g.form - f.form - LinForm.const(2 * t)),
                    Atom.eq(x.scale(2) - f.form - g.form)]
            polys = _conjoin(polys, [wide, thin])
        else:
            gamma = min(s / 2, t)
            polys = _conjoin(polys, [[Atom.le(f.form.shift(gamma) - x),
                                      Atom.le(x - f.form.shift(s - gamma))]])
    region = Region(cell.support, tuple(Polyhedron(cell.support, p) for p in polys))
    return SemilinearSet.from_pieces(cell.width, {cell.support: region})


def is_thick(cell: Cell, t, s) -> bool:
    """Every finite band is at least 2t wide over the core of its base."""
    t = qlin.rat(t)
    for level in cell.levels():
        if level.kind is not CellKind.BAND or not level.upper.is_affine or not level.lower.is_affine:
            continue
        base_core = cell_core(level.base, t, s) if level.base.kind is not CellKind.ROOT else None
        narrow = Atom.lt(level.upper.form - level.lower.form - LinForm.const(2 * t))
        region = Region.of_atoms(level.base.support, [narrow])
        if base_core is not None:
            region = qlin.intersect(region, base_core.region(level.base.support))
        if not region.is_empty():
            return False
    return True


def contraction_target(cell: Cell) -> Cell:
    """The graph cell onto which the top-most band of `cell` retracts."""
    chain = cell.levels()
    band_at = max((i for i, c in enumerate(chain) if c.kind is CellKind.BAND), default=None)
    if band_at is None:
        return cell
    band = chain[band_at]
    f, g = band.lower, band.upper
    if f.is_affine and g.is_affine:
        h = (f.form + g.form).scale(Fraction(1, 2))
    elif f.is_affine:
        h = f.form.shift(1)
    elif g.is_affine:
        h = g.form.shift(-1)
    else:
        h = LinForm.const(0)
    shape = []
    for i, level in enumerate(chain):
        if i == band_at:
            shape.append((CellKind.GRAPH.value, CellFn.affine(h), None))
        elif level.kind is CellKind.GRAPH:
            shape.append((CellKind.GRAPH.value, level.graph, None))
        else:
            shape.append((CellKind.BAND.value, level.lower, level.upper))
    return cell_from_levels(shape)


def contract_to_point(cell: Cell) -> List[Cell]:
    """Successive retraction targets, ending in a point cell."""
    chain = [cell]
    while chain[-1].dim > 0:
        chain.append(contraction_target(chain[-1]))
    return chain
