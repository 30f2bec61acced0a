"""Lexer, parser, printer and loader for the set-description script language."""
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from errors import InfinityArithmeticError, ScriptSemanticError, ScriptSyntaxError
from models.script import (INF_NAME, And, Binding, BoolConst, Command, Compare, Comprehension,
                           FamilyDecl, Formula, LinExpr, Not, Or, Quant, Script, SetBinary,
                           SetDecl, SetExpr, SetRef, SetUnary, Span, Term)
from services import celldec, qlin, stratal
from services.celldec import CellFn
from services.qlin import Atom, LinForm, Quantifier, Region
from services.stratal import SemilinearSet

logger = logging.getLogger(__name__)

KEYWORDS = {
    'set', 'family', 'in', 'by', 'union', 'intersect', 'minus', 'closure', 'interior',
    'not', 'exists', 'forall', 'inf', 'true', 'false',
}
COMMANDS = {'check', 'components', 'betti', 'betti_c', 'closure', 'mv', 'homotopy', 'scan', 'table'}
PROPERTIES = ('open', 'closed', 'locally_closed', 'bounded', 'compact')

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<gpow>G\^)
  | (?P<and>/\\)
  | (?P<or>\\/)
  | (?P<number>\d+(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|[<>=])
  | (?P<sym>[{}()\[\],|;.:+\-*])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: Span


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        column = pos - line_start + 1
        if match is None:
            raise ScriptSyntaxError(f"unexpected character {text[pos]!r}", line, column)
        kind = match.lastgroup
        chunk = match.group()
        if kind != 'ws':
            if kind == 'ident' and chunk in KEYWORDS:
                kind = 'kw'
            tokens.append(Token(kind, chunk, Span(line, column, pos, len(chunk))))
        newlines = chunk.count('\n')
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind('\n') + 1
        pos = match.end()
    tokens.append(Token('eof', '', Span(line, pos - line_start + 1, pos, 0)))
    return tokens


class Parser:
    """Recursive-descent parser producing a Script."""

    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    # -- token helpers --------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str, token: Optional[Token] = None):
        token = token or self.tok
        found = token.text or 'end of input'
        return ScriptSyntaxError(f"{message}, found {found!r}", token.span.line, token.span.column)

    def at(self, *texts: str) -> bool:
        return self.tok.kind != 'eof' and self.tok.text in texts and self.tok.kind not in ('number',)

    def advance(self) -> Token:
        token = self.tok
        self.pos += 1
        return token

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        return self.advance()

    def rational(self) -> Tuple[Fraction, Token]:
        token = self.advance()
        denominator = token.text.partition('/')[2]
        if denominator and int(denominator) == 0:
            raise ScriptSyntaxError(f"zero denominator in {token.text!r}", token.span.line, token.span.column)
        return Fraction(token.text), token

    def name(self) -> Token:
        if self.tok.kind != 'ident':
            raise self.error("expected a name")
        return self.advance()

    def number(self) -> Tuple[str, Span]:
        """Signed rational or inf, kept as written."""
        start = self.tok
        sign = ''
        if self.at('-'):
            self.advance()
            sign = '-'
        if self.at('inf'):
            self.advance()
            return sign + 'inf', start.span
        if self.tok.kind != 'number':
            raise self.error("expected a number")
        token = self.rational()[1]
        return sign + token.text, start.span

    # -- script ---------------------------------------------------------------

    def parse(self) -> Script:
        items = []
        while self.tok.kind != 'eof':
            if self.at('set'):
                items.append(self.set_decl())
            elif self.at('family'):
                items.append(self.family_decl())
            elif self.tok.kind == 'ident' and self.tok.text in COMMANDS or self.at('closure'):
                items.append(self.command())
            else:
                raise self.error("expected a declaration or command")
        return Script(tuple(items))

    def _dimension(self) -> int:
        self.expect('in')
        if self.tok.kind != 'gpow':
            raise self.error("expected 'G^'")
        self.advance()
        if self.tok.kind != 'number' or '/' in self.tok.text:
            raise self.error("expected a dimension")
        return int(self.advance().text)

    def set_decl(self) -> SetDecl:
        start = self.expect('set')
        name = self.name().text
        dim = self._dimension()
        self.expect('=')
        expr = self.set_expr()
        self.expect(';')
        return SetDecl(name, dim, expr, start.span)

    def family_decl(self) -> FamilyDecl:
        start = self.expect('family')
        name = self.name().text
        dim = self._dimension()
        self.expect('by')
        param = self.name().text
        self.expect('=')
        expr = self.set_expr()
        self.expect(';')
        return FamilyDecl(name, dim, param, expr, start.span)

    def command(self) -> Command:
        start = self.advance()
        verb = start.text
        if verb == 'check':
            args = [self.name().text]
            if self.tok.kind == 'ident' and self.tok.text in PROPERTIES:
                args.append(self.advance().text)
        elif verb in ('components', 'betti', 'betti_c', 'closure'):
            args = [self.name().text]
        elif verb == 'mv':
            args = [self.name().text for _ in range(3)]
        elif verb == 'homotopy':
            args = [self.name().text, self.number()[0], self.number()[0]]
        elif verb == 'scan':
            args = [self.name().text]
            self.expect('by')
            args.append(self.name().text)
        else:
            cell = self.cell_spec()
            args = [self.number()[0], self.number()[0]]
            self.expect(';')
            return Command(verb, tuple(args), cell, start.span)
        self.expect(';')
        return Command(verb, tuple(args), (), start.span)

    def cell_spec(self) -> Tuple[Binding, ...]:
        self.expect('[')
        bindings = []
        while True:
            var = self.name()
            self.expect(':')
            if self.at('{'):
                self.advance()
                lower = self.lin_expr()
                self.expect('}')
                bindings.append(Binding(var.text, 'graph', lower, None, var.span))
            else:
                self.expect('(')
                lower = self.lin_expr()
                self.expect(',')
                upper = self.lin_expr()
                self.expect(')')
                bindings.append(Binding(var.text, 'band', lower, upper, var.span))
            if not self.at(','):
                break
            self.advance()
        self.expect(']')
        return tuple(bindings)

    # -- set expressions ------------------------------------------------------

    def set_expr(self) -> SetExpr:
        left = self.set_term()
        while self.at('union', 'intersect', 'minus'):
            op = self.advance()
            right = self.set_term()
            left = SetBinary(op.text, left, right, op.span)
        return left

    def set_term(self) -> SetExpr:
        token = self.tok
        if self.at('closure', 'interior'):
            self.advance()
            return SetUnary(token.text, self.set_term(), token.span)
        if self.at('('):
            self.advance()
            inner = self.set_expr()
            self.expect(')')
            return inner
        if self.at('{'):
            return self.comprehension()
        if token.kind == 'ident':
            self.advance()
            return SetRef(token.text, token.span)
        raise self.error("expected a set expression")

    def comprehension(self) -> Comprehension:
        start = self.expect('{')
        self.expect('(')
        coords = []
        while True:
            if self.at('inf'):
                self.advance()
                coords.append(None)
            else:
                coords.append(self.name().text)
            if not self.at(','):
                break
            self.advance()
        self.expect(')')
        self.expect('|')
        body = self.formula()
        self.expect('}')
        return Comprehension(tuple(coords), body, start.span)

    # -- formulas -------------------------------------------------------------

    def formula(self) -> Formula:
        left = self.conjunction()
        while self.tok.kind == 'or':
            op = self.advance()
            left = Or(left, self.conjunction(), op.span)
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.tok.kind == 'and':
            op = self.advance()
            left = And(left, self.unary(), op.span)
        return left

    def unary(self) -> Formula:
        token = self.tok
        if self.at('not'):
            self.advance()
            return Not(self.unary(), token.span)
        if self.at('exists', 'forall'):
            self.advance()
            var = self.name().text
            self.expect('.')
            return Quant(token.text, var, self.formula(), token.span)
        if self.at('true', 'false'):
            self.advance()
            return BoolConst(token.text == 'true', token.span)
        if self.at('('):
            self.advance()
            inner = self.formula()
            self.expect(')')
            return inner
        lhs = self.lin_expr()
        if self.tok.kind != 'op':
            raise self.error("expected a comparison")
        rel = self.advance().text
        rhs = self.lin_expr()
        return Compare(lhs, rel, rhs, token.span)

    def lin_expr(self) -> LinExpr:
        start = self.tok
        terms = []
        sign = 1
        if self.at('-'):
            self.advance()
            sign = -1
        elif self.at('+'):
            self.advance()
        terms.append(self.term(sign))
        while self.at('+', '-'):
            sign = 1 if self.advance().text == '+' else -1
            terms.append(self.term(sign))
        return LinExpr(tuple(terms), start.span)

    def term(self, sign: int) -> Term:
        token = self.tok
        coeff = Fraction(sign)
        if token.kind == 'number':
            coeff *= self.rational()[0]
            if self.at('*'):
                self.advance()
            elif not (self.tok.kind == 'ident' or self.at('inf')):
                return Term(coeff, None, token.span)
        if self.at('inf'):
            self.advance()
            return Term(coeff, INF_NAME, token.span)
        return Term(coeff, self.name().text, token.span)


def parse(text: str) -> Script:
    return Parser(text).parse()


# ---------------------------------------------------------------------------
# Printer


def _format_coeff(value: Fraction) -> str:
    return qlin.format_rat(value)


def format_lin(expr: LinExpr) -> str:
    parts = []
    for i, term in enumerate(expr.terms):
        coeff = term.coeff
        if i == 0:
            prefix = '-' if coeff < 0 else ''
        else:
            prefix = ' - ' if coeff < 0 else ' + '
        magnitude = abs(coeff)
        if term.name is None:
            body = _format_coeff(magnitude)
        elif magnitude == 1:
            body = term.name
        else:
            body = f"{_format_coeff(magnitude)}*{term.name}"
        parts.append(prefix + body)
    return ''.join(parts)


def format_formula(f: Formula) -> str:
    if isinstance(f, Compare):
        return f"{format_lin(f.lhs)} {f.rel} {format_lin(f.rhs)}"
    if isinstance(f, BoolConst):
        return 'true' if f.value else 'false'
    if isinstance(f, Not):
        return f"not {_wrap(f.body)}"
    if isinstance(f, And):
        return f"{_wrap(f.left, And)} /\\ {_wrap(f.right)}"
    if isinstance(f, Or):
        return f"{_wrap(f.left, Or)} \\/ {_wrap(f.right)}"
    return f"({f.kind} {f.var} . {format_formula(f.body)})"


def _wrap(f: Formula, same=None) -> str:
    text = format_formula(f)
    if isinstance(f, (Compare, BoolConst, Quant)) or (same is not None and isinstance(f, same)):
        return text
    return f"({text})"


def format_set(expr: SetExpr) -> str:
    if isinstance(expr, SetRef):
        return expr.name
    if isinstance(expr, Comprehension):
        coords = ', '.join('inf' if c is None else c for c in expr.coords)
        return f"{{ ({coords}) | {format_formula(expr.body)} }}"
    if isinstance(expr, SetUnary):
        return f"{expr.op} {_wrap_set(expr.arg)}"
    left = format_set(expr.left) if isinstance(expr.left, SetBinary) else _wrap_set(expr.left)
    return f"{left} {expr.op} {_wrap_set(expr.right)}"


def _wrap_set(expr: SetExpr) -> str:
    text = format_set(expr)
    return f"({text})" if isinstance(expr, SetBinary) else text


def format_binding(b: Binding) -> str:
    if b.kind == 'graph':
        return f"{b.var}: {{{format_lin(b.lower)}}}"
    return f"{b.var}: ({format_lin(b.lower)}, {format_lin(b.upper)})"


def format_item(item) -> str:
    if isinstance(item, SetDecl):
        return f"set {item.name} in G^{item.dim} = {format_set(item.expr)};"
    if isinstance(item, FamilyDecl):
        return f"family {item.name} in G^{item.dim} by {item.param} = {format_set(item.expr)};"
    if item.verb == 'table':
        cell = ', '.join(format_binding(b) for b in item.cell)
        return f"table [{cell}] {' '.join(item.args)};"
    if item.verb == 'scan':
        return f"scan {item.args[0]} by {item.args[1]};"
    return ' '.join((item.verb,) + item.args) + ';'


def format_script(script: Script) -> str:
    return '\n'.join(format_item(item) for item in script.items) + '\n'


# ---------------------------------------------------------------------------
# Loader: from syntax to semilinear sets


@dataclass(frozen=True)
class _Var:
    index: Optional[int]  # None when the variable is inf

    @property
    def is_inf(self) -> bool:
        return self.index is None


@dataclass
class Declared:
    value: SemilinearSet
    names: Tuple[Optional[str], ...]
    param: Optional[int] = None


@dataclass
class Environment:
    """Sets and families declared by a script, in declaration order."""
    sets: Dict[str, Declared] = field(default_factory=dict)

    def get(self, name: str) -> Declared:
        return self.sets[name]


def _semantic(message: str, span: Optional[Span]) -> ScriptSemanticError:
    line, column = (span.line, span.column) if span else (0, 0)
    return ScriptSemanticError(message, line, column)


class Compiler:
    """Turns formulas over Gamma_infinity variables into regions, one stratum at a time."""

    def __init__(self, dim: int):
        self.dim = dim

    def _side(self, expr: LinExpr, env: Dict[str, _Var]) -> Tuple[Dict[Optional[str], Fraction], bool]:
        """Net coefficient per name (None for the constant) and whether the literal inf occurs."""
        acc: Dict[Optional[str], Fraction] = {}
        has_inf = False
        for term in expr.terms:
            if term.name == INF_NAME:
                if term.coeff < 0:
                    raise _semantic("subtraction of inf", term.span)
                has_inf = has_inf or term.coeff > 0
                continue
            if term.name is not None and term.name not in env:
                raise _semantic(f"unknown variable {term.name!r}", term.span)
            acc[term.name] = acc.get(term.name, Fraction(0)) + term.coeff
        return acc, has_inf

    def compare(self, node: Compare, env: Dict[str, _Var], scope: frozenset) -> Region:
        lhs, left_inf = self._side(node.lhs, env)
        rhs, right_inf = self._side(node.rhs, env)
        # negative terms move across, so an inf variable lands on the side where its coefficient is positive
        for name in set(lhs) | set(rhs):
            if name is None or not env[name].is_inf:
                continue
            a, b = lhs.get(name, Fraction(0)), rhs.get(name, Fraction(0))
            left_inf = left_inf or a > 0 or b < 0
            right_inf = right_inf or b > 0 or a < 0
        if left_inf or right_inf:
            if left_inf and right_inf:
                truth = node.rel in ('=', '<=', '>=')
            elif left_inf:
                truth = node.rel in ('>', '>=')
            else:
                truth = node.rel in ('<', '<=')
            return Region.top(scope) if truth else Region.empty(scope)
        coeffs: Dict[int, Fraction] = {}
        for side, acc in ((1, lhs), (-1, rhs)):
            for name, coeff in acc.items():
                if name is not None:
                    index = env[name].index
                    coeffs[index] = coeffs.get(index, Fraction(0)) + side * coeff
        form = LinForm.of(coeffs, lhs.get(None, Fraction(0)) - rhs.get(None, Fraction(0)))
        atom = {
            '<': Atom.lt(form), '<=': Atom.le(form), '=': Atom.eq(form),
            '>=': Atom.le(-form), '>': Atom.lt(-form),
        }[node.rel]
        return Region.of_atoms(scope, [atom])

    def formula(self, node: Formula, env: Dict[str, _Var], scope: frozenset, depth: int) -> Region:
        if isinstance(node, Compare):
            return self.compare(node, env, scope)
        if isinstance(node, BoolConst):
            return Region.top(scope) if node.value else Region.empty(scope)
        if isinstance(node, Not):
            return qlin.complement(self.formula(node.body, env, scope, depth))
        if isinstance(node, And):
            return qlin.intersect(self.formula(node.left, env, scope, depth),
                                  self.formula(node.right, env, scope, depth))
        if isinstance(node, Or):
            return qlin.union(self.formula(node.left, env, scope, depth),
                              self.formula(node.right, env, scope, depth))
        fresh = self.dim + depth
        finite_env = dict(env)
        finite_env[node.var] = _Var(fresh)
        body = self.formula(node.body, finite_env, scope | {fresh}, depth + 1)
        quantifier = Quantifier.EXISTS if node.kind == 'exists' else Quantifier.FORALL
        finite = qlin.qe([(quantifier, fresh)], body)
        infinite_env = dict(env)
        infinite_env[node.var] = _Var(None)
        at_inf = self.formula(node.body, infinite_env, scope, depth + 1)
        if quantifier is Quantifier.EXISTS:
            return qlin.union(finite, at_inf)
        return qlin.intersect(finite, at_inf)

    def comprehension(self, node: Comprehension) -> SemilinearSet:
        if len(node.coords) != self.dim:
            raise _semantic(f"tuple has {len(node.coords)} entries in G^{self.dim}", node.span)
        named = [(i, c) for i, c in enumerate(node.coords) if c is not None]
        if len({c for _, c in named}) != len(named):
            raise _semantic("repeated tuple variable", node.span)
        pieces = {}
        for support in stratal.all_supports(len(named)):
            finite = {named[k][0] for k in support}
            env = {c: _Var(i if i in finite else None) for i, c in named}
            scope = frozenset(finite)
            pieces[scope] = self.formula(node.body, env, scope, 0)
        return SemilinearSet.from_pieces(self.dim, pieces)


def _names(expr: SetExpr, env: Environment) -> Tuple[Optional[str], ...]:
    if isinstance(expr, Comprehension):
        return expr.coords
    if isinstance(expr, SetRef):
        return env.get(expr.name).names
    if isinstance(expr, SetUnary):
        return _names(expr.arg, env)
    return _names(expr.left, env)


def evaluate_set(expr: SetExpr, dim: int, env: Environment) -> SemilinearSet:
    try:
        if isinstance(expr, Comprehension):
            return Compiler(dim).comprehension(expr)
        if isinstance(expr, SetRef):
            if expr.name not in env.sets:
                raise _semantic(f"unknown set {expr.name!r}", expr.span)
            value = env.get(expr.name).value
            if value.ambient_dim != dim:
                raise _semantic(f"{expr.name} lives in G^{value.ambient_dim}, expected G^{dim}", expr.span)
            return value
        if isinstance(expr, SetUnary):
            arg = evaluate_set(expr.arg, dim, env)
            return stratal.closure(arg) if expr.op == 'closure' else stratal.interior(arg)
        left = evaluate_set(expr.left, dim, env)
        right = evaluate_set(expr.right, dim, env)
        op = {'union': stratal.union, 'intersect': stratal.intersect, 'minus': stratal.difference}[expr.op]
        return op(left, right)
    except InfinityArithmeticError as e:
        raise _semantic(str(e), expr.span)


def _check_command(cmd: Command, env: Environment):
    names = []
    if cmd.verb in ('check', 'components', 'betti', 'betti_c', 'closure', 'homotopy', 'scan'):
        names = [cmd.args[0]]
    elif cmd.verb == 'mv':
        names = list(cmd.args)
    for name in names:
        if name not in env.sets:
            raise _semantic(f"unknown set {name!r}", cmd.span)
    if cmd.verb == 'mv':
        dims = {env.get(n).value.ambient_dim for n in names}
        if len(dims) > 1:
            raise _semantic("mv arguments live in different dimensions", cmd.span)
    if cmd.verb == 'scan' and cmd.args[1] not in env.get(cmd.args[0]).names:
        raise _semantic(f"{cmd.args[1]!r} is not a coordinate of {cmd.args[0]}", cmd.span)
    if cmd.verb == 'table':
        cell_from_bindings(cmd.cell)


def load(script: Script) -> Environment:
    """Evaluate every declaration and check every command reference."""
    env = Environment()
    for item in script.items:
        if isinstance(item, Command):
            _check_command(item, env)
            continue
        if item.name in env.sets:
            raise _semantic(f"{item.name} is declared twice", item.span)
        value = evaluate_set(item.expr, item.dim, env)
        names = _names(item.expr, env)
        param = None
        if isinstance(item, FamilyDecl):
            if item.param not in names:
                raise _semantic(f"{item.param!r} is not a coordinate of {item.name}", item.span)
            param = names.index(item.param)
        env.sets[item.name] = Declared(value, tuple(names), param)
        logger.debug(f"Declared {item.name} in G^{item.dim}")
    return env


def load_text(text: str) -> Tuple[Script, Environment]:
    script = parse(text)
    return script, load(script)


def _cell_fn(expr: LinExpr, index: Dict[str, int], lower: bool, span) -> CellFn:
    infinite = [t for t in expr.terms if t.name == INF_NAME and t.coeff != 0]
    if infinite:
        if len(expr.terms) != 1:
            raise _semantic("inf bound must stand alone", span)
        if infinite[0].coeff < 0:
            if not lower:
                raise _semantic("-inf is only a lower bound", span)
            return celldec.NEG_INF
        return celldec.POS_INF
    coeffs, constant = {}, Fraction(0)
    for term in expr.terms:
        if term.name is None:
            constant += term.coeff
        elif term.name not in index:
            raise _semantic(f"bound uses {term.name!r}, which is not an earlier finite coordinate", span)
        else:
            coeffs[index[term.name]] = coeffs.get(index[term.name], Fraction(0)) + term.coeff
    return CellFn.affine(LinForm.of(coeffs, constant))


def cell_from_bindings(bindings: Sequence[Binding]):
    """Build the cell of a `table` command."""
    index: Dict[str, int] = {}
    levels = []
    for depth, binding in enumerate(bindings):
        lower = _cell_fn(binding.lower, index, binding.kind == 'band', binding.span)
        upper = _cell_fn(binding.upper, index, False, binding.span) if binding.upper is not None else None
        levels.append((binding.kind, lower, upper))
        if binding.kind == 'band' or lower.is_affine:
            index[binding.var] = depth
    try:
        return celldec.cell_from_levels(levels)
    except Exception as e:
        if isinstance(e, ScriptSemanticError):
            raise
        span = bindings[0].span if bindings else None
        raise _semantic(str(e), span)
