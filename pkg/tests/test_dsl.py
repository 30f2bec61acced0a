"""Tests for the script language: parsing, printing and loading into sets."""
import pytest

from errors import ScriptSemanticError, ScriptSyntaxError
from models.script import Command, Compare, Quant, SetDecl
from services import parser, stratal
from services.qlin import INF
from services.stratal import SemilinearSet

SCRIPT = """
# a segment, a ray at infinity and a family
set S in G^1 = { (x) | 0 <= x /\\ x <= 1 };
set R in G^2 = { (x, inf) | x >= 0 };
set P in G^1 = { (x) | exists y . x = y + y };
set T in G^1 = closure { (x) | 0 < x /\\ x < 1 } minus { (x) | x = 0 \\/ not (x <= 1/2) };
family F in G^2 by w = { (x, w) | 0 <= x /\\ x <= w };
check S;
check S compact;
components S;
betti S;
betti_c T;
closure R;
mv S S S;
homotopy S -1 1/2;
scan F by w;
table [x: (0, inf), y: (0, inf), z: {0}] 1 3;
"""


def load(text):
    return parser.load_text(text)[1]


def test_parse_script_structure():
    script = parser.parse(SCRIPT)
    assert [d.name for d in script.declarations] == ['S', 'R', 'P', 'T', 'F']
    verbs = [c.verb for c in script.commands]
    assert verbs == ['check', 'check', 'components', 'betti', 'betti_c', 'closure',
                     'mv', 'homotopy', 'scan', 'table']
    homotopy = script.commands[7]
    assert homotopy.args == ('S', '-1', '1/2')
    table = script.commands[-1]
    assert [b.kind for b in table.cell] == ['band', 'band', 'graph']
    assert table.args == ('1', '3')
    assert table.target == '[x, y, z]'


def test_formula_precedence():
    decl = parser.parse("set A in G^1 = { (x) | exists y . x < y /\\ y < 1 };").items[0]
    assert isinstance(decl, SetDecl)
    body = decl.expr.body
    assert isinstance(body, Quant) and body.var == 'y'
    assert not isinstance(body.body, Compare)


def test_coefficients():
    decl = parser.parse("set A in G^2 = { (x, y) | 2x - 1/2*y + 3 <= -x };").items[0]
    lhs = decl.expr.body.lhs
    assert [(str(t.coeff), t.name) for t in lhs.terms] == [('2', 'x'), ('-1/2', 'y'), ('3', None)]


def test_print_round_trip():
    script = parser.parse(SCRIPT)
    printed = parser.format_script(script)
    assert parser.parse(printed) == script
    assert parser.format_script(parser.parse(printed)) == printed


def test_syntax_error_location():
    text = "set A in G^1 = { (x) | x = 0 };\nset S in G^1 = { (x) | x <= };"
    with pytest.raises(ScriptSyntaxError) as caught:
        parser.parse(text)
    assert (caught.value.line, caught.value.column) == (2, 29)


def test_unexpected_character():
    with pytest.raises(ScriptSyntaxError) as caught:
        parser.parse("set S in G^1 = { (x) | x ? 0 };")
    assert caught.value.column == 26


def test_zero_denominator_is_a_syntax_error():
    with pytest.raises(ScriptSyntaxError) as caught:
        parser.parse("set S in G^1 = { (x) | x <= 1/0 };")
    assert (caught.value.line, caught.value.column) == (1, 29)
    assert "zero denominator" in str(caught.value)
    with pytest.raises(ScriptSyntaxError):
        parser.parse("set S in G^1 = { (x) | 0 <= x };\nhomotopy S 0 -2/0;")


@pytest.mark.parametrize('text, message', [
    ("set S in G^1 = T;", "unknown set"),
    ("set S in G^2 = { (x) | x = 0 };", "tuple has 1 entries"),
    ("set S in G^1 = { (x) | x <= 0 - inf };", "subtraction of inf"),
    ("set S in G^2 = { (x, x) | x = 0 };", "repeated tuple variable"),
    ("set S in G^1 = { (x) | y = 0 };", "unknown variable"),
    ("set A in G^1 = { (x) | x = 0 };\nset B in G^2 = A;", "expected G^2"),
    ("set A in G^1 = { (x) | x = 0 };\nset A in G^1 = A;", "declared twice"),
    ("set F in G^2 = { (x, w) | x <= w };\nscan F by z;", "not a coordinate"),
    ("betti Nope;", "unknown set"),
    ("table [x: (0, inf), y: (z, inf)] 1 3;", "not an earlier finite coordinate"),
])
def test_semantic_errors(text, message):
    with pytest.raises(ScriptSemanticError) as caught:
        load(text)
    assert message in str(caught.value)
    assert caught.value.line >= 1


def test_declared_sets():
    env = load(SCRIPT)
    segment = SemilinearSet.interval(0, 1, lo_closed=True, hi_closed=True)
    assert stratal.equals(env.get('S').value, segment)
    R = env.get('R').value
    assert R.contains([0, INF]) and R.contains([INF, INF])
    assert not R.contains([0, 0]) and not R.contains([-1, INF])
    assert stratal.equals(env.get('P').value, SemilinearSet.full(1))
    half = SemilinearSet.interval(0, '1/2', hi_closed=True)
    assert stratal.equals(env.get('T').value, half)
    assert env.get('F').param == 1
    assert env.get('F').names == ('x', 'w')


def test_infinite_sides_compare():
    env = load("set Q in G^1 = { (x) | x + 1 <= x };\n"
               "set G in G^1 = { (x) | x < inf };\n"
               "set U in G^1 = { (x) | forall y . y <= x };")
    assert stratal.equals(env.get('Q').value, SemilinearSet.point([INF]))
    assert stratal.equals(env.get('G').value, SemilinearSet.interval(None, INF))
    assert stratal.equals(env.get('U').value, SemilinearSet.point([INF]))


def test_cell_from_bindings():
    script = parser.parse("table [x: (0, inf), y: (0, x), z: {inf}] 1 3;")
    cmd = script.items[0]
    assert isinstance(cmd, Command)
    cell = parser.cell_from_bindings(cmd.cell)
    assert cell.dim == 2
    assert cell.support == frozenset({0, 1})


SYNTAX_CASES = [
    "set A in G^1 = { (x) | x = 0 };\nset S in G^1 = { (x) | x <= };",
    "set S in G^1 = { (x) | x ? 0 };",
    "set S in G^1 = { (x) | x <= 1/0 };",
    "set S in G^1 = { (x) | x <= 1 }",
    "\n\nbetti",
]

SEMANTIC_CASES = [
    "set S in G^1 = T;",
    "set S in G^1 = { (x) | x <= 0 - inf };",
    "set S in G^1 = { (x) | y = 0 };",
    "set A in G^1 = { (x) | x = 0 };\nset A in G^1 = A;",
    "set F in G^2 = { (x, w) | x <= w };\nscan F by z;",
    "table [x: (0, inf), y: (z, inf)] 1 3;",
]


@pytest.mark.parametrize('text', SYNTAX_CASES + SEMANTIC_CASES)
def test_error_positions_fall_inside_the_text(text):
    with pytest.raises((ScriptSyntaxError, ScriptSemanticError)) as caught:
        load(text)
    lines = text.split('\n')
    line, column = caught.value.line, caught.value.column
    assert 1 <= line <= len(lines)
    assert 1 <= column <= len(lines[line - 1]) + 1
    assert str(caught.value).startswith(f"{line}:{column}:")


def test_negative_inf_variable_moves_across():
    env = load("set D in G^2 = { (x, w) | x - w <= 0 };\n"
               "set E in G^2 = { (x, w) | x <= w };")
    D = env.get('D').value
    assert stratal.equals(D, env.get('E').value)
    assert D.contains([0, INF]) and not D.contains([INF, 0])
