"""
Recursive-descent parser for the textual notation of the engine.

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '^') unary)*
    unary   := '-' unary | factor
    factor  := rational | symbol ['[' expr ']'] | '(' expr ')'
    section := '[' expr '|' expr ']'

Symbols are x<i>, t<i>, dx<i>, Dx<i>, Dt<i>, e<i>, i<i> and L<i>; the last two
take an optional polynomial argument, i1[x1*x2] being the interior product
along x1*x2*e1. '^' is the wedge product and never a power.
"""

import re
from dataclasses import dataclass

from sympy.polys.domains import QQ

from lib.chiral import TildeUSection
from lib.courant import CourantSection
from lib.supercalc import IOTA, LIE, KahlerOneForm, SuperElement, TildeField
from lib.symcalc import Form, Polynomial, VectorField, _check_index, poly_ring
from lib.vertex import VertexSection

TOKEN_RE = re.compile(
    r"(?P<space>[ \t\r]+)|(?P<newline>\n)|(?P<number>\d+(?:/\d+)?)"
    r"|(?P<symbol>(?:dx|Dx|Dt|x|t|e|i|L)\d+)|(?P<op>[-+*^()\[\]|])"
)
SYMBOL_RE = re.compile(r"(dx|Dx|Dt|x|t|e|i|L)(\d+)")
FACTOR_START = ("number", "symbol", "'('", "'-'")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        suffix = f" (expected {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"line {line}, col {col}: {message}{suffix}")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        match = TOKEN_RE.match(source, pos)
        if match is None:
            raise ParseError(f"unexpected character '{source[pos]}'", line, pos - line_start + 1, ("number", "symbol", "operator"))
        kind = match.lastgroup
        if kind == "newline":
            line, line_start = line + 1, match.end()
        elif kind != "space":
            tokens.append(Token(kind, match.group(), line, pos - line_start + 1))
        pos = match.end()
    tokens.append(Token("end", "", line, pos - line_start + 1))
    return tokens


# --------------------------------------------------
# Syntax tree
# --------------------------------------------------


@dataclass(frozen=True)
class Number:
    value: object
    token: Token


@dataclass(frozen=True)
class Symbol:
    name: str
    index: int
    token: Token
    argument: "Expression | None" = None


@dataclass(frozen=True)
class Negate:
    operand: "Expression"
    token: Token


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "Expression"
    right: "Expression"
    token: Token


@dataclass(frozen=True)
class Section:
    form: "Expression"
    field: "Expression"
    token: Token


Expression = Number | Symbol | Negate | BinaryOp


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.peek()
        if token.text != text or token.kind == "end":
            found = "end of input" if token.kind == "end" else f"'{token.text}'"
            raise ParseError(f"unexpected {found}", token.line, token.col, (f"'{text}'",))
        return self.next()

    def finish(self) -> None:
        token = self.peek()
        if token.kind != "end":
            raise ParseError(f"unexpected '{token.text}'", token.line, token.col, ("'+'", "'-'", "'*'", "'^'", "end of input"))

    def expr(self) -> Expression:
        node = self.term()
        while self.peek().text in ("+", "-") and self.peek().kind == "op":
            op = self.next()
            node = BinaryOp(op.text, node, self.term(), op)
        return node

    def term(self) -> Expression:
        node = self.unary()
        while self.peek().text in ("*", "^") and self.peek().kind == "op":
            op = self.next()
            if op.text == "^" and self.peek().kind == "number":
                raise ParseError("'^' is the wedge product; write powers as repeated '*'", op.line, op.col, ("symbol", "'('"))
            node = BinaryOp(op.text, node, self.unary(), op)
        return node

    def unary(self) -> Expression:
        if self.peek().text == "-" and self.peek().kind == "op":
            token = self.next()
            return Negate(self.unary(), token)
        return self.factor()

    def factor(self) -> Expression:
        token = self.peek()
        if token.kind == "number":
            self.next()
            num, _, den = token.text.partition("/")
            if den and int(den) == 0:
                raise ParseError("zero denominator", token.line, token.col)
            return Number(QQ(int(num), int(den or 1)), token)
        if token.kind == "symbol":
            self.next()
            name, index = SYMBOL_RE.fullmatch(token.text).groups()
            argument = None
            if name in ("i", "L") and self.peek().text == "[":
                self.next()
                argument = self.expr()
                self.expect("]")
            return Symbol(name, int(index), token, argument)
        if token.text == "(":
            self.next()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if token.kind == "end" else f"'{token.text}'"
        raise ParseError(f"unexpected {found}", token.line, token.col, FACTOR_START)

    def section(self) -> Section:
        start = self.expect("[")
        form = self.expr()
        self.expect("|")
        field = self.expr()
        self.expect("]")
        return Section(form, field, start)


def parse(source: str) -> Expression:
    parser = Parser(source)
    node = parser.expr()
    parser.finish()
    return node


def parse_section_syntax(source: str) -> Section:
    parser = Parser(source)
    node = parser.section()
    parser.finish()
    return node


# --------------------------------------------------
# Evaluation
# --------------------------------------------------

Value = SuperElement | TildeUSection | VectorField


def _fail(message: str, token: Token) -> ParseError:
    return ParseError(message, token.line, token.col)


def _coefficient_mul(a: SuperElement, u: TildeUSection) -> TildeUSection:
    """a times the coefficients of u, as in the written form a*c*i1."""
    return TildeUSection(u.n, u.kform.left_mul(a), {key: a * c for key, c in u.tensor.items()})


class Evaluator:
    def __init__(self, n: int):
        self.n = n

    def evaluate(self, node: Expression) -> Value:
        if isinstance(node, Number):
            return SuperElement(self.n, {(): poly_ring(self.n).ground_new(node.value)})
        if isinstance(node, Symbol):
            return self.symbol(node)
        if isinstance(node, Negate):
            return self.evaluate(node.operand).scale(-1)
        left, right = self.evaluate(node.left), self.evaluate(node.right)
        if node.op == "+":
            return self.add(left, right, node.token)
        if node.op == "-":
            return self.add(left, right.scale(-1), node.token)
        if node.op == "^" and not (isinstance(left, SuperElement) and isinstance(right, SuperElement)):
            raise _fail("'^' joins forms only", node.token)
        return self.mul(left, right, node.token)

    def symbol(self, node: Symbol) -> Value:
        n = self.n
        try:
            _check_index(n, node.index)
        except ValueError as e:
            raise _fail(str(e), node.token) from e
        if node.name == "x":
            return SuperElement.even(poly_ring(n).gens[node.index - 1])
        if node.name in ("t", "dx"):
            return SuperElement.odd(n, node.index)
        if node.name == "e":
            return VectorField.frame(n, node.index)
        if node.name in ("Dx", "Dt"):
            return TildeUSection.from_kform(KahlerOneForm.generator(n, node.name[1], node.index))
        coeff = poly_ring(n).one
        if node.argument is not None:
            coeff = self.polynomial(self.evaluate(node.argument), node.token)
        level = IOTA if node.name == "i" else LIE
        return TildeUSection.tensor_term(SuperElement.one(n), TildeField(n, level, VectorField.frame(n, node.index, coeff)))

    def polynomial(self, value: Value, token: Token) -> Polynomial:
        if not isinstance(value, SuperElement) or any(value.terms.keys() - {()}):
            raise _fail("expected a polynomial", token)
        return value.body()

    def add(self, left: Value, right: Value, token: Token) -> Value:
        if type(left) is type(right):
            return left + right
        if isinstance(left, SuperElement) and left.is_zero():
            return right
        if isinstance(right, SuperElement) and right.is_zero():
            return left
        raise _fail(f"cannot add {_kind(left)} and {_kind(right)}", token)

    def mul(self, left: Value, right: Value, token: Token) -> Value:
        if isinstance(left, SuperElement) and isinstance(right, SuperElement):
            return left * right
        if isinstance(left, SuperElement) and isinstance(right, TildeUSection):
            return _coefficient_mul(left, right)
        if isinstance(left, TildeUSection) and isinstance(right, SuperElement) and not left.tensor:
            return TildeUSection.from_kform(left.kform.right_mul(right))
        if isinstance(left, SuperElement) and isinstance(right, VectorField):
            return right.scale(self.polynomial(left, token))
        if isinstance(left, VectorField) and isinstance(right, SuperElement):
            return left.scale(self.polynomial(right, token))
        raise _fail(f"cannot multiply {_kind(left)} by {_kind(right)}", token)


def _kind(value: Value) -> str:
    if isinstance(value, SuperElement):
        return "a function"
    if isinstance(value, VectorField):
        return "a vector field"
    return "a section"


def _value(source: str, n: int) -> tuple[Value, Token]:
    node = parse(source)
    return Evaluator(n).evaluate(node), node.token


def parse_super(source: str, n: int) -> SuperElement:
    value, token = _value(source, n)
    if not isinstance(value, SuperElement):
        raise _fail(f"expected a graded function, got {_kind(value)}", token)
    return value


def parse_poly(source: str, n: int) -> Polynomial:
    value, token = _value(source, n)
    return Evaluator(n).polynomial(value, token)


def parse_form(source: str, n: int, p: int | None = None) -> Form:
    value, token = _value(source, n)
    if not isinstance(value, SuperElement):
        raise _fail(f"expected a form, got {_kind(value)}", token)
    if value.is_zero():
        return Form.zero(n, 0 if p is None else p)
    degrees = set(value.pieces())
    if len(degrees) > 1:
        raise _fail(f"form mixes degrees {sorted(degrees)}", token)
    degree = degrees.pop()
    if p is not None and degree != p:
        raise _fail(f"expected a {p}-form, got a {degree}-form", token)
    return value.to_form(degree)


def parse_field(source: str, n: int) -> VectorField:
    value, token = _value(source, n)
    if isinstance(value, SuperElement) and value.is_zero():
        return VectorField.zero(n)
    if not isinstance(value, VectorField):
        raise _fail(f"expected a vector field, got {_kind(value)}", token)
    return value


def parse_tilde(source: str, n: int) -> TildeUSection:
    value, token = _value(source, n)
    if isinstance(value, SuperElement) and value.is_zero():
        return TildeUSection.zero(n)
    if not isinstance(value, TildeUSection):
        raise _fail(f"expected a section of U~, got {_kind(value)}", token)
    return value


def parse_kahler(source: str, n: int) -> KahlerOneForm:
    section = parse_tilde(source, n)
    if section.tensor:
        raise ParseError("expected a Kahler form, got tensor terms", 1, 1)
    return section.kform


def _section_parts(source: str, n: int) -> tuple[Form, VectorField]:
    node = parse_section_syntax(source)
    evaluator = Evaluator(n)
    alpha, xi = evaluator.evaluate(node.form), evaluator.evaluate(node.field)
    if not isinstance(alpha, SuperElement) or not alpha.is_homogeneous(1):
        raise _fail("the form part of a section must be a 1-form", node.form.token)
    if isinstance(xi, SuperElement) and xi.is_zero():
        xi = VectorField.zero(n)
    if not isinstance(xi, VectorField):
        raise _fail("the field part of a section must be a vector field", node.field.token)
    return alpha.to_form(1), xi


def parse_courant_section(source: str, n: int) -> CourantSection:
    alpha, xi = _section_parts(source, n)
    return CourantSection(alpha, xi)


def parse_vertex_section(source: str, n: int) -> VertexSection:
    alpha, xi = _section_parts(source, n)
    return VertexSection.from_field(xi, alpha)
