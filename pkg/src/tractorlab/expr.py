"""Small arithmetic expression language for metric components and scalar fields.

Grammar (loosest binding first):
    expr   := term  (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' int)*            # integer exponents only
    atom   := NUMBER | COORD | FUNC '(' expr ')' | '(' expr ')'

Coordinates are spelled x0, x1, ...; functions are exp, ln, sin, cos, sqrt.
`parse` and `to_string` round-trip: printing a tree and reparsing yields a
structurally identical tree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .jets import Jet, JetDomainError

FUNCTIONS = ("exp", "ln", "sin", "cos", "sqrt")


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    pass


class ExprEvalError(ExprError):
    """Domain violation during evaluation, tagged with the offending subexpression."""


# -- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Coord:
    index: int


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*', '/'
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class Call:
    name: str
    arg: object


# -- parsing -----------------------------------------------------------------


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, message, offset=None):
        raise ExprSyntaxError(message, self.pos if offset is None else offset)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def parse(self):
        node = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            self.error(f"unexpected input {self.text[self.pos]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek() == "-":
            self.pos += 1
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        while self.peek() == "^":
            self.pos += 1
            node = Pow(node, self.int_literal())
        return node

    def int_literal(self):
        self.skip_ws()
        start = self.pos
        if self.peek() == "-":
            self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start or self.text[start:self.pos] == "-":
            self.error("expected integer exponent", start)
        if self.pos < len(self.text) and self.text[self.pos] == ".":
            self.error("exponent must be an integer", start)
        return int(self.text[start:self.pos])

    def atom(self):
        ch = self.peek()
        if ch == "":
            self.error("unexpected end of input")
        if ch == "(":
            self.pos += 1
            node = self.expr()
            self.expect(")")
            return node
        if ch.isdigit() or ch == ".":
            return self.number()
        if ch.isalpha() or ch == "_":
            return self.identifier()
        self.error(f"unexpected character {ch!r}")

    def number(self):
        start = self.pos
        text = self.text
        while self.pos < len(text) and (text[self.pos].isdigit() or text[self.pos] == "."):
            self.pos += 1
        if self.pos < len(text) and text[self.pos] in "eE":
            mark = self.pos
            self.pos += 1
            if self.pos < len(text) and text[self.pos] in "+-":
                self.pos += 1
            if self.pos < len(text) and text[self.pos].isdigit():
                while self.pos < len(text) and text[self.pos].isdigit():
                    self.pos += 1
            else:
                self.pos = mark  # 'e' belonged to something else
        try:
            return Const(float(text[start:self.pos]))
        except ValueError:
            self.error(f"invalid number {text[start:self.pos]!r}", start)

    def identifier(self):
        start = self.pos
        text = self.text
        while self.pos < len(text) and (text[self.pos].isalnum() or text[self.pos] == "_"):
            self.pos += 1
        name = text[start:self.pos]
        if name in FUNCTIONS:
            self.expect("(")
            arg = self.expr()
            if self.peek() == ",":
                raise ExprSyntaxError(f"{name} takes exactly one argument", self.pos)
            self.expect(")")
            return Call(name, arg)
        if name.startswith("x") and name[1:].isdigit():
            return Coord(int(name[1:]))
        raise UnknownIdentifierError(f"unknown identifier {name!r}", start)


def parse(text: str):
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text).parse()


# -- printing ----------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "pow": 4, "atom": 5}


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    if isinstance(node, Pow):
        return _PREC["pow"]
    return _PREC["atom"]


def _fmt_const(value):
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def to_string(node, _ctx=0) -> str:
    if isinstance(node, Const):
        # negative literals never come out of the parser; print via Neg form
        s = _fmt_const(abs(node.value))
        if node.value < 0:
            return f"(-{s})" if _ctx > _PREC["neg"] else f"-{s}"
        return s
    if isinstance(node, Coord):
        return f"x{node.index}"
    if isinstance(node, Call):
        return f"{node.name}({to_string(node.arg)})"
    if isinstance(node, Neg):
        inner = to_string(node.operand, _PREC["neg"])
        s = f"-{inner}"
        return f"({s})" if _ctx > _PREC["neg"] else s
    if isinstance(node, Pow):
        base = to_string(node.base, _PREC["pow"])
        return f"{base}^{node.exponent}"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = to_string(node.left, p)
        right = to_string(node.right, p + 1)
        s = f"{left} {node.op} {right}"
        return f"({s})" if _ctx > p else s
    raise TypeError(f"not an expression node: {node!r}")


# -- evaluation --------------------------------------------------------------


def evaluate(node, point, order: int) -> Jet:
    """Jet of the denoted function at `point`, to the requested order."""
    n = len(point)

    def rec(nd) -> Jet:
        if isinstance(nd, Const):
            return jets.lift_constant(nd.value, n, order)
        if isinstance(nd, Coord):
            if nd.index >= n:
                raise ExprError(f"coordinate x{nd.index} out of range for dimension {n}")
            return jets.lift_coordinate(nd.index, point, order)
        if isinstance(nd, Neg):
            return -rec(nd.operand)
        if isinstance(nd, Pow):
            return rec(nd.base) ** nd.exponent
        if isinstance(nd, Call):
            arg = rec(nd.arg)
            fn = {"exp": jets.exp, "ln": jets.log, "sin": jets.sin,
                  "cos": jets.cos, "sqrt": jets.sqrt}[nd.name]
            try:
                return fn(arg)
            except JetDomainError as exc:
                raise ExprEvalError(f"{exc} in subexpression {to_string(nd)!r}") from exc
        if isinstance(nd, BinOp):
            left, right = rec(nd.left), rec(nd.right)
            if nd.op == "+":
                return left + right
            if nd.op == "-":
                return left - right
            if nd.op == "*":
                return left * right
            try:
                return left / right
            except JetDomainError as exc:
                raise ExprEvalError(f"{exc} in subexpression {to_string(nd)!r}") from exc
        raise TypeError(f"not an expression node: {nd!r}")

    return rec(node)


# -- polynomial fast path ------------------------------------------------------


class _NotPolynomial(Exception):
    pass


def extract_polynomial(node, max_terms=4096):
    """Coefficient dict {multi-index: c} if the tree is polynomial, else None.

    Handles Const/Coord, +, -, *, Neg, integer Pow >= 0, and division by a
    constant; anything else falls back to generic jet evaluation.
    """

    def dim(nd):
        if isinstance(nd, Coord):
            return nd.index + 1
        if isinstance(nd, BinOp):
            return max(dim(nd.left), dim(nd.right))
        if isinstance(nd, (Neg,)):
            return dim(nd.operand)
        if isinstance(nd, Pow):
            return dim(nd.base)
        if isinstance(nd, Call):
            return dim(nd.arg)
        return 0

    n = dim(node)

    def mul_dicts(a, b):
        out = {}
        for ka, va in a.items():
            for kb, vb in b.items():
                k = tuple(x + y for x, y in zip(ka, kb))
                out[k] = out.get(k, 0.0) + va * vb
        if len(out) > max_terms:
            raise _NotPolynomial
        return out

    def rec(nd):
        if isinstance(nd, Const):
            return {(0,) * n: nd.value}
        if isinstance(nd, Coord):
            return {tuple(1 if i == nd.index else 0 for i in range(n)): 1.0}
        if isinstance(nd, Neg):
            return {k: -v for k, v in rec(nd.operand).items()}
        if isinstance(nd, Pow):
            if nd.exponent < 0:
                raise _NotPolynomial
            out = {(0,) * n: 1.0}
            base = rec(nd.base)
            for _ in range(nd.exponent):
                out = mul_dicts(out, base)
            return out
        if isinstance(nd, BinOp):
            if nd.op == "/":
                if isinstance(nd.right, Const) and nd.right.value != 0:
                    return {k: v / nd.right.value for k, v in rec(nd.left).items()}
                raise _NotPolynomial
            left, right = rec(nd.left), rec(nd.right)
            if nd.op == "*":
                return mul_dicts(left, right)
            out = dict(left)
            sign = 1.0 if nd.op == "+" else -1.0
            for k, v in right.items():
                out[k] = out.get(k, 0.0) + sign * v
            return out
        raise _NotPolynomial

    try:
        coeffs = rec(node)
    except _NotPolynomial:
        return None
    return {k: v for k, v in coeffs.items() if v != 0.0} or {(0,) * n: 0.0}


class PolynomialEvaluator:
    """Vectorized Taylor shift: jet coefficients of a fixed polynomial at a point.

    c'_beta(x0) = sum_{alpha >= beta} c_alpha prod_i C(alpha_i, beta_i) x0^(alpha-beta).
    """

    def __init__(self, coeffs):
        import math as _math

        items = sorted(coeffs.items())
        self.n = len(items[0][0])
        self.degree = max(sum(a) for a, _ in items)
        self.alphas = np.array([a for a, _ in items], dtype=int)
        self.c = np.array([v for _, v in items])
        self._tables = {}
        self._binom = _math.comb

    def _table(self, alg):
        key = (alg.n, alg.order)
        if key not in self._tables:
            alphas = np.zeros((len(self.alphas), alg.n), dtype=int)
            alphas[:, : self.n] = self.alphas
            rows = []
            for beta in alg.indices:
                beta_arr = np.asarray(beta)
                idx = np.nonzero(np.all(alphas >= beta_arr, axis=1))[0]
                gam = alphas[idx] - beta_arr
                bin_prod = np.array([
                    np.prod([self._binom(int(a), int(b)) for a, b in zip(alphas[i], beta)])
                    for i in idx
                ], dtype=float)
                rows.append((idx, gam, bin_prod * self.c[idx]))
            self._tables[key] = rows
        return self._tables[key]

    def coeffs_at(self, point, alg):
        if alg.n < self.n:
            raise ExprError(f"polynomial uses x{self.n - 1} but dimension is {alg.n}")
        powers = np.ones((alg.n, self.degree + 1))
        x = np.asarray(point, dtype=float)
        for k in range(1, self.degree + 1):
            powers[:, k] = powers[:, k - 1] * x
        out = np.zeros(alg.ncoef)
        cols = np.arange(alg.n)
        for b, (idx, gam, weight) in enumerate(self._table(alg)):
            if len(idx):
                out[b] = float(weight @ np.prod(powers[cols, gam], axis=1))
        return out


def compile_scalar(node):
    """(point, order) -> coefficient vector; polynomial trees take the fast path."""
    coeffs = extract_polynomial(node)
    if coeffs is not None:
        evaluator = PolynomialEvaluator(coeffs)

        def fast(point, order):
            alg = jets.algebra(len(point), order)
            return evaluator.coeffs_at(point, alg)

        return fast

    def generic(point, order):
        return evaluate(node, point, order).coeffs

    return generic


# -- helpers used by the metric catalog --------------------------------------


def const(value):
    """Parser-canonical constant: negatives are wrapped as Neg(Const(+v))."""
    value = float(value)
    if value < 0:
        return Neg(Const(-value))
    return Const(value)


def coord(i) -> Coord:
    return Coord(i)


def add(*nodes):
    out = nodes[0]
    for nd in nodes[1:]:
        out = BinOp("+", out, nd)
    return out


def mul(*nodes):
    out = nodes[0]
    for nd in nodes[1:]:
        out = BinOp("*", out, nd)
    return out


def monomial(coeff, alpha):
    """coeff * x0^a0 * x1^a1 * ... as an expression tree."""
    factors = []
    for i, a in enumerate(alpha):
        if a == 1:
            factors.append(Coord(i))
        elif a > 1:
            factors.append(Pow(Coord(i), a))
    if not factors:
        return const(coeff)
    if coeff == 1.0:
        return mul(*factors)
    return mul(const(coeff), *factors)


def polynomial(coeffs: dict) -> object:
    """Expression tree for sum_alpha c_alpha x^alpha (deterministic term order)."""
    terms = [monomial(c, alpha) for alpha, c in sorted(coeffs.items()) if c != 0.0]
    if not terms:
        return const(0.0)
    return add(*terms)
