"""Parser and evaluator for scalar/matrix expressions in z, t, x, y.

Grammar (whitespace insignificant)::

    matrix := '[' row (',' row)* ']'    |  expr          (a bare expr is 1x1)
    row    := '[' expr (',' expr)* ']'
    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := base ('^' ['-'] integer)?
    base   := number | 'i' | 'pi' | variable | '(' expr ')' | 'exp' '(' expr ')'

Evaluation is vectorized: variables may be bound to arrays and the result then
carries the broadcast shape in front of the matrix axes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from mapgroups.errors import EvaluationError, ParseError, PoleError

VARIABLES = ("z", "t", "x", "y")

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),\[\]])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str):
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "ws":
            chunk = m.group()
            if "\n" in chunk:
                line += chunk.count("\n")
                line_start = pos + chunk.rfind("\n") + 1
        else:
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("end", "", line, pos - line_start + 1))
    return tokens


# ------------------------------------------------------------------------ AST


class Node:
    prec = 10

    def evaluate(self, env):
        raise NotImplementedError

    def to_text(self) -> str:
        raise NotImplementedError

    def variables(self) -> set:
        return set()


@dataclass(frozen=True)
class Num(Node):
    value: float

    def evaluate(self, env):
        return complex(self.value)

    def to_text(self):
        return repr(float(self.value))


@dataclass(frozen=True)
class Const(Node):
    name: str  # "i" or "pi"

    def evaluate(self, env):
        return 1j if self.name == "i" else complex(np.pi)

    def to_text(self):
        return self.name


@dataclass(frozen=True)
class Var(Node):
    name: str

    def evaluate(self, env):
        return env[self.name]

    def to_text(self):
        return self.name

    def variables(self):
        return {self.name}


@dataclass(frozen=True)
class Neg(Node):
    operand: Node
    prec = 3

    def evaluate(self, env):
        return -self.operand.evaluate(env)

    def to_text(self):
        inner = self.operand.to_text()
        return f"-({inner})" if self.operand.prec < self.prec else f"-{inner}"

    def variables(self):
        return self.operand.variables()


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    @property
    def prec(self):
        return 1 if self.op in "+-" else 2

    def evaluate(self, env):
        a = self.left.evaluate(env)
        b = self.right.evaluate(env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        b_arr = np.asarray(b)
        if np.any(b_arr == 0):
            raise PoleError(f"division by zero in {self.to_text()}", where=np.flatnonzero(b_arr == 0))
        return a / b

    def to_text(self):
        lt = self.left.to_text()
        rt = self.right.to_text()
        if self.left.prec < self.prec:
            lt = f"({lt})"
        # left associative: an equal-precedence right operand needs parentheses
        if self.right.prec <= self.prec:
            rt = f"({rt})"
        return f"{lt}{self.op}{rt}" if self.op in "*/" else f"{lt} {self.op} {rt}"

    def variables(self):
        return self.left.variables() | self.right.variables()


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int
    prec = 4

    def evaluate(self, env):
        b = self.base.evaluate(env)
        if self.exponent < 0:
            b_arr = np.asarray(b)
            if np.any(b_arr == 0):
                raise PoleError(f"negative power of zero in {self.to_text()}", where=np.flatnonzero(b_arr == 0))
        return b**self.exponent

    def to_text(self):
        bt = self.base.to_text()
        if self.base.prec <= self.prec:
            bt = f"({bt})"
        return f"{bt}^{self.exponent}"

    def variables(self):
        return self.base.variables()


@dataclass(frozen=True)
class Exp(Node):
    arg: Node

    def evaluate(self, env):
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(self.arg.evaluate(env))

    def to_text(self):
        return f"exp({self.arg.to_text()})"

    def variables(self):
        return self.arg.variables()


# --------------------------------------------------------------------- parser


class _Parser:
    def __init__(self, text: str, variables):
        self.tokens = tokenize(text)
        self.pos = 0
        self.variables = tuple(variables)

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.column)

    def accept(self, text):
        if self.tok.kind in ("op",) and self.tok.text == text:
            self.pos += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")

    def parse_matrix(self):
        if self.tok.text == "[":
            start = self.tok
            self.expect("[")
            rows = [self.parse_row()]
            while self.accept(","):
                rows.append(self.parse_row())
            self.expect("]")
            n = len(rows)
            for row in rows:
                if len(row) != n:
                    raise self.error(f"matrix literal is not square ({n} rows, a row of length {len(row)})", start)
            result = rows
        else:
            result = [[self.parse_expr()]]
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return result

    def parse_row(self):
        self.expect("[")
        row = [self.parse_expr()]
        while self.accept(","):
            row.append(self.parse_expr())
        self.expect("]")
        return row

    def parse_expr(self):
        node = self.parse_term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self):
        node = self.parse_unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.parse_unary())
        return node

    def parse_unary(self):
        if self.accept("-"):
            return Neg(self.parse_unary())
        if self.accept("+"):
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self):
        base = self.parse_base()
        if self.accept("^"):
            sign = -1 if self.accept("-") else 1
            tok = self.tok
            if tok.kind != "number" or not tok.text.isdigit():
                raise self.error("exponent must be an integer literal")
            self.pos += 1
            return Pow(base, sign * int(tok.text))
        return base

    def parse_base(self):
        tok = self.tok
        if tok.kind == "number":
            self.pos += 1
            return Num(float(tok.text))
        if tok.kind == "name":
            self.pos += 1
            if tok.text in ("i", "pi"):
                return Const(tok.text)
            if tok.text == "exp":
                self.expect("(")
                arg = self.parse_expr()
                self.expect(")")
                return Exp(arg)
            if tok.text in self.variables:
                return Var(tok.text)
            raise self.error(f"unknown identifier {tok.text!r}", tok)
        if self.accept("("):
            node = self.parse_expr()
            self.expect(")")
            return node
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}")


@dataclass(frozen=True)
class MatrixExpr:
    """Square matrix of scalar expression trees."""

    rows: tuple
    allowed: tuple = VARIABLES

    @property
    def n(self) -> int:
        return len(self.rows)

    def variables(self) -> set:
        out = set()
        for row in self.rows:
            for e in row:
                out |= e.variables()
        return out

    def to_text(self) -> str:
        return "[" + ", ".join("[" + ", ".join(e.to_text() for e in row) + "]" for row in self.rows) + "]"

    def __str__(self):
        return self.to_text()

    def divisions(self):
        """Denominator subexpressions (the candidates for poles)."""
        found = []

        def walk(node):
            if isinstance(node, BinOp):
                if node.op == "/":
                    found.append(node.right)
                walk(node.left)
                walk(node.right)
            elif isinstance(node, (Neg, Pow, Exp)):
                walk(getattr(node, "operand", None) or getattr(node, "base", None) or node.arg)

        for row in self.rows:
            for e in row:
                walk(e)
        return found

    def evaluate(self, **env) -> np.ndarray:
        """Matrix values; array-valued variables give shape ``broadcast + (n, n)``."""
        missing = self.variables() - set(env)
        if missing:
            raise EvaluationError(f"unbound variables {sorted(missing)}")
        arrays = {k: np.asarray(v, dtype=np.complex128) for k, v in env.items()}
        shape = np.broadcast_shapes(*(a.shape for a in arrays.values())) if arrays else ()
        n = self.n
        out = np.empty(shape + (n, n), dtype=np.complex128)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            for i, row in enumerate(self.rows):
                for j, e in enumerate(row):
                    out[..., i, j] = e.evaluate(arrays)
        if not np.isfinite(out).all():
            bad = np.argwhere(~np.isfinite(out.reshape(shape + (n * n,))).all(axis=-1)) if shape else None
            raise EvaluationError(f"non-finite value of {self.to_text()}", where=bad)
        return out


def parse_expr(text: str, variables=VARIABLES) -> MatrixExpr:
    """Parse a matrix literal or a bare scalar expression (1x1 matrix)."""
    for v in variables:
        if v not in VARIABLES:
            raise ParseError(f"unsupported variable name {v!r}")
    rows = _Parser(text, variables).parse_matrix()
    return MatrixExpr(tuple(tuple(r) for r in rows), tuple(variables))
