"""Parser and printer for potential-function expressions.

Grammar (EBNF, also documented in the README):

    expr     = term { ("+" | "-") term } ;
    term     = unary { ("*" | "/") unary } ;
    unary    = "-" unary | power ;
    power    = atom [ "^" exponent ] ;
    exponent = unary ;                (* must contain no variables; folded to a constant *)
    atom     = NUMBER | VARIABLE | FUNC "(" expr ")" | "(" expr ")" ;
    VARIABLE = "x" DIGITS ;           (* x1 .. xn *)
    FUNC     = "sin" | "cos" | "exp" | "log" | "sqrt" | "tanh" ;
    NUMBER   = decimal or scientific literal, e.g. 2, 3.5, .5, 1e-3, 2.5E+4 ;

Precedence: ^ binds tightest, then unary minus, then * /, then + -.
All binary operators associate left except ^, which associates right.
Exponents are restricted to constants so that third-order jets of every
expression stay closed-form and total.

ASTs are immutable (frozen dataclasses) and safe to share across threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .errors import (
    DomainError,
    ExpressionSyntaxError,
    UnknownIdentifier,
    VariableOutOfRange,
)

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "tanh")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or a name from FUNCTIONS
    child: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # "add" | "sub" | "mul" | "div" | "pow"
    left: "Expr"
    right: "Expr"


Expr = Const | Var | Unary | Binary

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)
_VAR_RE = re.compile(r"x(\d+)\Z")


class _Tokenizer:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0
        self.tok = None  # (kind, text, offset)
        self._advance()

    def _advance(self):
        src = self.source
        while self.pos < len(src) and src[self.pos].isspace():
            self.pos += 1
        if self.pos >= len(src):
            self.tok = ("eof", "", len(src))
            return
        m = _TOKEN_RE.match(src, self.pos)
        if m is None or m.start() != self.pos:
            raise ExpressionSyntaxError(f"unexpected character {src[self.pos]!r}", self.pos)
        start = m.start(m.lastgroup)
        self.tok = (m.lastgroup, m.group(m.lastgroup), start)
        self.pos = m.end()

    def take(self):
        tok = self.tok
        self._advance()
        return tok


class _Parser:
    def __init__(self, source: str, n: int):
        self.tk = _Tokenizer(source)
        self.n = n

    def parse(self) -> Expr:
        e = self.expr()
        kind, text, off = self.tk.tok
        if kind != "eof":
            raise ExpressionSyntaxError(f"unexpected trailing input {text!r}", off)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.tk.tok[:2] in (("op", "+"), ("op", "-")):
            op = self.tk.take()[1]
            right = self.term()
            left = Binary("add" if op == "+" else "sub", left, right)
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.tk.tok[:2] in (("op", "*"), ("op", "/")):
            op = self.tk.take()[1]
            right = self.unary()
            left = Binary("mul" if op == "*" else "div", left, right)
        return left

    def unary(self) -> Expr:
        if self.tk.tok[:2] == ("op", "-"):
            self.tk.take()
            child = self.unary()
            # Fold negations of constants so printed negative literals round-trip.
            if isinstance(child, Const):
                return Const(-child.value)
            return Unary("neg", child)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tk.tok[:2] == ("op", "^"):
            off = self.tk.tok[2]
            self.tk.take()
            exponent = self.unary()  # right-associative via the nested power()
            if _has_variables(exponent):
                raise ExpressionSyntaxError("exponent must be a constant expression", off)
            folded = exponent if isinstance(exponent, Const) else Const(eval_tree(exponent, ()))
            return Binary("pow", base, folded)
        return base

    def atom(self) -> Expr:
        kind, text, off = self.tk.tok
        if kind == "num":
            self.tk.take()
            return Const(float(text))
        if kind == "ident":
            self.tk.take()
            m = _VAR_RE.match(text)
            if m:
                index = int(m.group(1))
                if not 1 <= index <= self.n:
                    raise VariableOutOfRange(index, self.n, off)
                return Var(index)
            if text in FUNCTIONS:
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return Unary(text, arg)
            raise UnknownIdentifier(text, off)
        if (kind, text) == ("op", "("):
            self.tk.take()
            inner = self.expr()
            self._expect(")")
            return inner
        raise ExpressionSyntaxError(
            "expected a number, variable, function or '('" if kind != "eof" else "unexpected end of input",
            off,
        )

    def _expect(self, op: str):
        kind, text, off = self.tk.tok
        if (kind, text) != ("op", op):
            raise ExpressionSyntaxError(f"expected {op!r}", off)
        self.tk.take()


def parse(source: str, n: int) -> Expr:
    """Parse an expression over variables x1..xn into an AST.

    Raises ExpressionSyntaxError / UnknownIdentifier / VariableOutOfRange,
    each carrying the byte offset of the offending token.
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    return _Parser(source, n).parse()


def _has_variables(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, Unary):
        return _has_variables(e.child)
    if isinstance(e, Binary):
        return _has_variables(e.left) or _has_variables(e.right)
    return False


def max_variable_index(e: Expr) -> int:
    """Largest variable index used, 0 for constant expressions."""
    if isinstance(e, Var):
        return e.index
    if isinstance(e, Unary):
        return max_variable_index(e.child)
    if isinstance(e, Binary):
        return max(max_variable_index(e.left), max_variable_index(e.right))
    return 0


def is_zero(e: Expr) -> bool:
    """True if the expression is syntactically the constant 0."""
    return isinstance(e, Const) and e.value == 0.0


_UNARY_FN = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "tanh": math.tanh,
}


def eval_tree(e: Expr, x) -> float:
    """Reference evaluator: direct recursion over the tree.

    Used as the independent oracle for the tape-compiled evaluator and as the
    value source for the finite-difference jet oracle.
    """
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return float(x[e.index - 1])
    if isinstance(e, Unary):
        v = eval_tree(e.child, x)
        if e.op == "neg":
            return -v
        if e.op == "log":
            if v <= 0.0:
                raise DomainError(f"log of nonpositive value {v}")
            return math.log(v)
        if e.op == "sqrt":
            if v < 0.0:
                raise DomainError(f"sqrt of negative value {v}")
            return math.sqrt(v)
        try:
            return _UNARY_FN[e.op](v)
        except OverflowError as exc:
            raise DomainError(str(exc)) from exc
    assert isinstance(e, Binary)
    a = eval_tree(e.left, x)
    b = eval_tree(e.right, x)
    try:
        if e.op == "add":
            r = a + b
        elif e.op == "sub":
            r = a - b
        elif e.op == "mul":
            r = a * b
        elif e.op == "div":
            if b == 0.0:
                raise DomainError("division by zero")
            r = a / b
        else:
            assert e.op == "pow"
            if a < 0.0 and b != round(b):
                raise DomainError(f"negative base {a} with non-integer exponent {b}")
            if a == 0.0 and b < 0.0:
                raise DomainError("zero base with negative exponent")
            r = a**b
    except OverflowError as exc:
        raise DomainError(str(exc)) from exc
    if not math.isfinite(r):
        raise DomainError(f"non-finite value in {e.op}")
    return r


_PRECEDENCE = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def _prec(e: Expr) -> int:
    if isinstance(e, (Const, Var)):
        return 5
    if isinstance(e, Unary):
        return _PRECEDENCE["neg"] if e.op == "neg" else 5
    return _PRECEDENCE[e.op]


def format_expr(e: Expr) -> str:
    """Print an AST so that parse(format_expr(e), n) is structurally identical to e."""
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Unary):
        if e.op == "neg":
            inner = format_expr(e.child)
            if _prec(e.child) < _PRECEDENCE["neg"]:
                inner = f"({inner})"
            return f"-{inner}"
        return f"{e.op}({format_expr(e.child)})"
    assert isinstance(e, Binary)
    left = format_expr(e.left)
    right = format_expr(e.right)
    my = _PRECEDENCE[e.op]
    if e.op == "pow":
        # right-associative; the exponent is a constant literal
        if _prec(e.left) <= my or (isinstance(e.left, Const) and e.left.value < 0):
            left = f"({left})"
        return f"{left}^{right}"
    if _prec(e.left) < my:
        left = f"({left})"
    # for - and / the right operand must bind strictly tighter
    strict = e.op in ("sub", "div")
    if _prec(e.right) < my or (strict and _prec(e.right) == my):
        right = f"({right})"
    op_char = {"add": " + ", "sub": " - ", "mul": "*", "div": "/"}[e.op]
    return f"{left}{op_char}{right}"
