"""Flatten expression ASTs into instruction tapes for the batch evaluators.

A tape is a postorder list of instructions; instruction t writes slot t.
Division is lowered to reciprocal-then-multiply so the evaluators only need
one binary rule (the order-3 Leibniz product) plus unary chain rules.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from ..parser import Binary, Const, Expr, Unary, Var

OP_CONST = 0
OP_VAR = 1
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_NEG = 5
OP_SIN = 6
OP_COS = 7
OP_EXP = 8
OP_LOG = 9
OP_SQRT = 10
OP_TANH = 11
OP_RECIP = 12
OP_POW = 13  # arg2 = 1 if the exponent is integral, const = exponent

_UNARY_OPS = {
    "neg": OP_NEG,
    "sin": OP_SIN,
    "cos": OP_COS,
    "exp": OP_EXP,
    "log": OP_LOG,
    "sqrt": OP_SQRT,
    "tanh": OP_TANH,
}


@dataclass(frozen=True)
class Tape:
    n: int
    ops: np.ndarray    # (m,) int64 opcodes
    arg1: np.ndarray   # (m,) int64 slot of first operand / variable index
    arg2: np.ndarray   # (m,) int64 slot of second operand / pow flag
    consts: np.ndarray # (m,) float64 literal / exponent

    @property
    def size(self) -> int:
        return int(self.ops.shape[0])


def _emit(e: Expr, ops, arg1, arg2, consts) -> int:
    if isinstance(e, Const):
        ops.append(OP_CONST)
        arg1.append(0)
        arg2.append(0)
        consts.append(e.value)
    elif isinstance(e, Var):
        ops.append(OP_VAR)
        arg1.append(e.index - 1)
        arg2.append(0)
        consts.append(0.0)
    elif isinstance(e, Unary):
        c = _emit(e.child, ops, arg1, arg2, consts)
        ops.append(_UNARY_OPS[e.op])
        arg1.append(c)
        arg2.append(0)
        consts.append(0.0)
    else:
        assert isinstance(e, Binary)
        a = _emit(e.left, ops, arg1, arg2, consts)
        if e.op == "pow":
            p = e.right.value
            ops.append(OP_POW)
            arg1.append(a)
            arg2.append(1 if p == round(p) else 0)
            consts.append(p)
        else:
            b = _emit(e.right, ops, arg1, arg2, consts)
            if e.op == "div":
                ops.append(OP_RECIP)
                arg1.append(b)
                arg2.append(0)
                consts.append(0.0)
                b = len(ops) - 1
            code = {"add": OP_ADD, "sub": OP_SUB, "mul": OP_MUL, "div": OP_MUL}[e.op]
            ops.append(code)
            arg1.append(a)
            arg2.append(b)
            consts.append(0.0)
    return len(ops) - 1


_tape_cache: "weakref.WeakKeyDictionary[Expr, dict[int, Tape]]" = weakref.WeakKeyDictionary()


def compile_expression(e: Expr, n: int) -> Tape:
    """Compile an AST into a tape for dimension n. Results are memoized per AST."""
    per_expr = _tape_cache.get(e)
    if per_expr is not None and n in per_expr:
        return per_expr[n]
    ops: list[int] = []
    arg1: list[int] = []
    arg2: list[int] = []
    consts: list[float] = []
    _emit(e, ops, arg1, arg2, consts)
    tape = Tape(
        n,
        np.asarray(ops, dtype=np.int64),
        np.asarray(arg1, dtype=np.int64),
        np.asarray(arg2, dtype=np.int64),
        np.asarray(consts, dtype=np.float64),
    )
    if per_expr is None:
        per_expr = {}
        _tape_cache[e] = per_expr
    per_expr[n] = tape
    return tape
