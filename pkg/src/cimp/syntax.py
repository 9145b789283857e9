"""Abstract syntax for the imp language.

Three syntactic layers share these nodes:

* arithmetic expressions (``AExpr``): unbounded-integer core operators
  ``+ - *`` and unary negation, plus the fixed-width extension (bitwise
  operators, bit complement, and explicit ``i32``/``u32`` casts);
* boolean expressions (``BExpr``): comparisons over arithmetic
  expressions and the usual connectives; booleans are not values and
  never appear inside an ``AExpr``;
* commands (``Com``) and whole programs (``Program``).

Assertions (``Assertion``) extend boolean expressions with implication
and annotate loops / Hoare triples; they are quantifier-free and range
over program variables only.

All nodes are frozen dataclasses, so structural equality and hashing
come for free.  Source positions are carried in a ``pos`` field that is
excluded from comparison: two trees that differ only in positions are
equal, which is what round-trip and optimizer tests rely on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class SrcPos:
    """1-based line/column of a token in the source text."""

    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


class Ty(enum.Enum):
    """Declared variable types of the fixed-width extension."""

    I32 = "i32"
    U32 = "u32"

    def __str__(self) -> str:
        return self.value


# ---------------------------------------------------------------------------
# Arithmetic expressions


@dataclass(frozen=True)
class IntLit:
    """Integer literal; nonnegative as parsed (negation is a Neg node)."""

    value: int
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    operand: "AExpr"
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    """Core arithmetic: op is one of '+', '-', '*'."""

    op: str
    left: "AExpr"
    right: "AExpr"
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BitOp:
    """Fixed-width bit operation: op is one of '&', '|', '^', '<<', '>>'."""

    op: str
    left: "AExpr"
    right: "AExpr"
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BitNot:
    operand: "AExpr"
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Cast:
    """Explicit reinterpreting cast, the only signed/unsigned bridge."""

    target: Ty
    operand: "AExpr"
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


AExpr = Union[IntLit, Var, Neg, BinOp, BitOp, BitNot, Cast]

CORE_BINOPS = ("+", "-", "*")
BIT_BINOPS = ("&", "|", "^", "<<", ">>")


# ---------------------------------------------------------------------------
# Boolean expressions


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Cmp:
    """Comparison: op is one of '=', '<=', '<'."""

    op: str
    left: AExpr
    right: AExpr
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Not:
    operand: "BExpr"
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class And:
    left: "BExpr"
    right: "BExpr"
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Or:
    left: "BExpr"
    right: "BExpr"
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


BExpr = Union[BoolLit, Cmp, Not, And, Or]

CMP_OPS = ("=", "<=", "<")


# ---------------------------------------------------------------------------
# Assertions


@dataclass(frozen=True)
class ATrue:
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class AFalse:
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ACmp:
    op: str
    left: AExpr
    right: AExpr
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ANot:
    operand: "Assertion"
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class AAnd:
    left: "Assertion"
    right: "Assertion"
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class AOr:
    left: "Assertion"
    right: "Assertion"
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class AImplies:
    left: "Assertion"
    right: "Assertion"
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


Assertion = Union[ATrue, AFalse, ACmp, ANot, AAnd, AOr, AImplies]


# ---------------------------------------------------------------------------
# Commands and programs


@dataclass(frozen=True)
class Skip:
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Assign:
    var: str
    rhs: AExpr
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Seq:
    first: "Com"
    second: "Com"
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class If:
    cond: BExpr
    then_branch: "Com"
    else_branch: "Com"
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class While:
    cond: BExpr
    invariant: Optional[Assertion]
    body: "Com"
    pos: Optional[SrcPos] = field(default=None, compare=False, repr=False)


Com = Union[Skip, Assign, Seq, If, While]


@dataclass(frozen=True)
class Program:
    """Optional variable declarations followed by the program body.

    ``decls`` maps each declared name to its annotation: a ``Ty`` or
    ``None`` for a bare ``var x;`` (treated as ``i32`` by the type
    checker).  Declared names are pairwise distinct.  A program with an
    empty ``decls`` is untyped and runs under the unbounded semantics.
    """

    decls: tuple[tuple[str, Optional[Ty]], ...]
    body: Com

    @property
    def typed(self) -> bool:
        return bool(self.decls)


def program(body: Com) -> Program:
    """Untyped program wrapper, the common case in tests."""
    return Program((), body)


# ---------------------------------------------------------------------------
# Structural helpers


def aexpr_vars(e: AExpr) -> frozenset[str]:
    match e:
        case IntLit():
            return frozenset()
        case Var(name):
            return frozenset((name,))
        case Neg(operand) | BitNot(operand) | Cast(_, operand):
            return aexpr_vars(operand)
        case BinOp(_, left, right) | BitOp(_, left, right):
            return aexpr_vars(left) | aexpr_vars(right)
    raise TypeError(f"not an AExpr: {e!r}")


def bexpr_vars(b: BExpr) -> frozenset[str]:
    match b:
        case BoolLit():
            return frozenset()
        case Cmp(_, left, right):
            return aexpr_vars(left) | aexpr_vars(right)
        case Not(operand):
            return bexpr_vars(operand)
        case And(left, right) | Or(left, right):
            return bexpr_vars(left) | bexpr_vars(right)
    raise TypeError(f"not a BExpr: {b!r}")


def assertion_vars(a: Assertion) -> frozenset[str]:
    match a:
        case ATrue() | AFalse():
            return frozenset()
        case ACmp(_, left, right):
            return aexpr_vars(left) | aexpr_vars(right)
        case ANot(operand):
            return assertion_vars(operand)
        case AAnd(left, right) | AOr(left, right) | AImplies(left, right):
            return assertion_vars(left) | assertion_vars(right)
    raise TypeError(f"not an Assertion: {a!r}")


def com_vars(c: Com) -> frozenset[str]:
    """Variables read or written anywhere in a command."""
    match c:
        case Skip():
            return frozenset()
        case Assign(var, rhs):
            return frozenset((var,)) | aexpr_vars(rhs)
        case Seq(first, second):
            return com_vars(first) | com_vars(second)
        case If(cond, then_branch, else_branch):
            return bexpr_vars(cond) | com_vars(then_branch) | com_vars(else_branch)
        case While(cond, invariant, body):
            inv = assertion_vars(invariant) if invariant is not None else frozenset()
            return bexpr_vars(cond) | inv | com_vars(body)
    raise TypeError(f"not a Com: {c!r}")


def program_vars(p: Program) -> frozenset[str]:
    return frozenset(name for name, _ in p.decls) | com_vars(p.body)


def node_count(node) -> int:
    """Number of AST nodes in an expression, command, or assertion."""
    match node:
        case IntLit() | Var() | BoolLit() | ATrue() | AFalse() | Skip():
            return 1
        case Neg(x) | BitNot(x) | Cast(_, x) | Not(x) | ANot(x):
            return 1 + node_count(x)
        case (
            BinOp(_, l, r)
            | BitOp(_, l, r)
            | Cmp(_, l, r)
            | ACmp(_, l, r)
            | And(l, r)
            | Or(l, r)
            | AAnd(l, r)
            | AOr(l, r)
            | AImplies(l, r)
            | Seq(l, r)
        ):
            return 1 + node_count(l) + node_count(r)
        case Assign(_, rhs):
            return 1 + node_count(rhs)
        case If(cond, t, e):
            return 1 + node_count(cond) + node_count(t) + node_count(e)
        case While(cond, _, body):
            return 1 + node_count(cond) + node_count(body)
        case Program(_, body):
            return node_count(body)
    raise TypeError(f"not an AST node: {node!r}")


def is_core_aexpr(e: AExpr) -> bool:
    """True if the expression avoids every fixed-width-only node."""
    match e:
        case IntLit() | Var():
            return True
        case Neg(operand):
            return is_core_aexpr(operand)
        case BinOp(_, left, right):
            return is_core_aexpr(left) and is_core_aexpr(right)
        case BitOp() | BitNot() | Cast():
            return False
    raise TypeError(f"not an AExpr: {e!r}")


def bexpr_to_assertion(b: BExpr) -> Assertion:
    """Embed a boolean expression into the assertion language."""
    match b:
        case BoolLit(True):
            return ATrue()
        case BoolLit(False):
            return AFalse()
        case Cmp(op, left, right):
            return ACmp(op, left, right)
        case Not(operand):
            return ANot(bexpr_to_assertion(operand))
        case And(left, right):
            return AAnd(bexpr_to_assertion(left), bexpr_to_assertion(right))
        case Or(left, right):
            return AOr(bexpr_to_assertion(left), bexpr_to_assertion(right))
    raise TypeError(f"not a BExpr: {b!r}")
