"""Fixed-width types: i32/u32 checking and the wrapping 32-bit evaluator.

Programs with a declaration section run in typed mode.  Variables carry
their declared type, integer literals are polymorphic and adopt the type
of their context (defaulting to i32), and the only bridge between signed
and unsigned is an explicit cast, which reinterprets bits.  Arithmetic
wraps modulo 2^32 for both types; signedness only changes how comparisons
order words.
"""

from __future__ import annotations

from typing import Mapping, Optional, Union

from .errors import CimpError
from .semantics import OUT_OF_FUEL, Done, Outcome, Store
from .syntax import (
    ACmp,
    AExpr,
    AFalse,
    ANot,
    Assertion,
    Assign,
    ATrue,
    And,
    BExpr,
    BinOp,
    BitNot,
    BitOp,
    BoolLit,
    Cast,
    Cmp,
    Com,
    If,
    IntLit,
    Neg,
    Not,
    Program,
    Seq,
    Skip,
    SrcPos,
    Ty,
    Var,
    While,
)

MASK = 0xFFFFFFFF
_MOD = 1 << 32
_SIGN = 1 << 31


class TypeMismatch(CimpError):
    """Two sides of an operation disagree, with no implicit coercion."""

    def __init__(self, expected: str, found: str, pos: Optional[SrcPos] = None):
        super().__init__(f"found {found} where {expected} expected", pos)
        self.expected = expected
        self.found = found


class UndeclaredVariable(CimpError):
    def __init__(self, name: str, pos: Optional[SrcPos] = None):
        super().__init__(f"undeclared variable {name}", pos)
        self.name = name


class TypedProgram:
    """A checked program plus the type assigned to every value node.

    `ty_of` answers for arithmetic expressions and for comparison nodes
    (where it reports the common operand type, which is what a backend
    needs to pick signed or unsigned ordering).
    """

    def __init__(self, program: Program, env: dict[str, Ty], types: dict[int, Ty]):
        self.program = program
        self.env = env
        self._types = types

    def ty_of(self, node: Union[AExpr, Cmp, ACmp]) -> Ty:
        return self._types[id(node)]


def word32(v: int) -> int:
    return v & MASK


def to_signed(w: int) -> int:
    return w - _MOD if w & _SIGN else w


def _fmt(t: Ty) -> str:
    return str(t)


class _Checker:
    def __init__(self, env: dict[str, Ty]):
        self.env = env
        self.types: dict[int, Ty] = {}

    # -- arithmetic -------------------------------------------------------

    def synth(self, e: AExpr) -> Optional[Ty]:
        """Type of e, or None when e is a literal-only (polymorphic) tree."""
        if isinstance(e, IntLit):
            return None
        if isinstance(e, Var):
            t = self.env.get(e.name)
            if t is None:
                raise UndeclaredVariable(e.name, e.pos)
            self.types[id(e)] = t
            return t
        if isinstance(e, Neg):
            t = self.synth(e.operand)
            if t is not None:
                self.types[id(e)] = t
            return t
        if isinstance(e, BinOp):
            tl = self.synth(e.left)
            tr = self.synth(e.right)
            if tl is None and tr is None:
                return None
            if tl is None:
                self._adopt(e.left, tr)
                t = tr
            elif tr is None:
                self._adopt(e.right, tl)
                t = tl
            elif tl is not tr:
                raise TypeMismatch(_fmt(tl), _fmt(tr), e.right.pos)
            else:
                t = tl
            self.types[id(e)] = t
            return t
        if isinstance(e, BitOp):
            self.check(e.left, Ty.U32)
            self.check(e.right, Ty.U32)
            self.types[id(e)] = Ty.U32
            return Ty.U32
        if isinstance(e, BitNot):
            self.check(e.operand, Ty.U32)
            self.types[id(e)] = Ty.U32
            return Ty.U32
        assert isinstance(e, Cast)
        if self.synth(e.operand) is None:
            # a cast imposes no context on its operand
            self._adopt(e.operand, Ty.I32)
        self.types[id(e)] = e.target
        return e.target

    def check(self, e: AExpr, t: Ty) -> None:
        s = self.synth(e)
        if s is None:
            self._adopt(e, t)
        elif s is not t:
            raise TypeMismatch(_fmt(t), _fmt(s), e.pos)

    def _adopt(self, e: AExpr, t: Ty) -> None:
        # e synthesized as polymorphic, so it is built solely from
        # IntLit, Neg and BinOp; stamp the whole spine with t
        self.types[id(e)] = t
        if isinstance(e, Neg):
            self._adopt(e.operand, t)
        elif isinstance(e, BinOp):
            self._adopt(e.left, t)
            self._adopt(e.right, t)

    def _common(self, left: AExpr, right: AExpr) -> Ty:
        tl = self.synth(left)
        tr = self.synth(right)
        if tl is None and tr is None:
            tl = tr = Ty.I32
            self._adopt(left, tl)
            self._adopt(right, tr)
        elif tl is None:
            self._adopt(left, tr)
            tl = tr
        elif tr is None:
            self._adopt(right, tl)
            tr = tl
        elif tl is not tr:
            raise TypeMismatch(_fmt(tl), _fmt(tr), right.pos)
        return tl

    # -- booleans and assertions ------------------------------------------

    def check_bexpr(self, b: BExpr) -> None:
        if isinstance(b, BoolLit):
            return
        if isinstance(b, Cmp):
            self.types[id(b)] = self._common(b.left, b.right)
            return
        if isinstance(b, Not):
            self.check_bexpr(b.operand)
            return
        self.check_bexpr(b.left)
        self.check_bexpr(b.right)

    def check_assertion(self, a: Assertion) -> None:
        if isinstance(a, (ATrue, AFalse)):
            return
        if isinstance(a, ACmp):
            self.types[id(a)] = self._common(a.left, a.right)
            return
        if isinstance(a, ANot):
            self.check_assertion(a.operand)
            return
        # AAnd, AOr and AImplies all carry left and right
        self.check_assertion(a.left)
        self.check_assertion(a.right)

    # -- commands ----------------------------------------------------------

    def check_com(self, c: Com) -> None:
        if isinstance(c, Skip):
            return
        if isinstance(c, Assign):
            declared = self.env.get(c.var)
            if declared is None:
                raise UndeclaredVariable(c.var, c.pos)
            self.check(c.rhs, declared)
            return
        if isinstance(c, Seq):
            self.check_com(c.first)
            self.check_com(c.second)
            return
        if isinstance(c, If):
            self.check_bexpr(c.cond)
            self.check_com(c.then_branch)
            self.check_com(c.else_branch)
            return
        assert isinstance(c, While)
        self.check_bexpr(c.cond)
        if c.invariant is not None:
            self.check_assertion(c.invariant)
        self.check_com(c.body)


def typecheck(p: Program) -> TypedProgram:
    """Check a declared program; errors surface in leftmost-innermost order."""
    if not p.decls:
        raise ValueError("typecheck needs a program with declarations")
    env = {name: ty if ty is not None else Ty.I32 for name, ty in p.decls}
    checker = _Checker(env)
    checker.check_com(p.body)
    return TypedProgram(p, env, checker.types)


# ---------------------------------------------------------------------------
# Fixed-width evaluation


def eval_fixed(env: Mapping[str, Ty], s32: Store, e: AExpr) -> int:
    """Value of e as a 32-bit word.

    Evaluation is type-blind: +, -, * and the bit operations act on the
    word representation the same way for both types, casts are the
    identity, and shift amounts are taken mod 32.  `env` documents the
    typing context; it plays no role at run time.
    """
    if isinstance(e, IntLit):
        return word32(e.value)
    if isinstance(e, Var):
        return word32(s32.get(e.name))
    if isinstance(e, Neg):
        return word32(-eval_fixed(env, s32, e.operand))
    if isinstance(e, BinOp):
        l = eval_fixed(env, s32, e.left)
        r = eval_fixed(env, s32, e.right)
        if e.op == "+":
            return word32(l + r)
        if e.op == "-":
            return word32(l - r)
        return word32(l * r)
    if isinstance(e, BitOp):
        l = eval_fixed(env, s32, e.left)
        r = eval_fixed(env, s32, e.right)
        if e.op == "&":
            return l & r
        if e.op == "|":
            return l | r
        if e.op == "^":
            return l ^ r
        if e.op == "<<":
            return word32(l << (r % 32))
        return l >> (r % 32)
    if isinstance(e, BitNot):
        return eval_fixed(env, s32, e.operand) ^ MASK
    assert isinstance(e, Cast)
    return eval_fixed(env, s32, e.operand)


def beval_fixed(tp: TypedProgram, s32: Store, b: BExpr) -> bool:
    """Truth of b under 32-bit semantics; b must be a node of tp."""
    if isinstance(b, BoolLit):
        return b.value
    if isinstance(b, Cmp):
        l = eval_fixed(tp.env, s32, b.left)
        r = eval_fixed(tp.env, s32, b.right)
        if tp.ty_of(b) is Ty.I32:
            l, r = to_signed(l), to_signed(r)
        if b.op == "=":
            return l == r
        if b.op == "<=":
            return l <= r
        return l < r
    if isinstance(b, Not):
        return not beval_fixed(tp, s32, b.operand)
    if isinstance(b, And):
        return beval_fixed(tp, s32, b.left) and beval_fixed(tp, s32, b.right)
    return beval_fixed(tp, s32, b.left) or beval_fixed(tp, s32, b.right)


def _ceval32(tp: TypedProgram, fuel: int, c: Com, s: Store) -> Optional[tuple[int, Store]]:
    if isinstance(c, Skip):
        return fuel, s
    if isinstance(c, Assign):
        return fuel, s.set(c.var, eval_fixed(tp.env, s, c.rhs))
    if isinstance(c, Seq):
        r = _ceval32(tp, fuel, c.first, s)
        if r is None:
            return None
        return _ceval32(tp, r[0], c.second, r[1])
    if isinstance(c, If):
        branch = c.then_branch if beval_fixed(tp, s, c.cond) else c.else_branch
        return _ceval32(tp, fuel, branch, s)
    assert isinstance(c, While)
    while True:
        if fuel == 0:
            return None
        if not beval_fixed(tp, s, c.cond):
            return fuel, s
        r = _ceval32(tp, fuel - 1, c.body, s)
        if r is None:
            return None
        fuel, s = r


def ceval_fixed(fuel: int, tp: TypedProgram, s32: Store) -> Outcome:
    """Run a typed program's body with the fueled 32-bit semantics.

    The fuel discipline matches the unbounded evaluator: only loop
    unfoldings consume fuel, and a loop checks fuel before its guard.
    """
    if fuel < 0:
        raise ValueError("fuel must be nonnegative")
    r = _ceval32(tp, fuel, tp.program.body, s32)
    if r is None:
        return OUT_OF_FUEL
    return Done(r[1])
