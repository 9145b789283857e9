"""Register allocation for expression trees.

Ershov (Sethi-Ullman) numbering assigns each tree node the number of
registers needed to evaluate it without touching memory.  `alloc_codegen`
turns a core arithmetic expression into straight-line register code for a
machine with k general registers, evaluating the heavier subtree first and
spilling to a LIFO stack only when both subtrees need every available
register.  `reg_exec` runs that code against a store.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .errors import CimpError, UnsupportedNode
from .semantics import Store
from .syntax import AExpr, BinOp, IntLit, Neg, Var


class MalformedCode(CimpError):
    """Register code that no well-behaved generator would emit."""


@dataclass(frozen=True)
class LoadConst:
    dst: int
    value: int


@dataclass(frozen=True)
class LoadVar:
    dst: int
    name: str


@dataclass(frozen=True)
class Op:
    kind: str  # "add" | "sub" | "mul"
    dst: int
    lhs: int
    rhs: int


@dataclass(frozen=True)
class Spill:
    src: int


@dataclass(frozen=True)
class Reload:
    dst: int


RegInstr = Union[LoadConst, LoadVar, Op, Spill, Reload]
RegCode = tuple[RegInstr, ...]

OP_KINDS = {"+": "add", "-": "sub", "*": "mul"}


def _join(left: int, right: int) -> int:
    return max(left, right) if left != right else left + 1


def ershov(e: AExpr) -> int:
    """Registers needed to evaluate `e` with no spills.

    Leaves (variables and constants alike) are labeled 1.  Negation is
    labeled as if written 0 - e.
    """
    if isinstance(e, (IntLit, Var)):
        return 1
    if isinstance(e, Neg):
        return _join(1, ershov(e.operand))
    if isinstance(e, BinOp):
        return _join(ershov(e.left), ershov(e.right))
    raise UnsupportedNode(getattr(e, "pos", None))


def _desugar(e: AExpr) -> AExpr:
    # Rewrite Neg into the binary form the labeling already assumes.
    if isinstance(e, (IntLit, Var)):
        return e
    if isinstance(e, Neg):
        return BinOp("-", IntLit(0), _desugar(e.operand))
    if isinstance(e, BinOp):
        return BinOp(e.op, _desugar(e.left), _desugar(e.right))
    raise UnsupportedNode(getattr(e, "pos", None))


def alloc_codegen(e: AExpr, k: int) -> RegCode:
    """Compile `e` to register code; the result lands in register 0."""
    if k < 2:
        raise ValueError("need at least 2 registers")
    out: list[RegInstr] = []
    _gen(_desugar(e), k, 0, out)
    return tuple(out)


def _gen(e: AExpr, k: int, lo: int, out: list[RegInstr]) -> None:
    # Result goes to register lo; registers lo..k-1 are free.
    if isinstance(e, IntLit):
        out.append(LoadConst(lo, e.value))
        return
    if isinstance(e, Var):
        out.append(LoadVar(lo, e.name))
        return
    assert isinstance(e, BinOp)
    kind = OP_KINDS[e.op]
    ll, lr = ershov(e.left), ershov(e.right)
    avail = k - lo
    if ll >= avail and lr >= avail:
        # Neither side fits while the other's value is pinned: evaluate the
        # right operand, park it on the spill stack, then redo the left with
        # every register free and bring the right back into a scratch.
        _gen(e.right, k, lo, out)
        out.append(Spill(lo))
        _gen(e.left, k, lo, out)
        out.append(Reload(lo + 1))
        out.append(Op(kind, lo, lo, lo + 1))
    elif lr > ll:
        _gen(e.right, k, lo, out)
        _gen(e.left, k, lo + 1, out)
        out.append(Op(kind, lo, lo + 1, lo))
    else:
        _gen(e.left, k, lo, out)
        _gen(e.right, k, lo + 1, out)
        out.append(Op(kind, lo, lo, lo + 1))


def reg_exec(code: RegCode, s: Store, k: Optional[int] = None) -> int:
    """Run register code against a store and return register 0."""
    regs: dict[int, int] = {}
    stack: list[int] = []

    def check(idx: int) -> int:
        if idx < 0 or (k is not None and idx >= k):
            raise MalformedCode(f"register index out of range: r{idx}")
        return idx

    def read(idx: int) -> int:
        check(idx)
        if idx not in regs:
            raise MalformedCode(f"read from unwritten register r{idx}")
        return regs[idx]

    for ins in code:
        if isinstance(ins, LoadConst):
            regs[check(ins.dst)] = ins.value
        elif isinstance(ins, LoadVar):
            regs[check(ins.dst)] = s.get(ins.name)
        elif isinstance(ins, Op):
            a, b = read(ins.lhs), read(ins.rhs)
            if ins.kind == "add":
                regs[check(ins.dst)] = a + b
            elif ins.kind == "sub":
                regs[check(ins.dst)] = a - b
            elif ins.kind == "mul":
                regs[check(ins.dst)] = a * b
            else:
                raise MalformedCode(f"unknown operation {ins.kind!r}")
        elif isinstance(ins, Spill):
            stack.append(read(ins.src))
        else:
            assert isinstance(ins, Reload)
            if not stack:
                raise MalformedCode("reload from empty spill stack")
            regs[check(ins.dst)] = stack.pop()
    if 0 not in regs:
        raise MalformedCode("register r0 never written")
    return regs[0]


def max_live(code: RegCode) -> int:
    """Peak number of registers holding a still-needed value.

    Computed by backward liveness over the straight-line code, counting
    register 0 as live at exit.  Spilled values sit on the stack and do not
    count.
    """
    live = {0}
    peak = len(live)
    for ins in reversed(code):
        peak = max(peak, len(live))
        if isinstance(ins, (LoadConst, LoadVar, Reload)):
            live.discard(ins.dst)
        elif isinstance(ins, Op):
            live.discard(ins.dst)
            live.add(ins.lhs)
            live.add(ins.rhs)
        else:
            assert isinstance(ins, Spill)
            live.add(ins.src)
    return max(peak, len(live))


def _mnemonic(ins: RegInstr) -> str:
    if isinstance(ins, LoadConst):
        return f"LOADCONST r{ins.dst} {ins.value}"
    if isinstance(ins, LoadVar):
        return f"LOADVAR r{ins.dst} {ins.name}"
    if isinstance(ins, Op):
        return f"OP {ins.kind.upper()} r{ins.dst} r{ins.lhs} r{ins.rhs}"
    if isinstance(ins, Spill):
        return f"SPILL r{ins.src}"
    assert isinstance(ins, Reload)
    return f"RELOAD r{ins.dst}"


def listing(code: RegCode) -> str:
    """One instruction per line, in `OP ADD r0 r0 r1` style."""
    return "".join(_mnemonic(i) + "\n" for i in code)
