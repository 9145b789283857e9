"""Stack-machine compiler and fueled virtual machine.

The machine has a single operand stack of unbounded integers, a store,
and relative branches: a branch with offset ``delta`` at index ``pc``
transfers control to ``pc + 1 + delta``, so ``delta = 0`` is a no-op
and negative offsets jump backwards over the branch itself.

Compilation is the classic scheme: expressions in postorder (leaving
exactly one value on the stack), boolean expressions as conditional
jumps parameterized by the polarity ``cond`` and a skip distance
``ofs`` (fall through when the value differs from ``cond``, jump
``ofs`` past the end of the emitted code when it matches), commands by
structural composition.  There is no branch instruction for a strict
less-than, so ``l < r`` compiles its operands in swapped order and uses
the greater-than branch; expressions are pure, so the evaluation-order
change is unobservable.

Machine fuel counts executed instructions (every instruction, halt
included), unlike the reference interpreter's fuel, which counts loop
iterations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import UnsupportedNode
from .semantics import OUT_OF_FUEL, Done, OutOfFuel, Store
from .syntax import (
    AExpr,
    And,
    Assign,
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
    Or,
    Program,
    Seq,
    Skip,
    Var,
    While,
)

# ---------------------------------------------------------------------------
# Instructions


@dataclass(frozen=True)
class Iconst:
    n: int


@dataclass(frozen=True)
class Ivar:
    x: str


@dataclass(frozen=True)
class Isetvar:
    x: str


@dataclass(frozen=True)
class Iadd:
    pass


@dataclass(frozen=True)
class Isub:
    pass


@dataclass(frozen=True)
class Imul:
    pass


@dataclass(frozen=True)
class Ibranch:
    delta: int


@dataclass(frozen=True)
class Ibeq:
    delta: int


@dataclass(frozen=True)
class Ibne:
    delta: int


@dataclass(frozen=True)
class Ible:
    delta: int


@dataclass(frozen=True)
class Ibgt:
    delta: int


@dataclass(frozen=True)
class Ihalt:
    pass


Instr = Union[
    Iconst, Ivar, Isetvar, Iadd, Isub, Imul, Ibranch, Ibeq, Ibne, Ible, Ibgt, Ihalt
]

Code = tuple[Instr, ...]


@dataclass(frozen=True)
class StackProgram:
    code: Code

    def __len__(self) -> int:
        return len(self.code)


@dataclass(frozen=True)
class VmState:
    pc: int
    stack: tuple[int, ...]
    store: Store


@dataclass(frozen=True)
class MachineError:
    reason: str


VmResult = Union[Done, OutOfFuel, MachineError]


# ---------------------------------------------------------------------------
# Compilation


def compile_aexp(e: AExpr) -> Code:
    """Postorder code that pushes aeval(store, e) and touches nothing else."""
    match e:
        case IntLit(v):
            return (Iconst(v),)
        case Var(name):
            return (Ivar(name),)
        case Neg(operand):
            return (Iconst(0),) + compile_aexp(operand) + (Isub(),)
        case BinOp(op, left, right):
            tail = {"+": Iadd, "-": Isub, "*": Imul}[op]()
            return compile_aexp(left) + compile_aexp(right) + (tail,)
        case BitOp(op, _, _):
            raise UnsupportedNode(
                f"bit operator '{op}' has no stack-machine encoding", e.pos
            )
        case BitNot():
            raise UnsupportedNode(
                "bit complement '~' has no stack-machine encoding", e.pos
            )
        case Cast(target, _):
            raise UnsupportedNode(
                f"cast '{target}(...)' has no stack-machine encoding", e.pos
            )
    raise TypeError(f"not an AExpr: {e!r}")


def compile_bexp(b: BExpr, cond: bool, ofs: int) -> Code:
    """Jump code: branches ofs past its end iff the value equals cond.

    The emitted code never touches the store and has zero net stack
    effect on both paths.
    """
    if ofs < 0:
        raise ValueError("ofs must be nonnegative")
    match b:
        case BoolLit(v):
            return (Ibranch(ofs),) if v == cond else ()
        case Not(operand):
            return compile_bexp(operand, not cond, ofs)
        case Cmp("=", left, right):
            br = Ibeq(ofs) if cond else Ibne(ofs)
            return compile_aexp(left) + compile_aexp(right) + (br,)
        case Cmp("<=", left, right):
            br = Ible(ofs) if cond else Ibgt(ofs)
            return compile_aexp(left) + compile_aexp(right) + (br,)
        case Cmp("<", left, right):
            # l < r iff r > l: swap operand order to reuse Ibgt/Ible
            br = Ibgt(ofs) if cond else Ible(ofs)
            return compile_aexp(right) + compile_aexp(left) + (br,)
        case And(left, right):
            if cond:
                c2 = compile_bexp(right, True, ofs)
                c1 = compile_bexp(left, False, len(c2))
            else:
                c2 = compile_bexp(right, False, ofs)
                c1 = compile_bexp(left, False, len(c2) + ofs)
            return c1 + c2
        case Or(left, right):
            if cond:
                c2 = compile_bexp(right, True, ofs)
                c1 = compile_bexp(left, True, len(c2) + ofs)
            else:
                c2 = compile_bexp(right, False, ofs)
                c1 = compile_bexp(left, True, len(c2))
            return c1 + c2
    raise TypeError(f"not a BExpr: {b!r}")


def compile_com(c: Com) -> Code:
    match c:
        case Skip():
            return ()
        case Assign(var, rhs):
            return compile_aexp(rhs) + (Isetvar(var),)
        case Seq(first, second):
            return compile_com(first) + compile_com(second)
        case If(cond, then_branch, else_branch):
            c1 = compile_com(then_branch)
            c2 = compile_com(else_branch)
            cb = compile_bexp(cond, False, len(c1) + 1)
            return cb + c1 + (Ibranch(len(c2)),) + c2
        case While(cond, _, body):
            cbody = compile_com(body)
            cb = compile_bexp(cond, False, len(cbody) + 1)
            back = -(len(cb) + len(cbody) + 1)
            return cb + cbody + (Ibranch(back),)
    raise TypeError(f"not a Com: {c!r}")


def compile_program(p: Program) -> StackProgram:
    return StackProgram(compile_com(p.body) + (Ihalt(),))


# ---------------------------------------------------------------------------
# Execution


def run_fragment(fuel: int, code: Code, state: VmState) -> tuple[str, VmState]:
    """Execute until halt, fuel exhaustion, an error, or pc leaving the code.

    Returns (status, final state) with status one of "halt", "outoffuel",
    "error", "exit"; "exit" means pc moved outside [0, len(code)) other
    than via Ihalt, which is the normal way a code fragment finishes.
    Error states keep the pc of the offending instruction.
    """
    pc, stack, store = state.pc, list(state.stack), state.store
    n = len(code)
    while True:
        if not 0 <= pc < n:
            return "exit", VmState(pc, tuple(stack), store)
        if fuel == 0:
            return "outoffuel", VmState(pc, tuple(stack), store)
        fuel -= 1
        instr = code[pc]
        match instr:
            case Iconst(v):
                stack.append(v)
                pc += 1
            case Ivar(x):
                stack.append(store.get(x))
                pc += 1
            case Isetvar(x):
                if not stack:
                    return "error", VmState(pc, (), store)
                store = store.set(x, stack.pop())
                pc += 1
            case Iadd() | Isub() | Imul():
                if len(stack) < 2:
                    return "error", VmState(pc, tuple(stack), store)
                n2 = stack.pop()
                n1 = stack.pop()
                if isinstance(instr, Iadd):
                    stack.append(n1 + n2)
                elif isinstance(instr, Isub):
                    stack.append(n1 - n2)
                else:
                    stack.append(n1 * n2)
                pc += 1
            case Ibranch(delta):
                pc += 1 + delta
            case Ibeq(delta) | Ibne(delta) | Ible(delta) | Ibgt(delta):
                if len(stack) < 2:
                    return "error", VmState(pc, tuple(stack), store)
                n2 = stack.pop()
                n1 = stack.pop()
                taken = {
                    Ibeq: n1 == n2,
                    Ibne: n1 != n2,
                    Ible: n1 <= n2,
                    Ibgt: n1 > n2,
                }[type(instr)]
                pc += 1 + delta if taken else 1
            case Ihalt():
                return "halt", VmState(pc, tuple(stack), store)
            case _:
                raise TypeError(f"not an Instr: {instr!r}")


def vm_exec(fuel: int, prog: StackProgram, s0: Store) -> VmResult:
    """Run a whole program from pc 0 with an empty stack."""
    if fuel < 0:
        raise ValueError("fuel must be nonnegative")
    status, st = run_fragment(fuel, prog.code, VmState(0, (), s0))
    if status == "halt":
        return Done(st.store)
    if status == "outoffuel":
        return OUT_OF_FUEL
    if status == "error":
        return MachineError(f"stack underflow at pc {st.pc}")
    return MachineError(f"pc out of bounds: {st.pc}")


# ---------------------------------------------------------------------------
# Listing


def _mnemonic(i: Instr) -> str:
    match i:
        case Iconst(v):
            return f"ICONST {v}"
        case Ivar(x):
            return f"IVAR {x}"
        case Isetvar(x):
            return f"ISETVAR {x}"
        case Iadd():
            return "IADD"
        case Isub():
            return "ISUB"
        case Imul():
            return "IMUL"
        case Ibranch(d):
            return f"IBRANCH {d}"
        case Ibeq(d):
            return f"IBEQ {d}"
        case Ibne(d):
            return f"IBNE {d}"
        case Ible(d):
            return f"IBLE {d}"
        case Ibgt(d):
            return f"IBGT {d}"
        case Ihalt():
            return "IHALT"
    raise TypeError(f"not an Instr: {i!r}")


def listing(prog: StackProgram) -> str:
    """One instruction per line; the line number is the instruction index."""
    return "".join(_mnemonic(i) + "\n" for i in prog.code)


def branch_targets(code: Code) -> list[int]:
    """Computed targets of every branch; used by well-formedness checks."""
    out = []
    for pc, instr in enumerate(code):
        match instr:
            case Ibranch(d) | Ibeq(d) | Ibne(d) | Ible(d) | Ibgt(d):
                out.append(pc + 1 + d)
    return out


def well_formed(prog: StackProgram) -> bool:
    """Branch closure plus the single-final-Ihalt shape of compiled code."""
    code = prog.code
    if not code or not isinstance(code[-1], Ihalt):
        return False
    if any(isinstance(i, Ihalt) for i in code[:-1]):
        return False
    return all(0 <= t <= len(code) for t in branch_targets(code))
