"""Instruction-level simulator for the MIPS subset.

Words are 32-bit unsigned; every register write wraps.  $zero is
hardwired to zero: writes to it are discarded.  The data segment starts
at DATA_BASE with one word per data label in declaration order, and $sp
starts at STACK_TOP growing downward.  Execution begins at main and
stops at break, when the instruction budget runs out, or on a trap
(unaligned access or the pc escaping the text segment).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .isa import SHAPES, Ins, LabelDef, Mem, MipsProgram

DATA_BASE = 0x10000000
STACK_TOP = 0x7FFFF000

_MASK = 0xFFFFFFFF


@dataclass(frozen=True)
class Halted:
    """Final data-segment words, keyed by variable name."""

    words: dict

    def __getitem__(self, name: str) -> int:
        return self.words[name]


@dataclass(frozen=True)
class BudgetExhausted:
    pass


@dataclass(frozen=True)
class Trap:
    reason: str


@dataclass
class MipsState:
    regs: dict = field(default_factory=dict)
    mem: dict = field(default_factory=dict)
    pc: int = 0
    halted: bool = False


def _to_signed(w: int) -> int:
    return w - 0x100000000 if w & 0x80000000 else w


def _var_name(label: str) -> str:
    return label[4:] if label.startswith("var_") else label


def simulate(prog: MipsProgram, init: dict | None = None, budget: int = 10**6):
    """Run prog from main; init maps variable names to starting words.

    Names in init without a matching data label are ignored.  Returns
    Halted with the final data words, BudgetExhausted, or Trap.
    """
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    labels: dict[str, int] = {}
    for idx, item in enumerate(prog.text):
        if isinstance(item, LabelDef):
            if item.name in labels:
                raise ValueError(f"duplicate label {item.name!r}")
            labels[item.name] = idx
    if "main" not in labels:
        raise ValueError("no main label")

    init = init or {}
    addr_of: dict[str, int] = {}
    state = MipsState()
    for i, (label, word) in enumerate(prog.data):
        addr = DATA_BASE + 4 * i
        addr_of[label] = addr
        state.mem[addr] = init.get(_var_name(label), word) & _MASK
    for item in prog.text:
        if not isinstance(item, Ins):
            continue
        for kind, arg in zip(SHAPES.get(item.op, ()), item.args):
            if kind == "label" and arg not in labels:
                raise ValueError(f"undefined branch target {arg!r}")
            if kind == "addr" and isinstance(arg, str) and arg not in addr_of:
                raise ValueError(f"undefined data label {arg!r}")
    state.regs = {"$sp": STACK_TOP}
    state.pc = labels["main"]

    regs, mem, text = state.regs, state.mem, prog.text

    def read(r: str) -> int:
        return regs.get(r, 0)

    def write(r: str, v: int) -> None:
        if r != "$zero":
            regs[r] = v & _MASK

    def resolve(arg) -> int:
        if isinstance(arg, Mem):
            return (read(arg.base) + arg.offset) & _MASK
        return addr_of[arg]

    while True:
        pc = state.pc
        if not 0 <= pc < len(text):
            state.halted = True
            return Trap(f"pc {pc} outside the text segment")
        item = text[pc]
        if isinstance(item, LabelDef):
            state.pc = pc + 1
            continue
        if budget == 0:
            return BudgetExhausted()
        budget -= 1
        op, args = item.op, item.args
        state.pc = pc + 1
        if op == "li":
            write(args[0], args[1])
        elif op == "lui":
            write(args[0], args[1] << 16)
        elif op == "ori":
            write(args[0], read(args[1]) | args[2])
        elif op == "addiu":
            write(args[0], read(args[1]) + args[2])
        elif op == "lw":
            addr = resolve(args[1])
            if addr % 4:
                state.halted = True
                return Trap(f"unaligned load at {addr:#010x}")
            write(args[0], mem.get(addr, 0))
        elif op == "sw":
            addr = resolve(args[1])
            if addr % 4:
                state.halted = True
                return Trap(f"unaligned store at {addr:#010x}")
            mem[addr] = read(args[0])
        elif op == "addu":
            write(args[0], read(args[1]) + read(args[2]))
        elif op == "subu":
            write(args[0], read(args[1]) - read(args[2]))
        elif op == "and":
            write(args[0], read(args[1]) & read(args[2]))
        elif op == "or":
            write(args[0], read(args[1]) | read(args[2]))
        elif op == "xor":
            write(args[0], read(args[1]) ^ read(args[2]))
        elif op == "nor":
            write(args[0], ~(read(args[1]) | read(args[2])))
        elif op == "sll":
            write(args[0], read(args[1]) << args[2])
        elif op == "srl":
            write(args[0], read(args[1]) >> args[2])
        elif op == "sllv":
            write(args[0], read(args[1]) << (read(args[2]) & 31))
        elif op == "srlv":
            write(args[0], read(args[1]) >> (read(args[2]) & 31))
        elif op == "slt":
            write(args[0], int(_to_signed(read(args[1])) < _to_signed(read(args[2]))))
        elif op == "sltu":
            write(args[0], int(read(args[1]) < read(args[2])))
        elif op == "beq":
            if read(args[0]) == read(args[1]):
                state.pc = labels[args[2]]
        elif op == "bne":
            if read(args[0]) != read(args[1]):
                state.pc = labels[args[2]]
        elif op == "j":
            state.pc = labels[args[0]]
        else:
            assert op == "break", f"unhandled mnemonic {op!r}"
            state.halted = True
            return Halted(
                {_var_name(label): mem[addr_of[label]] for label, _ in prog.data}
            )
