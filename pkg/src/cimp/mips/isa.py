"""Instruction set for the MIPS-subset backend.

Instructions are kept symbolic: register operands are names like "$t0",
memory operands are either a data label or offset($base), and branch
targets are label names.  Label definitions live in the text stream as
their own entries; the simulator resolves them to instruction indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

REGISTERS = (
    "$zero",
    "$at",
    "$v0",
    "$t0",
    "$t1",
    "$t2",
    "$t3",
    "$t4",
    "$t5",
    "$t6",
    "$t7",
    "$t8",
    "$t9",
    "$s0",
    "$s1",
    "$s2",
    "$s3",
    "$s4",
    "$s5",
    "$s6",
    "$s7",
    "$sp",
    "$ra",
)

_REGSET = frozenset(REGISTERS)


@dataclass(frozen=True)
class Mem:
    """offset($base) addressing."""

    offset: int
    base: str


@dataclass(frozen=True)
class Ins:
    op: str
    args: tuple = ()


@dataclass(frozen=True)
class LabelDef:
    name: str


MipsInstr = Union[Ins, LabelDef]


@dataclass(frozen=True)
class MipsProgram:
    data: tuple[tuple[str, int], ...] = ()
    text: tuple[MipsInstr, ...] = ()


# operand shapes per mnemonic: reg, imm16u, imm16s, shamt, addr, label
SHAPES = {
    "li": ("reg", "imm16u"),
    "lui": ("reg", "imm16u"),
    "ori": ("reg", "reg", "imm16u"),
    "addiu": ("reg", "reg", "imm16s"),
    "lw": ("reg", "addr"),
    "sw": ("reg", "addr"),
    "addu": ("reg", "reg", "reg"),
    "subu": ("reg", "reg", "reg"),
    "and": ("reg", "reg", "reg"),
    "or": ("reg", "reg", "reg"),
    "xor": ("reg", "reg", "reg"),
    "nor": ("reg", "reg", "reg"),
    "sllv": ("reg", "reg", "reg"),
    "srlv": ("reg", "reg", "reg"),
    "slt": ("reg", "reg", "reg"),
    "sltu": ("reg", "reg", "reg"),
    "sll": ("reg", "reg", "shamt"),
    "srl": ("reg", "reg", "shamt"),
    "beq": ("reg", "reg", "label"),
    "bne": ("reg", "reg", "label"),
    "j": ("label",),
    "break": (),
}

_IMM_RANGE = {
    "imm16u": (0, 0xFFFF),
    "imm16s": (-0x8000, 0x7FFF),
    "shamt": (0, 31),
}


def operand_ok(kind: str, arg) -> bool:
    if kind == "reg":
        return isinstance(arg, str) and arg in _REGSET
    if kind in _IMM_RANGE:
        lo, hi = _IMM_RANGE[kind]
        return isinstance(arg, int) and lo <= arg <= hi
    if kind == "addr":
        if isinstance(arg, Mem):
            return arg.base in _REGSET and -0x8000 <= arg.offset <= 0x7FFF
        return isinstance(arg, str) and not arg.startswith("$")
    assert kind == "label"
    return isinstance(arg, str) and not arg.startswith("$")


def ins(op: str, *args) -> Ins:
    """Build an instruction, checking the operand shape."""
    shape = SHAPES.get(op)
    if shape is None:
        raise ValueError(f"unknown mnemonic {op!r}")
    if len(args) != len(shape):
        raise ValueError(f"{op} takes {len(shape)} operands, got {len(args)}")
    for kind, arg in zip(shape, args):
        if not operand_ok(kind, arg):
            raise ValueError(f"bad {kind} operand {arg!r} for {op}")
    return Ins(op, tuple(args))


def well_formed(prog: MipsProgram) -> bool:
    """Text starts at main, ends in break, labels unique and resolved."""
    if not prog.text or prog.text[0] != LabelDef("main"):
        return False
    if prog.text[-1] != Ins("break"):
        return False
    text_labels = [i.name for i in prog.text if isinstance(i, LabelDef)]
    data_labels = [name for name, _ in prog.data]
    all_labels = text_labels + data_labels
    if len(set(all_labels)) != len(all_labels):
        return False
    for item in prog.text:
        if not isinstance(item, Ins):
            continue
        shape = SHAPES.get(item.op)
        if shape is None or len(shape) != len(item.args):
            return False
        for kind, arg in zip(shape, item.args):
            if not operand_ok(kind, arg):
                return False
            if kind == "label" and arg not in text_labels:
                return False
            if kind == "addr" and isinstance(arg, str) and arg not in data_labels:
                return False
    return all(w == w & 0xFFFFFFFF for _, w in prog.data)
