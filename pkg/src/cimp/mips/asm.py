"""Assembly text emission and parsing.

emit_asm prints a program in conventional two-section form; parse_asm
reads the same dialect back.  parse_asm(emit_asm(p)) == p for every
program built from the declared subset.
"""

from __future__ import annotations

import re

from ..errors import CimpError
from ..syntax import SrcPos
from .isa import SHAPES, Ins, LabelDef, Mem, MipsProgram, _IMM_RANGE, _REGSET


class AsmError(CimpError):
    """Raised on text that does not fit the declared subset."""

    def __init__(self, line: int, reason: str):
        super().__init__(reason, SrcPos(line, 1))
        self.line = line
        self.reason = reason


def _fmt_arg(arg) -> str:
    if isinstance(arg, Mem):
        return f"{arg.offset}({arg.base})"
    return str(arg)


def emit_asm(prog: MipsProgram) -> str:
    lines = ["\t.data"]
    for label, word in prog.data:
        lines.append(f"{label}: .word {word}")
    lines.append("\t.text")
    lines.append("\t.globl main")
    for item in prog.text:
        if isinstance(item, LabelDef):
            lines.append(f"{item.name}:")
        else:
            if item.args:
                operands = ", ".join(_fmt_arg(a) for a in item.args)
                lines.append(f"\t{item.op} {operands}")
            else:
                lines.append(f"\t{item.op}")
    return "\n".join(lines) + "\n"


_LABEL_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_MEM_RE = re.compile(r"^(-?\d+)\((\$[a-z0-9]+)\)$")
_DATA_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*):\s*\.word\s+(-?\d+)$")


def _parse_operand(kind: str, token: str, line_no: int):
    if kind == "reg":
        if token not in _REGSET:
            raise AsmError(line_no, f"unknown register {token!r}")
        return token
    if kind in _IMM_RANGE:
        lo, hi = _IMM_RANGE[kind]
        try:
            value = int(token, 0)
        except ValueError:
            raise AsmError(line_no, f"expected an integer, got {token!r}") from None
        if not lo <= value <= hi:
            raise AsmError(line_no, f"immediate {value} outside [{lo}, {hi}]")
        return value
    if kind == "addr":
        m = _MEM_RE.match(token)
        if m:
            offset, base = int(m.group(1)), m.group(2)
            if base not in _REGSET:
                raise AsmError(line_no, f"unknown register {base!r}")
            if not -0x8000 <= offset <= 0x7FFF:
                raise AsmError(line_no, f"offset {offset} outside [-32768, 32767]")
            return Mem(offset, base)
        if not _LABEL_RE.match(token):
            raise AsmError(line_no, f"expected a label or offset($reg), got {token!r}")
        return token
    assert kind == "label"
    if not _LABEL_RE.match(token):
        raise AsmError(line_no, f"expected a label, got {token!r}")
    return token


def parse_asm(src: str) -> MipsProgram:
    """Parse assembly text, checking mnemonics, operands and labels."""
    data: list[tuple[str, int]] = []
    text: list = []
    # (line, label, kind) for each referenced label, checked after the pass
    refs: list[tuple[int, str, str]] = []
    defined: dict[str, int] = {}
    section = "text"

    def define(name: str, line_no: int) -> None:
        if name in defined:
            raise AsmError(line_no, f"duplicate label {name!r}")
        defined[name] = line_no

    for line_no, raw in enumerate(src.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("."):
            directive = line.split()[0]
            if directive == ".data":
                section = "data"
            elif directive == ".text":
                section = "text"
            elif directive == ".globl":
                pass
            else:
                raise AsmError(line_no, f"unknown directive {directive!r}")
            continue
        if section == "data":
            m = _DATA_RE.match(line)
            if not m:
                raise AsmError(line_no, "expected 'label: .word value'")
            define(m.group(1), line_no)
            data.append((m.group(1), int(m.group(2)) & 0xFFFFFFFF))
            continue
        if line.endswith(":"):
            name = line[:-1].strip()
            if not _LABEL_RE.match(name):
                raise AsmError(line_no, f"bad label name {name!r}")
            define(name, line_no)
            text.append(LabelDef(name))
            continue
        parts = line.split(None, 1)
        op = parts[0]
        shape = SHAPES.get(op)
        if shape is None:
            raise AsmError(line_no, f"unknown mnemonic {op!r}")
        tokens = [t.strip() for t in parts[1].split(",")] if len(parts) > 1 else []
        if len(tokens) != len(shape):
            raise AsmError(line_no, f"{op} takes {len(shape)} operands, got {len(tokens)}")
        args = tuple(
            _parse_operand(kind, token, line_no) for kind, token in zip(shape, tokens)
        )
        for kind, arg in zip(shape, args):
            if kind == "label" or (kind == "addr" and isinstance(arg, str)):
                refs.append((line_no, arg, kind))
        text.append(Ins(op, args))

    data_names = {name for name, _ in data}
    text_names = {i.name for i in text if isinstance(i, LabelDef)}
    for line_no, name, kind in refs:
        if kind == "label":
            if name not in text_names:
                raise AsmError(line_no, f"undefined branch target {name!r}")
        elif name not in data_names:
            raise AsmError(line_no, f"undefined data label {name!r}")
    return MipsProgram(data=tuple(data), text=tuple(text))
