"""Lexer, parser, and pretty printer for `.imp` source.

Concrete syntax:

    program  := decl* com EOF
    decl     := "var" IDENT (":" ("i32" | "u32"))? ";"
    com      := "skip" | IDENT ":=" aexp | com ";" com
              | "if" bexp "then" com "else" com "end"
              | "while" bexp ("invariant" "{" assertion "}")? "do" com "done"

Arithmetic precedence, low to high: ``+ -`` (left), ``*`` (left), the
bit operators ``& | ^ << >>`` (left, one shared level), unary ``- ~``,
casts ``i32(...)`` / ``u32(...)``, atoms.  Boolean precedence, low to
high: ``||`` (left), ``&&`` (left), ``!``, then comparisons and
parenthesized boolean expressions.  Assertions reuse the boolean
grammar and add ``->`` (right-associative, lowest precedence).

Integer literals are decimal or hexadecimal (``0x...``); the pretty
printer always emits decimal.  Comments run from ``//`` to end of
line.  ``;`` is a separator, not a terminator, and sequences associate
to the right structurally.

The parser is recursive descent.  The only backtracking point is an
opening parenthesis in boolean/assertion position, which may introduce
either a parenthesized boolean formula or the left operand of a
comparison; both alternatives are tried and the error that made it
furthest wins.

The pretty printer emits minimal parentheses, so ``parse`` after
``pretty`` reproduces the input AST structurally (positions are not
compared).  Left-nested sequences are the one exception: ``pretty``
prints them flat and the parser rebuilds the chain right-nested, which
is semantically inert.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .errors import CimpError
from .syntax import (
    AAnd,
    ACmp,
    AExpr,
    AFalse,
    AImplies,
    ANot,
    AOr,
    ATrue,
    And,
    Assertion,
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
    SrcPos,
    Ty,
    Var,
    While,
)

KEYWORDS = frozenset(
    "skip if then else end while do done true false var invariant i32 u32".split()
)


@dataclass(frozen=True)
class Token:
    kind: str  # "keyword" | "ident" | "int" | "op" | "punct" | "eoi"
    lexeme: str
    line: int
    col: int

    @property
    def pos(self) -> SrcPos:
        return SrcPos(self.line, self.col)

    def describe(self) -> str:
        if self.kind == "eoi":
            return "end of input"
        return f"'{self.lexeme}'"


class LexError(CimpError):
    def __init__(self, char: str, pos: SrcPos):
        super().__init__(f"unexpected character {char!r}", pos)
        self.char = char


class ParseError(CimpError):
    """Raised at the first token that fits no production.

    ``expected`` lists the acceptable next tokens in display form;
    ``index`` is the offset into the token stream, used to pick the
    furthest failure when a backtracking point has to choose between
    two failed alternatives.
    """

    def __init__(self, expected: tuple[str, ...], found: Token, index: int):
        what = " or ".join(expected) if len(expected) <= 2 else (
            ", ".join(expected[:-1]) + " or " + expected[-1]
        )
        super().__init__(f"expected {what} but found {found.describe()}", found.pos)
        self.expected = expected
        self.found = found
        self.index = index


_TOKEN_RE = re.compile(
    r"""
      (?P<skip>[ \t\r\n]+|//[^\n]*)
    | (?P<int>0[xX][0-9A-Fa-f]+|[0-9]+)
    | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op>:=|<<|>>|<=|&&|\|\||->|[+\-*&|^~=<!])
    | (?P<punct>[();:{}])
    """,
    re.VERBOSE,
)


def lex(source: str) -> list[Token]:
    """Tokenize; comments and whitespace are discarded.

    The result always ends with an end-of-input token.  Any character
    outside the token alphabet raises LexError at its position.
    """
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(source)
    while i < n:
        m = _TOKEN_RE.match(source, i)
        if m is None:
            raise LexError(source[i], SrcPos(line, col))
        text = m.group()
        kind = m.lastgroup
        if kind == "int":
            tokens.append(Token("int", text, line, col))
        elif kind == "name":
            tokens.append(
                Token("keyword" if text in KEYWORDS else "ident", text, line, col)
            )
        elif kind == "op":
            tokens.append(Token("op", text, line, col))
        elif kind == "punct":
            tokens.append(Token("punct", text, line, col))
        # advance line/col over the lexeme (whitespace may span lines)
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rindex("\n")
        else:
            col += len(text)
        i = m.end()
    tokens.append(Token("eoi", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    # -- token plumbing ---------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.i]

    def at(self, *lexemes: str) -> bool:
        t = self.peek()
        return t.kind != "eoi" and t.lexeme in lexemes

    def advance(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eoi":
            self.i += 1
        return t

    def fail(self, *expected: str):
        raise ParseError(tuple(expected), self.peek(), self.i)

    def expect(self, lexeme: str, label: Optional[str] = None) -> Token:
        if not self.at(lexeme):
            self.fail(label or f"'{lexeme}'")
        return self.advance()

    def expect_ident(self) -> Token:
        if self.peek().kind != "ident":
            self.fail("an identifier")
        return self.advance()

    # -- arithmetic expressions -------------------------------------------

    def aexp(self) -> AExpr:
        left = self.aexp_mul()
        while self.at("+", "-"):
            op = self.advance()
            right = self.aexp_mul()
            left = BinOp(op.lexeme, left, right, pos=op.pos)
        return left

    def aexp_mul(self) -> AExpr:
        left = self.aexp_bits()
        while self.at("*"):
            op = self.advance()
            right = self.aexp_bits()
            left = BinOp("*", left, right, pos=op.pos)
        return left

    def aexp_bits(self) -> AExpr:
        left = self.aexp_unary()
        while self.at("&", "|", "^", "<<", ">>"):
            op = self.advance()
            right = self.aexp_unary()
            left = BitOp(op.lexeme, left, right, pos=op.pos)
        return left

    def aexp_unary(self) -> AExpr:
        if self.at("-"):
            op = self.advance()
            return Neg(self.aexp_unary(), pos=op.pos)
        if self.at("~"):
            op = self.advance()
            return BitNot(self.aexp_unary(), pos=op.pos)
        return self.aexp_atom()

    def aexp_atom(self) -> AExpr:
        t = self.peek()
        if t.kind == "int":
            self.advance()
            base = 16 if t.lexeme[:2].lower() == "0x" else 10
            return IntLit(int(t.lexeme, base), pos=t.pos)
        if t.kind == "ident":
            self.advance()
            return Var(t.lexeme, pos=t.pos)
        if t.lexeme in ("i32", "u32") and t.kind == "keyword":
            self.advance()
            self.expect("(")
            inner = self.aexp()
            self.expect(")")
            return Cast(Ty(t.lexeme), inner, pos=t.pos)
        if self.at("("):
            self.advance()
            inner = self.aexp()
            self.expect(")")
            return inner
        self.fail("an integer literal", "an identifier", "'('")

    # -- boolean expressions ----------------------------------------------

    def bexp(self) -> BExpr:
        left = self.bexp_and()
        while self.at("||"):
            op = self.advance()
            right = self.bexp_and()
            left = Or(left, right, pos=op.pos)
        return left

    def bexp_and(self) -> BExpr:
        left = self.bexp_not()
        while self.at("&&"):
            op = self.advance()
            right = self.bexp_not()
            left = And(left, right, pos=op.pos)
        return left

    def bexp_not(self) -> BExpr:
        if self.at("!"):
            op = self.advance()
            return Not(self.bexp_not(), pos=op.pos)
        return self.bexp_atom()

    def comparison(self) -> Cmp:
        left = self.aexp()
        if not self.at("=", "<=", "<"):
            self.fail("'='", "'<='", "'<'")
        op = self.advance()
        right = self.aexp()
        return Cmp(op.lexeme, left, right, pos=op.pos)

    def bexp_atom(self) -> BExpr:
        t = self.peek()
        if t.lexeme == "true" and t.kind == "keyword":
            self.advance()
            return BoolLit(True, pos=t.pos)
        if t.lexeme == "false" and t.kind == "keyword":
            self.advance()
            return BoolLit(False, pos=t.pos)
        if self.at("("):
            # Either a parenthesized formula or a comparison whose left
            # operand begins with '('.  Try both; report the failure
            # that consumed more input.
            return self._paren_or_comparison(self.bexp)
        return self.comparison()

    def _paren_or_comparison(self, formula):
        start = self.i
        try:
            return self.comparison()
        except ParseError as cmp_err:
            self.i = start
            try:
                self.advance()  # '('
                inner = formula()
                self.expect(")")
                return inner
            except ParseError as paren_err:
                raise (paren_err if paren_err.index >= cmp_err.index else cmp_err)

    # -- assertions ---------------------------------------------------------

    def assertion(self) -> Assertion:
        left = self.assertion_or()
        if self.at("->"):
            op = self.advance()
            right = self.assertion()  # right-associative
            return AImplies(left, right, pos=op.pos)
        return left

    def assertion_or(self) -> Assertion:
        left = self.assertion_and()
        while self.at("||"):
            op = self.advance()
            right = self.assertion_and()
            left = AOr(left, right, pos=op.pos)
        return left

    def assertion_and(self) -> Assertion:
        left = self.assertion_not()
        while self.at("&&"):
            op = self.advance()
            right = self.assertion_not()
            left = AAnd(left, right, pos=op.pos)
        return left

    def assertion_not(self) -> Assertion:
        if self.at("!"):
            op = self.advance()
            return ANot(self.assertion_not(), pos=op.pos)
        return self.assertion_atom()

    def assertion_atom(self) -> Assertion:
        t = self.peek()
        if t.lexeme == "true" and t.kind == "keyword":
            self.advance()
            return ATrue(pos=t.pos)
        if t.lexeme == "false" and t.kind == "keyword":
            self.advance()
            return AFalse(pos=t.pos)
        if self.at("("):
            got = self._paren_or_comparison(self.assertion)
            if isinstance(got, Cmp):
                return ACmp(got.op, got.left, got.right, pos=got.pos)
            return got
        c = self.comparison()
        return ACmp(c.op, c.left, c.right, pos=c.pos)

    # -- commands and programs ----------------------------------------------

    def com(self) -> Com:
        first = self.com_single()
        if self.at(";"):
            op = self.advance()
            rest = self.com()  # ';' nests to the right
            return Seq(first, rest, pos=op.pos)
        return first

    def com_single(self) -> Com:
        t = self.peek()
        if t.lexeme == "skip" and t.kind == "keyword":
            self.advance()
            return Skip(pos=t.pos)
        if t.lexeme == "if" and t.kind == "keyword":
            self.advance()
            cond = self.bexp()
            self.expect("then")
            then_branch = self.com()
            self.expect("else")
            else_branch = self.com()
            self.expect("end")
            return If(cond, then_branch, else_branch, pos=t.pos)
        if t.lexeme == "while" and t.kind == "keyword":
            self.advance()
            cond = self.bexp()
            invariant = None
            if self.at("invariant"):
                self.advance()
                self.expect("{")
                invariant = self.assertion()
                self.expect("}")
            self.expect("do")
            body = self.com()
            self.expect("done")
            return While(cond, invariant, body, pos=t.pos)
        if t.kind == "ident":
            self.advance()
            self.expect(":=")
            rhs = self.aexp()
            return Assign(t.lexeme, rhs, pos=t.pos)
        self.fail("'skip'", "'if'", "'while'", "an assignment")

    def decls(self) -> tuple[tuple[str, Optional[Ty]], ...]:
        out: list[tuple[str, Optional[Ty]]] = []
        seen: set[str] = set()
        while self.at("var"):
            self.advance()
            name_tok = self.expect_ident()
            if name_tok.lexeme in seen:
                raise ParseError(
                    ("a fresh variable name",), name_tok, self.i - 1
                )
            seen.add(name_tok.lexeme)
            ty: Optional[Ty] = None
            if self.at(":"):
                self.advance()
                if not self.at("i32", "u32"):
                    self.fail("'i32'", "'u32'")
                ty = Ty(self.advance().lexeme)
            self.expect(";")
            out.append((name_tok.lexeme, ty))
        return tuple(out)

    def program(self) -> Program:
        decls = self.decls()
        body = self.com()
        if self.peek().kind != "eoi":
            self.fail("';'", "end of input")
        return Program(decls, body)


def parse(tokens: list[Token]) -> Program:
    return _Parser(tokens).program()


def parse_assertion(tokens: list[Token]) -> Assertion:
    p = _Parser(tokens)
    a = p.assertion()
    if p.peek().kind != "eoi":
        p.fail("end of input")
    return a


def parse_program(source: str) -> Program:
    return parse(lex(source))


def parse_assertion_text(source: str) -> Assertion:
    return parse_assertion(lex(source))


# ---------------------------------------------------------------------------
# Pretty printing

_A_ADD, _A_MUL, _A_BIT, _A_UNARY, _A_ATOM = 1, 2, 3, 4, 5


def _pa(e: AExpr, ctx: int) -> str:
    match e:
        case IntLit(v):
            s, lvl = str(v), _A_ATOM
        case Var(name):
            s, lvl = name, _A_ATOM
        case Cast(target, operand):
            s, lvl = f"{target}({_pa(operand, _A_ADD)})", _A_ATOM
        case Neg(operand):
            s, lvl = "-" + _pa(operand, _A_UNARY), _A_UNARY
        case BitNot(operand):
            s, lvl = "~" + _pa(operand, _A_UNARY), _A_UNARY
        case BitOp(op, left, right):
            s, lvl = f"{_pa(left, _A_BIT)} {op} {_pa(right, _A_UNARY)}", _A_BIT
        case BinOp("*", left, right):
            s, lvl = f"{_pa(left, _A_MUL)} * {_pa(right, _A_BIT)}", _A_MUL
        case BinOp(op, left, right):
            s, lvl = f"{_pa(left, _A_ADD)} {op} {_pa(right, _A_MUL)}", _A_ADD
        case _:
            raise TypeError(f"not an AExpr: {e!r}")
    return f"({s})" if lvl < ctx else s


_B_OR, _B_AND, _B_NOT, _B_ATOM = 1, 2, 3, 4


def _pb(b: BExpr, ctx: int) -> str:
    match b:
        case BoolLit(v):
            s, lvl = ("true" if v else "false"), _B_ATOM
        case Cmp(op, left, right):
            s, lvl = f"{_pa(left, _A_ADD)} {op} {_pa(right, _A_ADD)}", _B_ATOM
        case Not(operand):
            s, lvl = "!" + _pb(operand, _B_NOT), _B_NOT
        case And(left, right):
            s, lvl = f"{_pb(left, _B_AND)} && {_pb(right, _B_NOT)}", _B_AND
        case Or(left, right):
            s, lvl = f"{_pb(left, _B_OR)} || {_pb(right, _B_AND)}", _B_OR
        case _:
            raise TypeError(f"not a BExpr: {b!r}")
    return f"({s})" if lvl < ctx else s


_S_IMP, _S_OR, _S_AND, _S_NOT, _S_ATOM = 1, 2, 3, 4, 5


def _ps(a: Assertion, ctx: int) -> str:
    match a:
        case ATrue():
            s, lvl = "true", _S_ATOM
        case AFalse():
            s, lvl = "false", _S_ATOM
        case ACmp(op, left, right):
            s, lvl = f"{_pa(left, _A_ADD)} {op} {_pa(right, _A_ADD)}", _S_ATOM
        case ANot(operand):
            s, lvl = "!" + _ps(operand, _S_NOT), _S_NOT
        case AAnd(left, right):
            s, lvl = f"{_ps(left, _S_AND)} && {_ps(right, _S_NOT)}", _S_AND
        case AOr(left, right):
            s, lvl = f"{_ps(left, _S_OR)} || {_ps(right, _S_AND)}", _S_OR
        case AImplies(left, right):
            s, lvl = f"{_ps(left, _S_OR)} -> {_ps(right, _S_IMP)}", _S_IMP
        case _:
            raise TypeError(f"not an Assertion: {a!r}")
    return f"({s})" if lvl < ctx else s


def pretty_aexpr(e: AExpr) -> str:
    return _pa(e, _A_ADD)


def pretty_bexpr(b: BExpr) -> str:
    return _pb(b, _B_OR)


def pretty_assertion(a: Assertion) -> str:
    return _ps(a, _S_IMP)


def _com_lines(c: Com, indent: int) -> list[str]:
    pad = "  " * indent
    match c:
        case Skip():
            return [pad + "skip"]
        case Assign(var, rhs):
            return [f"{pad}{var} := {pretty_aexpr(rhs)}"]
        case Seq(first, second):
            head = _com_lines(first, indent)
            head[-1] += ";"
            return head + _com_lines(second, indent)
        case If(cond, then_branch, else_branch):
            return (
                [f"{pad}if {pretty_bexpr(cond)} then"]
                + _com_lines(then_branch, indent + 1)
                + [pad + "else"]
                + _com_lines(else_branch, indent + 1)
                + [pad + "end"]
            )
        case While(cond, invariant, body):
            head = f"{pad}while {pretty_bexpr(cond)}"
            if invariant is not None:
                head += f" invariant {{ {pretty_assertion(invariant)} }}"
            return [head + " do"] + _com_lines(body, indent + 1) + [pad + "done"]
    raise TypeError(f"not a Com: {c!r}")


def pretty_com(c: Com) -> str:
    return "\n".join(_com_lines(c, 0))


def pretty(p: Program) -> str:
    lines = []
    for name, ty in p.decls:
        lines.append(f"var {name};" if ty is None else f"var {name}: {ty};")
    lines.extend(_com_lines(p.body, 0))
    return "\n".join(lines) + "\n"
