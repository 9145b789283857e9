"""Hoare triples, weakest liberal preconditions, and VC generation.

``wlp`` computes the weakest liberal precondition of a command against
a postcondition, collecting side conditions for loops: each annotated
``while`` contributes a preservation VC (invariant and guard imply the
invariant after the body) and an exit VC (invariant and negated guard
imply the local postcondition), and its own wlp is simply the
invariant.  ``vcgen`` prepends the top implication ``pre -> wlp``.
The consequence rule is absorbed into the top and exit implications,
so no dedicated operation exists for it.

Assertions are quantifier-free, so substitution cannot capture, and
a VC's validity means truth in every store over unbounded integers.
Two discharge routes are provided: ``emit_smtlib`` renders a VC as an
SMT-LIB2 script whose unsatisfiability is equivalent to validity, and
``bounded_check`` enumerates all stores over a box [-bound, bound],
which is complete only over that box but entirely self-contained.
"""

from __future__ import annotations

import itertools
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .errors import CimpError, UnsupportedNode
from .semantics import Store, aeval
from .syntax import (
    AAnd,
    ACmp,
    AExpr,
    AFalse,
    AImplies,
    ANot,
    AOr,
    Assertion,
    Assign,
    ATrue,
    BinOp,
    BitNot,
    BitOp,
    Cast,
    Com,
    If,
    IntLit,
    Neg,
    Seq,
    Skip,
    Var,
    While,
    assertion_vars,
    bexpr_to_assertion,
)


class MissingInvariant(CimpError):
    """A loop reachable by vcgen has no invariant annotation."""


class BudgetExceeded(CimpError):
    """bounded_check would enumerate more stores than its cap allows."""


@dataclass(frozen=True)
class HoareTriple:
    pre: Assertion
    com: Com
    post: Assertion


VC_ORIGINS = ("top", "init", "preservation", "exit")


@dataclass(frozen=True)
class VerificationCondition:
    origin: str  # one of VC_ORIGINS ("init" is reserved; wlp folds
    # invariant initialization into the top implication)
    formula: Assertion


@dataclass(frozen=True)
class Valid:
    pass


@dataclass(frozen=True)
class Counterexample:
    store: Store


BoundedResult = Union[Valid, Counterexample]


# ---------------------------------------------------------------------------
# Assertion evaluation and substitution


def assertion_holds(s: Store, a: Assertion) -> bool:
    match a:
        case ATrue():
            return True
        case AFalse():
            return False
        case ACmp("=", left, right):
            return aeval(s, left) == aeval(s, right)
        case ACmp("<=", left, right):
            return aeval(s, left) <= aeval(s, right)
        case ACmp("<", left, right):
            return aeval(s, left) < aeval(s, right)
        case ANot(operand):
            return not assertion_holds(s, operand)
        case AAnd(left, right):
            return assertion_holds(s, left) and assertion_holds(s, right)
        case AOr(left, right):
            return assertion_holds(s, left) or assertion_holds(s, right)
        case AImplies(left, right):
            return (not assertion_holds(s, left)) or assertion_holds(s, right)
    raise TypeError(f"not an Assertion: {a!r}")


def _subst_aexpr(t: AExpr, x: str, e: AExpr) -> AExpr:
    match t:
        case IntLit():
            return t
        case Var(name):
            return e if name == x else t
        case Neg(operand):
            return Neg(_subst_aexpr(operand, x, e))
        case BitNot(operand):
            return BitNot(_subst_aexpr(operand, x, e))
        case Cast(target, operand):
            return Cast(target, _subst_aexpr(operand, x, e))
        case BinOp(op, left, right):
            return BinOp(op, _subst_aexpr(left, x, e), _subst_aexpr(right, x, e))
        case BitOp(op, left, right):
            return BitOp(op, _subst_aexpr(left, x, e), _subst_aexpr(right, x, e))
    raise TypeError(f"not an AExpr: {t!r}")


def subst(a: Assertion, x: str, e: AExpr) -> Assertion:
    """Replace every occurrence of variable x in a by e."""
    match a:
        case ATrue() | AFalse():
            return a
        case ACmp(op, left, right):
            return ACmp(op, _subst_aexpr(left, x, e), _subst_aexpr(right, x, e))
        case ANot(operand):
            return ANot(subst(operand, x, e))
        case AAnd(left, right):
            return AAnd(subst(left, x, e), subst(right, x, e))
        case AOr(left, right):
            return AOr(subst(left, x, e), subst(right, x, e))
        case AImplies(left, right):
            return AImplies(subst(left, x, e), subst(right, x, e))
    raise TypeError(f"not an Assertion: {a!r}")


# ---------------------------------------------------------------------------
# wlp and vcgen


def wlp(c: Com, q: Assertion) -> tuple[Assertion, list[VerificationCondition]]:
    """Weakest liberal precondition plus loop side conditions.

    Side conditions appear in program order: obligations of earlier
    commands first, and for a loop the body's own obligations before
    the loop's preservation and exit VCs.
    """
    match c:
        case Skip():
            return q, []
        case Assign(var, rhs):
            return subst(q, var, rhs), []
        case Seq(first, second):
            w2, s2 = wlp(second, q)
            w1, s1 = wlp(first, w2)
            return w1, s1 + s2
        case If(cond, then_branch, else_branch):
            b = bexpr_to_assertion(cond)
            w1, s1 = wlp(then_branch, q)
            w2, s2 = wlp(else_branch, q)
            return AAnd(AImplies(b, w1), AImplies(ANot(b), w2)), s1 + s2
        case While(cond, invariant, body):
            if invariant is None:
                raise MissingInvariant(
                    "loop has no invariant annotation; vcgen requires one", c.pos
                )
            b = bexpr_to_assertion(cond)
            wbody, sides = wlp(body, invariant)
            preservation = VerificationCondition(
                "preservation", AImplies(AAnd(invariant, b), wbody)
            )
            exit_vc = VerificationCondition(
                "exit", AImplies(AAnd(invariant, ANot(b)), q)
            )
            return invariant, sides + [preservation, exit_vc]
    raise TypeError(f"not a Com: {c!r}")


def vcgen(t: HoareTriple) -> list[VerificationCondition]:
    """All proof obligations of the triple: [top implication] + sides."""
    w, sides = wlp(t.com, t.post)
    return [VerificationCondition("top", AImplies(t.pre, w))] + sides


# ---------------------------------------------------------------------------
# SMT-LIB2 export


def _smt_aexpr(e: AExpr) -> str:
    match e:
        case IntLit(v):
            return str(v)
        case Var(name):
            return name
        case Neg(operand):
            return f"(- {_smt_aexpr(operand)})"
        case BinOp(op, left, right):
            return f"({op} {_smt_aexpr(left)} {_smt_aexpr(right)})"
        case BitOp() | BitNot() | Cast():
            raise UnsupportedNode(
                "bit-level operators cannot appear in exported assertions", e.pos
            )
    raise TypeError(f"not an AExpr: {e!r}")


def _smt_assertion(a: Assertion) -> str:
    match a:
        case ATrue():
            return "true"
        case AFalse():
            return "false"
        case ACmp(op, left, right):
            return f"({op} {_smt_aexpr(left)} {_smt_aexpr(right)})"
        case ANot(operand):
            return f"(not {_smt_assertion(operand)})"
        case AAnd(left, right):
            return f"(and {_smt_assertion(left)} {_smt_assertion(right)})"
        case AOr(left, right):
            return f"(or {_smt_assertion(left)} {_smt_assertion(right)})"
        case AImplies(left, right):
            return f"(=> {_smt_assertion(left)} {_smt_assertion(right)})"
    raise TypeError(f"not an Assertion: {a!r}")


def _is_const(e: AExpr) -> bool:
    match e:
        case IntLit():
            return True
        case Neg(IntLit()):
            return True
    return False


def _nonlinear_aexpr(e: AExpr) -> bool:
    match e:
        case IntLit() | Var():
            return False
        case Neg(x) | BitNot(x) | Cast(_, x):
            return _nonlinear_aexpr(x)
        case BinOp("*", left, right):
            if not (_is_const(left) or _is_const(right)):
                return True
            return _nonlinear_aexpr(left) or _nonlinear_aexpr(right)
        case BinOp(_, left, right) | BitOp(_, left, right):
            return _nonlinear_aexpr(left) or _nonlinear_aexpr(right)
    raise TypeError(f"not an AExpr: {e!r}")


def _nonlinear(a: Assertion) -> bool:
    match a:
        case ATrue() | AFalse():
            return False
        case ACmp(_, left, right):
            return _nonlinear_aexpr(left) or _nonlinear_aexpr(right)
        case ANot(operand):
            return _nonlinear(operand)
        case AAnd(left, right) | AOr(left, right) | AImplies(left, right):
            return _nonlinear(left) or _nonlinear(right)
    raise TypeError(f"not an Assertion: {a!r}")


def emit_smtlib(vc: VerificationCondition) -> str:
    """SMT-LIB2 script; the VC is valid iff the script is unsat."""
    logic = "QF_NIA" if _nonlinear(vc.formula) else "QF_LIA"
    lines = [f"(set-logic {logic})"]
    for v in sorted(assertion_vars(vc.formula)):
        lines.append(f"(declare-const {v} Int)")
    lines.append(f"(assert (not {_smt_assertion(vc.formula)}))")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def solve_smtlib(script: str, solver: str, timeout: float = 60.0) -> str:
    """Run an external SMT solver on a script; returns its verdict line.

    The solver executable receives the script as a file path argument
    and is expected to print sat/unsat/unknown on the first line.
    """
    with tempfile.NamedTemporaryFile(
        "w", suffix=".smt2", delete=False
    ) as handle:
        handle.write(script)
        path = handle.name
    try:
        proc = subprocess.run(
            [solver, path], capture_output=True, text=True, timeout=timeout
        )
        out = proc.stdout.strip().splitlines()
        return out[0].strip() if out else f"no output (exit {proc.returncode})"
    finally:
        Path(path).unlink(missing_ok=True)


# ---------------------------------------------------------------------------
# Bounded enumeration oracle


def bounded_check(
    vc: VerificationCondition, bound: int, budget: int = 10_000_000
) -> BoundedResult:
    """Exhaustive truth check over the box [-bound, bound]^vars.

    Sound and complete only over the enumerated box: Valid here does
    not imply validity over all integers.  Enumeration is ordered
    (variables sorted by name, values ascending), so the first
    counterexample is deterministic.
    """
    if bound < 1:
        raise ValueError("bound must be positive")
    names = sorted(assertion_vars(vc.formula))
    width = 2 * bound + 1
    if width ** len(names) > budget:
        raise BudgetExceeded(
            f"{width}^{len(names)} stores exceed the enumeration cap of {budget}"
        )
    values = range(-bound, bound + 1)
    for assignment in itertools.product(values, repeat=len(names)):
        store = Store(dict(zip(names, assignment)))
        if not assertion_holds(store, vc.formula):
            return Counterexample(store)
    return Valid()
