"""Reference semantics for imp over unbounded integers.

Two interchangeable executions are provided:

* ``ceval_fuel``: big-step evaluation with a fuel budget.  Fuel is an
  iteration budget: only loop unfoldings consume it (one unit each),
  straight-line code is free.  A loop entered with zero fuel reports
  ``OutOfFuel`` before even testing its guard, so ``ceval_fuel(0, c, s)``
  can complete only for loop-free ``c``.
* ``step`` / ``run_small``: a small-step transition relation over
  (command, store) configurations, with expressions evaluated atomically.
  ``run_small`` drives it for a bounded number of steps.

Both agree on ``Done`` results; the property tests and the differential
harness lean on that.

Stores are immutable total maps: absent names read as 0, and equality
compares the induced function (an explicit ``x = 0`` binding equals no
binding at all).  There are no runtime errors in the core language:
evaluation of a core expression always yields an integer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

from .errors import UnsupportedNode
from .syntax import (
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
    And,
    Or,
    AExpr,
    Seq,
    Skip,
    Var,
    While,
)


class Store:
    """Immutable total map from variable names to unbounded integers.

    Lookup never fails: unbound names read as 0.  Two stores are equal
    when they denote the same total function, so explicitly binding a
    name to 0 is indistinguishable from not binding it.
    """

    __slots__ = ("_bindings",)

    def __init__(self, bindings: Optional[Mapping[str, int]] = None):
        self._bindings: dict[str, int] = dict(bindings) if bindings else {}

    def get(self, name: str) -> int:
        return self._bindings.get(name, 0)

    def set(self, name: str, value: int) -> "Store":
        out = Store(self._bindings)
        out._bindings[name] = value
        return out

    def items(self) -> Iterable[tuple[str, int]]:
        return self._bindings.items()

    def domain(self) -> frozenset[str]:
        return frozenset(self._bindings)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Store):
            return NotImplemented
        for name in self._bindings.keys() | other._bindings.keys():
            if self.get(name) != other.get(name):
                return False
        return True

    def __hash__(self) -> int:
        return hash(frozenset((k, v) for k, v in self._bindings.items() if v != 0))

    def __repr__(self) -> str:
        inside = ", ".join(f"{k}={v}" for k, v in sorted(self._bindings.items()))
        return f"Store({{{inside}}})"


def format_store(s: Store) -> str:
    """One ``name=value`` line per explicit binding, names sorted."""
    return "".join(f"{k}={v}\n" for k, v in sorted(s.items()))


def parse_store(text: str) -> Store:
    """Inverse of format_store; blank lines are ignored."""
    bindings: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        name, sep, value = line.partition("=")
        name = name.strip()
        value = value.strip()
        if not sep or not name:
            raise ValueError(f"store line {lineno}: expected name=value, got {raw!r}")
        try:
            bindings[name] = int(value)
        except ValueError:
            raise ValueError(
                f"store line {lineno}: {value!r} is not a decimal integer"
            ) from None
    return Store(bindings)


# ---------------------------------------------------------------------------
# Outcomes and step results


@dataclass(frozen=True)
class Done:
    store: Store


@dataclass(frozen=True)
class OutOfFuel:
    pass


Outcome = Union[Done, OutOfFuel]

OUT_OF_FUEL = OutOfFuel()


@dataclass(frozen=True)
class Next:
    com: Com
    store: Store


@dataclass(frozen=True)
class Terminal:
    pass


StepResult = Union[Next, Terminal]

TERMINAL = Terminal()


# ---------------------------------------------------------------------------
# Expression evaluation


def aeval(s: Store, e: AExpr) -> int:
    match e:
        case IntLit(v):
            return v
        case Var(name):
            return s.get(name)
        case Neg(operand):
            return -aeval(s, operand)
        case BinOp("+", left, right):
            return aeval(s, left) + aeval(s, right)
        case BinOp("-", left, right):
            return aeval(s, left) - aeval(s, right)
        case BinOp("*", left, right):
            return aeval(s, left) * aeval(s, right)
        case BitOp(op, _, _):
            raise UnsupportedNode(
                f"bit operator '{op}' is only available in typed programs", e.pos
            )
        case BitNot():
            raise UnsupportedNode(
                "bit complement '~' is only available in typed programs", e.pos
            )
        case Cast(target, _):
            raise UnsupportedNode(
                f"cast '{target}(...)' is only available in typed programs", e.pos
            )
    raise TypeError(f"not an AExpr: {e!r}")


def beval(s: Store, b: BExpr) -> bool:
    match b:
        case BoolLit(v):
            return v
        case Cmp("=", left, right):
            return aeval(s, left) == aeval(s, right)
        case Cmp("<=", left, right):
            return aeval(s, left) <= aeval(s, right)
        case Cmp("<", left, right):
            return aeval(s, left) < aeval(s, right)
        case Not(operand):
            return not beval(s, operand)
        case And(left, right):
            return beval(s, left) and beval(s, right)
        case Or(left, right):
            return beval(s, left) or beval(s, right)
    raise TypeError(f"not a BExpr: {b!r}")


# ---------------------------------------------------------------------------
# Big-step evaluation with fuel


def _ceval(fuel: int, c: Com, s: Store) -> Optional[tuple[int, Store]]:
    """Returns (remaining fuel, final store), or None when fuel ran out."""
    match c:
        case Skip():
            return fuel, s
        case Assign(var, rhs):
            return fuel, s.set(var, aeval(s, rhs))
        case Seq(first, second):
            r = _ceval(fuel, first, s)
            if r is None:
                return None
            return _ceval(r[0], second, r[1])
        case If(cond, then_branch, else_branch):
            taken = then_branch if beval(s, cond) else else_branch
            return _ceval(fuel, taken, s)
        case While(cond, _, body):
            # Iterative on purpose: recursion depth must not scale with
            # the iteration count.
            while True:
                if fuel == 0:
                    return None
                if not beval(s, cond):
                    return fuel, s
                r = _ceval(fuel - 1, body, s)
                if r is None:
                    return None
                fuel, s = r
    raise TypeError(f"not a Com: {c!r}")


def ceval_fuel(fuel: int, c: Com, s: Store) -> Outcome:
    """Big-step evaluation; fuel bounds the number of loop unfoldings."""
    if fuel < 0:
        raise ValueError("fuel must be nonnegative")
    r = _ceval(fuel, c, s)
    if r is None:
        return OUT_OF_FUEL
    return Done(r[1])


# ---------------------------------------------------------------------------
# Small-step relation


def step(c: Com, s: Store) -> StepResult:
    """One transition of the command-level small-step relation.

    Expressions are evaluated atomically; a While unfolds to its
    conditional form in a single step, keeping its invariant annotation.
    """
    match c:
        case Skip():
            return TERMINAL
        case Assign(var, rhs):
            return Next(Skip(), s.set(var, aeval(s, rhs)))
        case Seq(Skip(), second):
            return Next(second, s)
        case Seq(first, second):
            r = step(first, s)
            assert isinstance(r, Next)  # only Skip is terminal, handled above
            return Next(Seq(r.com, second), r.store)
        case If(cond, then_branch, else_branch):
            return Next(then_branch if beval(s, cond) else else_branch, s)
        case While(cond, _, body):
            return Next(If(cond, Seq(body, c), Skip()), s)
    raise TypeError(f"not a Com: {c!r}")


def run_small(max_steps: int, c: Com, s: Store) -> Outcome:
    """Drive step for at most max_steps transitions.

    Done is returned as soon as a Terminal result appears; reaching the
    budget first yields OutOfFuel.  The minimal sufficient budget for a
    terminating program is therefore observable by bisection.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be nonnegative")
    for _ in range(max_steps):
        r = step(c, s)
        if isinstance(r, Terminal):
            return Done(s)
        c, s = r.com, r.store
    return OUT_OF_FUEL
