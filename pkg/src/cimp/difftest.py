"""Differential execution of generated programs across engines.

Each case runs every selected engine on the same program and initial
store and compares canonical outcomes.  Untyped programs compare exact
final stores across the unbounded engines; typed programs compare
32-bit words between the fixed-width reference and the MIPS simulator.
Divergence is data, not an error: it lands in the report.

Engines:
    bigstep     fueled big-step (fixed-width when the program is typed)
    smallstep   reflexive-transitive small-step closure (untyped only)
    stackvm     stack-machine compile + fueled VM (untyped only)
    mips        codegen + instruction-level simulator (typed only)
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Callable, Optional

from .frontend import pretty
from .generator import GenSpec, fuel_bound, gen_program
from .mips import BudgetExhausted, Halted, Trap, codegen, simulate
from .semantics import Done, Store, ceval_fuel, run_small
from .stack_machine import MachineError, compile_program, vm_exec
from .syntax import Program
from .typecheck import ceval_fixed, typecheck, word32

ENGINE_NAMES = ("bigstep", "smallstep", "stackvm", "mips")

# outcome: ("done", comparable) | ("out_of_fuel", None) | ("error", reason)
Outcome = tuple
Engine = Callable[[Program, Store, int, int], Outcome]


@dataclass(frozen=True)
class Divergence:
    index: int
    program: str
    store: Store
    outputs: dict


@dataclass(frozen=True)
class DiffReport:
    cases: int
    agreements: int
    divergences: int
    skipped: int
    tallies: dict
    first_divergence: Optional[Divergence]

    @property
    def ok(self) -> bool:
        return self.divergences == 0 and self.skipped == 0


def _words(p: Program, store: Store) -> dict:
    return {name: word32(store.get(name)) for name, _ in p.decls}


def _eng_bigstep(p: Program, store: Store, fuel: int, budget: int) -> Outcome:
    if p.typed:
        out = ceval_fixed(fuel, typecheck(p), store)
        return ("done", _words(p, out.store)) if isinstance(out, Done) else ("out_of_fuel", None)
    out = ceval_fuel(fuel, p.body, store)
    return ("done", out.store) if isinstance(out, Done) else ("out_of_fuel", None)


def _eng_smallstep(p: Program, store: Store, fuel: int, budget: int) -> Outcome:
    out = run_small(fuel, p.body, store)
    return ("done", out.store) if isinstance(out, Done) else ("out_of_fuel", None)


def _eng_stackvm(p: Program, store: Store, fuel: int, budget: int) -> Outcome:
    out = vm_exec(fuel, compile_program(p), store)
    if isinstance(out, Done):
        return ("done", out.store)
    if isinstance(out, MachineError):
        return ("error", out.reason)
    return ("out_of_fuel", None)


def _mips_engine(strategy: str) -> Engine:
    def run(p: Program, store: Store, fuel: int, budget: int) -> Outcome:
        prog = codegen(p, strategy=strategy, emulate_mul=True)
        out = simulate(prog, init=dict(store.items()), budget=budget)
        if isinstance(out, Halted):
            return ("done", dict(out.words))
        if isinstance(out, Trap):
            return ("error", out.reason)
        assert isinstance(out, BudgetExhausted)
        return ("out_of_fuel", None)

    return run


DEFAULT_ENGINES = {
    "bigstep": _eng_bigstep,
    "smallstep": _eng_smallstep,
    "stackvm": _eng_stackvm,
    "mips": _mips_engine("naive"),
}


def default_engine_names(typed: bool) -> tuple[str, ...]:
    return ("bigstep", "mips") if typed else ("bigstep", "smallstep", "stackvm")


def _init_store(rng: random.Random, p: Program, typed: bool) -> Store:
    names = [name for name, _ in p.decls] if p.decls else ["a", "b", "c", "d"]
    bindings = {}
    for name in names:
        if typed:
            bindings[name] = (
                rng.getrandbits(32) if rng.random() < 0.3 else rng.randint(0, 40)
            )
        else:
            bindings[name] = rng.randint(-20, 40)
    return Store(bindings)


def run_diff(
    spec: GenSpec,
    count: int,
    engines: Optional[tuple[str, ...]] = None,
    fail_fast: bool = False,
    impls: Optional[dict[str, Engine]] = None,
    budget: int = 10**7,
) -> DiffReport:
    """Generate count cases from spec and compare engine outcomes."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    names = tuple(engines) if engines else default_engine_names(spec.typed)
    for name in names:
        if name not in ENGINE_NAMES:
            raise ValueError(f"unknown engine {name!r}")
    if "mips" in names and not spec.typed:
        raise ValueError("engine mips requires typed generation")
    if spec.typed:
        for name in names:
            if name in ("smallstep", "stackvm"):
                raise ValueError(f"engine {name} runs untyped programs only")
    table = dict(DEFAULT_ENGINES)
    if impls:
        table.update(impls)

    rng = random.Random(spec.seed)
    fuel = fuel_bound(spec)
    cases = agreements = divergences = skipped = 0
    tallies: dict[str, dict[str, int]] = {n: {} for n in names}
    first: Optional[Divergence] = None

    for index in range(count):
        case_seed = rng.getrandbits(64)
        program = gen_program(replace(spec, seed=case_seed))
        store = _init_store(rng, program, spec.typed)
        outputs = {}
        for name in names:
            out = table[name](program, store, fuel, budget)
            outputs[name] = out
            kind = out[0]
            tallies[name][kind] = tallies[name].get(kind, 0) + 1
        cases += 1
        if len(_distinct(outputs.values())) == 1:
            agreements += 1
            continue
        divergences += 1
        if first is None:
            first = Divergence(index, pretty(program), store, outputs)
        if fail_fast:
            break

    return DiffReport(cases, agreements, divergences, skipped, tallies, first)


def _distinct(outcomes) -> list:
    seen: list = []
    for o in outcomes:
        if o not in seen:
            seen.append(o)
    return seen
