"""The cimp command-line driver.

Exit codes: 0 on success, 1 on user error (bad flags, unreadable input,
parse/type errors, failed bounded verification, fuzz divergence), 2 on
an internal invariant violation.  Located failures render one line to
standard error as ``FILE:line:col: error: message``.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .difftest import run_diff
from .errors import CimpError
from .frontend import parse_assertion_text, parse_program
from .generator import GenSpec
from .hoare import (
    Counterexample,
    HoareTriple,
    Valid,
    bounded_check,
    emit_smtlib,
    solve_smtlib,
    vcgen,
)
from .mips import BudgetExhausted, Halted, Ins, Trap, codegen, emit_asm, simulate
from .optimizer import OPT_LEVELS, optimize
from .semantics import (
    Done,
    Store,
    ceval_fuel,
    format_store,
    parse_store,
    run_small,
)
from .stack_machine import MachineError, compile_program, listing, vm_exec
from .syntax import ATrue, Program, Ty
from .typecheck import ceval_fixed, to_signed, typecheck, word32

ENGINES = ("bigstep", "smallstep", "stackvm", "mips")
BACKENDS = ("stack", "mips")


@dataclass(frozen=True)
class CliConfig:
    subcommand: str
    input: Optional[str] = None
    backend: str = "stack"
    engine: str = "bigstep"
    opt_level: int = 0
    regalloc: str = "naive"
    emulate_mul: bool = False
    fuel: int = 10**6
    budget: int = 10**7
    seed: int = 0
    count: int = 0
    store_in: Optional[str] = None
    output: Optional[str] = None


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # user errors must exit 1, not argparse's default 2
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cimp", description="imp compiler toolchain")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    c = sub.add_parser("compile", help="compile to stack-machine or MIPS text")
    c.add_argument("file")
    c.add_argument("--backend", choices=BACKENDS, default="stack")
    c.add_argument("--regalloc", choices=("naive", "su"), default=None)
    c.add_argument("--emulate-mul", action="store_true")
    c.add_argument("-O", dest="opt", type=int, choices=OPT_LEVELS, default=0)
    c.add_argument("-o", dest="output", default=None)

    r = sub.add_parser("run", help="execute a program and print its final store")
    r.add_argument("file")
    r.add_argument("--engine", choices=ENGINES, default="bigstep")
    r.add_argument("--fuel", type=int, default=10**6)
    r.add_argument("--budget", type=int, default=10**7)
    r.add_argument("--store-in", dest="store_in", default=None)
    r.add_argument("-O", dest="opt", type=int, choices=OPT_LEVELS, default=0)

    v = sub.add_parser("vc", help="generate and check verification conditions")
    v.add_argument("file")
    v.add_argument("--post", required=True)
    v.add_argument("--pre", default=None)
    mode = v.add_mutually_exclusive_group(required=True)
    mode.add_argument("--smt2", metavar="DIR", default=None)
    mode.add_argument("--bounded-check", dest="bounded", type=int, default=None)

    t = sub.add_parser("typecheck", help="check declarations and print the typing")
    t.add_argument("file")

    f = sub.add_parser("fuzz", help="differential-test engines on generated programs")
    f.add_argument("--seed", type=int, required=True)
    f.add_argument("--count", type=int, required=True)
    f.add_argument("--engines", default=None)
    f.add_argument("--typed", action="store_true")
    f.add_argument("--fail-fast", dest="fail_fast", action="store_true")

    b = sub.add_parser("bench", help="compare code size across levels and backends")
    b.add_argument("file")

    return parser


def _config_of(args) -> CliConfig:
    cfg = CliConfig(
        subcommand=args.subcommand,
        input=getattr(args, "file", None),
        backend=getattr(args, "backend", "stack"),
        engine=getattr(args, "engine", "bigstep"),
        opt_level=getattr(args, "opt", 0),
        regalloc=getattr(args, "regalloc", None) or "naive",
        emulate_mul=getattr(args, "emulate_mul", False),
        fuel=getattr(args, "fuel", 10**6),
        budget=getattr(args, "budget", 10**7),
        seed=getattr(args, "seed", 0),
        count=getattr(args, "count", 0),
        store_in=getattr(args, "store_in", None),
        output=getattr(args, "output", None),
    )
    if cfg.subcommand == "compile" and cfg.backend != "mips":
        if getattr(args, "regalloc", None) is not None:
            raise _UsageError("--regalloc applies to the mips backend only")
        if cfg.emulate_mul:
            raise _UsageError("--emulate-mul applies to the mips backend only")
    if cfg.fuel < 0:
        raise _UsageError("--fuel must be nonnegative")
    if cfg.budget < 0:
        raise _UsageError("--budget must be nonnegative")
    return cfg


def _diagnostic(path: Optional[str], err: CimpError) -> str:
    where = path or "cimp"
    if err.pos is not None:
        where = f"{where}:{err.pos.line}:{err.pos.col}"
    return f"{where}: error: {err.msg}"


def _read_program(path: str) -> Program:
    return parse_program(Path(path).read_text())


def _typed_store_lines(p: Program, values) -> str:
    env = dict(p.decls)
    out = []
    for name in sorted(env):
        word = word32(values(name))
        shown = to_signed(word) if env[name] is Ty.I32 else word
        out.append(f"{name}={shown}\n")
    return "".join(out)


def _cmd_compile(cfg: CliConfig) -> int:
    p = optimize(_read_program(cfg.input), cfg.opt_level)
    if cfg.backend == "stack":
        text = listing(compile_program(p))
    else:
        strategy = "regalloc" if cfg.regalloc == "su" else "naive"
        text = emit_asm(codegen(p, strategy=strategy, emulate_mul=cfg.emulate_mul))
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_run(cfg: CliConfig) -> int:
    p = _read_program(cfg.input)
    if p.typed and cfg.engine in ("smallstep", "stackvm"):
        raise _UsageError(f"engine {cfg.engine} runs untyped programs only")
    store = Store({})
    if cfg.store_in:
        store = parse_store(Path(cfg.store_in).read_text())
    p = optimize(p, cfg.opt_level)

    if cfg.engine == "mips":
        prog = codegen(p, emulate_mul=True)
        init = {name: word32(value) for name, value in store.items()}
        out = simulate(prog, init=init, budget=cfg.budget)
        if isinstance(out, Halted):
            if p.typed:
                sys.stdout.write(_typed_store_lines(p, lambda n: out.words[n]))
            else:
                sys.stdout.write(
                    "".join(f"{k}={v}\n" for k, v in sorted(out.words.items()))
                )
            return 0
        if isinstance(out, BudgetExhausted):
            print("budget exhausted")
            return 0
        assert isinstance(out, Trap)
        print(f"internal error: trap: {out.reason}", file=sys.stderr)
        return 2

    if cfg.engine == "bigstep" and p.typed:
        out = ceval_fixed(cfg.fuel, typecheck(p), store)
        if isinstance(out, Done):
            sys.stdout.write(_typed_store_lines(p, out.store.get))
            return 0
        print("out of fuel")
        return 0

    if cfg.engine == "bigstep":
        out = ceval_fuel(cfg.fuel, p.body, store)
    elif cfg.engine == "smallstep":
        out = run_small(cfg.fuel, p.body, store)
    else:
        out = vm_exec(cfg.fuel, compile_program(p), store)
        if isinstance(out, MachineError):
            print(f"internal error: {out.reason}", file=sys.stderr)
            return 2
    if isinstance(out, Done):
        sys.stdout.write(format_store(out.store))
        return 0
    print("out of fuel")
    return 0


def _cmd_vc(cfg: CliConfig, args) -> int:
    p = _read_program(cfg.input)
    pre = parse_assertion_text(args.pre) if args.pre else ATrue()
    post = parse_assertion_text(args.post)
    vcs = vcgen(HoareTriple(pre, p.body, post))

    if args.smt2 is not None:
        os.makedirs(args.smt2, exist_ok=True)
        solver = os.environ.get("CIMP_SMT_SOLVER")
        for i, vc in enumerate(vcs):
            name = f"vc_{i}_{vc.origin}"
            script = emit_smtlib(vc)
            target = Path(args.smt2) / f"{name}.smt2"
            target.write_text(script)
            if solver:
                print(f"{name}: {solve_smtlib(script, solver)}")
            else:
                print(f"{name}: wrote {target}")
        return 0

    failed = 0
    for i, vc in enumerate(vcs):
        name = f"vc_{i}_{vc.origin}"
        result = bounded_check(vc, args.bounded)
        if isinstance(result, Valid):
            print(f"{name}: valid")
        else:
            assert isinstance(result, Counterexample)
            inline = " ".join(f"{k}={v}" for k, v in sorted(result.store.items()))
            print(f"{name}: counterexample {inline}")
            failed += 1
    return 1 if failed else 0


def _cmd_typecheck(cfg: CliConfig) -> int:
    p = _read_program(cfg.input)
    if not p.typed:
        raise CimpError("typecheck needs a fully annotated program (var x: i32; ...)")
    typecheck(p)
    for name, ty in p.decls:
        print(f"{name}: {ty}")
    return 0


def _describe(outcome: tuple) -> str:
    kind = outcome[0]
    if kind == "done":
        value = outcome[1]
        items = sorted(value.items()) if hasattr(value, "items") else value
        return "done " + " ".join(f"{k}={v}" for k, v in items)
    if kind == "out_of_fuel":
        return "out of fuel"
    return f"error: {outcome[1]}"


def _cmd_fuzz(cfg: CliConfig, args) -> int:
    engines = None
    if args.engines:
        engines = tuple(name.strip() for name in args.engines.split(",") if name.strip())
    spec = GenSpec(seed=cfg.seed, typed=args.typed)
    report = run_diff(spec, cfg.count, engines=engines, fail_fast=args.fail_fast)
    print(f"cases run: {report.cases}")
    print(f"agreements: {report.agreements}")
    print(f"divergences: {report.divergences}")
    print(f"skipped: {report.skipped}")
    for engine in report.tallies:
        counts = " ".join(f"{k}={n}" for k, n in sorted(report.tallies[engine].items()))
        print(f"  {engine}: {counts or 'no cases'}")
    if report.first_divergence is not None:
        d = report.first_divergence
        print(f"first divergence at case {d.index}:")
        for line in d.program.splitlines():
            print(f"  {line}")
        inline = " ".join(f"{k}={v}" for k, v in sorted(d.store.items()))
        print(f"  store: {inline}")
        for engine, outcome in d.outputs.items():
            print(f"  {engine}: {_describe(outcome)}")
    return 0 if report.ok else 1


def _cmd_bench(cfg: CliConfig) -> int:
    p = _read_program(cfg.input)

    def size(fn) -> str:
        try:
            return str(fn())
        except CimpError:
            return "-"

    def mips_size(q: Program, strategy: str) -> int:
        prog = codegen(q, strategy=strategy, emulate_mul=True)
        return sum(isinstance(item, Ins) for item in prog.text)

    print(f"{'level':>5}  {'stack':>5}  {'mips-naive':>10}  {'mips-su':>7}")
    for level in OPT_LEVELS:
        q = optimize(p, level)
        stack = size(lambda: len(compile_program(q).code))
        naive = size(lambda: mips_size(q, "naive"))
        su = size(lambda: mips_size(q, "regalloc"))
        print(f"{level:>5}  {stack:>5}  {naive:>10}  {su:>7}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _config_of(args)
        if cfg.subcommand == "compile":
            return _cmd_compile(cfg)
        if cfg.subcommand == "run":
            return _cmd_run(cfg)
        if cfg.subcommand == "vc":
            return _cmd_vc(cfg, args)
        if cfg.subcommand == "typecheck":
            return _cmd_typecheck(cfg)
        if cfg.subcommand == "fuzz":
            return _cmd_fuzz(cfg, args)
        assert cfg.subcommand == "bench"
        return _cmd_bench(cfg)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except CimpError as err:
        print(_diagnostic(getattr(args, "file", None), err), file=sys.stderr)
        return 1
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # pragma: no cover - exit-2 safety net
        print(f"internal error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
