import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import strategies as gen
from cimp import syntax as sx
from cimp.frontend import parse_program
from cimp.semantics import (
    Done,
    Next,
    OutOfFuel,
    Store,
    Terminal,
    UnsupportedNode,
    aeval,
    beval,
    ceval_fuel,
    format_store,
    parse_store,
    run_small,
    step,
)


def prog(src):
    return parse_program(src).body


# ---------------------------------------------------------------------------
# Store


def test_store_default_zero():
    assert Store().get("x") == 0
    assert Store({"x": 3}).get("y") == 0


def test_store_set_is_persistent():
    s0 = Store({"x": 1})
    s1 = s0.set("x", 2)
    assert s0.get("x") == 1 and s1.get("x") == 2


def test_store_equality_ignores_explicit_zeros():
    assert Store({"x": 0}) == Store()
    assert Store({"x": 0, "y": 2}) == Store({"y": 2})
    assert Store({"x": 1}) != Store()
    assert hash(Store({"x": 0})) == hash(Store())


def test_format_store_sorted_lines():
    s = Store({"b": 2, "a": -1, "c": 0})
    assert format_store(s) == "a=-1\nb=2\nc=0\n"


def test_parse_store_roundtrip():
    s = Store({"x": 10, "y": -3})
    assert parse_store(format_store(s)) == s
    assert parse_store("") == Store()
    assert parse_store("  x = 5 \n\n") == Store({"x": 5})


def test_parse_store_rejects_garbage():
    with pytest.raises(ValueError):
        parse_store("x")
    with pytest.raises(ValueError):
        parse_store("x=ten")


# ---------------------------------------------------------------------------
# Expression evaluation


def test_aeval_direct_arithmetic():
    e = sx.BinOp("+", sx.BinOp("+", sx.Var("a"), sx.IntLit(1)), sx.IntLit(2))
    assert aeval(Store({"a": 5}), e) == 8


def test_aeval_unbound_reads_zero():
    assert aeval(Store(), sx.Var("x")) == 0


def test_aeval_sub_self_is_zero():
    e = sx.BinOp("-", sx.Var("a"), sx.Var("a"))
    assert aeval(Store({"a": 3}), e) == 0


def test_aeval_unbounded_and_negative():
    e = sx.BinOp("*", sx.Var("a"), sx.Var("a"))
    assert aeval(Store({"a": 2**40}), e) == 2**80
    assert aeval(Store({"a": 7}), sx.Neg(sx.Var("a"))) == -7


def test_aeval_rejects_fixed_width_nodes():
    for e in (
        sx.BitOp("&", sx.IntLit(1), sx.IntLit(2)),
        sx.BitNot(sx.IntLit(0)),
        sx.Cast(sx.Ty.U32, sx.IntLit(1)),
    ):
        with pytest.raises(UnsupportedNode):
            aeval(Store(), e)


def test_beval_examples():
    assert beval(Store(), sx.Or(sx.BoolLit(True), sx.BoolLit(False))) is True
    assert beval(Store({"x": 1}), sx.Cmp("<=", sx.Var("x"), sx.IntLit(0))) is False
    both = sx.And(
        sx.Cmp("=", sx.Var("x"), sx.Var("y")),
        sx.Not(sx.Cmp("<", sx.Var("x"), sx.Var("y"))),
    )
    assert beval(Store({"x": 2, "y": 2}), both) is True


@settings(max_examples=100)
@given(gen.aexprs(), gen.stores(), st.integers(-9, 9))
def test_aeval_depends_only_on_free_vars(e, s, extra):
    free = sx.aexpr_vars(e)
    fresh = next(n for n in ("q0", "q1", "q2") if n not in free)
    assert aeval(s, e) == aeval(s.set(fresh, extra), e)


# ---------------------------------------------------------------------------
# Big-step with fuel


def test_ceval_straight_line():
    assert ceval_fuel(10, prog("x := 1; x := x + 1"), Store()) == Done(
        Store({"x": 2})
    )


def test_ceval_divergent_loop_all_fuels():
    w = prog("while true do skip done")
    for n in (0, 1, 2, 10, 100):
        assert ceval_fuel(n, w, Store()) == OutOfFuel()


def test_ceval_countdown_fuel_boundary():
    w = prog("while 1 <= x do x := x - 1 done")
    s = Store({"x": 3})
    assert ceval_fuel(5, w, s) == Done(Store({"x": 0}))
    assert ceval_fuel(4, w, s) == Done(Store({"x": 0}))
    assert ceval_fuel(3, w, s) == OutOfFuel()


def test_ceval_zero_fuel_loop_is_out_of_fuel_even_if_guard_false():
    w = prog("while 1 <= x do x := x - 1 done")
    assert ceval_fuel(0, w, Store({"x": 0})) == OutOfFuel()
    assert ceval_fuel(1, w, Store({"x": 0})) == Done(Store({"x": 0}))


def test_ceval_zero_fuel_loop_free_code_completes():
    c = prog("x := 2; if x < 3 then y := x * x else skip end")
    assert ceval_fuel(0, c, Store()) == Done(Store({"x": 2, "y": 4}))


def test_ceval_fuel_shared_across_sequenced_loops():
    c = prog(
        "while 1 <= x do x := x - 1 done; while 1 <= y do y := y - 1 done"
    )
    s = Store({"x": 2, "y": 2})
    # each loop needs its iterations plus the exit test
    assert ceval_fuel(6, c, s) == Done(Store({"x": 0, "y": 0}))
    assert ceval_fuel(4, c, s) == OutOfFuel()


def test_ceval_nested_loop_fuel():
    c = prog(
        "i := 0;"
        "while i < 2 do"
        "  j := 0;"
        "  while j < 3 do j := j + 1; acc := acc + 1 done;"
        "  i := i + 1 "
        "done"
    )
    out = ceval_fuel(1000, c, Store())
    assert out == Done(Store({"i": 2, "j": 3, "acc": 6}))


def test_ceval_large_fuel_iterative():
    w = prog("while 1 <= x do x := x - 1 done")
    assert ceval_fuel(10**5 + 1, w, Store({"x": 10**5})) == Done(Store({"x": 0}))


def test_ceval_rejects_negative_fuel():
    with pytest.raises(ValueError):
        ceval_fuel(-1, sx.Skip(), Store())


# ---------------------------------------------------------------------------
# Small-step


def test_step_skip_terminal():
    assert step(sx.Skip(), Store()) == Terminal()


def test_step_assign():
    assert step(prog("x := 1"), Store()) == Next(sx.Skip(), Store({"x": 1}))


def test_step_seq_discharges_skip():
    c = prog("skip; x := 1")
    assert step(c, Store()) == Next(prog("x := 1"), Store())


def test_step_while_unfolds_preserving_invariant():
    w = prog("while x < 3 invariant { 0 <= x } do x := x + 1 done")
    r = step(w, Store())
    assert isinstance(r, Next)
    unfolded = r.com
    assert unfolded == sx.If(w.cond, sx.Seq(w.body, w), sx.Skip())
    assert unfolded.then_branch.second.invariant == w.invariant


def test_step_is_deterministic():
    c = prog("if x < 1 then x := x + 1 else skip end")
    s = Store({"x": 0})
    assert step(c, s) == step(c, s)


def test_run_small_examples():
    assert run_small(100, prog("x := 1; x := x + 1"), Store()) == Done(
        Store({"x": 2})
    )
    assert run_small(3, prog("while true do skip done"), Store()) == OutOfFuel()


def test_run_small_minimal_steps_observable():
    c = prog("x := 1; x := x + 1")
    s = Store()
    need = next(k for k in range(50) if run_small(k, c, s) == Done(Store({"x": 2})))
    assert run_small(need - 1, c, s) == OutOfFuel()


# ---------------------------------------------------------------------------
# Properties


@settings(max_examples=120, deadline=None)
@given(gen.coms(), gen.stores(), st.integers(0, 12), st.integers(0, 12))
def test_fuel_monotonicity(c, s, f, extra):
    first = ceval_fuel(f, c, s)
    if isinstance(first, Done):
        assert ceval_fuel(f + extra, c, s) == first


@settings(max_examples=120, deadline=None)
@given(gen.coms(), gen.stores())
def test_big_small_agreement(c, s):
    big = ceval_fuel(30, c, s)
    small = run_small(3000, c, s)
    if isinstance(big, Done) and isinstance(small, Done):
        assert big.store == small.store


@settings(max_examples=120, deadline=None)
@given(gen.coms(), gen.coms(), gen.coms(), gen.stores(), st.integers(0, 10))
def test_seq_reassociation_inert(a, b, c, s, fuel):
    left = ceval_fuel(fuel, sx.Seq(sx.Seq(a, b), c), s)
    right = ceval_fuel(fuel, sx.Seq(a, sx.Seq(b, c)), s)
    assert left == right


@settings(max_examples=80, deadline=None)
@given(gen.coms(), gen.stores())
def test_small_step_terminating_runs_match_big(c, s):
    small = run_small(500, c, s)
    if isinstance(small, Done):
        big = ceval_fuel(500, c, s)
        assert big == small
