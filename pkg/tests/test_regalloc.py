import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import strategies as gen
from cimp.errors import UnsupportedNode
from oracles import min_registers
from cimp.regalloc import (
    LoadConst,
    LoadVar,
    MalformedCode,
    Op,
    Reload,
    Spill,
    alloc_codegen,
    ershov,
    listing,
    max_live,
    reg_exec,
)
from cimp.semantics import Store, aeval
from cimp.syntax import BinOp, BitOp, IntLit, Neg, Var


def V(n):
    return Var(n)


def add(l, r):
    return BinOp("+", l, r)


def shapes(depth):
    """Every tree shape of depth <= depth, canonically labeled, each once."""
    if depth == 0:
        return [V("a")]
    smaller = shapes(depth - 1)
    return [V("a")] + [add(l, r) for l in smaller for r in smaller]


# ---------------------------------------------------------------------------
# ershov


def test_ershov_leaves():
    assert ershov(V("a")) == 1
    assert ershov(IntLit(7)) == 1


def test_ershov_balanced_product():
    e = BinOp("*", add(V("a"), V("b")), add(V("c"), V("d")))
    assert ershov(e) == 3


def test_ershov_left_chain_stays_flat():
    e = add(add(add(V("a"), V("b")), V("c")), V("d"))
    assert ershov(e) == 2


def test_ershov_neg_counts_as_binary():
    assert ershov(Neg(V("a"))) == 2
    assert ershov(Neg(add(V("a"), V("b")))) == 2


def test_ershov_rejects_bit_operations():
    with pytest.raises(UnsupportedNode):
        ershov(BitOp("&", V("a"), V("b")))


def test_ershov_matches_oracle_exhaustively_depth3():
    for t in shapes(3):
        assert ershov(t) == min_registers(t)


@settings(max_examples=200, deadline=None)
@given(gen.aexprs(max_depth=3))
def test_ershov_matches_oracle_random(e):
    assert ershov(e) == min_registers(e)


@settings(max_examples=200, deadline=None)
@given(gen.aexprs())
def test_ershov_label_monotone(e):
    def subtrees(t):
        yield t
        if isinstance(t, Neg):
            yield from subtrees(t.operand)
        elif isinstance(t, BinOp):
            yield from subtrees(t.left)
            yield from subtrees(t.right)

    top = ershov(e)
    assert all(ershov(t) <= top for t in subtrees(e))


@settings(max_examples=150, deadline=None)
@given(gen.aexprs(), st.integers(min_value=2, max_value=4))
def test_neg_compiles_like_zero_minus(e, k):
    assert alloc_codegen(Neg(e), k) == alloc_codegen(BinOp("-", IntLit(0), e), k)


# ---------------------------------------------------------------------------
# alloc_codegen shapes


def test_codegen_two_leaves():
    assert alloc_codegen(add(V("a"), V("b")), 2) == (
        LoadVar(0, "a"),
        LoadVar(1, "b"),
        Op("add", 0, 0, 1),
    )


def test_codegen_single_leaf():
    assert alloc_codegen(V("a"), 8) == (LoadVar(0, "a"),)


def test_codegen_heavier_right_first():
    e = add(V("a"), BinOp("*", V("b"), V("c")))
    assert alloc_codegen(e, 2) == (
        LoadVar(0, "b"),
        LoadVar(1, "c"),
        Op("mul", 0, 0, 1),
        LoadVar(1, "a"),
        Op("add", 0, 1, 0),
    )


def test_codegen_spill_shape():
    e = add(add(V("a"), V("b")), add(V("c"), V("d")))
    assert alloc_codegen(e, 2) == (
        LoadVar(0, "c"),
        LoadVar(1, "d"),
        Op("add", 0, 0, 1),
        Spill(0),
        LoadVar(0, "a"),
        LoadVar(1, "b"),
        Op("add", 0, 0, 1),
        Reload(1),
        Op("add", 0, 0, 1),
    )


def test_codegen_requires_two_registers():
    with pytest.raises(ValueError):
        alloc_codegen(V("a"), 1)


def test_codegen_rejects_bit_operations():
    with pytest.raises(UnsupportedNode):
        alloc_codegen(BitOp("^", V("a"), V("b")), 4)


@settings(max_examples=500, deadline=None)
@given(gen.aexprs(), gen.stores(), st.sampled_from([2, 3, 4]))
def test_codegen_differential(e, s, k):
    code = alloc_codegen(e, k)
    assert reg_exec(code, s, k) == aeval(s, e)
    spills = sum(isinstance(i, Spill) for i in code)
    assert (spills == 0) == (ershov(e) <= k)


@settings(max_examples=300, deadline=None)
@given(gen.aexprs(), st.sampled_from([2, 3, 4]))
def test_codegen_peak_usage_is_optimal(e, k):
    code = alloc_codegen(e, k)
    assert max_live(code) == min(ershov(e), k)


def test_codegen_peak_matches_oracle_exhaustively():
    for t in shapes(3):
        need = min_registers(t)
        for k in (2, 3, 4):
            code = alloc_codegen(t, k)
            assert max_live(code) == min(need, k)
            assert any(isinstance(i, Spill) for i in code) == (need > k)


# ---------------------------------------------------------------------------
# reg_exec


def test_exec_const():
    assert reg_exec((LoadConst(0, 7),), Store()) == 7


def test_exec_var_minus_itself():
    code = (LoadVar(0, "a"), LoadVar(1, "a"), Op("sub", 0, 0, 1))
    assert reg_exec(code, Store({"a": 9})) == 0


def test_exec_rejects_out_of_range_register():
    with pytest.raises(MalformedCode):
        reg_exec((LoadConst(5, 1),), Store(), k=4)
    with pytest.raises(MalformedCode):
        reg_exec((LoadConst(-1, 1),), Store())


def test_exec_rejects_reload_from_empty_stack():
    with pytest.raises(MalformedCode):
        reg_exec((Reload(0),), Store())


def test_exec_rejects_unwritten_reads():
    with pytest.raises(MalformedCode):
        reg_exec((Op("add", 0, 0, 1),), Store())
    with pytest.raises(MalformedCode):
        reg_exec((), Store())


def _complete_tree(depth, values, ops=("+", "-")):
    def build(d):
        if d == 0:
            return IntLit(next(values))
        return BinOp(ops[d % 2], build(d - 1), build(d - 1))

    return build(depth)


@pytest.mark.parametrize("k", [2, 3])
def test_spill_roundtrip_complete_tree(k):
    # depth k+1 forces ershov k+2 > k; distinct leaves and mixed +/- make
    # any spill-stack ordering mistake change the value
    vals = iter(range(3, 300, 7))
    e = _complete_tree(k + 1, vals)
    assert ershov(e) == k + 2
    code = alloc_codegen(e, k)
    assert any(isinstance(i, Spill) for i in code)
    assert reg_exec(code, Store(), k) == aeval(Store(), e)


def test_nested_spills_respect_lifo():
    vals = iter([2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53])
    e = _complete_tree(4, vals)
    code = alloc_codegen(e, 2)
    assert sum(isinstance(i, Spill) for i in code) >= 2
    assert reg_exec(code, Store(), 2) == aeval(Store(), e)


# ---------------------------------------------------------------------------
# listing


def test_listing_spill_example():
    e = add(add(V("a"), V("b")), add(V("c"), V("d")))
    assert listing(alloc_codegen(e, 2)) == (
        "LOADVAR r0 c\n"
        "LOADVAR r1 d\n"
        "OP ADD r0 r0 r1\n"
        "SPILL r0\n"
        "LOADVAR r0 a\n"
        "LOADVAR r1 b\n"
        "OP ADD r0 r0 r1\n"
        "RELOAD r1\n"
        "OP ADD r0 r0 r1\n"
    )


def test_listing_const_and_empty():
    assert listing((LoadConst(0, 42),)) == "LOADCONST r0 42\n"
    assert listing(()) == ""
