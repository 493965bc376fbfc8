import random

import pytest
from hypothesis import given, settings, strategies as st

from mergeguard.lang import (
    BOTTOM, HOLE, SKIP, ArrayAssign, ArrayRead, Assign, BinOp, Cmp, EditArityMismatch,
    FuelExhausted, If, IntConst, Seq, Valuation, Var, While, apply_edit, compare,
    interpret, make_seq, normalize, num_holes, stmt_equal,
)
from mergeguard.oracle import ProgramGen, random_edit_split
from mergeguard.parser import parse

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def gen_program(seed, size=4, arrays=()):
    return ProgramGen(random.Random(seed), arrays=arrays).program(size=size)


# -- holes and edits

def test_apply_edit_worked_shape():
    shared = parse("if (c > 0) { <?HOLE?> } else { y := 2; } <?HOLE?>")
    got = apply_edit(shared, [parse("x := 2;"), SKIP])
    assert stmt_equal(got, parse("if (c > 0) { x := 2; } else { y := 2; } skip;"))


def test_apply_edit_no_holes_is_identity():
    p = parse("x := 1; y := x;")
    assert apply_edit(p, []) == p


def test_apply_edit_arity():
    with pytest.raises(EditArityMismatch):
        apply_edit(parse("<?HOLE?> x := 1;"), [])
    with pytest.raises(EditArityMismatch):
        apply_edit(parse("x := 1;"), [SKIP])


def test_num_holes():
    assert num_holes(HOLE) == 1
    assert num_holes(parse("x := 1;")) == 0
    assert num_holes(parse("if (c > 0) { <?HOLE?> } else { <?HOLE?> } <?HOLE?>")) == 3


def test_holes_filled_depth_first():
    shared = parse("while (i < 3) { <?HOLE?> } if (x > 0) { <?HOLE?> } else { <?HOLE?> }")
    edit = [parse(f"v := {k};") for k in range(3)]
    got = apply_edit(shared, edit)
    want = parse("while (i < 3) { v := 0; } if (x > 0) { v := 1; } else { v := 2; }")
    assert stmt_equal(got, want)


@settings(max_examples=200, deadline=None)
@given(seeds, st.integers(0, 6))
def test_hole_punch_round_trip(seed, k):
    rng = random.Random(seed)
    prog = ProgramGen(rng).program(size=rng.randint(1, 6))
    shared, edit = random_edit_split(rng, prog, k)
    assert num_holes(shared) == len(edit)
    filled = apply_edit(shared, edit)
    assert num_holes(filled) == 0
    assert stmt_equal(filled, prog)


# -- equality

def test_stmt_equal():
    assert stmt_equal(parse("x := 1;"), parse("x := 1;"))
    assert stmt_equal(Seq(SKIP, Assign("x", IntConst(1))), Assign("x", IntConst(1)))
    assert stmt_equal(Seq(Assign("x", IntConst(1)), SKIP), Assign("x", IntConst(1)))
    assert not stmt_equal(parse("x := 1;"), parse("x := 2;"))


def test_raw_ast_keeps_skips():
    s = Seq(SKIP, Assign("x", IntConst(1)))
    assert s != Assign("x", IntConst(1))
    assert normalize(s) == Assign("x", IntConst(1))


def test_nested_sequences_normalize_alike():
    a, b, c = (Assign(v, IntConst(0)) for v in "abc")
    assert stmt_equal(Seq(Seq(a, b), c), Seq(a, Seq(b, c)))


# -- interpreter

def test_interpret_branch_example():
    p = parse("x := 1; if (y > 0) { z := 1; x := 2; } else { z := 2; }")
    got = interpret(p, Valuation({"x": 0, "y": 1, "z": 0}), 100)
    assert got == Valuation({"x": 2, "y": 1, "z": 1})


def test_interpret_skip():
    s = Valuation({"a": 4, ("b", 2): 9})
    assert interpret(SKIP, s, 1) == s


def test_interpret_diverges():
    assert isinstance(interpret(parse("while (0 < 1) { skip; }"), Valuation(), 10), FuelExhausted)


def test_fuel_counts_iterations():
    p = parse("i := 0; while (i < 5) { i := i + 1; }")
    assert interpret(p, Valuation(), 5)["i"] == 5
    assert isinstance(interpret(p, Valuation(), 4), FuelExhausted)


def test_uninitialized_read_is_bottom():
    got = interpret(parse("y := a[5];"), Valuation(), 10)
    assert got["y"] is BOTTOM
    assert "y" not in got


def test_bottom_semantics():
    p = parse("z := q + 1; if (q == r) { e := 1; } else { e := 0; }"
              " if (q < 1) { l := 1; } else { l := 0; }"
              " if (q != 1) { n := 1; } else { n := 0; }")
    got = interpret(p, Valuation(), 10)
    assert got["z"] is BOTTOM
    assert got["e"] == 1   # both sides unset
    assert got["l"] == 0   # one side unset
    assert got["n"] == 0


def test_compare_table():
    assert compare("==", BOTTOM, BOTTOM)
    assert not compare("!=", BOTTOM, BOTTOM)
    for op in ("==", "!=", "<", "<=", ">", ">="):
        assert not compare(op, BOTTOM, 0)
        assert not compare(op, 0, BOTTOM)


def test_store_through_bottom_index_dropped():
    got = interpret(parse("a[k] := 3;"), Valuation({("a", 0): 1}), 10)
    assert got == Valuation({("a", 0): 1})


def test_storing_bottom_unsets():
    got = interpret(parse("a[0] := u; x := u;"), Valuation({("a", 0): 1, "x": 2}), 10)
    assert got == Valuation()


def test_unbounded_integers():
    p = parse("x := 1; i := 0; while (i < 100) { x := x * 2; i := i + 1; }")
    assert interpret(p, Valuation(), 1000)["x"] == 2**100


def test_valuation_absent_is_bottom():
    v = Valuation({"x": 1})
    assert v[("nope", 3)] is BOTTOM
    assert v["x"] == 1
    assert Valuation({"x": 1, "y": None}) == v


def test_program_with_hole_rejected():
    from mergeguard.lang import LangError
    with pytest.raises(LangError):
        interpret(HOLE, Valuation(), 1)


@settings(max_examples=150, deadline=None)
@given(seeds, seeds)
def test_interpreter_deterministic(pseed, vseed):
    prog = gen_program(pseed, arrays=("a",))
    sigma = ProgramGen(random.Random(vseed), arrays=("a",)).valuation()
    assert interpret(prog, sigma, 200) == interpret(prog, sigma, 200)


@settings(max_examples=150, deadline=None)
@given(seeds, seeds, st.integers(1, 12), st.integers(0, 12))
def test_fuel_monotone(pseed, vseed, f, extra):
    rng = random.Random(pseed)
    prog = ProgramGen(rng, wild_loops=True).program(size=4)
    sigma = ProgramGen(random.Random(vseed)).valuation()
    first = interpret(prog, sigma, f)
    if not isinstance(first, FuelExhausted):
        assert interpret(prog, sigma, f + extra) == first


def test_make_seq_right_associated():
    a, b, c = (Assign(v, IntConst(0)) for v in "abc")
    assert make_seq([a, b, c]) == Seq(a, Seq(b, c))
    assert make_seq([]) == SKIP


def test_ast_nodes_are_values():
    e = BinOp("+", Var("x"), ArrayRead("a", IntConst(0)))
    assert e == BinOp("+", Var("x"), ArrayRead("a", IntConst(0)))
    assert hash(e) == hash(BinOp("+", Var("x"), ArrayRead("a", IntConst(0))))
    w = While(Cmp("<", Var("i"), IntConst(3)), ArrayAssign("out", IntConst(0), e))
    assert {w: 1}[w] == 1
    assert If(Cmp("==", Var("x"), IntConst(0)), SKIP, SKIP) != w
