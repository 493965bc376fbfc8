import random

import pytest
from hypothesis import given, settings, strategies as st

from mergeguard.lang import HOLE, SKIP, apply_edit, num_holes, stmt_equal
from mergeguard.ndiff import ArityMismatch, compose, diff2, ndiff
from mergeguard.oracle import ProgramGen, gen_scenario
from mergeguard.parser import edit_str, parse, pretty_print

O = parse("if (c > 0) { x := 1; } else { y := 2; } z := 3;")
A = parse("if (c > 0) { x := 2; } else { y := 2; }")
B = parse("if (c > 0) { x := 1; } else { y := 3; } z := 3;")
M = parse("if (c > 0) { x := 2; } else { y := 3; }")


def test_diff2_worked_step():
    shared, edit, hedit = diff2(A, O, check=True)
    assert pretty_print(shared) == "if (c > 0) { <?HOLE?> } else { y := 2; } <?HOLE?>"
    assert edit_str(edit) == "[x := 2, skip]"
    assert edit_str(hedit) == "[x := 1, z := 3]"


def test_diff2_identical():
    s = parse("x := 1; while (x < 3) { x := x + 1; }")
    assert diff2(s, s) == (s, [], [])


def test_diff2_against_hole():
    s = parse("x := 1;")
    assert diff2(s, HOLE) == (HOLE, [s], [HOLE])


def test_diff2_different_conditions_make_one_hole():
    s = parse("if (x > 0) { y := 1; } else { y := 2; }")
    h = parse("if (x > 1) { y := 1; } else { y := 2; }")
    shared, edit, hedit = diff2(s, h, check=True)
    assert shared == HOLE
    assert edit == [s] and hedit == [h]


def test_compose_examples():
    x1, z3 = parse("x := 1;"), parse("z := 3;")
    assert compose([x1, z3], []) == [x1, z3]
    got = compose([HOLE, parse("y := 2;"), HOLE], [parse("x := 2;"), SKIP])
    assert edit_str(got) == "[x := 2, y := 2, skip]"
    assert compose([], []) == []


def test_compose_arity():
    with pytest.raises(ArityMismatch):
        compose([HOLE], [])


def test_ndiff_worked_example():
    d = ndiff([O, A, B, M], check=True)
    assert pretty_print(d.shared) == "if (c > 0) { <?HOLE?> } else { <?HOLE?> } <?HOLE?>"
    assert [edit_str(e) for e in d.edits] == [
        "[x := 1, y := 2, z := 3]",
        "[x := 2, y := 2, skip]",
        "[x := 1, y := 3, z := 3]",
        "[x := 2, y := 3, skip]",
    ]


def test_ndiff_identical():
    s = parse("x := 1; y := x;")
    d = ndiff([s] * 4)
    assert d.shared == s and d.edits == ((),) * 4


def test_ndiff_two_way():
    d = ndiff([O, A])
    assert d.holes == 2 and len(d.edits) == 2


def test_ndiff_needs_two():
    with pytest.raises(ValueError):
        ndiff([O])


def test_ndiff_deterministic():
    assert ndiff([O, A, B, M]) == ndiff([O, A, B, M])


def test_loop_bodies_are_diffed_inside():
    o = parse("i := 0; while (i < n) { s := s + i; i := i + 1; }")
    a = parse("i := 0; while (i < n) { s := s + 2 * i; i := i + 1; }")
    d = ndiff([o, a, o, a], check=True)
    assert d.holes == 1
    assert pretty_print(d.shared).startswith("i := 0; while (i < n) { <?HOLE?>")


def reconstruct_ok(programs):
    d = ndiff(programs)
    for p, e in zip(programs, d.edits):
        assert len(e) == num_holes(d.shared)
        assert stmt_equal(apply_edit(d.shared, e), p)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_reconstruction_on_mutated_scenarios(seed, budget):
    sc = gen_scenario(seed, budget=budget)
    reconstruct_ok(sc.programs)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5))
def test_reconstruction_on_unrelated_programs(seed, n):
    rng = random.Random(seed)
    gen = ProgramGen(rng, arrays=("a",))
    programs = [gen.program(size=rng.randint(1, 5)) for _ in range(n)]
    reconstruct_ok(programs)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_diff2_postconditions(seed):
    rng = random.Random(seed)
    gen = ProgramGen(rng)
    s = gen.program(size=rng.randint(1, 5))
    h = ndiff([gen.program(size=rng.randint(1, 5)), gen.program(size=3)]).shared
    diff2(s, h, check=True)
