import random

import pytest
from hypothesis import given, settings, strategies as st

from mergeguard import _kernels_py, machine
from mergeguard.lang import FuelExhausted, Valuation, interpret
from mergeguard.machine import HAVE_NATIVE, Machine
from mergeguard.oracle import ProgramGen
from mergeguard.parser import parse

seeds = st.integers(0, 2**32 - 1)


def edit_distance(a, b):
    # plain recursive definition with memoization, independent of the kernels
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))
    return d(len(a), len(b))


@pytest.mark.parametrize("native", [False, True])
@settings(max_examples=200, deadline=None)
@given(pseed=seeds, vseed=seeds)
def test_machine_matches_interpreter(native, pseed, vseed):
    if native and not HAVE_NATIVE:
        pytest.skip("compiled kernel not built")
    rng = random.Random(pseed)
    gen = ProgramGen(rng, arrays=("a",), wild_loops=rng.random() < 0.3)
    prog = gen.program(size=rng.randint(1, 6), depth=3)
    sigma = ProgramGen(random.Random(vseed), arrays=("a",)).valuation()
    assert Machine(prog, use_native=native).run(sigma, 50) == interpret(prog, sigma, 50)


@pytest.mark.parametrize("native", [False, True])
def test_machine_edge_cases(native):
    if native and not HAVE_NATIVE:
        pytest.skip("compiled kernel not built")
    cases = [
        ("y := a[5];", {}),
        ("a[k] := 1; b[0] := u;", {("b", 0): 4}),
        ("x := 1; i := 0; while (i < 70) { x := x * 2; i := i + 1; }", {}),
        ("a[100] := 3; y := a[100] + a[99];", {("a", 99): 1}),
        ("if (p == q) { r := 1; } else { r := 2; }", {}),
        ("x := 9223372036854775807 + 1;", {}),
    ]
    for text, data in cases:
        p, s = parse(text), Valuation(data)
        assert Machine(p, use_native=native).run(s, 100) == interpret(p, s, 100), text


def test_machine_fuel():
    m = Machine(parse("while (0 < 1) { skip; }"))
    assert isinstance(m.run(Valuation(), 7), FuelExhausted)


def test_mixed_sorts_fall_back_to_interpreter():
    p = parse("x := 1; x[0] := 2;")
    assert Machine(p).run(Valuation(), 10) == interpret(p, Valuation(), 10)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(0, 4), max_size=12), st.lists(st.integers(0, 4), max_size=12))
def test_levenshtein(a, b):
    want = edit_distance(tuple(a), tuple(b))
    assert _kernels_py.levenshtein(a, b) == want
    assert machine.levenshtein(a, b) == want


def test_levenshtein_examples():
    assert machine.levenshtein([ord(c) for c in "kitten"], [ord(c) for c in "sitting"]) == 3
    assert machine.levenshtein([], [1, 2]) == 2
