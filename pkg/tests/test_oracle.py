import random

from hypothesis import given, settings, strategies as st

from mergeguard.lang import (
    Assign, BinOp, FuelExhausted, IntConst, Valuation, Var, normalize, stmt_equal,
)
from mergeguard.oracle import (
    MUTATIONS, CFViolation, EnumSpace, Inconclusive, Mutator, NoViolationFound, ProgramGen,
    Sampled, Scenario, Violation, _from_blocks, _to_blocks, brute_force_cf, cf_violation,
    gen_scenario,
)
from mergeguard.parser import parse, pretty_print

from conftest import load

DUP = [parse("out[0] := x;"), parse("x := x + 1; out[0] := x;"),
        parse("x := x + 1; out[0] := x;"), parse("x := x + 1; x := x + 1; out[0] := x;")]


# -- the checker

def run_all(programs, sigma):
    from mergeguard.machine import Machine
    return [Machine(p).run(sigma) for p in programs]


def test_cf_violation_dup_increment():
    bad = cf_violation(run_all(DUP, Valuation({"x": 0})))
    assert bad == CFViolation("out", 0, (0, 1, 1, 2))
    assert str(bad) == "out[0]: O=0 A=1 B=1 M=2"


def test_cf_violation_unset_cells():
    o, a = parse("skip;"), parse("out[2] := 1;")
    assert cf_violation(run_all([o, a, o, o], Valuation())) == \
        CFViolation("out", 2, (None, 1, None, None))
    assert cf_violation(run_all([o, a, o, a], Valuation())) is None


def test_cf_violation_fuel():
    spin = parse("while (0 < 1) { skip; }")
    finals = run_all(DUP[:3], Valuation({"x": 0})) + [FuelExhausted(5)]
    assert cf_violation(finals) is None
    assert isinstance(run_all([spin], Valuation())[0], FuelExhausted)


def test_cf_violation_check_vars():
    o, a, m = parse("y := 1;"), parse("y := 2;"), parse("y := 3;")
    finals = run_all([o, a, o, m], Valuation())
    assert cf_violation(finals) is None
    assert cf_violation(finals, check_vars=("y",)) == CFViolation("y", 0, (1, 2, 1, 3))


# -- brute force

def test_brute_force_dup_increment():
    res = brute_force_cf(Scenario(*DUP), EnumSpace(domain=(0, 1)))
    assert isinstance(res, Violation)
    x = res.sigma["x"]
    assert res.index == 0
    assert res.details == f"out[0]: O={x} A={x + 1} B={x + 1} M={x + 2}"


def test_brute_force_branch_swap():
    res = brute_force_cf(Scenario(*load("branch-swap")))
    assert res == NoViolationFound(25)  # x and y over five values each


def test_brute_force_identical():
    p = parse("s := 0; k := 0; while (k < n) { s := s + a[k]; k := k + 1; } out[0] := s;")
    res = brute_force_cf(Scenario(p, p, p, p), EnumSpace(window=2, domain=(-1, 0, 1, 3)))
    assert res == NoViolationFound(4 ** 5)


def test_space_size_reported():
    sc = Scenario(*DUP)
    assert EnumSpace().size(sc.programs) == 5
    assert EnumSpace().resolve(sc.programs) == (("x",), ())
    prog = parse("y := a[0] + b[k]; out[0] := y;")
    assert EnumSpace().resolve([prog]) == (("k", "y"), ("a", "b"))


def test_inconclusive_on_fuel():
    o = parse("while (x > 0) { skip; } out[0] := 1;")
    res = brute_force_cf(Scenario(o, o, o, o), EnumSpace(fuel=10))
    assert res == Inconclusive(exhausted=2, checked=5)


def test_sampling_beyond_caps():
    names = "abcdefg"
    p = parse(" ".join(f"{n} := {n} + 1;" for n in names) + " out[0] := a;")
    res = brute_force_cf(Scenario(p, p, p, p), samples=200)
    assert res == Sampled(200, 0)


# -- generators

def test_gen_scenario_deterministic():
    assert gen_scenario(5) == gen_scenario(5)
    assert gen_scenario(5) != gen_scenario(6)


def test_gen_scenario_has_a_hole():
    assert gen_scenario(1, budget=1).diff.holes >= 1


def test_gen_scenarios_distinct_and_well_formed():
    seen = set()
    for seed in range(500):
        sc = gen_scenario(seed)
        key = tuple(pretty_print(p) for p in sc.programs)
        seen.add(key)
        for p in sc.programs:
            assert stmt_equal(parse(pretty_print(p)), p)
    assert len(seen) == 500


def test_duplication_has_dup_increment_shape():
    found = 0
    for seed in range(60):
        sc = gen_scenario(seed, kinds=("duplicate",))
        d = sc.diff
        eo, ea, eb, em = d.edits
        added_a = [x for x, o in zip(ea, eo) if normalize(x) != normalize(o)]
        added_b = [x for x, o in zip(eb, eo) if normalize(x) != normalize(o)]
        inc_a = [s for s in added_a if is_increment(s)]
        inc_b = [s for s in added_b if is_increment(s)]
        if inc_a and inc_b and inc_a[0] == inc_b[0] and d.holes >= 2:
            # same patch, landing at different holes, both kept by the merge
            assert sum(1 for s in em if s == inc_a[0]) >= 2
            found += 1
    assert found >= 30


def is_increment(s):
    return (isinstance(s, Assign) and isinstance(s.rhs, BinOp) and s.rhs.op == "+"
            and s.rhs.lhs == Var(s.var) and isinstance(s.rhs.rhs, IntConst))


def test_mutations_change_the_program():
    rng = random.Random(3)
    gen = ProgramGen(rng, counters=("i",))
    mut = Mutator(rng, gen)
    for kind in MUTATIONS:
        if kind == "duplicate":
            continue
        changed = 0
        for _ in range(30):
            base = parse("if (x > 0) { y := 1; } else { y := x + 2; } z := y - 3;")
            blocks = _to_blocks(base)
            if mut.apply(blocks, kind) and _from_blocks(blocks) != normalize(base):
                changed += 1
        assert changed > 0, kind


def test_swap_and_negate_preserve_meaning():
    rng = random.Random(9)
    gen = ProgramGen(rng)
    mut = Mutator(rng, gen)
    base = parse("if (x > 0) { y := 1; } else { y := 0; } out[0] := y;")
    for kind in ("swap", "negate"):
        blocks = _to_blocks(base)
        assert mut.apply(blocks, kind)
        variant = _from_blocks(blocks)
        assert variant != base
        for x in range(-2, 3):
            s = Valuation({"x": x})
            assert run_all([variant], s) == run_all([base], s)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_block_form_round_trip(seed):
    prog = ProgramGen(random.Random(seed)).program(size=5)
    assert _from_blocks(_to_blocks(prog)) == normalize(prog)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_generated_loops_terminate(seed):
    sc = gen_scenario(seed)
    sigma = Valuation({v: 2 for v in ("x", "y", "z")})
    for f in run_all(sc.programs, sigma):
        assert not isinstance(f, FuelExhausted)
