import random

import pytest
from hypothesis import given, settings, strategies as st

from mergeguard.lang import (
    HOLE, SKIP, And, ArrayAssign, ArrayRead, Assign, BinOp, Cmp, If, IntConst, Not, Or,
    Seq, Var, stmt_equal,
)
from mergeguard.oracle import ProgramGen
from mergeguard.parser import ParseError, edit_str, parse, pretty_print


def test_assignment():
    assert parse("x := x + 1;") == Assign("x", BinOp("+", Var("x"), IntConst(1)))


def test_branch_swap_base():
    got = parse("if (x > 0) { y := 1; } else { y := 0; } out[0] := y;")
    want = Seq(If(Cmp(">", Var("x"), IntConst(0)), Assign("y", IntConst(1)),
                  Assign("y", IntConst(0))),
               ArrayAssign("out", IntConst(0), Var("y")))
    assert got == want


def test_empty_program_is_skip():
    assert parse("") == SKIP
    assert parse("  // nothing here\n") == SKIP


def test_dangling_comparison():
    with pytest.raises(ParseError) as info:
        parse("while (x <")
    err = info.value
    assert (err.line, err.col) == (1, 11)
    assert err.found == "end of input"
    assert "expression" in err.expected


def test_error_position_on_later_line():
    with pytest.raises(ParseError) as info:
        parse("x := 1;\ny := ;\n")
    assert (info.value.line, info.value.col) == (2, 6)


def test_else_is_mandatory():
    with pytest.raises(ParseError):
        parse("if (x > 0) { y := 1; }")


def test_out_is_array_only():
    with pytest.raises(ParseError):
        parse("out := 1;")
    with pytest.raises(ParseError):
        parse("x := out;")


def test_reserved_words():
    for kw in ("skip", "if", "while", "else"):
        with pytest.raises(ParseError):
            parse(f"{kw} := 1;")


def test_precedence_and_unary_minus():
    assert parse("x := 1 + 2 * 3;") == Assign(
        "x", BinOp("+", IntConst(1), BinOp("*", IntConst(2), IntConst(3))))
    assert parse("x := 1 - 2 - 3;") == Assign(
        "x", BinOp("-", BinOp("-", IntConst(1), IntConst(2)), IntConst(3)))
    e = parse("x := -y;").rhs
    assert e in (BinOp("-", IntConst(0), Var("y")), BinOp("*", IntConst(-1), Var("y")))


def test_predicate_connectives():
    p = parse("if (!(a < 1) || b == 2 && c != 3) { skip; } else { skip; }").cond
    assert p == Or(Not(Cmp("<", Var("a"), IntConst(1))),
                   And(Cmp("==", Var("b"), IntConst(2)), Cmp("!=", Var("c"), IntConst(3))))


def test_comments():
    assert parse("x := 1; // set x\n// done\n") == Assign("x", IntConst(1))


def test_print_skip():
    assert pretty_print(SKIP) == "skip;"


def test_print_holes():
    shared = If(Cmp(">", Var("c"), IntConst(0)), HOLE, HOLE)
    assert pretty_print(Seq(shared, HOLE)) == \
        "if (c > 0) { <?HOLE?> } else { <?HOLE?> } <?HOLE?>"


def test_print_is_skip_normalized():
    assert pretty_print(Seq(SKIP, Seq(Assign("x", IntConst(1)), SKIP))) == "x := 1;"


def test_holes_parse_back():
    text = "if (c > 0) { <?HOLE?> } else { <?HOLE?> } <?HOLE?>"
    assert pretty_print(parse(text)) == text


def test_edit_str():
    edit = [parse("x := 2;"), parse("y := 3;"), SKIP]
    assert edit_str(edit) == "[x := 2, y := 3, skip]"


def test_multiline_round_trip():
    p = parse("while (i < n) { if (a[i] > 0) { s := s + a[i]; } else { skip; } i := i + 1; }")
    text = pretty_print(p, multiline=True)
    assert text.count("\n") > 3
    assert stmt_equal(parse(text), p)


def test_parenthesized_arithmetic_survives():
    p = parse("x := (a - b) * (c + d) - (e - f);")
    assert parse(pretty_print(p)) == p


@settings(max_examples=500, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip(seed):
    rng = random.Random(seed)
    gen = ProgramGen(rng, arrays=("a",), wild_loops=rng.random() < 0.5, max_const=20)
    prog = gen.program(size=rng.randint(1, 6), depth=3)
    assert stmt_equal(parse(pretty_print(prog)), prog)
    assert stmt_equal(parse(pretty_print(prog, multiline=True)), prog)


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet="xy01 :=+-*;(){}[]<>!&|ifwhleskpout\n", max_size=60))
def test_parse_is_total(text):
    try:
        parse(text)
    except ParseError:
        pass


def test_deep_nesting_is_an_error_not_a_crash():
    text = "x := " + "(" * 5000 + "1" + ")" * 5000 + ";"
    try:
        parse(text)
    except ParseError:
        pass
