"""Logical terms over versioned variables, printed directly as SMT-LIB.

Every term carries its SMT-LIB text, its sort and the declarations of the
free symbols it mentions. Terms compare and hash by text."""

from __future__ import annotations

from typing import Iterable

INT, ARR, BOOL = "Int", "Arr", "Bool"
SMT_SORT = {INT: "Int", ARR: "(Array Int Int)", BOOL: "Bool"}
_EMPTY = frozenset()


class Term:
    __slots__ = ("text", "sort", "decls", "nonlinear", "quantified")

    def __init__(self, text, sort, decls=_EMPTY, nonlinear=False, quantified=False):
        self.text = text
        self.sort = sort
        self.decls = decls
        self.nonlinear = nonlinear
        self.quantified = quantified

    def __eq__(self, other):
        return isinstance(other, Term) and self.text == other.text

    def __hash__(self):
        return hash(self.text)

    def __repr__(self):
        return self.text


def _join(op, args, sort, nonlinear=False):
    decls = _EMPTY
    nl = nonlinear
    q = False
    for a in args:
        if a.decls:
            decls = decls | a.decls if decls else a.decls
        nl = nl or a.nonlinear
        q = q or a.quantified
    return Term("(" + op + " " + " ".join(a.text for a in args) + ")", sort, decls, nl, q)


def symbol(name: str, sort: str) -> Term:
    decl = f"(declare-const {name} {SMT_SORT[sort]})"
    return Term(name, sort, frozenset({(name, decl)}))


def bound(name: str) -> Term:
    return Term(name, INT)


def num(v: int) -> Term:
    return Term(str(v) if v >= 0 else f"(- {-v})", INT)


TRUE = Term("true", BOOL)
FALSE = Term("false", BOOL)


def arith(op: str, a: Term, b: Term) -> Term:
    nonlinear = op == "*" and not (_is_num(a) or _is_num(b))
    return _join(op, (a, b), INT, nonlinear)


def _is_num(t: Term) -> bool:
    s = t.text
    return s.isdigit() or (s.startswith("(- ") and s[3:-1].isdigit())


def select(a: Term, i: Term) -> Term:
    return _join("select", (a, i), INT)


def store(a: Term, i: Term, v: Term) -> Term:
    return _join("store", (a, i, v), ARR)


def ite(c: Term, a: Term, b: Term) -> Term:
    if a == b:
        return a
    return _join("ite", (c, a, b), a.sort)


def cmp(op: str, a: Term, b: Term) -> Term:
    if op == "!=":
        return not_(eq(a, b))
    if op == "==":
        return eq(a, b)
    return _join(op, (a, b), BOOL)


def eq(a: Term, b: Term) -> Term:
    if a == b:
        return TRUE
    return _join("=", (a, b), BOOL)


def not_(a: Term) -> Term:
    if a is TRUE or a == TRUE:
        return FALSE
    if a == FALSE:
        return TRUE
    return _join("not", (a,), BOOL)


def and_(items: Iterable[Term]) -> Term:
    items = [x for x in items if x != TRUE]
    if any(x == FALSE for x in items):
        return FALSE
    if not items:
        return TRUE
    if len(items) == 1:
        return items[0]
    return _join("and", items, BOOL)


def or_(items: Iterable[Term]) -> Term:
    items = [x for x in items if x != FALSE]
    if any(x == TRUE for x in items):
        return TRUE
    if not items:
        return FALSE
    if len(items) == 1:
        return items[0]
    return _join("or", items, BOOL)


def implies(a: Term, b: Term) -> Term:
    if a == TRUE:
        return b
    if b == TRUE or a == FALSE:
        return TRUE
    return _join("=>", (a, b), BOOL)


def iff(a: Term, b: Term) -> Term:
    if a == b:
        return TRUE
    return _join("=", (a, b), BOOL)


def forall(var: Term, body: Term) -> Term:
    if var.text not in body.text:
        return body
    t = Term(f"(forall (({var.text} Int)) {body.text})", BOOL, body.decls, body.nonlinear, True)
    return t


class UF:
    """An uninterpreted function symbol with a fixed signature."""

    __slots__ = ("name", "arg_sorts", "result_sort", "decl")

    def __init__(self, name, arg_sorts, result_sort):
        self.name = name
        self.arg_sorts = tuple(arg_sorts)
        self.result_sort = result_sort
        args = " ".join(SMT_SORT[s] for s in self.arg_sorts)
        self.decl = f"(declare-fun {name} ({args}) {SMT_SORT[result_sort]})"

    def __call__(self, *args: Term) -> Term:
        if len(args) != len(self.arg_sorts):
            raise ValueError(f"{self.name} expects {len(self.arg_sorts)} arguments")
        if not args:
            return Term(self.name, self.result_sort, frozenset({(self.name, self.decl)}))
        t = _join(self.name, args, self.result_sort)
        t.decls = t.decls | {(self.name, self.decl)}
        return t


def free_decls(terms: Iterable[Term]) -> dict:
    out: dict = {}
    for t in terms:
        for name, decl in t.decls:
            out[name] = decl
    return out
