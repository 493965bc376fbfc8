"""Product programs: run several disjoint programs as one, keeping similar
loops in lockstep."""

from __future__ import annotations

import re
from itertools import combinations

from .lang import (
    ATOMS, And, ArrayAssign, ArrayRead, Assign, BinOp, Cmp, Hole, If, Not, Or,
    SKIP, Seq, Skip, Var, While, make_seq, normalize, seq_items, stmt_size,
    stmt_vars,
)
from .machine import levenshtein
from .parser import pretty_print, tokenize

NODE_LIMIT = 50_000
VERSION_NAMES = {1: "O", 2: "A", 3: "B", 4: "M"}


class ProductTooLarge(Exception):
    pass


# ---------------------------------------------------------------- renaming

def tagged(name: str, tag: int) -> str:
    return f"{name}#{tag}"


def untag(name: str) -> str:
    return name.split("#", 1)[0]


def rename_expr(e, tag):
    if isinstance(e, Var):
        return Var(tagged(e.name, tag))
    if isinstance(e, ArrayRead):
        return ArrayRead(tagged(e.array, tag), rename_expr(e.index, tag))
    if isinstance(e, BinOp):
        return BinOp(e.op, rename_expr(e.lhs, tag), rename_expr(e.rhs, tag))
    if isinstance(e, Cmp):
        return Cmp(e.op, rename_expr(e.lhs, tag), rename_expr(e.rhs, tag))
    if isinstance(e, And):
        return And(rename_expr(e.lhs, tag), rename_expr(e.rhs, tag))
    if isinstance(e, Or):
        return Or(rename_expr(e.lhs, tag), rename_expr(e.rhs, tag))
    if isinstance(e, Not):
        return Not(rename_expr(e.arg, tag))
    return e  # constants


def rename(program, tag: int):
    """Tag every variable and array name of `program` with `#tag`."""
    if isinstance(program, Seq):
        return make_seq([rename(x, tag) for x in seq_items(program)])
    if isinstance(program, Assign):
        return Assign(tagged(program.var, tag), rename_expr(program.rhs, tag))
    if isinstance(program, ArrayAssign):
        return ArrayAssign(tagged(program.array, tag), rename_expr(program.index, tag),
                           rename_expr(program.rhs, tag))
    if isinstance(program, If):
        return If(rename_expr(program.cond, tag), rename(program.then, tag),
                  rename(program.els, tag))
    if isinstance(program, While):
        return While(rename_expr(program.cond, tag), rename(program.body, tag))
    return program  # skip, hole


# ---------------------------------------------------------------- similarity

_TAG_RE = re.compile(r"#[0-9]+$")


def token_shape(stmt) -> list:
    """Canonical token texts of a statement with version tags erased."""
    return [_TAG_RE.sub("", t.text) for t in tokenize(pretty_print(stmt)) if t.kind != "eof"]


def similarity(statements) -> float:
    """1 / (1 + mean pairwise edit distance of the token sequences)."""
    statements = list(statements)
    if len(statements) < 2:
        raise ValueError("similarity needs at least two statements")
    vocab: dict = {}
    seqs = [[vocab.setdefault(t, len(vocab)) for t in token_shape(s)] for s in statements]
    dists = [levenshtein(a, b) for a, b in combinations(seqs, 2)]
    return 1.0 / (1.0 + sum(dists) / len(dists))


# ---------------------------------------------------------------- product

def _items(s) -> list:
    return [x for x in seq_items(normalize(s)) if not isinstance(x, Skip)]


def _names(s) -> frozenset:
    scalars, arrays = stmt_vars(s)
    return frozenset(scalars | arrays)


class _Builder:
    def __init__(self, limit):
        self.limit = limit
        self.nodes = 0

    def bump(self, k):
        self.nodes += k
        if self.nodes > self.limit:
            raise ProductTooLarge(f"product exceeds {self.limit} nodes")

    def product(self, progs) -> list:
        # progs: list of (position, names, items); position is the input index
        out: list = []
        while True:
            progs = [p for p in progs if p[2]]
            if not progs:
                return out
            if len(progs) == 1:
                tail = progs[0][2]
                self.bump(sum(stmt_size(x) for x in tail))
                out.extend(tail)
                return out
            pos, names, first = progs[0]
            head = first[0]
            if isinstance(head, ATOMS):
                self.bump(1)
                out.append(head)
                progs[0] = (pos, names, first[1:])
                continue
            if isinstance(head, If):
                self.bump(1)
                rest = list(progs[1:])
                then = self.product([(pos, names, _items(head.then) + first[1:])] + rest)
                els = self.product([(pos, names, _items(head.els) + first[1:])] + rest)
                out.append(If(head.cond, make_seq(then), make_seq(els)))
                return out
            if isinstance(head, Hole):
                raise ValueError("cannot build a product of programs with holes")
            # the first program starts with a loop
            k = next((i for i, p in enumerate(progs) if not isinstance(p[2][0], While)), None)
            if k is not None:
                moved = progs[k]
                for i, other in enumerate(progs):
                    assert i == k or moved[1].isdisjoint(other[1]), "namespaces overlap"
                progs = [moved] + progs[:k] + progs[k + 1:]
                continue
            # every program starts with a loop: synchronize the most similar pair
            progs = sorted(progs, key=lambda p: p[0])
            i, j = self.most_similar(progs)
            (pi, ni, li), (pj, nj, lj) = progs[i], progs[j]
            out.extend(self.lockstep(li[0], lj[0], ni, nj))
            progs[i] = (pi, ni, li[1:])
            progs[j] = (pj, nj, lj[1:])

    def most_similar(self, progs):
        best, best_pair = -1.0, None
        for i, j in combinations(range(len(progs)), 2):
            score = similarity([progs[i][2][0], progs[j][2][0]])
            if score > best:
                best, best_pair = score, (i, j)
        return best_pair

    def lockstep(self, w1, w2, n1, n2):
        body = self.product([(0, n1, _items(w1.body)), (1, n2, _items(w2.body))])
        self.bump(3 + stmt_size(w1) + stmt_size(w2))
        w = While(And(w1.cond, w2.cond), make_seq(body))
        r = If(w1.cond, While(w1.cond, w1.body),
               If(w2.cond, While(w2.cond, w2.body), SKIP))
        return [w, r]


def construct_product(inputs, limit: int = NODE_LIMIT):
    """Single program equivalent to running `inputs` one after another.

    The inputs must use pairwise disjoint variable names (see `rename`)."""
    inputs = list(inputs)
    if not inputs:
        return SKIP
    if len(inputs) == 1:
        return inputs[0]
    names = [_names(p) for p in inputs]
    for a, b in combinations(range(len(inputs)), 2):
        if not names[a].isdisjoint(names[b]):
            shared = sorted(names[a] & names[b])
            raise ValueError(f"product inputs share variables: {', '.join(shared)}")
    builder = _Builder(limit)
    progs = [(i, n, _items(p)) for i, (n, p) in enumerate(zip(names, inputs))]
    return make_seq(builder.product(progs))


def sequential(inputs):
    """Plain sequential composition, the reference semantics of a product."""
    return make_seq(list(inputs))
