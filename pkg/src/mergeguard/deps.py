"""Modified-variable sets and backward dependence of hole-free statements."""

from __future__ import annotations

from .lang import (
    ArrayAssign, Assign, If, Seq, Skip, While, expr_vars, seq_items, walk_stmts,
)


class NotModified(ValueError):
    pass


def modifies(s) -> frozenset:
    """Every scalar and array assigned somewhere in `s` (arrays as a whole)."""
    out = set()
    for node in walk_stmts(s):
        if isinstance(node, Assign):
            out.add(node.var)
        elif isinstance(node, ArrayAssign):
            out.add(node.array)
    return frozenset(out)


def _reads(e) -> set:
    scalars, arrays = set(), set()
    expr_vars(e, scalars, arrays)
    return scalars | arrays


def relevant(s, needed: frozenset) -> frozenset:
    """Variables at entry of `s` whose values can influence `needed` at exit.

    Includes data flow, control dependence on branch and loop guards, and
    needed variables that some path leaves untouched."""
    if isinstance(s, Seq):
        for item in reversed(seq_items(s)):
            needed = relevant(item, needed)
        return needed
    if isinstance(s, Skip):
        return needed
    if isinstance(s, Assign):
        if s.var not in needed:
            return needed
        return (needed - {s.var}) | _reads(s.rhs)
    if isinstance(s, ArrayAssign):
        if s.array not in needed:
            return needed
        # a single-cell update keeps the rest of the array alive
        return needed | _reads(s.index) | _reads(s.rhs)
    if isinstance(s, If):
        out = relevant(s.then, needed) | relevant(s.els, needed)
        if (modifies(s.then) | modifies(s.els)) & needed:
            out |= _reads(s.cond)
        return frozenset(out)
    if isinstance(s, While):
        body_mods = modifies(s.body)
        cur = frozenset(needed)
        while True:
            nxt = cur | relevant(s.body, cur)
            if body_mods & nxt:
                nxt |= _reads(s.cond)
            if nxt == cur:
                return cur
            cur = frozenset(nxt)
    raise TypeError(f"dependencies need a hole-free statement, got {s!r}")


def dependencies(s, y: str) -> frozenset:
    if y not in modifies(s):
        raise NotModified(f"{y} is not modified by the statement")
    return frozenset(relevant(s, frozenset({y})))
