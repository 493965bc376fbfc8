"""N-way AST differencing: a shared program with holes plus one edit per
version, built by folding a two-way diff over the inputs."""

from __future__ import annotations

from dataclasses import dataclass

from .lang import (
    HOLE, SKIP, EditArityMismatch, Hole, If, Skip, While, apply_edit, make_seq,
    normalize, num_holes, seq_items, stmt_equal,
)


class ArityMismatch(EditArityMismatch):
    pass


@dataclass(frozen=True)
class DiffResult:
    shared: object
    edits: tuple  # one tuple of statements per input program

    @property
    def holes(self) -> int:
        return num_holes(self.shared)


def _items(s) -> list:
    return [x for x in seq_items(normalize(s)) if not isinstance(x, Skip)]


def _structural(a, b) -> bool:
    return ((isinstance(a, If) and isinstance(b, If) and a.cond == b.cond)
            or (isinstance(a, While) and isinstance(b, While) and a.cond == b.cond))


def _match_weight(a, b) -> int:
    if isinstance(b, Hole):
        return 0
    if a == b:
        return 2
    return 1 if _structural(a, b) else 0


def _align(xs, ys):
    """Weighted LCS; exact matches outweigh same-guard compound matches.

    Returns the matched index pairs in increasing order."""
    n, m = len(xs), len(ys)
    w = [[_match_weight(x, y) for y in ys] for x in xs]
    best = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, nxt = best[i], best[i + 1]
        for j in range(m - 1, -1, -1):
            v = max(nxt[j], row[j + 1])
            if w[i][j]:
                v = max(v, w[i][j] + nxt[j + 1])
            row[j] = v
    pairs = []
    i = j = 0
    while i < n and j < m:
        if w[i][j] and best[i][j] == w[i][j] + best[i + 1][j + 1]:
            pairs.append((i, j))
            i += 1
            j += 1
        elif best[i][j] == best[i + 1][j]:
            i += 1
        else:
            j += 1
    return pairs


def diff2(s, h, check: bool = False):
    """Two-way diff of a hole-free program `s` against a program with holes `h`.

    Returns (shared, edit, hedit) with shared[edit] equal to `s` and
    shared[hedit] equal to `h`."""
    shared, edit, hedit = _diff2(s, h)
    if check:
        assert len(edit) == len(hedit) == num_holes(shared)
        assert sum(num_holes(x) for x in hedit) == num_holes(h)
        assert stmt_equal(apply_edit(shared, edit), s)
        assert stmt_equal(apply_edit(shared, hedit), h)
    return shared, edit, hedit


def _diff2(s, h):
    if isinstance(h, Hole):
        return HOLE, [s], [HOLE]
    if stmt_equal(s, h):
        return h, [], []
    xs, ys = _items(s), _items(h)
    if len(xs) <= 1 and len(ys) <= 1:
        if not xs or not ys:
            return HOLE, [s], [h]
        a, b = xs[0], ys[0]
        if isinstance(a, If) and isinstance(b, If) and a.cond == b.cond:
            st, et, ht = _diff2(a.then, b.then)
            se, ee, he = _diff2(a.els, b.els)
            return If(b.cond, st, se), et + ee, ht + he
        if isinstance(a, While) and isinstance(b, While) and a.cond == b.cond:
            sb, eb, hb = _diff2(a.body, b.body)
            return While(b.cond, sb), eb, hb
        return HOLE, [s], [h]
    parts, edit, hedit = [], [], []

    def unmatched(run_x, run_y):
        for k in range(max(len(run_x), len(run_y))):
            x = run_x[k] if k < len(run_x) else SKIP
            y = run_y[k] if k < len(run_y) else SKIP
            # unmatched positions never align structurally: one hole each
            parts.append(HOLE)
            edit.append(x)
            hedit.append(y)

    i = j = 0
    for pi, pj in _align(xs, ys) + [(len(xs), len(ys))]:
        unmatched(xs[i:pi], ys[j:pj])
        if pi < len(xs):
            piece, e, he = _diff2(xs[pi], ys[pj])
            parts.append(piece)
            edit.extend(e)
            hedit.extend(he)
        i, j = pi + 1, pj + 1
    return make_seq(parts), edit, hedit


def compose(hedit, edit) -> list:
    """Fill the holes of an edit-with-holes by the entries of `edit`."""
    hedit, edit = list(hedit), list(edit)
    total = sum(num_holes(x) for x in hedit)
    if total != len(edit):
        raise ArityMismatch(f"edit has {len(edit)} entries for {total} holes")
    out, pos = [], 0
    for item in hedit:
        k = num_holes(item)
        out.append(apply_edit(item, edit[pos:pos + k]) if k else item)
        pos += k
    return out


def gen_edit(program, shared, edits):
    new_shared, delta, hdelta = diff2(program, shared)
    return new_shared, [compose(hdelta, e) for e in edits] + [delta]


def ndiff(programs, check: bool = False) -> DiffResult:
    """Shared program with holes and one edit per input, in input order."""
    programs = list(programs)
    if len(programs) < 2:
        raise ValueError("ndiff needs at least two programs")
    shared = programs[0]
    edits: list = [[]]
    for prog in programs[1:]:
        shared, edits = gen_edit(prog, shared, edits)
    result = DiffResult(shared, tuple(tuple(e) for e in edits))
    if check:
        for prog, e in zip(programs, result.edits):
            assert len(e) == num_holes(shared)
            assert stmt_equal(apply_edit(shared, e), prog)
    return result
