"""Ground truth by brute force, and seeded random programs and merge scenarios."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .lang import (
    And, ArrayAssign, ArrayRead, Assign, BinOp, BOTTOM, Cmp, FuelExhausted, If,
    IntConst, Not, Or, Skip, Valuation, Var, While, apply_edit, expr_vars,
    make_seq, normalize, seq_items, stmt_vars, walk_stmts,
)
from .machine import Machine

MAX_SCALARS = 6
MAX_ARRAYS = 1
SAMPLES = 100_000

# ---------------------------------------------------------------- the checker


@dataclass(frozen=True)
class CFViolation:
    var: str
    index: int
    values: tuple  # O, A, B, M; None stands for an unset location

    def __str__(self):
        vals = " ".join(f"{n}={'_' if v is None else v}" for n, v in zip("OABM", self.values))
        loc = f"{self.var}[{self.index}]" if self.var == "out" else self.var
        return f"{loc}: {vals}"


def _cell(final, var, i):
    v = final[(var, i)]
    return None if v is BOTTOM else v


def _def3_ok(o, a, b, m) -> bool:
    if o != a and m != a:
        return False
    if o != b and m != b:
        return False
    if o == a and o == b and m != o:
        return False
    return True


def _keep_ok(o, a, b, m) -> bool:
    return (o == a or a == m) and (o == b or b == m)


def cf_violation(finals, check_vars=(), global_otherwise: bool = False):
    """First conflict-freedom violation among four final states, or None.

    A fuel-exhausted run gives None: termination is outside the property."""
    if any(isinstance(f, FuelExhausted) for f in finals):
        return None
    idx = sorted(set().union(*(f.indices("out") for f in finals)))
    rows = [tuple(_cell(f, "out", i) for f in finals) for i in idx]
    if global_otherwise:
        chi12 = all(_keep_ok(*r) for r in rows)
        chi3 = all(len(set(r)) == 1 for r in rows)
        if not (chi12 or chi3):
            bad = next(r for i, r in zip(idx, rows) if not _keep_ok(*r))
            return CFViolation("out", idx[rows.index(bad)], bad)
    else:
        for i, r in zip(idx, rows):
            if not _def3_ok(*r):
                return CFViolation("out", i, r)
    for v in check_vars:
        if v == "out":
            continue
        vidx = sorted(set().union(*(f.indices(v) for f in finals))) or [0]
        vrows = [tuple(_cell(f, v, i) for f in finals) for i in vidx]
        if all(len(set(r)) == 1 for r in vrows):
            continue
        for i, r in zip(vidx, vrows):
            if not _keep_ok(*r):
                return CFViolation(v, i, r)
    return None


# ---------------------------------------------------------------- scenarios


@dataclass
class Scenario:
    base: object
    a: object
    b: object
    merge: object
    _diff: object = field(default=None, repr=False, compare=False)

    @property
    def programs(self):
        return [self.base, self.a, self.b, self.merge]

    @property
    def diff(self):
        if self._diff is None:
            from .ndiff import ndiff
            self._diff = ndiff(self.programs)
        return self._diff


@dataclass
class EnumSpace:
    scalars: tuple | None = None  # None: every scalar of the scenario
    arrays: tuple | None = None   # None: every array read by the scenario
    domain: tuple = (-2, -1, 0, 1, 2)
    window: int = 4
    fuel: int = 10_000
    seed: int = 0

    def resolve(self, programs):
        scalars, arrays = set(), set()
        for p in programs:
            s, _ = stmt_vars(p)
            scalars |= s
            arrays |= read_arrays(p)
        sc = tuple(sorted(scalars)) if self.scalars is None else tuple(self.scalars)
        ar = tuple(sorted(arrays)) if self.arrays is None else tuple(self.arrays)
        return sc, ar

    def size(self, programs) -> int:
        sc, ar = self.resolve(programs)
        return len(self.domain) ** (len(sc) + self.window * len(ar))


@dataclass(frozen=True)
class NoViolationFound:
    checked: int


@dataclass(frozen=True)
class Violation:
    sigma: Valuation
    index: int
    details: str


@dataclass(frozen=True)
class Inconclusive:
    exhausted: int
    checked: int


@dataclass(frozen=True)
class Sampled:
    checked: int
    exhausted: int = 0


def read_arrays(program) -> set:
    out: set = set()
    for node in walk_stmts(program):
        exprs = []
        if isinstance(node, Assign):
            exprs = [node.rhs]
        elif isinstance(node, ArrayAssign):
            exprs = [node.index, node.rhs]
        elif isinstance(node, (If, While)):
            exprs = [node.cond]
        for e in exprs:
            expr_vars(e, set(), out)
    return out


def _valuations(scalars, arrays, domain, window):
    slots = [(s, 0) for s in scalars] + [(a, i) for a in arrays for i in range(window)]
    for combo in itertools.product(domain, repeat=len(slots)):
        yield Valuation(zip(slots, combo))


def _samples(scalars, arrays, domain, window, n, seed):
    rng = random.Random(seed)
    slots = [(s, 0) for s in scalars] + [(a, i) for a in arrays for i in range(window)]
    for _ in range(n):
        yield Valuation({k: rng.choice(domain) for k in slots})


def brute_force_cf(scenario, space: EnumSpace | None = None, check_vars=(),
                   global_otherwise: bool = False, samples: int = SAMPLES):
    """Search the input space for a conflict-freedom violation of the merge."""
    space = space or EnumSpace()
    programs = scenario.programs if isinstance(scenario, Scenario) else list(scenario)
    machines = [Machine(p) for p in programs]
    scalars, arrays = space.resolve(programs)
    sampled = len(scalars) > MAX_SCALARS or len(arrays) > MAX_ARRAYS
    if sampled:
        sigmas = _samples(scalars, arrays, space.domain, space.window, samples, space.seed)
    else:
        sigmas = _valuations(scalars, arrays, space.domain, space.window)
    checked = exhausted = 0
    for sigma in sigmas:
        finals = [m.run(sigma, space.fuel) for m in machines]
        checked += 1
        if any(isinstance(f, FuelExhausted) for f in finals):
            exhausted += 1
            continue
        bad = cf_violation(finals, check_vars, global_otherwise)
        if bad is not None:
            return Violation(sigma, bad.index, str(bad))
    if sampled:
        return Sampled(checked, exhausted)
    if exhausted:
        return Inconclusive(exhausted, checked)
    return NoViolationFound(checked)


# ---------------------------------------------------------------- random programs


class ProgramGen:
    """Random programs over a fixed vocabulary.

    Loops are counted (`i := 0; while (i < k) { ...; i := i + 1 }`) unless
    `wild_loops` is set; loop counters are never assigned elsewhere."""

    def __init__(self, rng, scalars=("x", "y", "z"), arrays=(), out=True,
                 read_arrays=True, counters=("i", "j"), wild_loops=False,
                 max_const=3, out_window=3):
        self.rng = rng
        self.scalars = tuple(scalars)
        self.arrays = tuple(arrays)
        self.out = out
        self.read_arrays = read_arrays and bool(self.arrays)
        self.counters = tuple(counters)
        self.wild_loops = wild_loops
        self.max_const = max_const
        self.out_window = out_window

    def const(self):
        return IntConst(self.rng.randint(-self.max_const, self.max_const))

    def expr(self, depth=2):
        r = self.rng.random()
        if depth <= 0 or r < 0.35:
            if self.rng.random() < 0.4:
                return self.const()
            return Var(self.rng.choice(self.scalars))
        if self.read_arrays and r < 0.45:
            return ArrayRead(self.rng.choice(self.arrays), self.index())
        op = self.rng.choices(["+", "-", "*"], weights=[5, 4, 1])[0]
        return BinOp(op, self.expr(depth - 1), self.expr(depth - 1))

    def index(self):
        if self.rng.random() < 0.7:
            return IntConst(self.rng.randrange(self.out_window))
        return Var(self.rng.choice(self.scalars))

    def pred(self, depth=1):
        r = self.rng.random()
        if depth > 0 and r < 0.1:
            return And(self.pred(depth - 1), self.pred(depth - 1))
        if depth > 0 and r < 0.2:
            return Or(self.pred(depth - 1), self.pred(depth - 1))
        if depth > 0 and r < 0.25:
            return Not(self.pred(depth - 1))
        op = self.rng.choice(["==", "!=", "<", "<=", ">", ">="])
        return Cmp(op, self.expr(1), self.expr(1))

    def atom(self):
        r = self.rng.random()
        targets = []
        if self.out:
            targets.append("out")
        targets.extend(self.arrays)
        if targets and r < 0.3:
            arr = self.rng.choice(targets)
            idx = IntConst(self.rng.randrange(self.out_window)) if arr == "out" else self.index()
            return ArrayAssign(arr, idx, self.expr())
        return Assign(self.rng.choice(self.scalars), self.expr())

    def stmt(self, depth=2, free=None, loops=True):
        free = self.counters if free is None else free
        r = self.rng.random()
        if depth > 0 and r < 0.2:
            return [If(self.pred(), make_seq(self.block(depth - 1, free, loops)),
                       make_seq(self.block(depth - 1, free, loops)))]
        if depth > 0 and loops and r < 0.32:
            if self.wild_loops:
                return [While(self.pred(0), make_seq(self.block(depth - 1, free, loops)))]
            if free:
                c, rest = free[0], free[1:]
                body = self.block(depth - 1, rest, loops)
                body.append(Assign(c, BinOp("+", Var(c), IntConst(1))))
                bound = IntConst(self.rng.randint(1, 3))
                return [Assign(c, IntConst(0)),
                        While(Cmp("<", Var(c), bound), make_seq(body))]
        return [self.atom()]

    def block(self, depth=2, free=None, loops=True, size=None):
        n = size if size is not None else self.rng.randint(1, 3)
        out = []
        for _ in range(n):
            out.extend(self.stmt(depth, free, loops))
        return out

    def program(self, size=4, depth=2, loops=True):
        return normalize(make_seq(self.block(depth, None, loops, size)))

    def valuation(self, domain=range(-3, 4), window=3):
        data = {(s, 0): self.rng.choice(domain) for s in self.scalars}
        for a in self.arrays:
            for i in range(window):
                data[(a, i)] = self.rng.choice(domain)
        return Valuation(data)


# ---------------------------------------------------------------- mutations
#
# Programs are mutated in a list form: a block is a Python list whose
# elements are atoms, ["if", cond, then, els] or ["while", cond, body].

def _to_blocks(s):
    out = []
    for node in seq_items(normalize(s)):
        if isinstance(node, Skip):
            continue
        if isinstance(node, If):
            out.append(["if", node.cond, _to_blocks(node.then), _to_blocks(node.els)])
        elif isinstance(node, While):
            out.append(["while", node.cond, _to_blocks(node.body)])
        else:
            out.append(node)
    return out


def _from_blocks(block):
    items = []
    for node in block:
        if isinstance(node, list) and node[0] == "if":
            items.append(If(node[1], _from_blocks(node[2]), _from_blocks(node[3])))
        elif isinstance(node, list):
            items.append(While(node[1], _from_blocks(node[2])))
        else:
            items.append(node)
    return normalize(make_seq(items))


def _blocks(block):
    yield block
    for node in block:
        if isinstance(node, list):
            for sub in node[2:]:
                yield from _blocks(sub)


def _copy(block):
    return [(_copy_node(n)) for n in block]


def _copy_node(n):
    if isinstance(n, list):
        return [n[0], n[1]] + [_copy(b) for b in n[2:]]
    return n


_FLIP = {"==": "!=", "!=": "==", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}


def _tweak_const(e, rng):
    consts = []

    def collect(x):
        if isinstance(x, IntConst):
            consts.append(x)
        elif isinstance(x, BinOp):
            collect(x.lhs)
            collect(x.rhs)
        elif isinstance(x, ArrayRead):
            collect(x.index)
    collect(e)
    if not consts:
        return None
    target = rng.randrange(len(consts))
    seen = [0]

    def rebuild(x):
        if isinstance(x, IntConst):
            hit = seen[0] == target
            seen[0] += 1
            return IntConst(x.value + rng.choice((-1, 1))) if hit else x
        if isinstance(x, BinOp):
            return BinOp(x.op, rebuild(x.lhs), rebuild(x.rhs))
        if isinstance(x, ArrayRead):
            return ArrayRead(x.array, rebuild(x.index))
        return x
    return rebuild(e)


MUTATIONS = ("insert", "delete", "replace", "swap", "negate", "duplicate", "tweak")


class Mutator:
    def __init__(self, rng, gen: ProgramGen):
        self.rng = rng
        self.gen = gen

    def _atoms(self, prog, with_if=False):
        """(block, position) of mutable statements; loop counters stay fixed."""
        spots = []
        for blk in _blocks(prog):
            for i, node in enumerate(blk):
                if isinstance(node, list):
                    if with_if:
                        spots.append((blk, i))
                    continue
                name = node.var if isinstance(node, Assign) else None
                if name in self.gen.counters:
                    continue
                spots.append((blk, i))
        return spots

    def _ifs(self, prog):
        return [(blk, i) for blk in _blocks(prog) for i, n in enumerate(blk)
                if isinstance(n, list) and n[0] == "if"]

    def new_stmt(self):
        return self.gen.stmt(depth=1, free=(), loops=False)[0]

    def apply(self, prog, kind):
        """Mutate `prog` (list form) in place; False if `kind` does not apply."""
        rng = self.rng
        if kind == "insert":
            blk = rng.choice(list(_blocks(prog)))
            blk.insert(rng.randint(0, len(blk)), self.new_stmt())
            return True
        if kind == "delete":
            spots = self._atoms(prog, with_if=True)
            if not spots:
                return False
            blk, i = rng.choice(spots)
            del blk[i]
            return True
        if kind == "replace":
            spots = self._atoms(prog)
            if not spots:
                return False
            blk, i = rng.choice(spots)
            blk[i] = self.gen.atom()
            return True
        if kind in ("swap", "negate"):
            spots = self._ifs(prog)
            if not spots:
                return False
            blk, i = rng.choice(spots)
            _, cond, then, els = blk[i]
            if kind == "swap" and isinstance(cond, Cmp):
                cond = Cmp(_FLIP[cond.op], cond.lhs, cond.rhs)
            else:
                cond = Not(cond)
            blk[i] = ["if", cond, els, then]
            return True
        if kind == "tweak":
            spots = [(b, i) for b, i in self._atoms(prog) if not isinstance(b[i], Skip)]
            rng.shuffle(spots)
            for blk, i in spots:
                node = blk[i]
                new = _tweak_const(node.rhs, rng)
                if new is None:
                    continue
                blk[i] = Assign(node.var, new) if isinstance(node, Assign) else \
                    ArrayAssign(node.array, node.index, new)
                return True
            return False
        raise ValueError(f"unknown mutation {kind}")

    def duplicate(self, pa, pb):
        """Insert one patch at different places of the two variants."""
        rng = self.rng
        v = rng.choice(self.gen.scalars)
        patch = Assign(v, BinOp("+", Var(v), IntConst(rng.randint(1, 2))))
        blocks_a = list(_blocks(pa))
        k = rng.randrange(len(blocks_a))
        blk_a = blocks_a[k]
        blk_b = list(_blocks(pb))[k]
        if len(blk_a) < 1:
            blk_a.insert(0, patch)
            blk_b.insert(0, patch)
            return
        i = rng.randint(0, len(blk_a))
        j = rng.choice([p for p in range(len(blk_b) + 1) if p != i])
        blk_a.insert(i, patch)
        blk_b.insert(j, patch)


def union_merge(base, a, b, rng):
    """Hole-wise union of the two variants' changes; clashes go to a coin flip."""
    from .ndiff import ndiff
    d = ndiff([base, a, b])
    eo, ea, eb = d.edits
    em = []
    for o, x, y in zip(eo, ea, eb):
        ca, cb = normalize(x) != normalize(o), normalize(y) != normalize(o)
        if ca and cb:
            em.append(x if rng.random() < 0.5 else y)
        elif ca:
            em.append(x)
        else:
            em.append(y)
    return normalize(apply_edit(d.shared, em))


def gen_scenario(seed: int, budget: int = 4, scalars=("x", "y", "z"), loops=True,
                 kinds=None) -> Scenario:
    """A deterministic random merge scenario.

    `budget` is the number of top-level statements of the base program.
    `out` is only ever written at constant indices, never read."""
    rng = random.Random(seed)
    gen = ProgramGen(rng, scalars=scalars, arrays=(), out=True, counters=("i",))
    base = gen.program(size=max(1, budget), depth=2, loops=loops)
    mut = Mutator(rng, gen)
    kinds = tuple(kinds or MUTATIONS)
    for _ in range(50):
        pa, pb = _to_blocks(base), _to_blocks(base)
        kind_a = rng.choice(kinds)
        if kind_a == "duplicate":
            mut.duplicate(pa, pb)
        else:
            if not mut.apply(pa, kind_a):
                mut.apply(pa, "insert")
            kind_b = rng.choice([k for k in kinds if k != "duplicate"] or ["insert"])
            if not mut.apply(pb, kind_b):
                mut.apply(pb, "insert")
        a, b = _from_blocks(pa), _from_blocks(pb)
        if a != base or b != base:
            break
    merge = union_merge(base, a, b, rng)
    return Scenario(base, a, b, merge)


def random_edit_split(rng, program, k):
    """Replace up to `k` random sub-statements by holes (depth-first order)."""
    from .lang import HOLE, Seq
    nodes = [n for n in walk_stmts(program) if not isinstance(n, Seq)]
    chosen = set(id(n) for n in rng.sample(nodes, min(k, len(nodes))))
    edit = []

    def cut(s):
        if id(s) in chosen:
            edit.append(s)
            return HOLE
        if isinstance(s, Seq):
            return make_seq([cut(x) for x in seq_items(s)])
        if isinstance(s, If):
            return If(s.cond, cut(s.then), cut(s.els))
        if isinstance(s, While):
            return While(s.cond, cut(s.body))
        return s
    return cut(program), edit
