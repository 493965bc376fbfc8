"""Abstract syntax of the merge language, edits over programs with holes,
and a fuel-bounded reference interpreter."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

ARITH_OPS = ("+", "-", "*")
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")
RESERVED = frozenset({"out", "skip", "if", "else", "while", "true", "false"})


class LangError(Exception):
    pass


class EditArityMismatch(LangError):
    pass


# ---------------------------------------------------------------- expressions

@dataclass(frozen=True)
class IntConst:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class ArrayRead:
    array: str
    index: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Bottom:
    """Uninitialized value. Only ever produced by evaluation."""

    def __repr__(self):
        return "BOTTOM"


BOTTOM = Bottom()

Expr = Union[IntConst, Var, ArrayRead, BinOp, Bottom]

# ---------------------------------------------------------------- predicates


@dataclass(frozen=True)
class Cmp:
    op: str
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class And:
    lhs: "Pred"
    rhs: "Pred"


@dataclass(frozen=True)
class Or:
    lhs: "Pred"
    rhs: "Pred"


@dataclass(frozen=True)
class Not:
    arg: "Pred"


@dataclass(frozen=True)
class BoolConst:
    value: bool


Pred = Union[Cmp, And, Or, Not, BoolConst]

# ---------------------------------------------------------------- statements


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    var: str
    rhs: Expr


@dataclass(frozen=True)
class ArrayAssign:
    array: str
    index: Expr
    rhs: Expr


@dataclass(frozen=True)
class Hole:
    pass


@dataclass(frozen=True, eq=False)
class Seq:
    first: "Stmt"
    second: "Stmt"

    # Sequences can be hundreds of statements long, so equality and hashing
    # walk the right spine iteratively instead of recursing.
    def __eq__(self, other):
        a, b = self, other
        while isinstance(a, Seq) and isinstance(b, Seq):
            if a is b:
                return True
            if a.first != b.first:
                return False
            a, b = a.second, b.second
        if isinstance(a, Seq) or isinstance(b, Seq):
            return False
        return a == b

    def __hash__(self):
        h = 0x5EC
        node = self
        while isinstance(node, Seq):
            h = hash((h, node.first))
            node = node.second
        return hash((h, node))


@dataclass(frozen=True)
class If:
    cond: Pred
    then: "Stmt"
    els: "Stmt"


@dataclass(frozen=True)
class While:
    cond: Pred
    body: "Stmt"


SKIP = Skip()
HOLE = Hole()

Atom = Union[Skip, Assign, ArrayAssign]
Stmt = Union[Skip, Assign, ArrayAssign, Seq, If, While, Hole]
ATOMS = (Skip, Assign, ArrayAssign)


def seq_items(s) -> list:
    """Flatten nested sequences into a list of non-Seq statements."""
    out = []
    stack = [s]
    while stack:
        node = stack.pop()
        if isinstance(node, Seq):
            stack.append(node.second)
            stack.append(node.first)
        else:
            out.append(node)
    return out


def make_seq(items: Iterable) -> "Stmt":
    """Right-associated sequence of `items`; the empty sequence is skip."""
    items = list(items)
    if not items:
        return SKIP
    result = items[-1]
    for item in reversed(items[:-1]):
        result = Seq(item, result)
    return result


def walk_stmts(s) -> Iterator:
    """Pre-order, depth-first traversal of every statement node."""
    stack = [s]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Seq):
            stack.append(node.second)
            stack.append(node.first)
        elif isinstance(node, If):
            stack.append(node.els)
            stack.append(node.then)
        elif isinstance(node, While):
            stack.append(node.body)


# ---------------------------------------------------------------- holes / edits

def num_holes(s) -> int:
    return sum(1 for node in walk_stmts(s) if isinstance(node, Hole))


def is_hole_free(s) -> bool:
    return not any(isinstance(node, Hole) for node in walk_stmts(s))


def apply_edit(shared, edit) -> "Stmt":
    """Fill the holes of `shared` depth-first with the statements of `edit`."""
    edit = list(edit)
    if len(edit) != num_holes(shared):
        raise EditArityMismatch(
            f"edit has {len(edit)} entries but program has {num_holes(shared)} holes")
    filled, rest = _apply(shared, edit, 0)
    assert rest == len(edit)
    return filled


def _apply(s, edit, pos):
    if isinstance(s, Hole):
        return edit[pos], pos + 1
    if isinstance(s, Seq):
        items = []
        for item in seq_items(s):
            filled, pos = _apply(item, edit, pos)
            items.append(filled)
        return _rebuild_like(s, items), pos
    if isinstance(s, If):
        t, pos = _apply(s.then, edit, pos)
        e, pos = _apply(s.els, edit, pos)
        return If(s.cond, t, e), pos
    if isinstance(s, While):
        b, pos = _apply(s.body, edit, pos)
        return While(s.cond, b), pos
    return s, pos


def _rebuild_like(s, items):
    # Preserve the original nesting shape of a sequence while swapping leaves.
    it = iter(items)

    def build(node):
        if isinstance(node, Seq):
            left = build(node.first)
            # walk the right spine without recursion
            spine = [left]
            cur = node.second
            while isinstance(cur, Seq):
                spine.append(build(cur.first))
                cur = cur.second
            spine.append(build(cur))
            result = spine[-1]
            for part in reversed(spine[:-1]):
                result = Seq(part, result)
            return result
        return next(it)

    return build(s)


# ---------------------------------------------------------------- normalization

def normalize(s):
    """Skip-normalized form used for equality and printing.

    Sequences become right-associated with skips removed; an empty
    sequence is skip."""
    items = [normalize(x) for x in seq_items(s)] if isinstance(s, Seq) else None
    if items is not None:
        flat = []
        for it in items:
            flat.extend(x for x in seq_items(it) if not isinstance(x, Skip))
        return make_seq(flat)
    if isinstance(s, If):
        return If(s.cond, normalize(s.then), normalize(s.els))
    if isinstance(s, While):
        return While(s.cond, normalize(s.body))
    return s


def stmt_equal(a, b) -> bool:
    return normalize(a) == normalize(b)


# ---------------------------------------------------------------- variables

def expr_vars(e, scalars: set, arrays: set):
    stack = [e]
    while stack:
        e = stack.pop()
        if isinstance(e, Var):
            scalars.add(e.name)
        elif isinstance(e, ArrayRead):
            arrays.add(e.array)
            stack.append(e.index)
        elif isinstance(e, BinOp):
            stack.append(e.lhs)
            stack.append(e.rhs)
        elif isinstance(e, Cmp):
            stack.append(e.lhs)
            stack.append(e.rhs)
        elif isinstance(e, (And, Or)):
            stack.append(e.lhs)
            stack.append(e.rhs)
        elif isinstance(e, Not):
            stack.append(e.arg)


def stmt_vars(s):
    """Return (scalars, arrays) mentioned anywhere in `s`."""
    scalars, arrays = set(), set()
    for node in walk_stmts(s):
        if isinstance(node, Assign):
            scalars.add(node.var)
            expr_vars(node.rhs, scalars, arrays)
        elif isinstance(node, ArrayAssign):
            arrays.add(node.array)
            expr_vars(node.index, scalars, arrays)
            expr_vars(node.rhs, scalars, arrays)
        elif isinstance(node, (If, While)):
            expr_vars(node.cond, scalars, arrays)
    return scalars, arrays


def stmt_size(s) -> int:
    """Number of statement nodes, a cheap measure of program size."""
    return sum(1 for _ in walk_stmts(s))


# ---------------------------------------------------------------- valuations

class Valuation(Mapping):
    """Immutable map from (variable, index) to an integer.

    Absent keys read as BOTTOM; BOTTOM is never stored explicitly, so two
    valuations are equal exactly when they agree on every location."""

    __slots__ = ("_data", "_hash")

    def __init__(self, data=None):
        items = {}
        if data:
            src = data.items() if isinstance(data, Mapping) else data
            for key, value in src:
                if isinstance(key, str):
                    key = (key, 0)
                if value is BOTTOM or value is None:
                    continue
                items[(key[0], int(key[1]))] = int(value)
        self._data = items
        self._hash = None

    def __getitem__(self, key):
        if isinstance(key, str):
            key = (key, 0)
        return self._data.get(key, BOTTOM)

    def __contains__(self, key):
        if isinstance(key, str):
            key = (key, 0)
        return key in self._data

    def __iter__(self):
        return iter(self._data)

    def __len__(self):
        return len(self._data)

    def __eq__(self, other):
        if isinstance(other, Valuation):
            return self._data == other._data
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._data.items()))
        return self._hash

    def __repr__(self):
        body = ", ".join(
            f"{n}[{i}]: {v}" if i else f"{n}: {v}" for (n, i), v in sorted(self._data.items()))
        return "{" + body + "}"

    def raw(self) -> dict:
        return dict(self._data)

    def indices(self, name) -> list:
        return sorted(i for (n, i) in self._data if n == name)


@dataclass(frozen=True)
class FuelExhausted:
    fuel: int = 0


# ---------------------------------------------------------------- interpreter

def eval_expr(e, env: dict):
    if isinstance(e, IntConst):
        return e.value
    if isinstance(e, Var):
        return env.get((e.name, 0), BOTTOM)
    if isinstance(e, ArrayRead):
        idx = eval_expr(e.index, env)
        if idx is BOTTOM:
            return BOTTOM
        return env.get((e.array, idx), BOTTOM)
    if isinstance(e, BinOp):
        a = eval_expr(e.lhs, env)
        b = eval_expr(e.rhs, env)
        if a is BOTTOM or b is BOTTOM:
            return BOTTOM
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        return a * b
    if isinstance(e, Bottom):
        return BOTTOM
    raise LangError(f"not an expression: {e!r}")


def compare(op, a, b) -> bool:
    if a is BOTTOM or b is BOTTOM:
        both = a is BOTTOM and b is BOTTOM
        if op == "==":
            return both
        return False
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def eval_pred(p, env: dict) -> bool:
    if isinstance(p, Cmp):
        return compare(p.op, eval_expr(p.lhs, env), eval_expr(p.rhs, env))
    if isinstance(p, And):
        return eval_pred(p.lhs, env) and eval_pred(p.rhs, env)
    if isinstance(p, Or):
        return eval_pred(p.lhs, env) or eval_pred(p.rhs, env)
    if isinstance(p, Not):
        return not eval_pred(p.arg, env)
    if isinstance(p, BoolConst):
        return p.value
    raise LangError(f"not a predicate: {p!r}")


class _OutOfFuel(Exception):
    pass


def interpret(program, valuation, fuel: int = 10_000):
    """Run `program` from `valuation`.

    Returns the final Valuation, or FuelExhausted once more than `fuel`
    loop iterations would be needed."""
    if not isinstance(valuation, Valuation):
        valuation = Valuation(valuation)
    env = valuation.raw()
    budget = [fuel]
    try:
        _exec(program, env, budget)
    except _OutOfFuel:
        return FuelExhausted(fuel)
    return Valuation(env)


def _exec(s, env, budget):
    for node in seq_items(s) if isinstance(s, Seq) else (s,):
        if isinstance(node, Assign):
            v = eval_expr(node.rhs, env)
            if v is BOTTOM:
                env.pop((node.var, 0), None)
            else:
                env[(node.var, 0)] = v
        elif isinstance(node, ArrayAssign):
            idx = eval_expr(node.index, env)
            v = eval_expr(node.rhs, env)
            if idx is BOTTOM:
                continue  # store through an uninitialized index is dropped
            if v is BOTTOM:
                env.pop((node.array, idx), None)
            else:
                env[(node.array, idx)] = v
        elif isinstance(node, Skip):
            continue
        elif isinstance(node, If):
            _exec(node.then if eval_pred(node.cond, env) else node.els, env, budget)
        elif isinstance(node, While):
            while eval_pred(node.cond, env):
                if budget[0] <= 0:
                    raise _OutOfFuel
                _exec(node.body, env, budget)
                budget[0] -= 1
        elif isinstance(node, Hole):
            raise LangError("cannot interpret a program with holes")
        else:
            raise LangError(f"not a statement: {node!r}")
