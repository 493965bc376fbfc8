"""Relational postconditions over four program versions and the
conflict-freedom check built on them."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations

from . import formula as F
from .deps import dependencies, modifies
from .formula import ARR, INT, Term
from .lang import (
    ATOMS, And, ArrayAssign, ArrayRead, Assign, BinOp, BoolConst, Cmp, Hole, If, IntConst,
    Not, Or, Seq, Skip, Valuation, Var, While, apply_edit, is_hole_free, make_seq,
    num_holes, seq_items, stmt_vars,
)
from .machine import Machine
from .ndiff import ndiff
from .oracle import cf_violation
from .parser import pretty_print
from .product import NODE_LIMIT, ProductTooLarge, construct_product, rename, rename_expr
from .smt import Invalid, SolverError, SolverSession, UnknownAnswer, concretize

MODES = ("compositional", "full-product", "no-dependence")


class SortError(ValueError):
    """A name is used both as a scalar and as an array."""


@dataclass
class Options:
    mode: str = "compositional"
    global_otherwise: bool = False
    check_vars: tuple = ()
    product_limit: int = NODE_LIMIT
    fuel: int = 10_000


@dataclass
class Verdict:
    kind: str  # verified | conflict | unknown
    witness: Valuation | None = None
    confirmed: bool = False
    reason: str = ""
    invariants: list = field(default_factory=list)
    rules: list = field(default_factory=list)
    holes: int = 0
    timings: dict = field(default_factory=dict)
    queries: int = 0

    @property
    def verified(self):
        return self.kind == "verified"


# ---------------------------------------------------------------- contexts

class Ctx:
    """Persistent list of facts; extensions share their prefix."""

    __slots__ = ("parent", "facts", "size")

    def __init__(self, parent=None, facts=()):
        self.parent = parent
        self.facts = tuple(f for f in facts if f != F.TRUE)
        self.size = (parent.size if parent else 0) + len(self.facts)

    def extend(self, facts) -> "Ctx":
        return Ctx(self, facts)

    def terms(self) -> list:
        chunks = []
        node = self
        while node is not None:
            chunks.append(node.facts)
            node = node.parent
        out = []
        for chunk in reversed(chunks):
            out.extend(chunk)
        return out

    def since(self, base: "Ctx") -> list:
        chunks = []
        node = self
        while node is not None and node is not base:
            chunks.append(node.facts)
            node = node.parent
        out = []
        for chunk in reversed(chunks):
            out.extend(chunk)
        return out


def split_tag(rv: str):
    base, _, tag = rv.partition("#")
    return base, int(tag)


class Env:
    """Current logical term of every renamed variable."""

    __slots__ = ("engine", "m")

    def __init__(self, engine, m=None):
        self.engine = engine
        self.m = dict(m) if m else {}

    def __getitem__(self, rv):
        t = self.m.get(rv)
        if t is None:
            t = self.engine.initial(split_tag(rv)[0])
        return t

    def __setitem__(self, rv, term):
        self.m[rv] = term

    def copy(self):
        return Env(self.engine, self.m)

    def keys(self):
        return self.m.keys()


# ---------------------------------------------------------------- engine

class Engine:
    def __init__(self, session: SolverSession, sorts: dict, ntags: int = 4,
                 options: Options | None = None):
        self.session = session
        self.sorts = sorts  # base name -> INT | ARR
        self.ntags = ntags
        self.tags = tuple(range(1, ntags + 1))
        self.opts = options or Options()
        self.gens: dict = {}
        self._init: dict = {}
        self._ufs: dict = {}
        self.invariants: list = []
        self.rules: list = []
        self.hole_no = 0

    # -- symbols
    def sort(self, base):
        return self.sorts.get(base, INT)

    def initial(self, base) -> Term:
        t = self._init.get(base)
        if t is None:
            t = F.symbol(f"{base}_1_0", self.sort(base))
            self._init[base] = t
        return t

    def fresh(self, rv: str) -> Term:
        base, tag = split_tag(rv)
        g = self.gens.get(rv, 0) + 1
        self.gens[rv] = g
        return F.symbol(f"{base}_{tag}_{g}", self.sort(base))

    def uf(self, node, y, deps) -> F.UF:
        key = (node, y)
        fn = self._ufs.get(key)
        if fn is None:
            fn = F.UF(f"uf_{len(self._ufs) + 1}", [self.sort(d) for d in deps], self.sort(y))
            self._ufs[key] = fn
        return fn

    def initial_inputs(self) -> dict:
        return {b: (t.text, t.sort) for b, t in self._init.items()}

    # -- translation
    def expr(self, e, env) -> Term:
        if isinstance(e, IntConst):
            return F.num(e.value)
        if isinstance(e, Var):
            return env[e.name]
        if isinstance(e, ArrayRead):
            return F.select(env[e.array], self.expr(e.index, env))
        if isinstance(e, BinOp):
            return F.arith(e.op, self.expr(e.lhs, env), self.expr(e.rhs, env))
        raise TypeError(f"cannot translate {e!r}")

    def pred(self, p, env) -> Term:
        if isinstance(p, Cmp):
            op = {"==": "==", "!=": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}[p.op]
            return F.cmp(op, self.expr(p.lhs, env), self.expr(p.rhs, env))
        if isinstance(p, And):
            return F.and_([self.pred(p.lhs, env), self.pred(p.rhs, env)])
        if isinstance(p, Or):
            return F.or_([self.pred(p.lhs, env), self.pred(p.rhs, env)])
        if isinstance(p, Not):
            return F.not_(self.pred(p.arg, env))
        if isinstance(p, BoolConst):
            return F.TRUE if p.value else F.FALSE
        raise TypeError(f"cannot translate {p!r}")

    # -- solver helpers
    def entails(self, ctx: Ctx, goal: Term) -> bool:
        if goal == F.TRUE:
            return True
        return self.session.entails(ctx.terms(), goal)

    def prune(self, ctx: Ctx, cands: list, term_of) -> list:
        """Largest subset of `cands` whose terms `ctx` entails (Houdini step)."""
        cands = list(cands)
        hyps = ctx.terms()
        while cands:
            terms = [term_of(c) for c in cands]
            goal = F.and_(terms)
            if goal == F.TRUE:
                return cands
            status, values = self.session.check(hyps + [F.not_(goal)], want=terms)
            if status == "unsat":
                return cands
            if status != "sat" or values is None:
                return []  # unknown: keep nothing rather than guess
            kept = [c for c, v in zip(cands, values) if v == "true"]
            if len(kept) == len(cands):  # defensive: model disagrees with goal
                return []
            cands = kept
        return cands

    # -- strongest postcondition of (product) programs
    def post(self, s, ctx: Ctx, env: Env):
        for node in seq_items(s) if isinstance(s, Seq) else (s,):
            if isinstance(node, Skip):
                continue
            if isinstance(node, Assign):
                t = self.expr(node.rhs, env)
                if t.decls and len(t.decls) == 1 and t.text == next(iter(t.decls))[0]:
                    env[node.var] = t  # plain copy: no new symbol needed
                elif not t.decls:
                    env[node.var] = t
                else:
                    v = self.fresh(node.var)
                    ctx = ctx.extend([F.eq(v, t)])
                    env[node.var] = v
            elif isinstance(node, ArrayAssign):
                t = F.store(env[node.array], self.expr(node.index, env), self.expr(node.rhs, env))
                v = self.fresh(node.array)
                ctx = ctx.extend([F.eq(v, t)])
                env[node.array] = v
            elif isinstance(node, If):
                c = self.pred(node.cond, env)
                ctx, env = self.branch(ctx, env, c,
                                       lambda cx, ev: self.post(node.then, cx, ev),
                                       lambda cx, ev: self.post(node.els, cx, ev))
            elif isinstance(node, While):
                ctx, env = self.post_loop(node, ctx, env)
            else:
                raise TypeError(f"post of {node!r}")
        return ctx, env

    def post_loop(self, node, ctx, env):
        mods = modifies(node)
        cands, env_h, inv = self.loop(ctx, env, mods,
                                      lambda cx, ev: self.post(node.body, cx, ev), [node.cond])
        self.record_invariant(cands)
        return self.exit_loop(ctx, env, env_h, inv, mods, [node.cond]), env_h

    def exit_loop(self, ctx, env, env_h, inv, mods, conds):
        """Invariant plus negated guards; the zero-iteration case keeps the entry state."""
        entry = [self.pred(c, env) for c in conds]
        zero = [F.not_(g) for g in entry] + [F.eq(env_h[rv], env[rv]) for rv in sorted(mods)]
        done = [F.not_(self.pred(c, env_h)) for c in conds]
        return ctx.extend(inv + done + [F.or_([F.and_(zero), F.or_(entry)])])

    def branch(self, ctx, env, c, run_then, run_else, both=False):
        """Disjunction of the two branch postconditions, joined by fresh symbols."""
        if both:
            pass
        elif c == F.TRUE:
            return run_then(ctx, env.copy())
        if c == F.FALSE:
            return run_else(ctx, env.copy())
        ct, et = run_then(ctx.extend([c]), env.copy())
        ce, ee = run_else(ctx.extend([F.not_(c)]), env.copy())
        lt, le = ct.since(ctx), ce.since(ctx)
        out = env.copy()
        for rv in sorted(set(et.keys()) | set(ee.keys())):
            a, b = et[rv], ee[rv]
            if a == b:
                out[rv] = a
                continue
            v = self.fresh(rv)
            lt.append(F.eq(v, a))
            le.append(F.eq(v, b))
            out[rv] = v
        return ctx.extend([F.or_([F.and_(lt), F.and_(le)])]), out

    def loop(self, ctx, env, mods, analyze, conds):
        """Houdini over pairwise equalities, then exit under the negated guards.

        `conds` holds the loop guard of each synchronized copy (one for a
        product loop, one per version for a shared loop with holes)."""
        mods = sorted(mods)
        tagged_mods = set(mods)
        names = set(tagged_mods)
        for rv in list(env.keys()):
            names.add(rv)
        by_base: dict = {}
        for rv in names:
            base, tag = split_tag(rv)
            by_base.setdefault(base, set()).add(tag)
        for rv in tagged_mods:
            base, _ = split_tag(rv)
            by_base[base] |= set(self.tags)
        cands = []
        for base in sorted(by_base):
            tags = sorted(by_base[base])
            for i, j in combinations(tags, 2):
                a, b = f"{base}#{i}", f"{base}#{j}"
                if a in tagged_mods or b in tagged_mods:
                    cands.append((base, i, j))
        cands = self.prune(ctx, cands, lambda c: F.eq(env[f"{c[0]}#{c[1]}"], env[f"{c[0]}#{c[2]}"]))
        while True:
            env_h = env.copy()
            for rv in mods:
                env_h[rv] = self.fresh(rv)
            inv = [F.eq(env_h[f"{b}#{i}"], env_h[f"{b}#{j}"]) for b, i, j in cands]
            guards = [self.pred(c, env_h) for c in conds]
            ctx_h = ctx.extend(inv + guards)
            ctx_b, env_b = analyze(ctx_h, env_h.copy())
            kept = self.prune(ctx_b, cands,
                              lambda c: F.eq(env_b[f"{c[0]}#{c[1]}"], env_b[f"{c[0]}#{c[2]}"]))
            if len(kept) == len(cands):
                break
            cands = kept
        return cands, env_h, inv

    def record_invariant(self, cands):
        text = " && ".join(f"{b}#{i} = {b}#{j}" for b, i, j in cands) or "true"
        self.invariants.append(text)
        return text


class Verifier(Engine):
    """Relational postcondition inference over a shared program with holes."""

    # -- relational postcondition
    def relational_post(self, shared, edits, ctx: Ctx, env: Env):
        edits = [list(e) for e in edits]
        return self.rpc(shared, edits, ctx, env)

    def rpc(self, node, edits, ctx, env):
        if isinstance(node, Hole):
            heads = [e[0] for e in edits]
            self.hole_no += 1
            self.rules.append({"hole": self.hole_no, "rule": 1, "what": "mini-product"})
            prod = construct_product([rename(h, t) for t, h in zip(self.tags, heads)],
                                     self.opts.product_limit)
            ctx, env = self.post(prod, ctx, env)
            return ctx, env, [e[1:] for e in edits]
        if isinstance(node, Seq):
            for item in seq_items(node):
                ctx, env, edits = self.rpc(item, edits, ctx, env)
            return ctx, env, edits
        if isinstance(node, ATOMS):
            # an atom is its own exact summary: run the four renamed copies
            ctx, env = self.post(make_seq([rename(node, t) for t in self.tags]), ctx, env)
            return ctx, env, edits
        if is_hole_free(node):
            if self.opts.mode != "no-dependence" and self.guard(node, ctx, env):
                self.rules.append({"rule": 2, "what": "summary"})
                return (*self.summarize(node, ctx, env), edits)
            return self.fallback(node, edits, ctx, env, "shared code")
        if isinstance(node, If):
            conds = [self.pred(rename_expr(node.cond, t), env) for t in self.tags]
            if self.entails(ctx, F.and_([F.iff(conds[0], c) for c in conds[1:]])):
                self.rules.append({"rule": 4, "what": "aligned branches"})
                k = num_holes(node.then)
                holder = {}

                def run_then(cx, ev):
                    cx, ev, rest = self.rpc(node.then, edits, cx, ev)
                    holder["rest"] = rest
                    return cx, ev

                def run_else(cx, ev):
                    cx, ev, rest = self.rpc(node.els, holder.get("rest", [e[k:] for e in edits]),
                                            cx, ev)
                    holder["rest2"] = rest
                    return cx, ev

                # both branches must run so that each consumes its edits
                ctx2, env2 = self.branch(ctx, env, conds[0], run_then, run_else, both=True)
                return ctx2, env2, holder["rest2"]
            return self.fallback(node, edits, ctx, env, "branch conditions may differ")
        if isinstance(node, While):
            return self.rpc_loop(node, edits, ctx, env)
        return self.fallback(node, edits, ctx, env, "statement")

    def rpc_loop(self, node, edits, ctx, env):
        k = num_holes(node)
        versions = [apply_edit(node, e[:k]) for e in edits]
        mods = set()
        for t, v in zip(self.tags, versions):
            mods |= {f"{x}#{t}" for x in modifies(v)}
        for base in {split_tag(m)[0] for m in mods}:
            mods |= {f"{base}#{t}" for t in self.tags}
        body_edits = [e[:k] for e in edits]
        start_rules, start_hole = len(self.rules), self.hole_no

        def analyze(cx, ev):
            self.hole_no = start_hole
            del self.rules[start_rules:]
            cx, ev, rest = self.rpc(node.body, body_edits, cx, ev)
            return cx, ev

        conds = [rename_expr(node.cond, t) for t in self.tags]
        cands, env_h, inv = self.loop(ctx, env, mods, analyze, conds)
        guards = [self.pred(c, env_h) for c in conds]
        same = F.and_([F.iff(guards[0], g) for g in guards[1:]])
        if self.entails(ctx.extend(inv), same):
            self.record_invariant(cands)
            self.rules.insert(start_rules, {"rule": 5, "what": "aligned loop"})
            exit_ctx = self.exit_loop(ctx, env, env_h, inv, mods, conds)
            return exit_ctx, env_h, [e[k:] for e in edits]
        self.hole_no = start_hole
        del self.rules[start_rules:]
        return self.fallback(node, edits, ctx, env, "loop guards may differ")

    def fallback(self, node, edits, ctx, env, why):
        k = num_holes(node)
        for _ in range(k):
            self.hole_no += 1
            self.rules.append({"hole": self.hole_no, "rule": 6, "what": f"product ({why})"})
        if not k:
            self.rules.append({"rule": 6, "what": f"product ({why})"})
        pieces = [rename(apply_edit(node, e[:k]), t) for t, e in zip(self.tags, edits)]
        prod = construct_product(pieces, self.opts.product_limit)
        ctx, env = self.post(prod, ctx, env)
        return ctx, env, [e[k:] for e in edits]

    # -- rule 2
    def guard(self, node, ctx, env) -> bool:
        """Apply a summary only if the versions agree in a conflict-free way on
        everything the statement touches."""
        scalars, arrays = stmt_vars(node)
        names = sorted(scalars | arrays)
        if not names:
            return True
        vecs = {t: [env[f"{n}#{t}"] for n in names] for t in self.tags}
        if all(vecs[t] == vecs[1] for t in self.tags):
            return True
        if self.ntags != 4:
            return False

        def same(i, j):
            return F.and_([F.eq(a, b) for a, b in zip(vecs[i], vecs[j])])
        goal = F.and_([F.implies(F.not_(same(1, 2)), same(2, 4)),
                       F.implies(F.not_(same(1, 3)), same(3, 4))])
        return self.entails(ctx, goal)

    def summarize(self, node, ctx, env):
        facts, out = [], env.copy()
        for y in sorted(modifies(node)):
            deps = sorted(dependencies(node, y))
            fn = self.uf(node, y, deps)
            for t in self.tags:
                val = fn(*[env[f"{d}#{t}"] for d in deps])
                v = self.fresh(f"{y}#{t}")
                facts.append(F.eq(v, val))
                out[f"{y}#{t}"] = v
        return ctx.extend(facts), out


# ---------------------------------------------------------------- verification

def infer_sorts(programs) -> dict:
    scalars, arrays = set(), set()
    for p in programs:
        s, a = stmt_vars(p)
        scalars |= s
        arrays |= a
    arrays.add("out")
    clash = scalars & arrays
    if clash:
        raise SortError(f"used as both scalar and array: {', '.join(sorted(clash))}")
    return {**{n: INT for n in scalars}, **{n: ARR for n in arrays}}


def _def3(o1, o2, o3, o4):
    return F.and_([
        F.implies(F.not_(F.eq(o1, o2)), F.eq(o4, o2)),
        F.implies(F.not_(F.eq(o1, o3)), F.eq(o4, o3)),
        F.implies(F.and_([F.eq(o1, o2), F.eq(o1, o3)]), F.eq(o4, o1)),
    ])


def _cf_var(vals):
    """Per-variable form: all equal, or every changed variant is kept."""
    if vals[0].sort == ARR:
        k = F.bound("idx!1")
        v1, v2, v3, v4 = [F.select(v, k) for v in vals]
    else:
        v1, v2, v3, v4 = vals
    keep = F.and_([F.implies(F.not_(F.eq(v1, v2)), F.eq(v2, v4)),
                   F.implies(F.not_(F.eq(v1, v3)), F.eq(v3, v4))])
    if vals[0].sort == ARR:
        keep = F.forall(k, keep)
    same = F.and_([F.eq(vals[0], vals[1]), F.eq(vals[0], vals[2]), F.eq(vals[0], vals[3])])
    return F.or_([same, keep])


def out_condition(outs, global_otherwise: bool) -> Term:
    k = F.bound("idx!0")
    o1, o2, o3, o4 = [F.select(v, k) for v in outs]
    if not global_otherwise:
        return F.forall(k, _def3(o1, o2, o3, o4))
    chi1 = F.forall(k, F.implies(F.not_(F.eq(o1, o2)), F.eq(o2, o4)))
    chi2 = F.forall(k, F.implies(F.not_(F.eq(o1, o3)), F.eq(o3, o4)))
    chi3 = F.forall(k, F.and_([F.eq(o1, o2), F.eq(o1, o3), F.eq(o1, o4)]))
    return F.or_([F.and_([chi1, chi2]), chi3])


def verify(shared, edits, check_vars=(), session: SolverSession | None = None,
           options: Options | None = None, solver: str | None = None,
           timeout_ms: int = 10_000, seed: int = 0) -> Verdict:
    """Check that the merge (fourth edit) is semantically conflict-free."""
    opts = options or Options()
    if check_vars:
        opts = Options(**{**opts.__dict__, "check_vars": tuple(check_vars)})
    edits = [list(e) for e in edits]
    if len(edits) != 4:
        raise ValueError("verification needs exactly four versions (O, A, B, M)")
    k = num_holes(shared)
    for e in edits:
        if len(e) != k:
            raise ValueError(f"edit of length {len(e)} for {k} holes")
    t0 = time.perf_counter()
    own = session is None
    if own:
        session = SolverSession(solver, timeout_ms, seed)
    else:
        session.reset()
    try:
        programs = [apply_edit(shared, e) for e in edits]
        sorts = infer_sorts(programs)
        eng = Verifier(session, sorts, 4, opts)
        q0, s0 = session.stats.queries, session.stats.seconds
        env = Env(eng)
        ctx = Ctx()
        t1 = time.perf_counter()
        try:
            if opts.mode == "full-product":
                ctx, env, rest = eng.fallback(shared, edits, ctx, env, "whole program")
            else:
                ctx, env, rest = eng.relational_post(shared, edits, ctx, env)
        except ProductTooLarge as exc:
            return _finish(Verdict("unknown", reason=f"product too large: {exc}", holes=k),
                           eng, session, q0, s0, t0, t1)
        assert all(not r for r in rest), "edits left unconsumed"
        goal_parts = [out_condition([env[f"out#{t}"] for t in eng.tags], opts.global_otherwise)]
        for v in opts.check_vars:
            if v == "out":
                continue
            vals = [env[f"{v}#{t}"] for t in eng.tags]
            goal_parts.append(_cf_var(vals))
        goal = F.and_(goal_parts)
        for v in list(sorts):
            eng.initial(v)
        ans = session.check_entailment(ctx.terms(), goal)
        if isinstance(ans, UnknownAnswer):
            verdict = Verdict("unknown", reason=ans.reason, holes=k)
        elif isinstance(ans, Invalid):
            sigma = concretize(ans.model, eng.initial_inputs())
            finals = [Machine(p).run(sigma, opts.fuel) for p in programs]
            bad = cf_violation(finals, opts.check_vars, opts.global_otherwise)
            verdict = Verdict("conflict", witness=sigma, confirmed=bad is not None, holes=k,
                              reason=str(bad) if bad else "potential conflict (possible imprecision)")
        else:
            verdict = Verdict("verified", holes=k)
        return _finish(verdict, eng, session, q0, s0, t0, t1)
    finally:
        if own:
            session.close()


def _finish(verdict, eng, session, q0, s0, t0, t1):
    verdict.invariants = list(eng.invariants)
    verdict.rules = list(eng.rules)
    verdict.queries = session.stats.queries - q0
    now = time.perf_counter()
    verdict.timings = {
        "rpc": round((now - t1) * 1000, 3),
        "solver": round((session.stats.seconds - s0) * 1000, 3),
        "total": round((now - t0) * 1000, 3),
    }
    return verdict


def verify_programs(base, a, b, merge, **kw) -> Verdict:
    t0 = time.perf_counter()
    diff = ndiff([base, a, b, merge])
    dt = (time.perf_counter() - t0) * 1000
    v = verify(diff.shared, diff.edits, **kw)
    v.timings["diff"] = round(dt, 3)
    v.timings["total"] = round(v.timings.get("total", 0) + dt, 3)
    return v
