"""SMT-LIB v2 emission and a solver subprocess session."""

from __future__ import annotations

import os
import select
import shutil
import subprocess
import time
from dataclasses import dataclass, field

from .formula import ARR, INT, Term, and_, free_decls, not_
from .lang import Valuation

DEFAULT_TIMEOUT_MS = 10_000
_MARK = "@@mergeguard-done@@"


class SolverError(Exception):
    """The solver process died or broke the protocol."""


@dataclass(frozen=True)
class Valid:
    pass


@dataclass(frozen=True)
class Invalid:
    model: dict = field(default_factory=dict)


@dataclass(frozen=True)
class UnknownAnswer:
    reason: str = "unknown"


ARRAY_WINDOW = 16


def logic_for(terms) -> str:
    quantified = any(t.quantified for t in terms)
    nonlinear = any(t.nonlinear for t in terms)
    core = "AUFNIA" if nonlinear else "AUFLIA"
    return core if quantified else "QF_" + core


def emit_smtlib(formula, logic: str | None = None, check: bool = False) -> str:
    """Deterministic SMT-LIB text asserting `formula` (a term or list of terms)."""
    terms = [formula] if isinstance(formula, Term) else list(formula)
    decls = free_decls(terms)
    lines = []
    if logic:
        lines.append(f"(set-logic {logic})")
    # functions first so constant declarations never refer to undeclared names
    lines.extend(decls[n] for n in sorted(decls) if decls[n].startswith("(declare-fun"))
    lines.extend(decls[n] for n in sorted(decls) if not decls[n].startswith("(declare-fun"))
    lines.extend(f"(assert {t.text})" for t in terms)
    if check:
        lines.append("(check-sat)")
    return "\n".join(lines)


# ---------------------------------------------------------------- s-expressions

def parse_sexp(text: str):
    """Parse one or more s-expressions; returns a list of nested lists/atoms."""
    out, stack = [], []
    i, n = 0, len(text)
    cur = out
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
        elif c == "(":
            stack.append(cur)
            new: list = []
            cur.append(new)
            cur = new
            i += 1
        elif c == ")":
            if not stack:
                raise SolverError(f"unbalanced solver output: {text[:200]}")
            cur = stack.pop()
            i += 1
        elif c == '"':
            j = text.index('"', i + 1)
            while j + 1 < n and text[j + 1] == '"':  # "" escapes a quote
                j = text.index('"', j + 2)
            cur.append(text[i:j + 1])
            i = j + 1
        elif c == "|":
            j = text.index("|", i + 1)
            cur.append(text[i + 1:j])
            i = j + 1
        elif c == ";":
            j = text.find("\n", i)
            i = n if j < 0 else j
        else:
            j = i
            while j < n and text[j] not in " \t\r\n()":
                j += 1
            cur.append(text[i:j])
            i = j
    if stack:
        raise SolverError(f"unbalanced solver output: {text[:200]}")
    return out


def _int_value(v):
    if isinstance(v, str):
        return int(v)
    if isinstance(v, list) and len(v) == 2 and v[0] == "-":
        return -_int_value(v[1])
    if isinstance(v, list) and len(v) == 3 and v[0] == "/":
        num, den = _int_value(v[1]), _int_value(v[2])
        return num // den
    raise ValueError(f"not an integer value: {v!r}")


class _ArrayEval:
    """Evaluate model array values to (default, {index: value})."""

    def __init__(self, funcs):
        self.funcs = funcs  # name -> (params, body)

    def array(self, v):
        if isinstance(v, list) and v and isinstance(v[0], list) and v[0][:2] == ["as", "const"]:
            return _int_value(v[1]), {}
        if isinstance(v, list) and v and v[0] == "store":
            default, entries = self.array(v[1])
            entries = dict(entries)
            entries[_int_value(v[2])] = _int_value(v[3])
            return default, entries
        if isinstance(v, list) and len(v) == 3 and v[0] == "_" and v[1] == "as-array":
            params, body = self.funcs[v[2]]
            return self._table(params[0][0], body)
        if isinstance(v, list) and v and v[0] == "lambda":
            return self._table(v[1][0][0], v[2])
        raise ValueError(f"unsupported array value: {v!r}")

    def _table(self, var, body):
        entries = {}
        while isinstance(body, list) and body and body[0] == "ite":
            cond, then, els = body[1], body[2], body[3]
            if isinstance(cond, list) and cond[0] == "=" and len(cond) == 3:
                other = cond[2] if cond[1] == var else cond[1]
                entries.setdefault(_int_value(other), _int_value(then))
                body = els
            else:
                raise ValueError("unsupported array table")
        return _int_value(body), entries


def parse_model(text: str) -> dict:
    """Parse `(get-model)` output into {name: int | (default, {idx: val})}."""
    tree = parse_sexp(text)
    if not tree:
        return {}
    entries = tree[0]
    if entries and entries[0] == "model":
        entries = entries[1:]
    funcs, values = {}, {}
    for e in entries:
        if isinstance(e, list) and e and e[0] == "define-fun":
            name, params, sort, body = e[1], e[2], e[3], e[4]
            funcs[name] = (params, body)
            if not params:
                values[name] = (sort, body)
    ev = _ArrayEval(funcs)
    model = {}
    for name, (sort, body) in values.items():
        try:
            if sort == "Int":
                model[name] = _int_value(body)
            elif isinstance(sort, list) and sort[0] == "Array":
                model[name] = ev.array(body)
        except (ValueError, KeyError, IndexError):
            continue
    return model


def concretize(model: dict, inputs: dict, window: int = ARRAY_WINDOW) -> Valuation:
    """Input valuation from a model.

    `inputs` maps a source variable to (symbol name, sort) of its shared
    initial symbol. Scalars missing from the model default to 0. Arrays get
    their model default (or 0) on indices 0..window-1, overridden by the
    entries the model lists."""
    data = {}
    for var, (sym, sort) in inputs.items():
        val = model.get(sym)
        if sort == ARR:
            default, entries = val if isinstance(val, tuple) else (0, {})
            for i in range(window):
                data[(var, i)] = default if default is not None else 0
            for idx, v in entries.items():
                data[(var, idx)] = v
        else:
            data[(var, 0)] = val if isinstance(val, int) else 0
    return Valuation(data)


# ---------------------------------------------------------------- session

def find_solver(path: str | None = None) -> str | None:
    """Solver binary: an explicit path, else $MERGEGUARD_SOLVER, else z3 on PATH."""
    if path:
        return shutil.which(path) or (path if os.path.isfile(path) else None)
    for cand in (os.environ.get("MERGEGUARD_SOLVER"), "z3"):
        if not cand:
            continue
        found = shutil.which(cand) or (cand if os.path.isfile(cand) else None)
        if found:
            return found
    return None


@dataclass
class SolverStats:
    queries: int = 0
    seconds: float = 0.0


class SolverSession:
    """One solver child process, used strictly sequentially."""

    def __init__(self, binary: str | None = None, timeout_ms: int = DEFAULT_TIMEOUT_MS,
                 seed: int = 0):
        found = find_solver(binary)
        if found is None:
            raise SolverError("no SMT solver found (set MERGEGUARD_SOLVER or pass --solver)")
        self.binary = found
        self.timeout_ms = timeout_ms
        self.seed = seed
        self.stats = SolverStats()
        self.depth = 0
        self._declared: set = set()
        self._buf = b""
        self._proc = None
        self.restarts = 0
        self._start()

    def _start(self):
        args = [self.binary]
        name = os.path.basename(self.binary)
        if "z3" in name:
            args.append("-in")
        elif "cvc" in name:
            args += ["--lang=smt2", "--incremental"]
        try:
            self._proc = subprocess.Popen(args, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                          stderr=subprocess.STDOUT)
        except OSError as exc:
            raise SolverError(f"cannot start solver {self.binary}: {exc}") from exc
        self._buf = b""
        self._configure()

    def _configure(self):
        name = os.path.basename(self.binary)
        self._declared = set()
        self.depth = 0
        self._send("(set-option :print-success false)")
        self._send("(set-option :produce-models true)")
        self._send(f"(set-option :random-seed {int(self.seed)})")
        if "z3" in name:
            self._send(f"(set-option :timeout {int(self.timeout_ms)})")
        self._sync()

    def reset(self):
        """Forget every declaration, so the next task starts from a clean slate."""
        self._send("(reset)")
        self._configure()

    def version(self) -> str:
        self._send("(get-info :version)")
        out = self._sync()
        try:
            return parse_sexp(out)[0][1].strip('"')
        except (IndexError, SolverError):
            return out.strip()

    def close(self):
        if self._proc is not None:
            try:
                self._proc.stdin.write(b"(exit)\n")
                self._proc.stdin.flush()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self._proc.kill()
            self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass

    # -- raw protocol
    def _send(self, text: str):
        if self._proc is None or self._proc.poll() is not None:
            raise SolverError("solver process is not running")
        try:
            self._proc.stdin.write(text.encode() + b"\n")
        except OSError as exc:
            raise SolverError(f"solver pipe closed: {exc}") from exc

    def _sync(self) -> str:
        """Flush pending commands and collect their output."""
        self._send(f'(echo "{_MARK}")')
        try:
            self._proc.stdin.flush()
        except OSError as exc:
            raise SolverError(f"solver pipe closed: {exc}") from exc
        fd = self._proc.stdout.fileno()
        deadline = time.monotonic() + self.timeout_ms / 1000.0 + 30.0
        marker = _MARK.encode()
        while marker not in self._buf:
            left = deadline - time.monotonic()
            if left <= 0:
                self._restart()
                raise SolverTimeout("solver did not answer in time")
            ready, _, _ = select.select([fd], [], [], left)
            if not ready:
                continue
            chunk = os.read(fd, 1 << 16)
            if not chunk:
                raise SolverError("solver process exited unexpectedly")
            self._buf += chunk
        head, _, tail = self._buf.partition(marker)
        self._buf = tail.split(b"\n", 1)[1] if b"\n" in tail else b""
        text = head.decode(errors="replace")
        if "(error" in text:
            raise SolverError(text.strip())
        return text

    def _restart(self):
        self.restarts += 1
        try:
            self._proc.kill()
        except OSError:
            pass
        self._proc = None
        self._start()

    # -- queries
    def _declare(self, terms):
        new = []
        for name, decl in sorted(free_decls(terms).items()):
            if name not in self._declared:
                self._declared.add(name)
                new.append(decl)
        # functions before constants, as in emit_smtlib
        new.sort(key=lambda d: not d.startswith("(declare-fun"))
        for d in new:
            self._send(d)

    def check(self, assertions, want=None):
        """Check satisfiability of the conjunction of `assertions`.

        Returns (status, values) where values holds the solver's valuation
        of the `want` terms when the status is 'sat'."""
        assertions = list(assertions)
        want = list(want or ())
        self._declare(assertions + want)
        t0 = time.perf_counter()
        gen = self.restarts
        self._send("(push 1)")
        self.depth += 1
        try:
            for a in assertions:
                self._send(f"(assert {a.text})")
            self._send("(check-sat)")
            out = self._sync().split()
            status = out[-1] if out else ""
            values = None
            if status == "sat" and want:
                self._send("(get-value (" + " ".join(t.text for t in want) + "))")
                values = [pair[1] for pair in parse_sexp(self._sync())[0]]
        except SolverTimeout:
            return "unknown", None
        finally:
            self.stats.queries += 1
            self.stats.seconds += time.perf_counter() - t0
            if self.restarts == gen:
                self._send("(pop 1)")
                self.depth -= 1
        if status not in ("sat", "unsat", "unknown"):
            raise SolverError(f"unexpected solver answer: {' '.join(out)}")
        return status, values

    def model(self, assertions) -> dict | None:
        """Model of the conjunction, or None if it is not satisfiable."""
        assertions = list(assertions)
        self._declare(assertions)
        gen = self.restarts
        self._send("(push 1)")
        self.depth += 1
        try:
            for a in assertions:
                self._send(f"(assert {a.text})")
            self._send("(check-sat)")
            out = self._sync().split()
            if not out or out[-1] != "sat":
                return None
            self._send("(get-model)")
            return parse_model(self._sync())
        except SolverTimeout:
            return None
        finally:
            if self.restarts == gen:
                self._send("(pop 1)")
                self.depth -= 1

    def check_entailment(self, hypothesis, conclusion: Term, with_model: bool = True):
        """Does the conjunction of `hypothesis` entail `conclusion`?"""
        hyps = [hypothesis] if isinstance(hypothesis, Term) else list(hypothesis)
        goal = not_(conclusion)
        status, _ = self.check(hyps + [goal])
        if status == "unsat":
            return Valid()
        if status == "unknown":
            return UnknownAnswer("solver returned unknown")
        model = self.model(hyps + [goal]) if with_model else {}
        if model is None:
            return UnknownAnswer("model unavailable")
        decls = free_decls(hyps + [goal])
        for name, decl in decls.items():
            if decl.startswith("(declare-const") and name not in model and decl.endswith("Int)"):
                model[name] = 0
        return Invalid(model)

    def entails(self, hypothesis, conclusion: Term) -> bool:
        """True only when entailment is proven; unknown counts as not entailed."""
        hyps = [hypothesis] if isinstance(hypothesis, Term) else list(hypothesis)
        status, _ = self.check(hyps + [not_(conclusion)])
        return status == "unsat"


class SolverTimeout(SolverError):
    pass


def conj(terms) -> Term:
    return and_(terms)
