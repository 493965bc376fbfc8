"""Bytecode compilation of hole-free programs and a fast runner.

A compiled `Machine` gives exactly the results of `lang.interpret`; it is
used wherever the same program runs on many valuations (the oracle and the
property suites). The compiled kernel is preferred when importable."""

from __future__ import annotations

from array import array

from . import _kernels_py
from .lang import (
    ArrayAssign, ArrayRead, Assign, BinOp, BoolConst, Bottom, Cmp, FuelExhausted,
    Hole, If, IntConst, LangError, Not, Or, And, Seq, Skip, Valuation, Var,
    While, interpret, seq_items,
)

try:
    from . import _kernels as _native
except ImportError:  # pragma: no cover - depends on the build
    _native = None

kernels = _native if _native is not None else _kernels_py
HAVE_NATIVE = _native is not None

K = _kernels_py
_CMP_CODE = {"==": 0, "!=": 1, "<": 2, "<=": 3, ">": 4, ">=": 5}
_ARITH_CODE = {"+": K.ADD, "-": K.SUB, "*": K.MUL}
INT64_MIN, INT64_MAX = -(2 ** 63), 2 ** 63 - 1
WINDOW = 16


class _Compiler:
    def __init__(self):
        self.code = []
        self.consts = []
        self.const_ix = {}
        self.scalars = {}
        self.arrays = {}

    def emit(self, op, arg=0):
        self.code.extend((op, arg))
        return len(self.code) - 1  # position of the argument, for patching

    def const(self, v):
        if v not in self.const_ix:
            self.const_ix[v] = len(self.consts)
            self.consts.append(v)
        return self.const_ix[v]

    def slot(self, name):
        if name in self.arrays:
            raise LangError(f"{name} used as both scalar and array")
        return self.scalars.setdefault(name, len(self.scalars))

    def arr(self, name):
        if name in self.scalars:
            raise LangError(f"{name} used as both scalar and array")
        return self.arrays.setdefault(name, len(self.arrays))

    def expr(self, e):
        if isinstance(e, IntConst):
            self.emit(K.PUSH_CONST, self.const(e.value))
        elif isinstance(e, Var):
            self.emit(K.LOAD, self.slot(e.name))
        elif isinstance(e, ArrayRead):
            self.expr(e.index)
            self.emit(K.LOAD_ARR, self.arr(e.array))
        elif isinstance(e, BinOp):
            self.expr(e.lhs)
            self.expr(e.rhs)
            self.emit(_ARITH_CODE[e.op])
        elif isinstance(e, Bottom):
            raise LangError("BOTTOM cannot appear in a program")
        else:
            raise LangError(f"bad expression {e!r}")

    def pred(self, p):
        if isinstance(p, Cmp):
            self.expr(p.lhs)
            self.expr(p.rhs)
            self.emit(K.CMP, _CMP_CODE[p.op])
        elif isinstance(p, And):
            self.pred(p.lhs)
            self.pred(p.rhs)
            self.emit(K.AND)
        elif isinstance(p, Or):
            self.pred(p.lhs)
            self.pred(p.rhs)
            self.emit(K.OR)
        elif isinstance(p, Not):
            self.pred(p.arg)
            self.emit(K.NOT)
        elif isinstance(p, BoolConst):
            self.emit(K.PUSH_BOOL, int(p.value))
        else:
            raise LangError(f"bad predicate {p!r}")

    def stmt(self, s):
        for node in seq_items(s) if isinstance(s, Seq) else (s,):
            if isinstance(node, Skip):
                continue
            if isinstance(node, Assign):
                self.expr(node.rhs)
                self.emit(K.STORE, self.slot(node.var))
            elif isinstance(node, ArrayAssign):
                self.expr(node.index)
                self.expr(node.rhs)
                self.emit(K.STORE_ARR, self.arr(node.array))
            elif isinstance(node, If):
                self.pred(node.cond)
                jf = self.emit(K.JUMP_IF_FALSE)
                self.stmt(node.then)
                j = self.emit(K.JUMP)
                self.code[jf] = len(self.code)
                self.stmt(node.els)
                self.code[j] = len(self.code)
            elif isinstance(node, While):
                top = len(self.code)
                self.pred(node.cond)
                jf = self.emit(K.JUMP_IF_FALSE)
                self.emit(K.FUEL_CHECK)
                self.stmt(node.body)
                self.emit(K.FUEL_DEC)
                self.emit(K.JUMP, top)
                self.code[jf] = len(self.code)
            elif isinstance(node, Hole):
                raise LangError("cannot compile a program with holes")
            else:
                raise LangError(f"bad statement {node!r}")


class Machine:
    """A program compiled once and run on many valuations."""

    def __init__(self, program, use_native=None):
        self.program = program
        c = _Compiler()
        try:
            c.stmt(program)
            self.ok = True
        except LangError:
            # mixed scalar/array use: only the tree interpreter models aliasing
            self.ok = False
        self.code = c.code
        self.consts = c.consts
        self.scalars = c.scalars
        self.arrays = c.arrays
        self.native = HAVE_NATIVE if use_native is None else (use_native and HAVE_NATIVE)
        if self.native:
            self._code64 = array("q", self.code)
            self._fits = all(INT64_MIN < v <= INT64_MAX for v in self.consts)
            self._consts64 = array("q", self.consts if self._fits else [0] * len(self.consts))

    def run(self, valuation, fuel: int = 10_000):
        if not self.ok:
            return interpret(self.program, valuation, fuel)
        if not isinstance(valuation, Valuation):
            valuation = Valuation(valuation)
        if self.native and self._fits:
            res = self._run_native(valuation, fuel)
            if res is not None:
                return res
        return self._run_python(valuation, fuel)

    def _run_python(self, valuation, fuel):
        data = valuation.raw()
        scalars = [None] * len(self.scalars)
        for name, ix in self.scalars.items():
            scalars[ix] = data.get((name, 0))
        arrays = [dict() for _ in self.arrays]
        arr_ix = self.arrays
        for (name, i), v in data.items():
            ix = arr_ix.get(name)
            if ix is not None:
                arrays[ix][i] = v
        status, _ = _kernels_py.execute(self.code, self.consts, scalars, arrays, fuel)
        if status == K.OUT_OF_FUEL:
            return FuelExhausted(fuel)
        return self._finish(data, scalars, arrays)

    def _finish(self, data, scalars, arrays):
        out = {k: v for k, v in data.items()
               if k[0] not in self.arrays and not (k[1] == 0 and k[0] in self.scalars)}
        for name, ix in self.scalars.items():
            v = scalars[ix]
            if v is not None:
                out[(name, 0)] = v
        for name, ix in self.arrays.items():
            for i, v in arrays[ix].items():
                out[(name, i)] = v
        return Valuation(out)

    def _run_native(self, valuation, fuel):
        data = valuation.raw()
        ns, na = len(self.scalars), len(self.arrays)
        sval = array("q", [0] * max(ns, 1))
        sdef = array("b", [0] * max(ns, 1))
        aval = array("q", [0] * max(na * WINDOW, 1))
        adef = array("b", [0] * max(na * WINDOW, 1))
        for name, ix in self.scalars.items():
            v = data.get((name, 0))
            if v is not None:
                if not INT64_MIN < v <= INT64_MAX:
                    return None
                sval[ix] = v
                sdef[ix] = 1
        for (name, i), v in data.items():
            ix = self.arrays.get(name)
            if ix is None:
                continue
            if not (0 <= i < WINDOW and INT64_MIN < v <= INT64_MAX):
                return None
            aval[ix * WINDOW + i] = v
            adef[ix * WINDOW + i] = 1
        status, _ = _native.execute(self._code64, self._consts64, sval, sdef, aval, adef,
                                    WINDOW, fuel)
        if status == K.BAIL:
            return None
        if status == K.OUT_OF_FUEL:
            return FuelExhausted(fuel)
        scalars = [sval[i] if sdef[i] else None for i in range(ns)]
        arrays = [{i: aval[ix * WINDOW + i] for i in range(WINDOW) if adef[ix * WINDOW + i]}
                  for ix in range(na)]
        return self._finish(data, scalars, arrays)


def run(program, valuation, fuel: int = 10_000):
    return Machine(program).run(valuation, fuel)


def levenshtein(a, b) -> int:
    return kernels.levenshtein(a, b)
