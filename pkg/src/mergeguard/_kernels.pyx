# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: edit distance and a fixed-width bytecode runner.

The runner works on 64-bit integers and a dense index window per array.
Whenever a value overflows or an index leaves the window it returns BAIL
and the caller re-runs the program with the exact pure-Python kernel."""

from libc.stdlib cimport malloc, free

cdef extern from *:
    """
    static inline int mg_add(long long a, long long b, long long *r) { return __builtin_add_overflow(a, b, r); }
    static inline int mg_sub(long long a, long long b, long long *r) { return __builtin_sub_overflow(a, b, r); }
    static inline int mg_mul(long long a, long long b, long long *r) { return __builtin_mul_overflow(a, b, r); }
    """
    int mg_add(long long a, long long b, long long *r)
    int mg_sub(long long a, long long b, long long *r)
    int mg_mul(long long a, long long b, long long *r)

OK = 0
OUT_OF_FUEL = 1
BAIL = 2
COMPILED = True

DEF STACK_MAX = 256


def levenshtein(a, b):
    """Edit distance between two integer sequences."""
    cdef Py_ssize_t n = len(a), m = len(b), i, j
    cdef long long *prev
    cdef long long *cur
    cdef long long *tmp
    cdef long long best, cand
    if n < m:
        a, b = b, a
        n, m = m, n
    if m == 0:
        return n
    cdef long long[:] xa = _as_int64(a)
    cdef long long[:] xb = _as_int64(b)
    prev = <long long *> malloc((m + 1) * sizeof(long long))
    cur = <long long *> malloc((m + 1) * sizeof(long long))
    try:
        for j in range(m + 1):
            prev[j] = j
        for i in range(1, n + 1):
            cur[0] = i
            for j in range(1, m + 1):
                best = prev[j] + 1
                cand = cur[j - 1] + 1
                if cand < best:
                    best = cand
                cand = prev[j - 1] + (0 if xa[i - 1] == xb[j - 1] else 1)
                if cand < best:
                    best = cand
                cur[j] = best
            tmp = prev
            prev = cur
            cur = tmp
        return prev[m]
    finally:
        free(prev)
        free(cur)


def _as_int64(seq):
    from array import array
    return array("q", seq)


cdef inline int _cmp(long long op, long long a, long long b):
    if op == 0:
        return a == b
    if op == 1:
        return a != b
    if op == 2:
        return a < b
    if op == 3:
        return a <= b
    if op == 4:
        return a > b
    return a >= b


def execute(const long long[:] code, const long long[:] consts,
            long long[:] sval, signed char[:] sdef,
            long long[:] aval, signed char[:] adef,
            long long window, long long fuel):
    """Run bytecode in place over fixed-width buffers.

    Returns (status, remaining fuel)."""
    cdef long long vstack[STACK_MAX]
    cdef signed char dstack[STACK_MAX]
    cdef Py_ssize_t sp = 0, pc = 0, n = code.shape[0]
    cdef long long op, arg, a, b, r, idx
    cdef signed char da, db
    while pc < n:
        op = code[pc]
        arg = code[pc + 1]
        pc += 2
        if op == 1:  # LOAD
            if sp >= STACK_MAX:
                return BAIL, fuel
            vstack[sp] = sval[arg]
            dstack[sp] = sdef[arg]
            sp += 1
        elif op == 0:  # PUSH_CONST
            if sp >= STACK_MAX:
                return BAIL, fuel
            vstack[sp] = consts[arg]
            dstack[sp] = 1
            sp += 1
        elif op == 2:  # LOAD_ARR
            if dstack[sp - 1]:
                idx = vstack[sp - 1]
                if idx < 0 or idx >= window:
                    return BAIL, fuel
                vstack[sp - 1] = aval[arg * window + idx]
                dstack[sp - 1] = adef[arg * window + idx]
        elif op <= 5:  # ADD SUB MUL
            sp -= 1
            b = vstack[sp]
            db = dstack[sp]
            a = vstack[sp - 1]
            da = dstack[sp - 1]
            if da and db:
                if op == 3:
                    if mg_add(a, b, &r):
                        return BAIL, fuel
                elif op == 4:
                    if mg_sub(a, b, &r):
                        return BAIL, fuel
                else:
                    if mg_mul(a, b, &r):
                        return BAIL, fuel
                vstack[sp - 1] = r
            else:
                dstack[sp - 1] = 0
        elif op == 6:  # CMP
            sp -= 1
            db = dstack[sp]
            da = dstack[sp - 1]
            if da and db:
                vstack[sp - 1] = _cmp(arg, vstack[sp - 1], vstack[sp])
            else:
                vstack[sp - 1] = 1 if (arg == 0 and not da and not db) else 0
            dstack[sp - 1] = 1
        elif op == 7:  # AND
            sp -= 1
            vstack[sp - 1] = vstack[sp - 1] & vstack[sp]
        elif op == 8:  # OR
            sp -= 1
            vstack[sp - 1] = vstack[sp - 1] | vstack[sp]
        elif op == 9:  # NOT
            vstack[sp - 1] = 1 - vstack[sp - 1]
        elif op == 10:  # PUSH_BOOL
            if sp >= STACK_MAX:
                return BAIL, fuel
            vstack[sp] = arg
            dstack[sp] = 1
            sp += 1
        elif op == 11:  # STORE
            sp -= 1
            sval[arg] = vstack[sp]
            sdef[arg] = dstack[sp]
        elif op == 12:  # STORE_ARR
            sp -= 2
            if dstack[sp]:
                idx = vstack[sp]
                if idx < 0 or idx >= window:
                    return BAIL, fuel
                aval[arg * window + idx] = vstack[sp + 1]
                adef[arg * window + idx] = dstack[sp + 1]
        elif op == 13:  # JUMP_IF_FALSE
            sp -= 1
            if not vstack[sp]:
                pc = arg
        elif op == 14:  # JUMP
            pc = arg
        elif op == 15:  # FUEL_CHECK
            if fuel <= 0:
                return OUT_OF_FUEL, fuel
        elif op == 16:  # FUEL_DEC
            fuel -= 1
    return OK, fuel
