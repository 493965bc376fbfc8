"""Pure-Python kernels. Same contracts as the compiled `_kernels` module."""

OK, OUT_OF_FUEL, BAIL = 0, 1, 2

(PUSH_CONST, LOAD, LOAD_ARR, ADD, SUB, MUL, CMP, AND, OR, NOT, PUSH_BOOL,
 STORE, STORE_ARR, JUMP_IF_FALSE, JUMP, FUEL_CHECK, FUEL_DEC) = range(17)

COMPILED = False


def levenshtein(a, b) -> int:
    """Edit distance between two integer sequences."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def _cmp(op, a, b):
    if a is None or b is None:
        return 1 if (op == 0 and a is None and b is None) else 0
    if op == 0:
        return int(a == b)
    if op == 1:
        return int(a != b)
    if op == 2:
        return int(a < b)
    if op == 3:
        return int(a <= b)
    if op == 4:
        return int(a > b)
    return int(a >= b)


def execute(code, consts, scalars, arrays, fuel):
    """Run bytecode in place.

    `scalars` is a list of int-or-None, `arrays` a list of dicts; None is the
    uninitialized value. Returns (status, remaining fuel)."""
    stack = []
    push = stack.append
    pop = stack.pop
    pc = 0
    n = len(code)
    while pc < n:
        op = code[pc]
        arg = code[pc + 1]
        pc += 2
        if op == LOAD:
            push(scalars[arg])
        elif op == PUSH_CONST:
            push(consts[arg])
        elif op == LOAD_ARR:
            idx = pop()
            push(None if idx is None else arrays[arg].get(idx))
        elif op <= MUL:
            b = pop()
            a = pop()
            if a is None or b is None:
                push(None)
            elif op == ADD:
                push(a + b)
            elif op == SUB:
                push(a - b)
            else:
                push(a * b)
        elif op == CMP:
            b = pop()
            a = pop()
            push(_cmp(arg, a, b))
        elif op == AND:
            b = pop()
            a = pop()
            push(a & b)
        elif op == OR:
            b = pop()
            a = pop()
            push(a | b)
        elif op == NOT:
            push(1 - pop())
        elif op == PUSH_BOOL:
            push(arg)
        elif op == STORE:
            scalars[arg] = pop()
        elif op == STORE_ARR:
            v = pop()
            idx = pop()
            if idx is None:
                continue
            if v is None:
                arrays[arg].pop(idx, None)
            else:
                arrays[arg][idx] = v
        elif op == JUMP_IF_FALSE:
            if not pop():
                pc = arg
        elif op == JUMP:
            pc = arg
        elif op == FUEL_CHECK:
            if fuel <= 0:
                return OUT_OF_FUEL, fuel
        elif op == FUEL_DEC:
            fuel -= 1
    return OK, fuel
