"""Compare the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import random
import timeit

from mergeguard import _kernels_py
from mergeguard.lang import Valuation
from mergeguard.machine import HAVE_NATIVE, Machine, kernels
from mergeguard.parser import parse

SUM_LOOP = parse("""
s := 0; k := 0;
while (k < n) {
  if (a[0] > 0) { s := s + k; } else { s := s - 1; }
  k := k + 1;
}
out[0] := s;
""")


def bench_machine(repeat):
    sigma = Valuation({"n": 2000, ("a", 0): 1})
    rows = []
    for native in (True, False):
        if native and not HAVE_NATIVE:
            continue
        m = Machine(SUM_LOOP, use_native=native)
        assert m.run(sigma)["out", 0] == sum(range(2000))
        t = min(timeit.repeat(lambda: m.run(sigma), number=5, repeat=repeat)) / 5
        rows.append(("machine, 2000 iterations", "native" if native else "python", t))
    return rows


def bench_levenshtein(repeat):
    rng = random.Random(0)
    a = [rng.randrange(20) for _ in range(300)]
    b = [rng.randrange(20) for _ in range(300)]
    impls = [("python", _kernels_py.levenshtein)]
    if HAVE_NATIVE:
        impls.insert(0, ("native", kernels.levenshtein))
    assert len({f(a, b) for _, f in impls}) == 1
    return [("levenshtein, 300x300", name, min(timeit.repeat(lambda: f(a, b), number=3,
                                                             repeat=repeat)) / 3)
            for name, f in impls]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rows = bench_machine(args.repeat) + bench_levenshtein(args.repeat)
    print(f"native kernels available: {HAVE_NATIVE}")
    print(f"{'case':<26} {'impl':<8} {'ms':>10}")
    for case, impl, t in rows:
        print(f"{case:<26} {impl:<8} {t * 1000:>10.3f}")
    by_case = {}
    for case, impl, t in rows:
        by_case.setdefault(case, {})[impl] = t
    for case, ts in by_case.items():
        if len(ts) == 2:
            print(f"speedup on {case}: {ts['python'] / ts['native']:.1f}x")


if __name__ == "__main__":
    main()
