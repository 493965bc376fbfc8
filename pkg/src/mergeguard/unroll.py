"""Loop-unrolling scaling corpus.

A single outer loop whose body is unrolled `n` times. Every unrolled block
carries shared bookkeeping (an inner loop and straight-line code) plus one
injected edit: variant A changes the update of `sa` in even blocks, variant
B the update of `sb` in odd blocks, and the merge takes both."""

from __future__ import annotations

import os


def _block(i: int, version: str) -> list:
    even = i % 2 == 0
    target = "sa" if even else "sb"
    changed = (version in ("a", "m") and even) or (version in ("b", "m") and not even)
    edit = f"{target} := {target} + acc + {1 if even else 2};" if changed \
        else f"{target} := {target} + acc;"
    return [
        f"  // block {i}",
        "  acc := 0;",
        "  j := 0;",
        "  while (j < m) {",
        "    acc := acc + arr[j];",
        "    j := j + 1;",
        "  }",
        f"  p := acc + {i};",
        "  q := p - r;",
        "  acc := acc + q;",
        "  p := p + q;",
        f"  q := q * {i % 3 + 2};",
        "  acc := acc - p;",
        "  w := w + q;",
        "  p := w - acc;",
        f"  q := p + {i};",
        "  w := w - p;",
        "  if (acc > r) {",
        "    w := w + 1;",
        "  } else {",
        "    w := w - 1;",
        "  }",
        "  acc := acc + w;",
        "  p := 0;",
        "  q := 0;",
        f"  hist[{i % 4}] := acc;",
        "  " + edit,
    ]


def unrolled_program(n: int, version: str) -> str:
    lines = ["sa := 0;", "sb := 0;", "w := 0;", "r := 0;", "while (r < rounds) {"]
    for i in range(n):
        lines.extend(_block(i, version))
    lines += ["  r := r + 1;", "}", "out[0] := sa;", "out[1] := sb;", "out[2] := w;"]
    return "\n".join(lines) + "\n"


def unrolled_scenario(n: int) -> dict:
    """Source texts of base, a, b and merge with `n` edited blocks."""
    return {name: unrolled_program(n, v)
            for name, v in (("base", "o"), ("a", "a"), ("b", "b"), ("merge", "m"))}


def write_corpus(root, sizes=(1, 2, 4, 8, 16, 32)) -> list:
    made = []
    for n in sizes:
        d = os.path.join(root, f"unroll-{n:02d}")
        os.makedirs(d, exist_ok=True)
        for name, text in unrolled_scenario(n).items():
            with open(os.path.join(d, f"{name}.imp"), "w") as fh:
                fh.write(text)
        with open(os.path.join(d, "expect"), "w") as fh:
            fh.write("verified\n")
        made.append(d)
    return made
