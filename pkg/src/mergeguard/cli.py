"""Command-line entry point: verify, diff, product, oracle and bench."""

from __future__ import annotations

import json
import os
import sys
import time

import click

from . import __version__
from .lang import EditArityMismatch, Valuation
from .ndiff import ndiff
from .oracle import EnumSpace, Inconclusive, NoViolationFound, Violation, brute_force_cf
from .parser import ParseError, edit_str, parse_file, pretty_print
from .product import ProductTooLarge, construct_product, rename
from .rpc import MODES, Options, SortError, verify
from .smt import SolverError, SolverSession, find_solver

EXIT = {"verified": 0, "conflict": 1, "unknown": 2}
EXIT_USAGE, EXIT_SOLVER = 3, 4
FILES = ("base", "a", "b", "merge")


class UsageFailure(Exception):
    pass


def _load(paths):
    units = []
    for p in paths:
        if not os.path.isfile(p):
            raise UsageFailure(f"{p}: no such file")
        try:
            units.append(parse_file(p))
        except ParseError as exc:
            raise UsageFailure(f"{p}:{exc}") from exc
        except UnicodeDecodeError as exc:
            raise UsageFailure(f"{p}: not a text file ({exc.reason})") from exc
    return units


def witness_json(sigma: Valuation | None):
    if sigma is None:
        return None
    out = {}
    for (name, idx) in sorted(sigma):
        scalar = name != "out" and sigma.indices(name) == [0]
        out[name if scalar else f"{name}[{idx}]"] = sigma[(name, idx)]
    return out


def _dump(doc, fmt):
    if fmt == "json":
        click.echo(json.dumps(doc, sort_keys=True, indent=2))
    else:
        click.echo(_text(doc))


def _text(doc, indent=0) -> str:
    pad = "  " * indent
    lines = []
    for key in sorted(doc):
        val = doc[key]
        if isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.append(_text(val, indent + 1) if val else f"{pad}  (none)")
        elif isinstance(val, list):
            lines.append(f"{pad}{key}:")
            if not val:
                lines.append(f"{pad}  (none)")
            for item in val:
                if isinstance(item, dict):
                    lines.append(f"{pad}  - " + ", ".join(f"{k}={item[k]}" for k in sorted(item)))
                else:
                    lines.append(f"{pad}  - {item}")
        else:
            lines.append(f"{pad}{key}: {val}")
    return "\n".join(lines)


def run_verify(paths, options: Options, solver=None, timeout_s=10.0, seed=0,
               timings=True) -> tuple:
    """Full pipeline on four files; returns (exit code, report)."""
    t0 = time.perf_counter()
    units = _load(paths)
    progs = [u.ast for u in units]
    t1 = time.perf_counter()
    diff = ndiff(progs)
    t_diff = (time.perf_counter() - t1) * 1000
    with SolverSession(solver, int(timeout_s * 1000), seed) as session:
        v = verify(diff.shared, diff.edits, options.check_vars, session=session, options=options)
        solver_version = session.version()
    total = (time.perf_counter() - t0) * 1000
    report = {
        "verdict": v.kind,
        "confirmed": v.confirmed if v.kind == "conflict" else None,
        "reason": v.reason,
        "holes": v.holes,
        "rules": v.rules,
        "invariants": v.invariants,
        "witness": witness_json(v.witness),
        "mode": options.mode,
        "queries": v.queries,
        "versions": {"tool": __version__, "solver": f"{os.path.basename(session.binary)} {solver_version}"},
    }
    if timings:
        report["timings_ms"] = {"diff": round(t_diff, 3), "rpc": v.timings.get("rpc", 0.0),
                                "solver": v.timings.get("solver", 0.0), "total": round(total, 3)}
    return EXIT[v.kind], report


def _options(mode, check_vars, global_otherwise):
    cv = tuple(x.strip() for x in check_vars.split(",") if x.strip()) if check_vars else ()
    return Options(mode=mode, global_otherwise=global_otherwise, check_vars=cv)


_common = [
    click.option("--solver", "solver", default=None, help="SMT solver binary (default: $MERGEGUARD_SOLVER, then z3)."),
    click.option("--timeout", "timeout", default=10.0, show_default=True, type=float, help="Per-query timeout in seconds."),
    click.option("--check-vars", "check_vars", default="", help="Extra variables to check, comma separated."),
    click.option("--global-otherwise", is_flag=True, help="Use the global form of the all-equal clause for out."),
    click.option("--mode", type=click.Choice(MODES), default="compositional", show_default=True),
    click.option("--report", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True),
    click.option("--seed", default=0, show_default=True, type=int, help="Solver random seed."),
    click.option("--no-timings", is_flag=True, help="Omit timings so reports are byte-stable."),
]


def common(fn):
    for opt in reversed(_common):
        fn = opt(fn)
    return fn


class _Group(click.Group):
    def main(self, *args, **kwargs):
        kwargs.setdefault("standalone_mode", False)
        try:
            rv = super().main(*args, **kwargs)
        except click.exceptions.Exit as exc:
            sys.exit(exc.exit_code)
        except click.UsageError as exc:
            exc.show()
            sys.exit(EXIT_USAGE)
        except click.Abort:
            sys.exit(EXIT_USAGE)
        sys.exit(rv or 0)


@click.group(cls=_Group)
@click.version_option(__version__, prog_name="mergeguard")
def main():
    """Check that a 3-way merge is semantically conflict-free."""


@main.command("verify")
@click.argument("base")
@click.argument("a")
@click.argument("b")
@click.argument("merge")
@common
def cmd_verify(base, a, b, merge, solver, timeout, check_vars, global_otherwise, mode, fmt,
               seed, no_timings):
    """Verify MERGE against BASE and its variants A and B."""
    try:
        code, report = run_verify([base, a, b, merge], _options(mode, check_vars, global_otherwise),
                                  solver, timeout, seed, not no_timings)
    except UsageFailure as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except (SortError, EditArityMismatch) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except SolverError as exc:
        click.echo(f"solver error: {exc}", err=True)
        return EXIT_SOLVER
    _dump(report, fmt)
    return code


@main.command("diff")
@click.argument("files", nargs=-1, required=True)
@click.option("--report", "fmt", type=click.Choice(["text", "json"]), default="text")
def cmd_diff(files, fmt):
    """Shared program with holes and one edit per file."""
    if len(files) < 2:
        click.echo("error: diff needs at least two files", err=True)
        return EXIT_USAGE
    try:
        units = _load(files)
    except UsageFailure as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    d = ndiff([u.ast for u in units])
    if fmt == "json":
        _dump({"holes": d.holes, "shared": pretty_print(d.shared),
               "edits": [[pretty_print(s) for s in e] for e in d.edits],
               "files": list(files)}, "json")
    else:
        click.echo(f"holes: {d.holes}")
        click.echo("shared:")
        click.echo(pretty_print(d.shared, multiline=True).rstrip())
        for f, e in zip(files, d.edits):
            click.echo(f"edit {f}: {edit_str(e)}")
    return 0


@main.command("product")
@click.argument("files", nargs=-1, required=True)
@click.option("--limit", default=50_000, show_default=True, type=int)
def cmd_product(files, limit):
    """Print the product of the given programs, version-tagged #1, #2, ..."""
    try:
        units = _load(files)
        prod = construct_product([rename(u.ast, i + 1) for i, u in enumerate(units)], limit)
    except UsageFailure as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except ProductTooLarge as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT["unknown"]
    click.echo(pretty_print(prod, multiline=True).rstrip())
    return 0


@main.command("oracle")
@click.argument("base")
@click.argument("a")
@click.argument("b")
@click.argument("merge")
@click.option("--domain", default="-2..2", show_default=True, help="Value range lo..hi.")
@click.option("--window", default=4, show_default=True, type=int)
@click.option("--fuel", default=10_000, show_default=True, type=int)
@click.option("--check-vars", "check_vars", default="")
@click.option("--global-otherwise", is_flag=True)
@click.option("--seed", default=0, show_default=True, type=int, help="Seed for sampled spaces.")
@click.option("--report", "fmt", type=click.Choice(["text", "json"]), default="text")
def cmd_oracle(base, a, b, merge, domain, window, fuel, check_vars, global_otherwise, seed, fmt):
    """Brute-force ground truth over a small input space."""
    try:
        units = _load([base, a, b, merge])
        lo, hi = (int(x) for x in domain.split(".."))
    except UsageFailure as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    except ValueError:
        click.echo(f"error: bad domain {domain!r}, expected lo..hi", err=True)
        return EXIT_USAGE
    space = EnumSpace(domain=tuple(range(lo, hi + 1)), window=window, fuel=fuel, seed=seed)
    cv = tuple(x for x in check_vars.split(",") if x)
    res = brute_force_cf([u.ast for u in units], space, cv, global_otherwise)
    doc = {"result": type(res).__name__}
    if isinstance(res, Violation):
        doc.update(sigma=witness_json(res.sigma), index=res.index, details=res.details)
        code = 1
    elif isinstance(res, NoViolationFound):
        doc["checked"] = res.checked
        code = 0
    elif isinstance(res, Inconclusive):
        doc.update(checked=res.checked, exhausted=res.exhausted)
        code = 2
    else:
        doc.update(checked=res.checked, exhausted=res.exhausted)
        code = 0 if not res.exhausted else 2
    _dump(doc, fmt)
    return code


def scenarios(root):
    if not os.path.isdir(root):
        raise UsageFailure(f"{root}: not a directory")
    out = []
    for name in sorted(os.listdir(root)):
        d = os.path.join(root, name)
        if os.path.isdir(d) and all(os.path.isfile(os.path.join(d, f + ".imp")) for f in FILES):
            out.append(d)
    return out


def bench_one(d, mode, solver, timeout, seed, global_otherwise=False):
    expect_file = os.path.join(d, "expect")
    cv_file = os.path.join(d, "check_vars")
    expect = open(expect_file).read().strip() if os.path.isfile(expect_file) else None
    cv = open(cv_file).read().strip() if os.path.isfile(cv_file) else ""
    paths = [os.path.join(d, f + ".imp") for f in FILES]
    lines = sum(len(open(p).read().splitlines()) for p in paths[:1])
    t0 = time.perf_counter()
    try:
        code, rep = run_verify(paths, _options(mode, cv, global_otherwise), solver, timeout, seed)
        verdict, err = rep["verdict"], None
    except (UsageFailure, SortError, EditArityMismatch, SolverError) as exc:
        verdict, err, rep = "error", str(exc), {}
    secs = time.perf_counter() - t0
    return {"name": os.path.basename(d), "lines": lines, "holes": rep.get("holes"),
            "verdict": verdict, "confirmed": rep.get("confirmed"), "expect": expect,
            "match": None if expect is None else expect == verdict,
            "seconds": round(secs, 3), "error": err}


@main.command("bench")
@click.argument("corpus")
@common
def cmd_bench(corpus, solver, timeout, check_vars, global_otherwise, mode, fmt, seed, no_timings):
    """Run every scenario directory under CORPUS and print a timing table."""
    try:
        dirs = scenarios(corpus)
    except UsageFailure as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    if not find_solver(solver) and dirs:
        click.echo("solver error: no SMT solver found", err=True)
        return EXIT_SOLVER
    rows = [bench_one(d, mode, solver, timeout, seed, global_otherwise) for d in dirs]
    if no_timings:
        for r in rows:
            r.pop("seconds")
    if fmt == "json":
        _dump({"mode": mode, "scenarios": rows}, "json")
    else:
        click.echo(f"{'scenario':20} {'lines':>5} {'holes':>5} {'verdict':9} {'expect':9} {'time(s)':>8}")
        for r in rows:
            conf = "*" if r["confirmed"] else ""
            click.echo(f"{r['name']:20} {r['lines']:>5} {str(r['holes']):>5} "
                       f"{r['verdict'] + conf:9} {str(r['expect']):9} {r.get('seconds', ''):>8}")
    return 0


@main.command("gen-unroll")
@click.argument("directory")
@click.option("--sizes", default="1,2,4,8,16,32", show_default=True)
def cmd_gen_unroll(directory, sizes):
    """Write the loop-unrolling scaling corpus into DIRECTORY."""
    from .unroll import write_corpus
    try:
        ns = [int(x) for x in sizes.split(",") if x]
    except ValueError:
        click.echo(f"error: bad sizes {sizes!r}", err=True)
        return EXIT_USAGE
    for d in write_corpus(directory, ns):
        click.echo(d)
    return 0


if __name__ == "__main__":  # pragma: no cover
    main()
