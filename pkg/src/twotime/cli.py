"""Command line entry point.

Exit codes: 0 success, 2 invalid scenario or arguments, 3 numeric-guard
failure (for example dense and product backends disagreeing), 1 for other
run or I/O errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .emit import FORMATS, EmitError, emit, table_csv
from .errors import NumericGuardError, ScenarioError
from .runner import RunError, run_scenario
from .scenario import BACKENDS, parse_scenario, validate, with_overrides

EXIT_OK, EXIT_ERROR, EXIT_INVALID, EXIT_GUARD = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twotime", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)

    run = sub.add_parser("run", help="run a scenario file and write its results")
    run.add_argument("--scenario", required=True, type=Path)
    run.add_argument("--seed", type=int)
    run.add_argument("--backend", choices=BACKENDS)
    run.add_argument("--out", required=True, type=Path)
    run.add_argument("--format", choices=FORMATS, default="csv")

    demo = sub.add_parser("demo", help="built-in demonstrations")
    demo.add_argument("name", choices=["signaling"])
    demo.add_argument("--rotate", action="store_true", help="flip the left particle before the final time")
    demo.add_argument("--final", choices=["fixed", "evolved_initial"], default="fixed")

    bench = sub.add_parser("bench", help="time dense against product correlation amplitude")
    bench.add_argument("--n-min", type=int, default=4)
    bench.add_argument("--n-max", type=int, default=14)
    bench.add_argument("--repeats", type=int, default=5)
    bench.add_argument("--kernels", action="store_true", help="also time compiled against numpy kernels")
    bench.add_argument("--out", type=Path)
    return ap


def _err(msg: str):
    print(f"twotime: {msg}", file=sys.stderr)


def _report_scenario_error(exc: ScenarioError):
    _err(f"invalid scenario ({len(exc.errors)} problem{'s' if len(exc.errors) != 1 else ''}):")
    for e in exc.errors:
        print(f"  - {e}", file=sys.stderr)


def _cmd_run(args) -> int:
    try:
        text = args.scenario.read_bytes()
    except OSError as exc:
        _err(f"cannot read {args.scenario}: {exc.strerror}")
        return EXIT_INVALID
    cfg = parse_scenario(text)
    if args.seed is not None or args.backend is not None:
        cfg = with_overrides(cfg, args.seed, args.backend)
    rs = run_scenario(cfg)
    for p in emit(rs, args.format, args.out):
        print(p)
    return EXIT_OK


def _cmd_demo(args) -> int:
    cfg = validate({"kind": "signaling_demo",
                    "parameters": {"rotate_left": args.rotate, "final": args.final}})
    rs = run_scenario(cfg)
    t = rs.tables["abl"]
    sys.stdout.write(table_csv(t.columns, t.rows))
    outcome = rs.summary["outcome"]
    print(f"outcome: {outcome if outcome is not None else 'random'}")
    print(rs.summary["note"])
    return EXIT_OK


def _cmd_bench(args) -> int:
    from . import bench

    if args.n_min < 1 or args.n_max < args.n_min:
        _err("need 1 <= --n-min <= --n-max")
        return EXIT_INVALID
    rows = bench.benchmark_backends(range(args.n_min, args.n_max + 1), args.repeats)
    text = table_csv(("n", "dense_seconds", "product_seconds", "ratio"), rows)
    if args.kernels:
        text += "\n" + table_csv(("n", "n_times", "compiled_seconds", "python_seconds"),
                                 bench.benchmark_kernels(repeats=args.repeats))
    if args.out:
        try:
            args.out.write_text(text, encoding="utf-8")
        except OSError as exc:
            _err(f"cannot write {args.out}: {exc.strerror}")
            return EXIT_ERROR
    sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handler = {"run": _cmd_run, "demo": _cmd_demo, "bench": _cmd_bench}[args.verb]
    try:
        return handler(args)
    except ScenarioError as exc:
        _report_scenario_error(exc)
        return EXIT_INVALID
    except NumericGuardError as exc:
        _err(f"numeric guard failed: {exc}")
        return EXIT_GUARD
    except (RunError, EmitError) as exc:
        _err(str(exc))
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
