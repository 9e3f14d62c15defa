"""Command-line interface: ``fsalearn {trace,learn,check,score,replay,list}``.

Exit codes: 0 success (alpha = 1), 1 incomplete (alpha < 1), 2 usage or input
error, 3 capacity limit or timeout.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from . import automaton as fa
from .benchmarks import get as get_benchmark, list_benchmarks
from .checker import CheckerConfig
from .conditions import alpha, extract_conditions, invariant_report
from .dsl import load_system, parse_system
from .learner import LearnerConfig
from .loop import LoopConfig, _Triage, _check_all, baseline_random, run, score_d
from .system import CapacityError, DEFAULT_ENUM_CAP, FsaLearnError
from .traces import generate_trace_set, read_traces, write_traces

EXIT_OK, EXIT_INCOMPLETE, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3
OUT_ENV = "FSALEARN_OUT"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- helpers -------------------------------------------------------------------------

def _resolve_system(arg):
    """A ``.ts-dsl`` path or the name of a bundled benchmark; returns (SystemFile, entry or None)."""
    p = Path(arg)
    if p.exists():
        return load_system(p), None
    try:
        entry = get_benchmark(arg)
    except KeyError:
        raise UsageError(f"no such system file or benchmark: {arg}") from None
    return entry.load(), entry


def _out_dir(args):
    out = Path(args.out or os.environ.get(OUT_ENV) or "fsalearn-out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path, text):
    Path(path).write_text(text, encoding="utf-8")


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _checker_cfg(args, sf, entry):
    k = args.k or (entry.k if entry else None) or sf.options.get("k")
    if k is None:
        from .checker import default_k
        k = default_k(sf.system)
    cap = args.enum_cap or (entry.checker.get("enum_cap") if entry else None) \
        or sf.options.get("enum_cap") or DEFAULT_ENUM_CAP
    return CheckerConfig(k=k, enum_cap=cap, oracle_cap=args.oracle_cap)


def _write_manifest(out, args, argv):
    manifest = {
        "format": "fsalearn-manifest", "version": 1, "tool": __version__,
        "subcommand": args.command, "argv": argv,
        "inputs": {k: getattr(args, k) for k in ("system", "model", "traces") if getattr(args, k, None)},
        "seed": getattr(args, "seed", None),
        "output": str(out),
    }
    _write(out / "manifest.json", _dump(manifest))


def _load_model(path, sf):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as err:
        raise UsageError(f"cannot read model {path}: {err}") from None
    observed = {v.name: v for v in sf.system.observed}
    for v in doc.get("variables", []):
        decl = observed.get(v.get("name"))
        if decl is None:
            raise UsageError(f"model variable {v.get('name')!r} is not an observed variable of the system")
        if str(decl.domain) != v.get("domain"):
            raise UsageError(f"model variable {decl.name!r} has domain {v.get('domain')}, "
                             f"the system declares {decl.domain}")
    try:
        return fa.from_json(doc, sf.system.observed)
    except (KeyError, ValueError, FsaLearnError) as err:
        raise UsageError(f"invalid model {path}: {err}") from None


# -- subcommands -------------------------------------------------------------------------

def cmd_trace(args, argv):
    sf, _ = _resolve_system(args.system)
    ts = generate_trace_set(sf.system, args.n, args.length, args.seed)
    out = _out_dir(args)
    name = f"traces.{args.format}"
    _write(out / name, write_traces(ts, args.format))
    _write_manifest(out, args, argv)
    print(f"wrote {len(ts)} trace(s) to {out / name}")
    return EXIT_OK


def _status_code(report):
    if report.status in ("capacity", "timeout"):
        return EXIT_CAPACITY
    return EXIT_OK if report.status == "success" else EXIT_INCOMPLETE


def cmd_learn(args, argv):
    sf, entry = _resolve_system(args.system)
    learner = LearnerConfig(strategy=args.strategy, k_merge=args.k_merge,
                            abstraction=args.abstraction, max_splits=args.max_splits)
    cfg = LoopConfig(n=args.n, length=args.length, seed=args.seed, learner=learner,
                     checker=_checker_cfg(args, sf, entry), max_iterations=args.max_iterations,
                     timeout=args.timeout, jobs=args.jobs)
    initial = None
    if args.traces:
        try:
            initial = read_traces(Path(args.traces).read_text(encoding="utf-8"))
        except OSError as err:
            raise UsageError(f"cannot read traces: {err}") from None
        if [v.name for v in initial.variables] != list(sf.system.observed_names):
            raise UsageError("trace variables do not match the observed variables of the system")
    if args.passive:
        report = baseline_random(sf.system, args.baseline_n, cfg, sf.reference)
        m = report.models[0]
    else:
        m, report = run(sf.system, cfg, sf.reference, initial)
    out = _out_dir(args)
    if m is not None:
        _write(out / "model.json", fa.dumps(m))
        _write(out / "model.dot", fa.to_dot(m, sf.system.name or "abstraction"))
        _write(out / "invariants.txt", invariant_report([r.condition for r in report.results], report.results))
    _write(out / "report.json", _dump(report.to_json(timing=False)))
    _write(out / "timing.json", _dump(report.timing))
    _write_manifest(out, args, argv)
    d = "-" if report.d is None else f"{report.d:g}"
    print(f"{sf.system.name or args.system}: status={report.status} i={report.i} N={report.N} "
          f"alpha={report.alpha:g} d={d} T={report.timing['T']:.2f}s")
    if report.message:
        print(report.message, file=sys.stderr)
    return _status_code(report)


def cmd_check(args, argv):
    sf, entry = _resolve_system(args.system)
    m = _load_model(args.model, sf)
    cfg = _checker_cfg(args, sf, entry)
    conditions = extract_conditions(m, sf.system)
    try:
        settled = _check_all(sf.system, conditions, cfg, _Triage(sf.system, cfg), args.jobs, float("inf"))
    except CapacityError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CAPACITY
    results = [r for r, _ in settled]
    a = alpha(results)
    doc = {"alpha": a, "conditions": [r.to_json() for r in results]}
    sys.stdout.write(invariant_report(conditions, results))
    print(f"alpha={a:g}")
    if args.out or os.environ.get(OUT_ENV):
        out = _out_dir(args)
        _write(out / "check.json", _dump(doc))
        _write_manifest(out, args, argv)
    return EXIT_OK if a == 1 else EXIT_INCOMPLETE


def cmd_score(args, argv):
    sf, _ = _resolve_system(args.system)
    if sf.reference is None:
        raise UsageError(f"{args.system} has no reference automaton")
    m = _load_model(args.model, sf)
    d = score_d(m, sf.reference)
    print(f"d={d:g}")
    return EXIT_OK


def cmd_replay(args, argv):
    try:
        manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        old = list(manifest["argv"])
    except (OSError, KeyError, json.JSONDecodeError) as err:
        raise UsageError(f"cannot read manifest {args.manifest}: {err}") from None
    if args.out:
        old = _replace_out(old, args.out)
    return main(old)


def _replace_out(argv, out):
    res, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == "--out":
            skip = True
            continue
        if a.startswith("--out="):
            continue
        res.append(a)
    return res + ["--out", out]


def cmd_list(args, argv):
    for e in list_benchmarks():
        tag = " [capacity demo]" if e.capacity_demo else (" [rare]" if e.rare else "")
        print(f"{e.name:20s} k={e.k:<3d} {e.description}{tag}")
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------------------

def _add_checker(p):
    p.add_argument("--k", type=int, default=None, help="k-induction depth (default: from the system file)")
    p.add_argument("--enum-cap", type=int, default=None, help="enumeration cap for the checker")
    p.add_argument("--oracle-cap", type=int, default=10 ** 6)
    p.add_argument("--jobs", type=int, default=1, help="parallel condition checks")


def build_parser():
    parser = _Parser(prog="fsalearn", description="Learn complete finite-state abstractions of transition systems.")
    parser.add_argument("--version", action="version", version=f"fsalearn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("trace", help="generate random execution traces")
    p.add_argument("system", help="a .ts-dsl file or bundled benchmark name")
    p.add_argument("-n", type=int, default=50)
    p.add_argument("--length", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")

    p = sub.add_parser("learn", help="run the refinement loop")
    p.add_argument("system")
    p.add_argument("--traces", help="initial trace document instead of random simulation")
    p.add_argument("-n", type=int, default=50)
    p.add_argument("--length", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strategy", choices=("ktails", "pta-exact"), default="ktails")
    p.add_argument("--k-merge", type=int, default=1)
    p.add_argument("--abstraction", choices=("value", "interval"), default="value")
    p.add_argument("--max-splits", type=int, default=2)
    p.add_argument("--max-iterations", type=int, default=50)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--passive", action="store_true", help="random-sampling baseline without refinement")
    p.add_argument("--baseline-n", type=int, default=1000, help="trace count for --passive")
    _add_checker(p)
    p.add_argument("--out")

    p = sub.add_parser("check", help="check a model's completeness conditions")
    p.add_argument("system")
    p.add_argument("model")
    _add_checker(p)
    p.add_argument("--out")

    p = sub.add_parser("score", help="d score of a model against the system's reference")
    p.add_argument("model")
    p.add_argument("system")

    p = sub.add_parser("replay", help="rerun a recorded manifest")
    p.add_argument("manifest")
    p.add_argument("--out")

    sub.add_parser("list", help="list bundled benchmarks")
    return parser


COMMANDS = {"trace": cmd_trace, "learn": cmd_learn, "check": cmd_check, "score": cmd_score,
            "replay": cmd_replay, "list": cmd_list}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args, argv)
    except UsageError as err:
        print(f"fsalearn: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as err:
        print(f"fsalearn: {err}", file=sys.stderr)
        return EXIT_CAPACITY
    except (FsaLearnError, ValueError) as err:
        print(f"fsalearn: error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
