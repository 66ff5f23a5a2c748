"""Command-line front end.

Subcommands: graph, blocking, cost, bounds, simulate, sweep, optimal,
tails.  Exit codes: 0 success, 1 usage error, 2 internal-consistency
failure.  Reals print with 12 significant digits; q values are parsed as
decimal strings and echoed verbatim where they key output rows.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analytics, experiments, optimal
from .errors import InternalConsistencyError
from .graphs import build_fully_parallel, build_series_composition, export_graph, import_graph, validate
from .sessions import LocalityMode


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_graph(args) -> int:
    if args.infile:
        g = import_graph(Path(args.infile).read_text(encoding="utf-8"))
        if args.validate:
            report = validate(g)
            print("ok" if report.ok else "\n".join(f"{v.code}: {v.message} {v.vertices}" for v in report.violations))
            return 0
    else:
        if args.k is None:
            print("error: graph needs --k or --in", file=sys.stderr)
            return 1
        builder = build_series_composition if args.series else build_fully_parallel
        g = builder(args.k)
    _emit(export_graph(g, args.format), args.out)
    return 0


def _cmd_blocking(args) -> int:
    values = [(q, analytics.blocking_probability(args.k, float(q))) for q in args.q]
    for q, val in values:
        print(_fmt(val) if len(values) == 1 else f"{q} {_fmt(val)}")
    return 0


def _cmd_cost(args) -> int:
    algos = ("bilat", "unilat") if args.algo == "both" else (args.algo,)
    for q in args.q:
        for algo in algos:
            fn = analytics.exact_cost_bilat if algo == "bilat" else analytics.exact_cost_unilat
            prefix = f"{q} " if len(args.q) > 1 else ""
            print(f"{prefix}{algo} {_fmt(fn(args.k, float(q)))}")
    return 0


def _cmd_bounds(args) -> int:
    for q_str in args.q:
        q = float(q_str)
        prefix = f"{q_str} " if len(args.q) > 1 else ""
        print(f"{prefix}global_upper {_fmt(analytics.bound_global_upper(args.k))}")
        print(f"{prefix}local_upper {_fmt(analytics.bound_local_upper(args.k, q))}")
        if args.k >= 1 and 0.5 < q < 1.0:
            print(f"{prefix}local_lower {_fmt(analytics.bound_local_lower(args.k, q))}")
        else:
            print(f"{prefix}local_lower n/a")
    return 0


def _cmd_simulate(args) -> int:
    stats = experiments.run_monte_carlo(
        args.k,
        float(args.q[0]),
        args.algo,
        LocalityMode(args.mode) if args.mode else experiments.DEFAULT_MODE[args.algo],
        args.trials,
        args.seed,
        threads=args.threads,
    )
    if args.format == "json":
        print(
            json.dumps(
                {
                    "trials": stats.trials,
                    "mean_probes": _fmt(stats.mean_probes),
                    "stderr": _fmt(stats.stderr),
                    "linked_freq": _fmt(stats.linked_freq),
                    "min_probes": stats.min_probes,
                    "max_probes": stats.max_probes,
                    "seed": stats.seed,
                },
                separators=(",", ":"),
            )
        )
    else:
        print(f"trials {stats.trials}")
        print(f"mean_probes {_fmt(stats.mean_probes)}")
        print(f"stderr {_fmt(stats.stderr)}")
        print(f"linked_freq {_fmt(stats.linked_freq)}")
        print(f"min_probes {stats.min_probes}")
        print(f"max_probes {stats.max_probes}")
        print(f"seed {stats.seed}")
    return 0


def _cmd_sweep(args) -> int:
    ks = list(range(args.k_min, args.k_max + 1))
    algos = args.algo or ["bilat", "unilat"]
    text = experiments.sweep(
        ks,
        args.q,
        algos,
        args.trials,
        args.seed,
        out=args.out,
        threads=args.threads,
        fmt=args.format,
        mode=LocalityMode(args.mode) if args.mode else None,
    )
    if not args.out:
        sys.stdout.write(text)
    return 0


def _cmd_optimal(args) -> int:
    if args.conjecture:
        report = optimal.conjecture_report(args.k)
        _emit(report.to_csv(), args.out)
        print(f"conjecture_consistent {str(report.consistent).lower()}", file=sys.stderr)
        return 0
    if args.infile:
        g = import_graph(Path(args.infile).read_text(encoding="utf-8"))
    else:
        g = build_fully_parallel(args.k)
    mode = LocalityMode(args.mode) if args.mode else LocalityMode.LOCAL_FORWARD
    for q_str in args.q:
        result = optimal.optimal_expected_probes(g, float(q_str), mode)
        prefix = f"{q_str} " if len(args.q) > 1 else ""
        print(f"{prefix}{_fmt(result.value)} states_explored={result.states_explored}")
    return 0


def _cmd_tails(args) -> int:
    law = analytics.OffspringLaw(args.law)
    if args.side in ("lower", "both"):
        exact, chern = analytics.lower_tail(law, float(args.q[0]), args.gen, args.m)
        print(f"lower_exact {_fmt(exact)}")
        print(f"lower_chernoff {_fmt(chern)}")
    if args.side in ("upper", "both"):
        exact, chern = analytics.upper_tail(law, float(args.q[0]), args.gen, args.m)
        print(f"upper_exact {_fmt(exact)}")
        print(f"upper_chernoff {_fmt(chern)}")
    return 0


def _add_q(sp, required=True):
    sp.add_argument("--q", action="append", required=required, metavar="Q",
                    help="vacancy probability; repeatable")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="chansearch",
        description="Path search in random-state channel graphs: exact analysis and experiments.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("graph", help="build or import a channel graph and export it")
    sp.add_argument("--k", type=int)
    sp.add_argument("--series", action="store_true", help="series composition instead of fully parallel")
    sp.add_argument("--in", dest="infile", metavar="PATH", help="import a JSON graph")
    sp.add_argument("--validate", action="store_true", help="print a validation report for --in")
    sp.add_argument("--format", choices=("json", "dot"), default="json")
    sp.add_argument("--out", metavar="PATH")
    sp.set_defaults(func=_cmd_graph)

    sp = sub.add_parser("blocking", help="exact blocking probability")
    sp.add_argument("--k", type=int, required=True)
    _add_q(sp)
    sp.set_defaults(func=_cmd_blocking)

    sp = sub.add_parser("cost", help="exact expected probe counts of the two algorithms")
    sp.add_argument("--k", type=int, required=True)
    _add_q(sp)
    sp.add_argument("--algo", choices=("bilat", "unilat", "both"), default="both")
    sp.set_defaults(func=_cmd_cost)

    sp = sub.add_parser("bounds", help="theorem bound curves at (k, q)")
    sp.add_argument("--k", type=int, required=True)
    _add_q(sp)
    sp.set_defaults(func=_cmd_bounds)

    sp = sub.add_parser("simulate", help="seeded Monte Carlo estimate for one configuration")
    sp.add_argument("--k", type=int, required=True)
    _add_q(sp)
    sp.add_argument("--algo", choices=("bilat", "unilat"), required=True)
    sp.add_argument("--mode", choices=tuple(m.value for m in LocalityMode))
    sp.add_argument("--trials", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("sweep", help="CSV/JSON sweep over (k, q, algo)")
    sp.add_argument("--k-min", type=int, required=True)
    sp.add_argument("--k-max", type=int, required=True)
    _add_q(sp)
    sp.add_argument("--algo", action="append", choices=("bilat", "unilat"))
    sp.add_argument("--mode", choices=tuple(m.value for m in LocalityMode))
    sp.add_argument("--trials", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out", metavar="PATH")
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("optimal", help="optimal expected probes by DP; conjecture report")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--in", dest="infile", metavar="PATH", help="run the DP on an imported graph")
    _add_q(sp, required=False)
    sp.add_argument("--mode", choices=tuple(m.value for m in LocalityMode))
    sp.add_argument("--conjecture", action="store_true", help="emit the k,q,optimal,unilat,gap table")
    sp.add_argument("--out", metavar="PATH")
    sp.set_defaults(func=_cmd_optimal)

    sp = sub.add_parser("tails", help="exact vs Chernoff generation-size tails")
    sp.add_argument("--law", choices=("paired", "single"), required=True)
    _add_q(sp)
    sp.add_argument("--gen", type=int, required=True, help="generation index")
    sp.add_argument("--m", type=float, required=True, help="tail threshold")
    sp.add_argument("--side", choices=("lower", "upper", "both"), default="both")
    sp.set_defaults(func=_cmd_tails)

    return p


def cli_dispatch(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    if getattr(args, "command", None) == "optimal" and not args.conjecture and not args.q:
        print("error: optimal needs --q (or --conjecture)", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except InternalConsistencyError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))
