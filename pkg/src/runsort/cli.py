"""Command line entry point: ``runsort <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict
from fractions import Fraction

import numpy as np

from . import oracle
from .empirical import EmpiricalMeasure, d_square_estimate
from .fsort import FAMILIES, f_sort_with_starts, get_family
from .montecarlo import (
    ExperimentConfig,
    convergence_experiment,
    curve_mass_experiment,
    experiment_report,
    run_experiment,
    transposition_stability_test,
)
from .perm import InvalidInputError, parse_permutation, runsort_with_starts, sample_uniform, substream
from .permuton import Rectangle, RunsortPermuton, cdf, rect_mass

SIG_DIGITS = 12


class InvariantViolation(RuntimeError):
    """A checked invariant failed; ``text`` is the report to emit anyway."""

    def __init__(self, message, text=""):
        super().__init__(message)
        self.text = text


def _round(obj):
    if isinstance(obj, float):
        return float(f"{obj:.{SIG_DIGITS}g}") if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.generic):
        return _round(obj.item())
    return obj


def dump_json(obj) -> str:
    return json.dumps(_round(obj), indent=2) + "\n"


def _decimal(v) -> str:
    return f"{v:.{SIG_DIGITS}f}"


def _int_list(text):
    return [int(float(t)) for t in text.split(",") if t]


# --------------------------------------------------------------------------
# subcommands; each returns the text to emit


def cmd_plot(args):
    family = get_family(args.family)
    if args.perm is not None:
        perm = parse_permutation(args.perm)
    elif args.seed is not None and args.n is not None:
        perm = sample_uniform(args.n, substream(args.seed, 0))
    else:
        raise InvalidInputError("plot needs --n and --seed, or --perm")
    if args.family == "inc":
        out, starts = runsort_with_starts(perm)
    else:
        out, starts = f_sort_with_starts(perm, family)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["position", "value", "is_f_run_start"])
    for i, (v, s) in enumerate(zip(out.tolist(), starts.tolist()), start=1):
        w.writerow([i, v, int(s)])
    if args.svg:
        with open(args.svg, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(scatter_svg(out, starts))
    return buf.getvalue()


def scatter_svg(perm, starts=None, size=600) -> str:
    """Scaled plot of ``perm`` in the unit square; run starts drawn darker."""
    n = len(perm)
    r = max(0.4, min(3.0, size / (2.0 * n)))
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white" stroke="black"/>',
    ]
    for i, v in enumerate(perm, start=1):
        x = i / n * size
        y = size - v / n * size
        color = "black" if starts is not None and starts[i - 1] else "#7799cc"
        lines.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:.2f}" fill="{color}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def cmd_mass(args):
    m = rect_mass(Rectangle(args.x1, args.x2, args.y1, args.y2))
    if args.components:
        return f"ac {_decimal(m.ac)}\nsingular {_decimal(m.singular)}\ntotal {_decimal(m.total)}\n"
    return _decimal(m.total) + "\n"


def cmd_cdf(args):
    return _decimal(cdf(args.x, args.y)) + "\n"


def cmd_dsq(args):
    perm = sample_uniform(args.n, substream(args.seed, 0))
    out = runsort_with_starts(perm)[0]
    est = d_square_estimate(EmpiricalMeasure(out), RunsortPermuton(), args.m)
    if not est.lower <= est.upper:
        raise InvariantViolation("lower bound exceeds upper bound")
    return dump_json({"command": "dsq", "n": args.n, "seed": args.seed, "m": args.m,
                      "lower": est.lower, "upper": est.upper})


def _check_tables(t: oracle.ProbabilityTables, prev):
    n, tot = t.n, t.total
    p, q = t.p_counts, t.q_counts
    problems = []
    if not (p.sum(axis=0) == tot).all() or not (p.sum(axis=1) == tot).all():
        problems.append("p is not doubly stochastic")
    for j in range(1, n + 1):
        if Fraction(int(q[:, j - 1].sum()), tot) != Fraction(n - j + 1, n):
            problems.append(f"q column {j} does not sum to (n-j+1)/n")
    if (q > p).any():
        problems.append("q exceeds p")
    if t.expected_runs != Fraction(n + 1, 2):
        problems.append("expected run count differs from (n+1)/2")
    if prev is not None:
        ok, bad = oracle.verify_insertion_recurrence(t, prev)
        if not ok:
            problems.append(f"insertion recurrence fails at {[(i, j) for i, j, *_ in bad]}")
    return problems


def cmd_oracle(args):
    t = oracle.enumerate_tables(args.n, max_n=args.max_n, threads=args.threads)
    prev = oracle.enumerate_tables(args.n - 1, max_n=args.max_n) if args.n >= 2 else None
    problems = _check_tables(t, prev)
    if problems:
        raise InvariantViolation("; ".join(problems))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", "j", "p", "q", "p_prime"])
    for i in range(1, t.n + 1):
        for j in range(1, t.n + 1):
            w.writerow([i, j] + [f"{f.numerator}/{f.denominator}" for f in
                                 (t.prob(i, j), t.prob_q(i, j), t.prob_prime(i, j))])
    return buf.getvalue()


def cmd_ptilde(args):
    if args.mode == "recurrence":
        v = oracle.p_tilde(args.n, args.i, args.j, exact=True)
    elif args.mode == "float":
        return repr(float(oracle.p_tilde(args.n, args.i, args.j, exact=False))) + "\n"
    elif args.mode == "s2":
        v = oracle.p_tilde_formula_s2(args.n, args.i, args.j)
    else:
        v = oracle.p_tilde_formula_printed(args.n, args.i, args.j)
    return f"{v.numerator}/{v.denominator}\n"


def cmd_convergence(args):
    n_list = _int_list(args.n_list)
    rows = convergence_experiment(n_list, args.trials, args.seed, m=args.m, threads=args.threads)
    medians = [r.median_lower for r in rows]
    return dump_json({
        "command": "convergence",
        "config": {"n_list": args.n_list, "trials": args.trials, "seed": args.seed, "m": args.m},
        "rows": [asdict(r) for r in rows],
        "medians_decreasing": all(a > b for a, b in zip(medians, medians[1:])),
    })


def cmd_stability(args):
    rep = transposition_stability_test(args.n, args.trials, args.seed, threads=args.threads)
    text = dump_json({
        "command": "stability",
        "config": {"n": args.n, "trials": args.trials, "seed": args.seed},
        **{k: v for k, v in asdict(rep).items() if k not in ("n", "trials", "seed")},
    })
    if rep.L_violations or rep.mass_violations:
        raise InvariantViolation(f"{rep.L_violations} L and {rep.mass_violations} mass bound violations", text)
    return text


def cmd_curvemass(args):
    rep = curve_mass_experiment(args.n, args.trials, args.seed, buckets=args.buckets, y=args.y,
                                threads=args.threads)
    if args.hist:
        with open(args.hist, "w", encoding="utf-8", newline="\n") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bucket", "y_lo", "y_hi", "density", "expected"])
            for b, (d, e) in enumerate(zip(rep.bucket_density, rep.expected_density)):
                w.writerow([b, _round(b / rep.buckets), _round((b + 1) / rep.buckets), _round(d), _round(e)])
    body = {k: v for k, v in asdict(rep).items() if k not in ("n", "trials", "seed", "buckets", "y")}
    return dump_json({
        "command": "curvemass",
        "config": {"n": args.n, "trials": args.trials, "seed": args.seed, "buckets": args.buckets, "y": args.y},
        **body,
    })


def cmd_experiment(args):
    ys = tuple(float(v) for v in args.y.split(","))
    cfg = ExperimentConfig(n=args.n, trials=args.trials, master_seed=args.seed, m=args.m,
                           y_values=ys, family=args.family)
    stats = run_experiment(cfg, threads=args.threads)
    rep = experiment_report(cfg, stats)
    rep.pop("config")
    return dump_json({
        "command": "experiment",
        "config": {"n": args.n, "trials": args.trials, "seed": args.seed, "m": args.m,
                   "y": args.y, "family": args.family},
        **rep,
    })


def cmd_replay(args):
    with open(args.report, encoding="utf-8") as fh:
        report = json.load(fh)
    command = report["command"]
    config = report.get("config") or {k: report[k] for k in ("n", "seed", "m") if k in report}
    argv = [command]
    for key, value in config.items():
        argv += [f"--{key.replace('_', '-')}", str(value)]
    return run(build_parser().parse_args(argv))


# --------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="runsort", description="Runsort permuton laboratory")
    parser.add_argument("--out", help="write output here instead of stdout")
    parser.add_argument("--threads", type=int, default=1, help="worker threads (never changes output)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=argparse.SUPPRESS)
        p.add_argument("--threads", type=int, default=argparse.SUPPRESS)

    p = sub.add_parser("plot", help="CSV of runsort / F-sort of a random permutation")
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--perm", help="explicit input permutation instead of --n/--seed")
    p.add_argument("--family", choices=sorted(FAMILIES), default="inc")
    p.add_argument("--svg", help="also write an SVG scatter plot to this path")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("mass", help="mass of a rectangle under the limit permuton")
    for name in ("x1", "x2", "y1", "y2"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.add_argument("--components", action="store_true")
    p.set_defaults(func=cmd_mass)

    p = sub.add_parser("cdf", help="limit permuton CDF at (x, y)")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.set_defaults(func=cmd_cdf)

    p = sub.add_parser("dsq", help="bracket the rectangle distance to the limit")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--m", type=int, default=64)
    p.set_defaults(func=cmd_dsq)

    p = sub.add_parser("oracle", help="exact probability tables by enumeration")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-n", type=int, default=oracle.MAX_ENUMERATION_N)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("ptilde", help="one p-tilde value")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--mode", choices=["recurrence", "float", "s2", "printed"], default="recurrence")
    p.set_defaults(func=cmd_ptilde)

    p = sub.add_parser("convergence", help="distance to the limit across sizes")
    p.add_argument("--n-list", default="1000,10000,50000")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--m", type=int, default=100)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("stability", help="transposition bounds on runsort-bar")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("curvemass", help="run-start mass and its vertical profile")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--buckets", type=int, default=20)
    p.add_argument("--y", type=float, default=0.5)
    p.add_argument("--hist", help="write the bucket histogram as CSV")
    p.set_defaults(func=cmd_curvemass)

    p = sub.add_parser("experiment", help="L statistic and run counts over many trials")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--m", type=int, default=20)
    p.add_argument("--y", default="0.5", help="comma separated heights")
    p.add_argument("--family", choices=sorted(FAMILIES), default="inc")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("replay", help="rerun the command recorded in a JSON report")
    p.add_argument("report")
    p.set_defaults(func=cmd_replay)

    for p in sub.choices.values():
        common(p)
    return parser


def run(args) -> str:
    return args.func(args)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    status = 0
    try:
        text = run(args)
    except InvariantViolation as exc:
        print(f"runsort: invariant violated: {exc}", file=sys.stderr)
        text, status = exc.text, 3
    except oracle.ResourceLimitError as exc:
        print(f"runsort: {exc}", file=sys.stderr)
        return 4
    except (InvalidInputError, ValueError) as exc:
        print(f"runsort: {exc}", file=sys.stderr)
        return 2
    _emit(text, args.out)
    return status


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    raise SystemExit(main())
