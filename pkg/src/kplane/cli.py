"""Command-line front end.

Exit status: 0 on success, 1 when a verification finds failures, 2 on bad
arguments.  Every JSON output embeds the run configuration.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import experiments, suites
from .errors import KPlaneError
from .field import Field
from .geometry import export_planes
from .proofcheck import DEFAULT_TUPLE_CAP
from .transform import GridFunction, PlaneFunction, kplane_transform, load_function


@dataclass
class RunConfig:
    subcommand: str
    q: int | None = None
    qs: list[int] | None = None
    d: int | None = None
    k: int | None = None
    s: int | None = None
    p: str | None = None
    r: str | None = None
    seed: int = 0
    iters: int | None = None
    trials: int | None = None
    input: str | None = None
    output: str | None = None
    tuple_cap: int = DEFAULT_TUPLE_CAP
    jobs: int = 1
    extra: dict = field(default_factory=dict)

    def validate(self, degenerate: bool = False) -> None:
        for q in ([self.q] if self.q is not None else []) + (self.qs or []):
            Field(q)
        if self.d is not None and self.d < 1:
            raise argparse.ArgumentTypeError(f"InvalidDims: d={self.d}")
        if self.k is not None and self.d is not None:
            lo, hi = (0, self.d) if degenerate else (1, self.d - 1)
            if not lo <= self.k <= hi:
                raise argparse.ArgumentTypeError(f"InvalidDims: need {lo} <= k <= {hi}, got k={self.k}")


def _qlist(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


def _exponent(text: str) -> str:
    if text.strip().lower() in ("inf", "infinity"):
        return "inf"
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational a/b or 'inf', got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"InvalidExponent: {text} < 1")
    return str(v)


def _inv(text: str) -> Fraction:
    return Fraction(0) if text == "inf" else 1 / Fraction(text)


def _common(p: argparse.ArgumentParser, *names: str) -> None:
    opts = {
        "q": dict(type=int, help="field size (prime)"),
        "qs": dict(type=_qlist, help="comma-separated field sizes"),
        "d": dict(type=int, help="ambient dimension"),
        "k": dict(type=int, help="plane dimension"),
        "s": dict(type=int, help="sub-plane dimension"),
        "p": dict(type=_exponent, help="input exponent p (a/b or inf)"),
        "r": dict(type=_exponent, help="output exponent r (a/b or inf)"),
        "seed": dict(type=int, default=0),
        "iters": dict(type=int),
        "trials": dict(type=int),
        "in": dict(dest="input"),
        "out": dict(dest="output"),
        "tuple-cap": dict(type=int, default=DEFAULT_TUPLE_CAP, dest="tuple_cap"),
        "jobs": dict(type=int, default=None),
    }
    for n in names:
        p.add_argument(f"--{n}", **opts[n])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kplane", description="k-plane transforms over F_q^d")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("counts", help="exact plane counts against their asymptotics")
    _common(p, "q", "d", "k", "out")
    p.add_argument("--degenerate", action="store_true", help="allow k = 0 and k = d")

    p = sub.add_parser("planes", help="export every k-plane as JSON lines")
    _common(p, "q", "d", "k", "out")
    p.add_argument("--degenerate", action="store_true")

    p = sub.add_parser("transform", help="apply T_k to a grid function file")
    _common(p, "q", "d", "k", "in", "out", "seed")
    p.add_argument("--func", choices=["delta", "one", "random"], default=None,
                   help="generate the input instead of reading --in")
    p.add_argument("--degenerate", action="store_true")

    p = sub.add_parser("verify", help="exact proof-combinatorics suites")
    p.add_argument("suite", choices=["lemmas", "expansion", "suffmain", "partition"])
    _common(p, "qs", "seed", "trials", "out", "tuple-cap", "jobs")
    p.add_argument("--dmax", type=int, default=None)
    p.add_argument("--baseline", default=None, help="baseline JSON (default: the packaged one)")

    p = sub.add_parser("sweep", help="endpoint or necessity sweeps")
    p.add_argument("kind", choices=["endpoint", "necessity"])
    _common(p, "qs", "d", "k", "p", "r", "seed", "iters", "trials", "out", "jobs")
    p.add_argument("--random-sets", type=int, default=2, dest="random_sets")

    p = sub.add_parser("search", help="hill-climb for large endpoint ratios")
    _common(p, "q", "d", "k", "seed", "iters", "out", "in")

    p = sub.add_parser("baseline", help="recompute the recorded empirical constants")
    _common(p, "seed", "trials", "out")
    return parser


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise argparse.ArgumentTypeError("missing required option(s): " + ", ".join("--" + n for n in missing))


def _config(args) -> RunConfig:
    known = {f for f in RunConfig.__dataclass_fields__ if f != "extra"}
    vals = {k: v for k, v in vars(args).items() if k in known}
    extra = {k: v for k, v in vars(args).items() if k not in known}
    if vals.get("jobs") is None:
        vals["jobs"] = os.cpu_count() or 1
    return RunConfig(**vals, extra=extra)


def _cmd_counts(args, cfg):
    _require(args, "q", "d", "k")
    rep = suites.counting_report(args.q, args.d, args.k)
    _emit(_dump({**rep, "config": asdict(cfg)}), args.output)
    return 0


def _cmd_planes(args, cfg):
    _require(args, "q", "d", "k")
    F = Field(args.q)
    if args.output:
        with open(args.output, "w") as fh:
            export_planes(F, args.d, args.k, fh)
    else:
        export_planes(F, args.d, args.k, sys.stdout)
    return 0


def _cmd_transform(args, cfg):
    _require(args, "k")
    if args.input:
        f = load_function(args.input)
        if isinstance(f, PlaneFunction):
            raise argparse.ArgumentTypeError("--in must hold a grid function, not a plane function")
        if (args.q is not None and args.q != f.q) or (args.d is not None and args.d != f.d):
            raise argparse.ArgumentTypeError(f"--q/--d disagree with the input file (q={f.q}, d={f.d})")
    else:
        _require(args, "q", "d")
        kind = args.func or "delta"
        if kind == "delta":
            f = GridFunction.delta(args.q, args.d)
        elif kind == "one":
            f = GridFunction.constant(args.q, args.d)
        else:
            rng = np.random.default_rng(args.seed)
            f = GridFunction(args.q, args.d, [Fraction(int(n), int(m)) for n, m in
                                              zip(rng.integers(0, 10, args.q**args.d), rng.integers(1, 8, args.q**args.d))])
    if not 0 <= args.k <= f.d or (not args.degenerate and not 1 <= args.k <= f.d - 1):
        raise argparse.ArgumentTypeError(f"InvalidDims: k={args.k} for d={f.d}")
    out = kplane_transform(f, args.k).to_json()
    out["config"] = asdict(cfg)
    _emit(_dump(out), args.output)
    return 0


def _cmd_verify(args, cfg):
    qs = args.qs
    if args.suite == "lemmas":
        dmax = args.dmax or 8
        trials = 10 if args.trials is None else args.trials
        reports = [
            suites.lemma_suite(dmax, trials, args.seed, qs or (2, 3, 5)),
            suites.exponent_suite(max(dmax, 2)),
            suites.promotion_suite(min(dmax, 6), trials, args.seed, qs or (2, 3, 5)),
        ]
    elif args.suite == "partition":
        reports = [suites.partition_suite(qs or (2, 3), args.dmax or 3, args.trials or 200, args.seed, args.tuple_cap)]
    elif args.suite == "expansion":
        reports = [suites.expansion_suite(qs or (2, 3), args.dmax or 3, 50 if args.trials is None else args.trials,
                                          args.seed, args.tuple_cap)]
    else:
        baseline = suites.load_baseline(args.baseline)
        reports = [suites.suffmain_suite(qs or (2, 3), args.dmax or 3, args.trials or 500, args.seed, baseline,
                                         args.tuple_cap)]
    failed = sum(len(r["failures"]) for r in reports)
    _emit(_dump({"config": asdict(cfg), "reports": reports}), args.output)
    for r in reports:
        print(f"{r['check']}: {r['cases']} cases, {len(r['failures'])} failures", file=sys.stderr)
    return 1 if failed else 0


def _cmd_sweep(args, cfg):
    _require(args, "qs", "d", "k")
    jobs = cfg.jobs
    if args.kind == "endpoint":
        climbs = 10 if args.trials is None else args.trials
        rows = experiments.endpoint_sweep(args.qs, args.d, args.k, args.random_sets, climbs, args.iters, args.seed, jobs)
        buf = io.StringIO()
        experiments.write_sweep_csv(rows, buf)
        _emit(buf.getvalue(), args.output)
        if len({r.q for r in rows}) >= 3:
            slope, _, resid = experiments.endpoint_slope(rows)
            print(f"endpoint slope {slope:+.4f} (residual {resid:.4f})", file=sys.stderr)
        return 0
    _require(args, "p", "r")
    pair = experiments.ExponentPair(_inv(args.p), _inv(args.r))
    res = experiments.necessity_scan(args.qs, args.d, args.k, pair, args.random_sets, args.seed, jobs)
    _emit(_dump({**res.to_json(), "config": asdict(cfg)}), args.output)
    return 0


def _cmd_search(args, cfg):
    _require(args, "q", "d", "k")
    start = None
    if args.input:
        start = load_function(args.input)
    iters = args.iters if args.iters is not None else experiments.default_iters(args.q, args.d)
    res = experiments.hill_climb(args.q, args.d, args.k, args.seed, iters, start=start)
    out = {"ratio": res.ratio, "start_ratio": res.start_ratio, "accepted": res.accepted,
           "function": res.function.to_json(), "config": asdict(cfg)}
    _emit(_dump(out), args.output)
    return 0


def build_baseline(seed: int = 0, trials: int = 500) -> dict:
    """Empirical constants recorded in the packaged baseline file."""
    found = suites.suffmain_ratios((2, 3), 3, trials, seed)
    climbs = [experiments.hill_climb(2, 2, 1, seed=s, iters=5000).ratio for s in range(20)]
    return {
        "suffmain": {"qs": [2, 3], "dmax": 3, "trials": trials, "seed": seed,
                     "constants": {key: best["ratio"] for key, best in found.items()},
                     "witnesses": found},
        "endpoint_climb": {"q": 2, "d": 2, "k": 1, "seeds": 20, "iters": 5000, "constant": max(climbs)},
    }


def _cmd_baseline(args, cfg):
    out = build_baseline(args.seed, args.trials or 500)
    out["config"] = asdict(cfg)
    _emit(_dump(out), args.output)
    return 0


COMMANDS = {
    "counts": _cmd_counts,
    "planes": _cmd_planes,
    "transform": _cmd_transform,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
    "search": _cmd_search,
    "baseline": _cmd_baseline,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        cfg.validate(getattr(args, "degenerate", False))
        return COMMANDS[args.subcommand](args, cfg)
    except (argparse.ArgumentTypeError, KPlaneError) as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
