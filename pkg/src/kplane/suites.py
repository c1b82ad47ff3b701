"""Verification suites shared by the CLI and the acceptance tests.

Each suite returns a report ``{"check", "params", "cases", "failures"}``; a
failure carries the exact witness.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from importlib import resources
from typing import Sequence

import numpy as np

from .geometry import gaussian_binomial, num_planes, plane_members, planes_through_count
from .proofcheck import (
    DEFAULT_TUPLE_CAP,
    delta_counts,
    exponent_checks,
    expansion_identity,
    l_partition_all,
    lemma_sides,
    pivot_sequences,
    prod_bound,
    promotion_identity,
    random_levels,
    s_promotion,
    suffmain_value,
    u_bound,
)
from .transform import GridFunction, format_rational

BASELINE_FILE = "baseline.json"


def _report(check: str, params: dict, cases: int, failures: list) -> dict:
    return {"check": check, "params": params, "cases": cases, "failures": failures}


def _random_sizes(rng, d: int, q: int) -> list[int]:
    return [int(x) for x in rng.integers(0, q**d + 1, size=d + 1)]


def lemma_suite(dmax: int = 8, trials: int = 10, seed: int = 0, qs: Sequence[int] = (2, 3, 5)) -> dict:
    rng = np.random.default_rng(seed)
    cases, failures = 0, []
    for d in range(2, dmax + 1):
        for k in range(1, d):
            for ell in pivot_sequences(d, k):
                for q in qs:
                    trivial = [1] * (d + 1)
                    for sizes in [trivial] + [_random_sizes(rng, d, q) for _ in range(trials)]:
                        cases += 1
                        lhs, rhs = lemma_sides(d, k, ell, sizes, q)
                        if lhs != rhs:
                            failures.append({"d": d, "k": k, "q": q, "ell": ell.ells, "sizes": sizes,
                                             "lhs": format_rational(lhs), "rhs": format_rational(rhs)})
    return _report("lemma_identity", {"dmax": dmax, "trials": trials, "seed": seed, "qs": list(qs)}, cases, failures)


def exponent_suite(dmax: int = 10) -> dict:
    cases, failures = 0, []
    for d in range(2, dmax + 1):
        for k in range(1, d):
            for ell in pivot_sequences(d, k):
                for r in range(1, k + 1):
                    cases += 1
                    res = exponent_checks(d, k, ell, r)
                    bad = [name for name, ok in res.items() if not ok]
                    if bad:
                        failures.append({"d": d, "k": k, "ell": ell.ells, "r": r, "failed": bad})
    return _report("exponent_negativity", {"dmax": dmax}, cases, failures)


def promotion_suite(dmax: int = 6, trials: int = 10, seed: int = 0, qs: Sequence[int] = (2, 3, 5)) -> dict:
    rng = np.random.default_rng(seed)
    cases, failures = 0, []
    for d in range(2, dmax + 1):
        for k in range(1, d):
            for s in range(k):
                for ell in pivot_sequences(d, s):
                    for q in qs:
                        for _ in range(trials):
                            sizes = _random_sizes(rng, d, q)
                            cases += 1
                            if not promotion_identity(ell, sizes, q, k):
                                failures.append({"d": d, "k": k, "q": q, "ell": ell.ells,
                                                 "promoted": s_promotion(ell, k).ells, "sizes": sizes})
    return _report("s_promotion", {"dmax": dmax, "trials": trials, "seed": seed, "qs": list(qs)}, cases, failures)


def random_tuple_instance(rng, q: int, d: int, max_set: int = 8) -> list[list[int]]:
    """d+1 random point sets; with probability 1/2 some positions share a set."""
    pool = []
    for _ in range(d + 1):
        m = int(rng.integers(1, min(q**d, max_set) + 1))
        pool.append(sorted(int(x) for x in rng.choice(q**d, size=m, replace=False)))
    if rng.random() < 0.5:
        return [pool[int(rng.integers(0, 2))] for _ in range(d + 1)]
    return pool


def partition_suite(qs: Sequence[int] = (2, 3), dmax: int = 3, trials: int = 200, seed: int = 0,
                    cap: int = DEFAULT_TUPLE_CAP) -> dict:
    """Partition exactness, the bound chain |L| <= prod <= U, and promotion with realized sizes."""
    rng = np.random.default_rng(seed)
    failures = []
    for trial in range(trials):
        q = int(qs[trial % len(qs)])
        d = int(rng.integers(2, dmax + 1))
        E = random_tuple_instance(rng, q, d)
        sizes = [len(x) for x in E]
        witness = {"trial": trial, "q": q, "d": d, "E": E}
        delta = delta_counts(E, q, d, cap)
        if sum(delta) != math.prod(sizes):
            failures.append({**witness, "failed": "delta_sum", "delta": delta})
        parts = l_partition_all(E, q, d, cap)
        for s in range(d + 1):
            if sum(c for ell, c in parts.items() if ell.s == s) != delta[s]:
                failures.append({**witness, "failed": "l_partition_sum", "s": s})
        for k in range(1, d):
            for s in range(k + 1):
                for ell in pivot_sequences(d, s):
                    L = parts.get(ell, 0)
                    P = prod_bound(sizes, ell, q)
                    U = u_bound(s, sizes, ell, q, d, k)
                    if not L <= P <= U:
                        failures.append({**witness, "failed": "bound_chain", "k": k, "ell": ell.ells,
                                         "L": L, "prod": P, "U": U})
                    if s < k and not promotion_identity(ell, sizes, q, k):
                        failures.append({**witness, "failed": "promotion", "k": k, "ell": ell.ells})
    return _report("partition", {"qs": list(qs), "dmax": dmax, "trials": trials, "seed": seed}, trials, failures)


def random_rational_function(rng, q: int, d: int, max_support: int = 4, signed: bool = False) -> GridFunction:
    m = int(rng.integers(1, min(q**d, max_support) + 1))
    pts = rng.choice(q**d, size=m, replace=False)
    vals = [Fraction(0)] * q**d
    for x in pts:
        num = int(rng.integers(-9 if signed else 1, 10))
        vals[int(x)] = Fraction(num, int(rng.integers(1, 8)))
    if all(v == 0 for v in vals):
        vals[int(pts[0])] = Fraction(1)
    return GridFunction(q, d, vals)


def expansion_suite(qs: Sequence[int] = (2, 3), dmax: int = 3, trials: int = 50, seed: int = 0,
                    cap: int = DEFAULT_TUPLE_CAP) -> dict:
    rng = np.random.default_rng(seed)
    cases, failures = 0, []
    for q in qs:
        for d in range(2, dmax + 1):
            for k in range(1, d):
                fns = [("one", GridFunction.constant(q, d)), ("delta", GridFunction.delta(q, d))]
                fns += [(f"random{j}", random_rational_function(rng, q, d)) for j in range(trials)]
                for name, f in fns:
                    cases += 1
                    res = expansion_identity(f, k, cap)
                    if not res.equal:
                        failures.append({"q": q, "d": d, "k": k, "f": name, "lhs": format_rational(res.lhs),
                                         "rhs": format_rational(res.rhs),
                                         "values": f.to_json()["values"] if name.startswith("random") else None})
    return _report("expansion_identity", {"qs": list(qs), "dmax": dmax, "trials": trials, "seed": seed},
                   cases, failures)


def load_baseline(path=None) -> dict:
    if path is None:
        text = resources.files("kplane").joinpath("data", BASELINE_FILE).read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return json.loads(text)


def suffmain_ratios(qs: Sequence[int], dmax: int, trials: int, seed: int, cap: int = DEFAULT_TUPLE_CAP) -> dict:
    """Largest value/normalization^(k+1) per (d, k) over random level configurations."""
    rng = np.random.default_rng(seed)
    out: dict[str, dict] = {}
    for d in range(2, dmax + 1):
        for k in range(1, d):
            best = {"ratio": 0.0}
            for q in qs:
                for _ in range(trials):
                    lv = random_levels(q, d, rng)
                    res = suffmain_value(lv, k, cap)
                    r = res.ratio(k)
                    if r > best["ratio"]:
                        best = {"ratio": r, "q": q, "value": format_rational(res.value),
                                "levels": {str(i): sorted(E) for i, E in lv.levels.items()}}
            out[f"{d},{k}"] = best
    return out


def suffmain_suite(qs: Sequence[int] = (2, 3), dmax: int = 3, trials: int = 500, seed: int = 1,
                   baseline: dict | None = None, cap: int = DEFAULT_TUPLE_CAP) -> dict:
    """Fails when any ratio exceeds twice the recorded constant C_{d,k}."""
    if baseline is None:
        baseline = load_baseline()
    consts = baseline["suffmain"]["constants"]
    found = suffmain_ratios(qs, dmax, trials, seed, cap)
    failures = []
    for key, best in found.items():
        if key not in consts:
            failures.append({"dk": key, "failed": "no recorded constant"})
        elif best["ratio"] > 2 * consts[key]:
            failures.append({"dk": key, **best, "constant": consts[key]})
    rep = _report("suffmain", {"qs": list(qs), "dmax": dmax, "trials": trials, "seed": seed},
                  trials * len(qs) * len(found), failures)
    rep["observed"] = {key: best["ratio"] for key, best in found.items()}
    rep["constants"] = {key: consts.get(key) for key in found}
    return rep


def counting_report(q: int, d: int, k: int) -> dict:
    return {
        "q": q, "d": d, "k": k,
        "planes": int(plane_members(q, d, k).shape[0]),
        "planes_formula": num_planes(q, d, k),
        "planes_asymptotic": q ** ((d - k) * (k + 1)),
        "gaussian": gaussian_binomial(d, k, q),
        "planes_through": {str(s): planes_through_count(d, k, s, q) for s in range(k + 1)},
        "planes_through_asymptotic": {str(s): q ** ((d - k) * (k - s)) for s in range(k + 1)},
    }
