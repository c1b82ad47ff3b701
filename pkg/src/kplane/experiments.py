"""Norm-estimate experiments: endpoint sweeps, necessity scans, extremizer search."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InsufficientData, InvalidDims, ZeroFunction
from .geometry import point_planes, plane_members
from .transform import (
    GridFunction,
    endpoint_powers,
    endpoint_ratio,
    format_rational,
    kplane_transform,
    lp_norm,
)

OUTSIDE_SLOPE = 0.2
FLAT_SLOPE = 0.05


# -- exponent pairs ----------------------------------------------------------

def _cross(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class ExponentPair:
    """(1/p, 1/r); a zero entry stands for the sup norm."""

    inv_p: Fraction
    inv_r: Fraction

    def __post_init__(self):
        p, r = Fraction(self.inv_p), Fraction(self.inv_r)
        if not (0 <= p <= 1 and 0 <= r <= 1):
            raise ValueError(f"exponent pair ({p}, {r}) outside the unit square")
        object.__setattr__(self, "inv_p", p)
        object.__setattr__(self, "inv_r", r)

    @classmethod
    def endpoint(cls, d: int, k: int) -> ExponentPair:
        return cls(Fraction(k + 1, d + 1), Fraction(1, d + 1))

    @property
    def p(self):
        return math.inf if self.inv_p == 0 else 1 / self.inv_p

    @property
    def r(self):
        return math.inf if self.inv_r == 0 else 1 / self.inv_r

    def hull_position(self, d: int, k: int) -> str:
        """'inside', 'boundary' or 'outside' the admissible hull, decided exactly."""
        verts = [(Fraction(0), Fraction(0)), (Fraction(k + 1, d + 1), Fraction(1, d + 1)),
                 (Fraction(1), Fraction(1)), (Fraction(0), Fraction(1))]
        pt = (self.inv_p, self.inv_r)
        signs = [_cross(verts[i], verts[(i + 1) % 4], pt) for i in range(4)]
        if any(s < 0 for s in signs):
            return "outside"
        return "boundary" if any(s == 0 for s in signs) else "inside"

    def __str__(self) -> str:
        return f"({self.inv_p},{self.inv_r})"


# -- family and ratios -------------------------------------------------------

def extremizer_family(q: int, d: int, k: int, n_random: int = 2, seed: int = 0) -> list[tuple[str, GridFunction]]:
    """delta_0, the indicator of span(e_0..e_{m-1}) for m = 0..d, and random sets of size ~q^(d/2)."""
    if not 1 <= k <= d - 1:
        raise InvalidDims(f"InvalidDims: need 1 <= k <= d-1, got k={k}, d={d}")
    fam = [("delta", GridFunction.delta(q, d))]
    for m in range(d + 1):
        pts = [x for x in range(q**d) if x < q**m]  # first m coordinates free, rest zero
        fam.append((f"plane{m}", GridFunction.indicator(q, d, pts)))
    rng = np.random.default_rng(seed)
    size = max(1, min(q**d, round(q ** (d / 2))))
    for j in range(n_random):
        pts = rng.choice(q**d, size=size, replace=False)
        fam.append((f"random{j}", GridFunction.indicator(q, d, pts)))
    return fam


def ratio_at(f: GridFunction, k: int, pair: ExponentPair) -> float:
    """||T_k f||_r / ||f||_p."""
    if f.is_zero():
        raise ZeroFunction("ZeroFunction: ratio undefined for f = 0")
    return lp_norm(kplane_transform(f, k), pair.r) / lp_norm(f, pair.p)


def fit_slope(qs: Sequence[int], values: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares slope, intercept and RMS residual of log(value) against log(q)."""
    x = np.log(np.asarray(qs, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    if abs(slope) < 1e-12:
        slope = 0.0
    return float(slope), float(intercept), resid


@dataclass
class ScanResult:
    d: int
    k: int
    pair: str
    position: str
    slope: float
    intercept: float
    residual: float
    per_q: list[dict]
    witness: str

    def to_json(self) -> dict:
        return asdict(self)


def _family_max(args):
    q, d, k, pair, n_random, seed = args
    best = None
    for name, f in extremizer_family(q, d, k, n_random, seed):
        r = ratio_at(f, k, pair)
        if best is None or r > best[1] * (1 + 1e-12):
            best = (name, r)
    return {"q": q, "max_ratio": best[1], "member": best[0]}


def necessity_scan(q_list: Sequence[int], d: int, k: int, pair: ExponentPair, n_random: int = 2,
                   seed: int = 0, jobs: int = 1) -> ScanResult:
    """Growth of the family maximum of ratio_at with q, as a log-log slope."""
    qs = list(q_list)
    if len(qs) < 3:
        raise InsufficientData(f"InsufficientData: need at least 3 values of q, got {len(qs)}")
    tasks = [(q, d, k, pair, n_random, seed) for q in qs]
    per_q = _map(_family_max, tasks, jobs)
    slope, intercept, resid = fit_slope(qs, [r["max_ratio"] for r in per_q])
    witness = per_q[-1]["member"]
    return ScanResult(d, k, str(pair), pair.hull_position(d, k), slope, intercept, resid, per_q, witness)


def _map(fn, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, tasks))


# -- hill climbing -----------------------------------------------------------

ZERO = -1  # level marker for f(x) = 0
ACCEPT_TOL = 1e-9  # minimum gain in log-ratio for a move to count


def _levels_to_function(q: int, d: int, levels: np.ndarray) -> GridFunction:
    top = int(levels.max(initial=0))
    num = [0 if lv == ZERO else 1 << (top - int(lv)) for lv in levels]
    return GridFunction(q, d, num=num, den=1 << top)


def _function_to_levels(f: GridFunction, max_level: int) -> np.ndarray:
    out = np.full(len(f), ZERO, dtype=np.int64)
    for x, v in enumerate(f.values):
        if v == 0:
            continue
        if v < 0 or v.numerator != 1 or v.denominator & (v.denominator - 1):
            raise ValueError("hill_climb start must take values in {0} U {2^-i}")
        lv = v.denominator.bit_length() - 1
        if lv > max_level:
            raise ValueError(f"start value 2^-{lv} below 2^-{max_level}")
        out[x] = lv
    return out


@dataclass
class ClimbResult:
    function: GridFunction
    ratio: float
    accepted: int
    start_ratio: float


def hill_climb(q: int, d: int, k: int, seed: int = 0, iters: int = 1000, start: GridFunction | None = None,
               max_level: int = 16) -> ClimbResult:
    """Single-point dyadic moves (x2, /2, set to 0), accepted only when the endpoint ratio grows.

    Without ``start`` the search begins from a random function: one random
    point at value 1, every other point at 2^-(h+j) where the height h is
    drawn once from 1..12 and the jitter j per point from 0..2.
    Values are 2^-i with 0 <= i <= max_level, or 0; a zero point proposed for
    doubling is revived at 2^-max_level.  The search objective is evaluated in
    floating point with incremental plane-sum updates; the returned ratio is
    recomputed from exact powers, and the start is returned if the walk
    ended below it.
    """
    rng = np.random.default_rng(seed)
    n = q**d
    if start is None:
        # one random peak at 1 over a near-flat background at a random height
        height = int(rng.integers(1, 13))
        levels = np.minimum(height + rng.integers(0, 3, size=n), max_level)
        levels[rng.integers(n)] = 0
    else:
        levels = _function_to_levels(start, max_level)
        if np.all(levels == ZERO):
            raise ZeroFunction("ZeroFunction: start function is zero")
    p = (d + 1) / (k + 1)
    L = max_level

    def ival(lv):
        return np.where(lv == ZERO, 0.0, np.exp2(L - lv.astype(float)))

    members = plane_members(q, d, k)
    through = point_planes(q, d, k)

    vals = ival(levels)
    sums = vals[members].sum(axis=1)
    tpow = float(np.sum(sums ** (d + 1)))
    ipow = float(np.sum(vals**p))

    def objective(t, i):
        return math.log(t) - (k + 1) * math.log(i)

    best = objective(tpow, ipow)
    start_levels = levels.copy()
    start_ratio = endpoint_ratio(_levels_to_function(q, d, levels), k)
    accepted = 0
    nonzero = int(np.count_nonzero(levels != ZERO))
    for _ in range(iters):
        x = int(rng.integers(n))
        move = int(rng.integers(3))
        old = int(levels[x])
        if move == 0:
            new = L if old == ZERO else max(0, old - 1)
        elif move == 1:
            new = ZERO if old == ZERO else min(L, old + 1)
        else:
            new = ZERO
        if new == old:
            continue
        ov = 0.0 if old == ZERO else 2.0 ** (L - old)
        nv = 0.0 if new == ZERO else 2.0 ** (L - new)
        if new == ZERO and nonzero == 1:
            continue
        new_ipow = ipow - ov**p + nv**p
        planes = through[x]
        s_old = sums[planes]
        s_new = s_old + (nv - ov)
        new_tpow = tpow + float(np.sum(s_new ** (d + 1)) - np.sum(s_old ** (d + 1)))
        if new_tpow <= 0:
            continue
        obj = objective(new_tpow, new_ipow)
        # the incremental sums drift by far more than machine epsilon
        if obj > best + ACCEPT_TOL:
            levels[x] = new
            sums[planes] = s_new
            tpow, ipow, best = new_tpow, new_ipow, obj
            nonzero += (new != ZERO) - (old != ZERO)
            accepted += 1
            if accepted % 512 == 0:
                vals = ival(levels)
                sums = vals[members].sum(axis=1)
                tpow = float(np.sum(sums ** (d + 1)))
                ipow = float(np.sum(vals**p))
    f = _levels_to_function(q, d, levels)
    ratio = endpoint_ratio(f, k)
    if ratio < start_ratio:
        f, ratio = _levels_to_function(q, d, start_levels), start_ratio
    return ClimbResult(f, ratio, accepted, start_ratio)


# -- endpoint sweep ----------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    q: int
    d: int
    k: int
    member: str
    ratio: float
    num: str  # ||T_k f||_{d+1}^{d+1}, exact
    den: str  # ||f||_{(d+1)/(k+1)}^{d+1}, exact "a/b" or a float repr when irrational

    def as_list(self) -> list:
        return [self.q, self.d, self.k, self.member, repr(self.ratio), self.num, self.den]


SWEEP_HEADER = ["q", "d", "k", "member", "ratio", "num", "den"]


def sweep_row(q: int, d: int, k: int, member: str, f: GridFunction) -> SweepRow:
    pw = endpoint_powers(f, k)
    den = format_rational(pw.input_power) if pw.exact else repr(pw.input_power)
    return SweepRow(q, d, k, member, pw.ratio, format_rational(pw.transform_power), den)


def _sweep_q(args) -> list[SweepRow]:
    q, d, k, n_random, climbs, iters, seed = args
    if iters is None:
        iters = default_iters(q, d)
    rows = [sweep_row(q, d, k, name, f) for name, f in extremizer_family(q, d, k, n_random, seed)]
    for j in range(climbs):
        res = hill_climb(q, d, k, seed=seed * 1000 + j, iters=iters)
        rows.append(sweep_row(q, d, k, f"climb{j}", res.function))
    return rows


def default_iters(q: int, d: int) -> int:
    """Hill-climb budget that scales with the number of points."""
    return max(1000, 10 * q**d)


def endpoint_sweep(q_list: Sequence[int], d: int, k: int, n_random: int = 2, climbs: int = 0,
                   iters: int | None = None, seed: int = 0, jobs: int = 1) -> list[SweepRow]:
    """Family members plus ``climbs`` hill-climb outputs, one row each, for every q."""
    tasks = [(q, d, k, n_random, climbs, iters, seed) for q in q_list]
    return [row for rows in _map(_sweep_q, tasks, jobs) for row in rows]


def max_by_q(rows: Sequence[SweepRow]) -> dict[int, SweepRow]:
    out: dict[int, SweepRow] = {}
    for r in rows:
        if r.q not in out or r.ratio > out[r.q].ratio:
            out[r.q] = r
    return out


def endpoint_slope(rows: Sequence[SweepRow]) -> tuple[float, float, float]:
    best = max_by_q(rows)
    qs = sorted(best)
    if len(qs) < 3:
        raise InsufficientData(f"InsufficientData: need at least 3 values of q, got {len(qs)}")
    return fit_slope(qs, [best[q].ratio for q in qs])


def write_sweep_csv(rows: Sequence[SweepRow], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow(r.as_list())


