"""Exact checks of the combinatorics behind the endpoint estimate.

Everything here is integer or Fraction arithmetic.  Inequalities with
fractional exponents are cleared to integer powers before comparing.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    HypothesisViolated,
    InvalidDims,
    InvalidPivots,
    NegativeValue,
    NoPromotionSlot,
    SupTooLarge,
    TooLarge,
)
from .field import Field
from .geometry import all_points, gaussian_binomial, num_planes, point_planes
from .transform import GridFunction, kplane_transform, lp_power

DEFAULT_TUPLE_CAP = 10**7
_CHUNK = 1 << 16


# -- pivot sequences ---------------------------------------------------------

@dataclass(frozen=True)
class PivotSequence:
    """Indices 0 = l_0 < l_1 < ... < l_s <= d at which a tuple's prefix span grows.

    ``ell(s + 1)`` is ``d + 1`` by convention.
    """

    d: int
    ells: tuple[int, ...]

    def __post_init__(self):
        e = tuple(int(x) for x in self.ells)
        object.__setattr__(self, "ells", e)
        if not e or e[0] != 0:
            raise InvalidPivots(f"InvalidPivots: sequence must start at 0, got {e}")
        if any(b <= a for a, b in zip(e, e[1:])):
            raise InvalidPivots(f"InvalidPivots: not strictly increasing: {e}")
        if e[-1] > self.d:
            raise InvalidPivots(f"InvalidPivots: last pivot {e[-1]} exceeds d={self.d}")

    @property
    def s(self) -> int:
        return len(self.ells) - 1

    def ell(self, j: int) -> int:
        if j == self.s + 1:
            return self.d + 1
        return self.ells[j]

    def block(self, t: int) -> int:
        """The j with l_j <= t < l_{j+1}."""
        j = 0
        while self.ell(j + 1) <= t:
            j += 1
        return j

    def non_pivots(self) -> list[int]:
        ps = set(self.ells)
        return [t for t in range(self.d + 1) if t not in ps]


def pivot_sequences(d: int, s: int) -> Iterator[PivotSequence]:
    """All pivot sequences with s+1 entries, in lexicographic order."""
    if not 0 <= s <= d:
        return
    for rest in itertools.combinations(range(1, d + 1), s):
        yield PivotSequence(d, (0,) + rest)


# -- product bounds ----------------------------------------------------------

def _check_sizes(sizes: Sequence[int], d: int) -> None:
    if len(sizes) != d + 1 or any(x < 0 for x in sizes):
        raise InvalidPivots(f"InvalidPivots: need d+1={d + 1} non-negative sizes, got {list(sizes)}")


def prod_bound(sizes: Sequence[int], ell: PivotSequence, q: int) -> int:
    """Choices per position: |E| at pivots, min(|E|, q^j) inside block j."""
    _check_sizes(sizes, ell.d)
    out = math.prod(sizes[e] for e in ell.ells)
    for t in ell.non_pivots():
        out *= min(sizes[t], q ** ell.block(t))
    return out


def u_bound(s: int, sizes: Sequence[int], ell: PivotSequence, q: int, d: int, k: int) -> int:
    """Relaxation of :func:`prod_bound`: the d-k largest non-pivot positions take q^j."""
    if ell.d != d or ell.s != s:
        raise InvalidPivots(f"InvalidPivots: sequence {ell.ells} does not have s={s}, d={d}")
    if not 0 <= s <= k <= d - 1:
        raise InvalidPivots(f"InvalidPivots: need 0 <= s <= k <= d-1, got s={s}, k={k}, d={d}")
    _check_sizes(sizes, d)
    free = ell.non_pivots()
    relaxed = set(free[len(free) - (d - k):]) if d > k else set()
    out = math.prod(sizes[e] for e in ell.ells)
    for t in free:
        out *= q ** ell.block(t) if t in relaxed else sizes[t]
    return out


def s_promotion(ell: PivotSequence, k: int) -> PivotSequence:
    """Add the pivot l_{j0} + 1, where j0 is the first j with l_{j+1} != l_j + 1."""
    d, s = ell.d, ell.s
    if not s < k <= d - 1:
        raise NoPromotionSlot(f"NoPromotionSlot: need s < k <= d-1, got s={s}, k={k}, d={d}")
    j0 = next(j for j in range(s + 1) if ell.ell(j + 1) != ell.ell(j) + 1)
    new = ell.ell(j0) + 1
    assert new <= d, "no free position although s < d"
    return PivotSequence(d, tuple(sorted(ell.ells + (new,))))


def promotion_identity(ell: PivotSequence, sizes: Sequence[int], q: int, k: int) -> bool:
    """U(s, l) * q^(d-k) == U(s+1, promoted l)."""
    d, s = ell.d, ell.s
    promoted = s_promotion(ell, k)
    return u_bound(s, sizes, ell, q, d, k) * q ** (d - k) == u_bound(s + 1, sizes, promoted, q, d, k)


def lemma_sides(d: int, k: int, ell: PivotSequence, sizes: Sequence[int], q: int) -> tuple[Fraction, Fraction]:
    if not 1 <= k <= d - 1 or ell.s != k or ell.d != d:
        raise InvalidPivots(f"InvalidPivots: need k+1 pivots with 1 <= k <= d-1, got {ell.ells}, k={k}, d={d}")
    lhs = Fraction(u_bound(k, sizes, ell, q, d, k), q ** (k * (d - k)))
    excess = sum(ell.ell(t) - t for t in range(1, k + 1))
    rhs = Fraction(math.prod(sizes[e] for e in ell.ells), q**excess)
    return lhs, rhs


def lemma_identity(d: int, k: int, ell: PivotSequence, sizes: Sequence[int], q: int) -> bool:
    lhs, rhs = lemma_sides(d, k, ell, sizes, q)
    return lhs == rhs


# -- convergence exponents ---------------------------------------------------

def _check_r(d: int, k: int, ell: PivotSequence, r: int) -> None:
    if not 1 <= r <= k <= d - 1 or ell.s != k or ell.d != d:
        raise InvalidPivots(f"InvalidPivots: need 1 <= r <= k <= d-1 and k+1 pivots; r={r}, k={k}, d={d}, l={ell.ells}")


def exponent_negativity(d: int, k: int, ell: PivotSequence, r: int) -> Fraction:
    """Sum over t = r..k of (d+1)(d - l_t + t)/(d(k+1)) - l_{t+1} + l_t."""
    _check_r(d, k, ell, r)
    return sum(
        (Fraction((d + 1) * (d - ell.ell(t) + t), d * (k + 1)) - ell.ell(t + 1) + ell.ell(t) for t in range(r, k + 1)),
        Fraction(0),
    )


def exponent_checks(d: int, k: int, ell: PivotSequence, r: int) -> dict[str, bool]:
    """Negativity of the exponent sum plus its integer reformulations."""
    value = exponent_negativity(d, k, ell, r)
    alpha = ell.ell(r) - r
    tail = sum(ell.ell(t) - t for t in range(r + 1, k + 1))
    scaled = d * r * (k - d) + (d * k - 1) * alpha - (d + 1) * tail
    solved_den = d * r - k + r - 1
    return {
        "negative": value < 0,
        # multiplying by d(k+1) gives an integer expression
        "scaled_form": value * d * (k + 1) == scaled,
        "tail_form": (d * k - 1) * alpha < d * r * (d - k) + (d + 1) * tail,
        "alpha_form": (d * k - 1) * alpha < d * r * (d - k) + (d + 1) * (k - r) * alpha,
        "alpha_bound": solved_den > 0 and Fraction(alpha) < Fraction(d * r * (d - k), solved_den),
        "alpha_range": 0 <= alpha <= d - k,
    }


# -- size bound --------------------------------------------------------------

def level_bound_holds(size: int, i: int, d: int, k: int) -> bool:
    """|E_i| <= 2^((d+1) i / (k+1)), compared after raising to the (k+1)-th power."""
    return size ** (k + 1) <= 2 ** ((d + 1) * i)


def min_level_for_size(size: int, d: int, k: int) -> int:
    i = 0
    while not level_bound_holds(size, i, d, k):
        i += 1
    return i


def size_bound_check(size: int, i: int, ell_t: int, t: int, q: int, d: int, k: int) -> bool:
    """|E| q^(t - l_t) <= 2^((d+1)(d - l_t + t) i / (d(k+1))), exactly.

    Both sides are raised to the power d(k+1).
    """
    if size < 0 or size > q**d or not level_bound_holds(size, i, d, k):
        raise HypothesisViolated(f"HypothesisViolated: size={size} at level i={i} (q={q}, d={d}, k={k})")
    if not 0 <= t <= ell_t <= d:
        raise HypothesisViolated(f"HypothesisViolated: need t <= l_t <= d, got t={t}, l_t={ell_t}")
    e = d * (k + 1)
    return size**e <= 2 ** ((d + 1) * (d - ell_t + t) * i) * q ** ((ell_t - t) * e)


# -- tuple enumeration -------------------------------------------------------

def prefix_ranks(pts: np.ndarray, q: int) -> np.ndarray:
    """Affine span dimension of every prefix of every tuple.

    ``pts`` has shape ``(N, m, d)``; returns ``(N, m)`` where column j is the
    dimension of the span of the first j+1 points.
    """
    N, m, d = pts.shape
    inv = Field(q).inverse_table
    basis = np.zeros((N, d, d), dtype=np.int64)
    present = np.zeros((N, d), dtype=bool)
    ranks = np.zeros((N, m), dtype=np.int64)
    rows = np.arange(N)
    for j in range(1, m):
        v = (pts[:, j] - pts[:, 0]) % q
        for c in range(d):
            coef = np.where(present[:, c], v[:, c], 0)
            v = (v - coef[:, None] * basis[:, c, :]) % q
        nz = v != 0
        grew = nz.any(axis=1)
        lead = nz.argmax(axis=1)
        sel = rows[grew]
        if len(sel):
            lc = lead[sel]
            scale = inv[v[sel, lc]]
            basis[sel, lc, :] = (v[sel] * scale[:, None]) % q
            present[sel, lc] = True
        ranks[:, j] = ranks[:, j - 1] + grew
    return ranks


def _tuple_chunks(sets: Sequence[np.ndarray], cap: int) -> Iterator[np.ndarray]:
    """Blocks of rows from E_0 x ... x E_d, first factor varying slowest."""
    sizes = [len(s) for s in sets]
    total = math.prod(sizes)
    if total > cap:
        raise TooLarge(f"TooLarge: {total} tuples exceed the cap {cap}")
    strides = [math.prod(sizes[t + 1:]) for t in range(len(sets))]
    for lo in range(0, total, _CHUNK):
        flat = np.arange(lo, min(total, lo + _CHUNK), dtype=np.int64)
        yield np.stack([s[(flat // st) % n] for s, st, n in zip(sets, strides, sizes)], axis=1)


def _as_sets(E_tuple) -> list[np.ndarray]:
    return [np.array(sorted(int(x) for x in E), dtype=np.int64) for E in E_tuple]


def _check_tuple(E_tuple, q: int, d: int) -> list[np.ndarray]:
    sets = _as_sets(E_tuple)
    if len(sets) != d + 1:
        raise InvalidDims(f"InvalidDims: need d+1={d + 1} sets, got {len(sets)}")
    for s in sets:
        if len(s) and (s.min() < 0 or s.max() >= q**d):
            raise InvalidDims("InvalidDims: point index out of range")
    return sets


def _ranked_chunks(sets, q, d, cap):
    coords = all_points(q, d)
    for chunk in _tuple_chunks(sets, cap):
        yield chunk, prefix_ranks(coords[chunk], q)


def delta_counts(E_tuple: Sequence, q: int, d: int, cap: int = DEFAULT_TUPLE_CAP) -> list[int]:
    """``out[s]`` = number of tuples from E_0 x ... x E_d whose affine span has dimension s."""
    sets = _check_tuple(E_tuple, q, d)
    out = np.zeros(d + 1, dtype=np.int64)
    for _chunk, ranks in _ranked_chunks(sets, q, d, cap):
        out += np.bincount(ranks[:, -1], minlength=d + 1)
    return [int(x) for x in out]


def l_partition_all(E_tuple: Sequence, q: int, d: int, cap: int = DEFAULT_TUPLE_CAP) -> dict[PivotSequence, int]:
    """|L(s, l)| for every realized pivot sequence, all s at once."""
    sets = _check_tuple(E_tuple, q, d)
    weights = 1 << np.arange(d + 1, dtype=np.int64)
    counts: dict[int, int] = {}
    for _chunk, ranks in _ranked_chunks(sets, q, d, cap):
        jumps = np.zeros_like(ranks, dtype=bool)
        jumps[:, 0] = True
        jumps[:, 1:] = ranks[:, 1:] > ranks[:, :-1]
        keys, cnt = np.unique(jumps.astype(np.int64) @ weights, return_counts=True)
        for key, c in zip(keys, cnt):
            counts[int(key)] = counts.get(int(key), 0) + int(c)
    out = {}
    for key, c in counts.items():
        ells = tuple(t for t in range(d + 1) if key >> t & 1)
        out[PivotSequence(d, ells)] = c
    return out


def l_partition(E_tuple: Sequence, s: int, q: int, d: int, cap: int = DEFAULT_TUPLE_CAP) -> dict[PivotSequence, int]:
    """Counts for every admissible pivot sequence with s+1 entries (zeros included)."""
    realized = l_partition_all(E_tuple, q, d, cap)
    return {ell: realized.get(ell, 0) for ell in pivot_sequences(d, s)}


# -- dyadic levels -----------------------------------------------------------

def _dyadic_level(v: Fraction) -> int:
    """The i >= 0 with 2^(-i-1) < v <= 2^(-i), for 0 < v <= 1."""
    n, m = v.numerator, v.denominator
    i = max(0, (m // n).bit_length() - 1)
    while n << (i + 1) <= m:  # v * 2^(i+1) <= 1
        i += 1
    while i > 0 and n << i > m:
        i -= 1
    return i


@dataclass(frozen=True)
class DyadicLevels:
    """Disjoint level sets; the implied function is sum_i 2^(-i) 1_{E_i}."""

    q: int
    d: int
    levels: Mapping[int, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        lv = {int(i): frozenset(int(x) for x in E) for i, E in self.levels.items() if E}
        if any(i < 0 for i in lv):
            raise InvalidDims("InvalidDims: level indices must be >= 0")
        seen: set[int] = set()
        for E in lv.values():
            if seen & E:
                raise InvalidDims("InvalidDims: level sets are not disjoint")
            if any(not 0 <= x < self.q**self.d for x in E):
                raise InvalidDims("InvalidDims: point index out of range")
            seen |= E
        object.__setattr__(self, "levels", dict(sorted(lv.items())))

    def support(self) -> list[int]:
        return sorted(x for E in self.levels.values() for x in E)

    def level_of(self) -> dict[int, int]:
        return {x: i for i, E in self.levels.items() for x in E}

    def step_function(self) -> GridFunction:
        vals = [Fraction(0)] * self.q**self.d
        for i, E in self.levels.items():
            for x in E:
                vals[x] = Fraction(1, 2**i)
        return GridFunction(self.q, self.d, vals)

    def normalization(self, k: int) -> float:
        """sum_j 2^(-(d+1) j / (k+1)) |E_j|; display value only."""
        return math.fsum(2.0 ** (-(self.d + 1) * j / (k + 1)) * len(E) for j, E in self.levels.items())

    def level_bounds_hold(self, k: int) -> bool:
        return all(level_bound_holds(len(E), j, self.d, k) for j, E in self.levels.items())


def dyadic_decompose(f: GridFunction) -> DyadicLevels:
    """E_i = {x : 2^(-i-1) < f(x) <= 2^(-i)}."""
    vals = f.values
    if any(v < 0 for v in vals):
        raise NegativeValue("NegativeValue: dyadic decomposition needs f >= 0")
    if any(v > 1 for v in vals):
        raise SupTooLarge("SupTooLarge: dyadic decomposition needs max f <= 1")
    levels: dict[int, set[int]] = {}
    for x, v in enumerate(vals):
        if v:
            levels.setdefault(_dyadic_level(v), set()).add(x)
    return DyadicLevels(f.q, f.d, {i: frozenset(E) for i, E in levels.items()})


# -- suffmain truncation -----------------------------------------------------

@dataclass(frozen=True)
class SuffmainResult:
    value: Fraction
    normalization: float
    tuples: int

    def ratio(self, k: int) -> float:
        """value / normalization^(k+1), which is invariant under f -> 2f."""
        return float(self.value) / self.normalization ** (k + 1)


def suffmain_value(levels: DyadicLevels, k: int, cap: int = DEFAULT_TUPLE_CAP) -> SuffmainResult:
    """Sum over non-decreasing level tuples of 2^-(i_0+...+i_d) sum_{s<=k} |Delta(s)| q^(-s(d-k)).

    Only realized levels contribute, so the sum is finite.  Every point tuple
    from the support has one level tuple, so a single pass suffices.
    """
    q, d = levels.q, levels.d
    if not 0 <= k <= d:
        raise InvalidDims(f"InvalidDims: k={k}")
    support = np.array(levels.support(), dtype=np.int64)
    lev = levels.level_of()
    level_arr = np.zeros(q**d, dtype=np.int64)
    for x, i in lev.items():
        level_arr[x] = i
    coords = all_points(q, d)
    groups: dict[tuple[int, int], int] = {}
    n = 0
    if len(support):
        for chunk in _tuple_chunks([support] * (d + 1), cap):
            il = level_arr[chunk]
            keep = np.all(il[:, 1:] >= il[:, :-1], axis=1)
            chunk, il = chunk[keep], il[keep]
            if not len(chunk):
                continue
            s = prefix_ranks(coords[chunk], q)[:, -1]
            ok = s <= k
            key = il[ok].sum(axis=1) * (d + 1) + s[ok]
            n += int(keep.sum())
            for kk, c in zip(*np.unique(key, return_counts=True)):
                kk = int(kk)
                groups[(kk // (d + 1), kk % (d + 1))] = groups.get((kk // (d + 1), kk % (d + 1)), 0) + int(c)
    value = sum((Fraction(c, 2**isum * q ** (s * (d - k))) for (isum, s), c in groups.items()), Fraction(0))
    return SuffmainResult(value, levels.normalization(k), n)


def random_levels(q: int, d: int, rng: np.random.Generator, max_support: int = 8, max_level: int = 4) -> DyadicLevels:
    m = int(rng.integers(1, min(q**d, max_support) + 1))
    pts = rng.choice(q**d, size=m, replace=False)
    lv: dict[int, set[int]] = {}
    for x in pts:
        lv.setdefault(int(rng.integers(0, max_level + 1)), set()).add(int(x))
    return DyadicLevels(q, d, {i: frozenset(E) for i, E in lv.items()})


# -- expansion identity ------------------------------------------------------

@dataclass(frozen=True)
class ExpansionResult:
    lhs: Fraction  # ||T_k f||_{d+1}^{d+1}
    rhs: Fraction  # tuple expansion with plane counts from span dimension
    rhs_direct: Fraction | None  # same, plane counts from explicit incidences

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs and (self.rhs_direct is None or self.rhs_direct == self.rhs)


def expansion_identity(f: GridFunction, k: int, cap: int = DEFAULT_TUPLE_CAP, direct: bool = True) -> ExpansionResult:
    """Expand ||T_k f||^{d+1} over (d+1)-tuples of points of supp f.

    The number of k-planes through a tuple is [d-s, k-s]_q when its span has
    dimension s <= k and 0 when s > k.  With ``direct`` the count is also
    taken from the incidence table for every distinct point set (supports of
    at most 62 points).
    """
    q, d = f.q, f.d
    lhs = lp_power(kplane_transform(f, k), d + 1)
    support = np.flatnonzero(f.num != 0).astype(np.int64)
    counts = [gaussian_binomial(d - s, k - s, q) if s <= k else 0 for s in range(d + 1)]
    by_s = [0] * (d + 1)
    by_mask: dict[int, int] = {}
    direct = direct and len(support) <= 62
    num = np.array([int(x) for x in f.num], dtype=object)
    coords = all_points(q, d)
    pos = np.full(q**d, -1, dtype=np.int64)
    pos[support] = np.arange(len(support))
    if len(support):
        for chunk in _tuple_chunks([support] * (d + 1), cap):
            s = prefix_ranks(coords[chunk], q)[:, -1]
            w = np.prod(num[chunk], axis=1)
            for sv in np.unique(s):
                by_s[int(sv)] += int(w[s == sv].sum())
            if direct:
                masks = np.bitwise_or.reduce(np.left_shift(np.int64(1), pos[chunk]), axis=1)
                order = np.argsort(masks, kind="stable")
                um, start = np.unique(masks[order], return_index=True)
                sums = np.add.reduceat(w[order], start)
                for mk, sm in zip(um, sums):
                    by_mask[int(mk)] = by_mask.get(int(mk), 0) + int(sm)
    scale = Fraction(1, num_planes(q, d, k) * q ** (k * (d + 1)) * f.den ** (d + 1))
    rhs = scale * sum(c * w for c, w in zip(counts, by_s))
    rhs_direct = None
    if direct:
        inc = point_planes(q, d, k)
        total = 0
        for mk, w in by_mask.items():
            pts = [int(support[b]) for b in range(len(support)) if mk >> b & 1]
            common = inc[pts[0]]
            for x in pts[1:]:
                common = np.intersect1d(common, inc[x], assume_unique=True)
            total += len(common) * w
        rhs_direct = scale * total
    return ExpansionResult(lhs, rhs, rhs_direct)
