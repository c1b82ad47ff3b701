"""The k-plane transform and normalized L^p norms.

Functions are stored as an integer numerator array over one positive common
denominator.  All sums are then integer sums; a float appears only when a root
is taken or when a fractional power of a value is irrational.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import InvalidDims, InvalidExponent, MixedDimensions, WrongArity, ZeroFunction
from .field import Field
from .geometry import num_planes, plane_members

_INT64_SAFE = 2**62


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def _as_int_array(values) -> np.ndarray:
    ints = [int(v) for v in values]
    if all(-_INT64_SAFE < v < _INT64_SAFE for v in ints):
        return np.array(ints, dtype=np.int64)
    out = np.empty(len(ints), dtype=object)
    out[:] = ints
    return out


def _rationals(values) -> tuple[np.ndarray, int]:
    fr = [Fraction(v) for v in values]
    den = reduce(_lcm, (f.denominator for f in fr), 1)
    return _as_int_array(f.numerator * (den // f.denominator) for f in fr), den


def parse_rational(s) -> Fraction:
    if isinstance(s, str):
        return Fraction(s.strip())
    return Fraction(s)


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


class _DenseRational:
    """Exact rational vector ``num / den``."""

    num: np.ndarray
    den: int

    def __len__(self) -> int:
        return len(self.num)

    @property
    def values(self) -> list[Fraction]:
        return [Fraction(int(n), self.den) for n in self.num]

    def __getitem__(self, i: int) -> Fraction:
        return Fraction(int(self.num[i]), self.den)

    def __eq__(self, other) -> bool:
        if type(self) is not type(other) or self._key() != other._key():
            return False
        # num_a / den_a == num_b / den_b, compared by cross multiplication
        return all(int(a) * other.den == int(b) * self.den for a, b in zip(self.num, other.num))

    def _key(self):
        raise NotImplementedError

    def is_zero(self) -> bool:
        return not np.any(self.num != 0)

    def abs_max(self) -> Fraction:
        return Fraction(int(max(abs(int(x)) for x in self.num)), self.den)

    def mean(self) -> Fraction:
        return Fraction(int(sum(int(x) for x in self.num)), self.den * len(self.num))


class GridFunction(_DenseRational):
    """A rational-valued function on F_q^d, indexed by the point codec."""

    def __init__(self, q: int, d: int, values: Sequence | None = None, *, num=None, den: int = 1):
        Field(q)
        if d < 1:
            raise InvalidDims(f"InvalidDims: d={d}")
        self.q, self.d = q, d
        if values is not None:
            self.num, self.den = _rationals(values)
        else:
            self.num, self.den = _as_int_array(num), int(den)
        if len(self.num) != q**d:
            raise MixedDimensions(f"MixedDimensions: expected {q**d} values, got {len(self.num)}")
        if self.den <= 0:
            raise ValueError("denominator must be positive")

    def _key(self):
        return (self.q, self.d)

    def __repr__(self) -> str:
        return f"GridFunction(q={self.q}, d={self.d}, support={int(np.count_nonzero(self.num != 0))})"

    @classmethod
    def constant(cls, q: int, d: int, c=1) -> GridFunction:
        c = Fraction(c)
        return cls(q, d, num=[c.numerator] * q**d, den=c.denominator)

    @classmethod
    def indicator(cls, q: int, d: int, points: Sequence[int]) -> GridFunction:
        num = [0] * q**d
        for i in points:
            num[int(i)] = 1
        return cls(q, d, num=num)

    @classmethod
    def delta(cls, q: int, d: int, point: int = 0) -> GridFunction:
        return cls.indicator(q, d, [point])

    def scale(self, c) -> GridFunction:
        c = Fraction(c)
        return GridFunction(self.q, self.d, num=[int(x) * c.numerator for x in self.num], den=self.den * c.denominator)

    def __add__(self, other: GridFunction) -> GridFunction:
        if self._key() != other._key():
            raise MixedDimensions("MixedDimensions: functions on different spaces")
        den = _lcm(self.den, other.den)
        a, b = den // self.den, den // other.den
        return GridFunction(self.q, self.d, num=[int(x) * a + int(y) * b for x, y in zip(self.num, other.num)], den=den)

    def to_json(self) -> dict:
        return {"q": self.q, "d": self.d, "values": [format_rational(v) for v in self.values]}

    @classmethod
    def from_json(cls, obj: dict) -> GridFunction:
        return cls(int(obj["q"]), int(obj["d"]), [parse_rational(v) for v in obj["values"]])


class PlaneFunction(_DenseRational):
    """A rational-valued function on the k-planes of F_q^d, indexed by plane rank."""

    def __init__(self, q: int, d: int, k: int, values: Sequence | None = None, *, num=None, den: int = 1):
        self.q, self.d, self.k = q, d, k
        if values is not None:
            self.num, self.den = _rationals(values)
        else:
            self.num, self.den = (num if isinstance(num, np.ndarray) else _as_int_array(num)), int(den)
        if len(self.num) != num_planes(q, d, k):
            raise MixedDimensions(f"MixedDimensions: expected {num_planes(q, d, k)} values, got {len(self.num)}")

    def _key(self):
        return (self.q, self.d, self.k)

    def __repr__(self) -> str:
        return f"PlaneFunction(q={self.q}, d={self.d}, k={self.k})"

    def to_json(self) -> dict:
        return {"q": self.q, "d": self.d, "k": self.k, "values": [format_rational(v) for v in self.values]}

    @classmethod
    def from_json(cls, obj: dict) -> PlaneFunction:
        return cls(int(obj["q"]), int(obj["d"]), int(obj["k"]), [parse_rational(v) for v in obj["values"]])


def load_function(path) -> GridFunction | PlaneFunction:
    with open(path) as fh:
        obj = json.load(fh)
    if "k" in obj:
        return PlaneFunction.from_json(obj)
    return GridFunction.from_json(obj)


def kplane_transform(f: GridFunction, k: int) -> PlaneFunction:
    """Average of ``f`` over every k-plane, exactly."""
    if not 0 <= k <= f.d:
        raise InvalidDims(f"InvalidDims: need 0 <= k <= d={f.d}, got k={k}")
    members = plane_members(f.q, f.d, k)
    num = f.num
    if num.dtype != object and int(np.abs(num).max(initial=0)) * f.q**k >= _INT64_SAFE:
        num = num.astype(object)
    sums = num[members].sum(axis=1)
    return PlaneFunction(f.q, f.d, k, num=sums, den=f.den * f.q**k)


# -- norms ------------------------------------------------------------------

def iroot(n: int, b: int) -> int | None:
    """The exact b-th root of a non-negative integer, or None."""
    if n < 2:
        return n
    # Newton iteration from an upper bound decreases monotonically to floor(root)
    r = 1 << -(-n.bit_length() // b)
    while True:
        nr = ((b - 1) * r + n // r ** (b - 1)) // b
        if nr >= r:
            break
        r = nr
    return r if r**b == n else None


def _exponent(p) -> Fraction | float:
    if p == math.inf or (isinstance(p, str) and p.strip().lower() in ("inf", "infinity")):
        return math.inf
    p = parse_rational(p)
    if p < 1:
        raise InvalidExponent(f"InvalidExponent: p={p} < 1")
    return p


def lp_power(fn: _DenseRational, p) -> Fraction | float:
    """``mean(|v|^p)`` under the normalized counting measure.

    Exact when every ``|v|^p`` is rational (always for integer p), float otherwise.
    For ``p = inf`` returns ``max |v|``.
    """
    p = _exponent(p)
    if p == math.inf:
        return fn.abs_max()
    n = len(fn)
    a, b = p.numerator, p.denominator
    vals, counts = np.unique(np.abs(fn.num), return_counts=True)
    vals = [int(v) for v in vals]
    counts = [int(c) for c in counts]
    if b == 1:
        total = sum(c * v**a for v, c in zip(vals, counts))
        return Fraction(total, n * fn.den**a)
    den_root = iroot(fn.den, b)
    roots = [iroot(v, b) for v in vals]
    if den_root is not None and all(r is not None for r in roots):
        total = sum(c * r**a for r, c in zip(roots, counts))
        return Fraction(total, n * den_root**a)
    pf = float(p)
    total = math.fsum(c * math.exp(pf * (math.log(v) - math.log(fn.den))) for v, c in zip(vals, counts) if v)
    return total / n


def _root(x: Fraction | float, p) -> float:
    if x == 0:
        return 0.0
    if isinstance(x, Fraction):
        return math.exp((math.log(x.numerator) - math.log(x.denominator)) / float(p))
    return math.exp(math.log(x) / float(p))


def lp_norm(fn: _DenseRational, p) -> float:
    p = _exponent(p)
    if p == math.inf:
        return float(fn.abs_max())
    return _root(lp_power(fn, p), p)


@dataclass(frozen=True)
class EndpointPowers:
    """(d+1)-th powers of both endpoint norms, exact when rational."""

    transform_power: Fraction
    input_power: Fraction | float
    d: int

    @property
    def ratio(self) -> float:
        if isinstance(self.input_power, Fraction):
            return _root(self.transform_power / self.input_power, self.d + 1)
        if self.transform_power == 0:
            return 0.0
        return math.exp(
            (math.log(self.transform_power.numerator) - math.log(self.transform_power.denominator)
             - math.log(self.input_power)) / (self.d + 1)
        )

    @property
    def exact(self) -> bool:
        return isinstance(self.input_power, Fraction)


def endpoint_exponent(d: int, k: int) -> Fraction:
    return Fraction(d + 1, k + 1)


def endpoint_powers(f: GridFunction, k: int) -> EndpointPowers:
    if f.is_zero():
        raise ZeroFunction("ZeroFunction: endpoint ratio undefined for f = 0")
    d = f.d
    tp = lp_power(kplane_transform(f, k), d + 1)
    ip = lp_power(f, endpoint_exponent(d, k))
    ip = ip ** (k + 1)
    return EndpointPowers(tp, ip, d)


def endpoint_ratio(f: GridFunction, k: int) -> float:
    """``||T_k f||_{d+1} / ||f||_{(d+1)/(k+1)}``."""
    return endpoint_powers(f, k).ratio


@dataclass(frozen=True)
class MultilinearResult:
    product: Fraction  # lambda_k-average of prod_j |T_k f_j|
    majorant: float  # prod_j ||T_k f_j||_{d+1}
    product_power: Fraction  # product ** (d+1)
    majorant_power: Fraction  # prod_j ||T_k f_j||_{d+1}^{d+1}

    @property
    def holds(self) -> bool:
        return self.product_power <= self.majorant_power


def multilinear_norm(fs: Sequence[GridFunction], k: int) -> MultilinearResult:
    if not fs:
        raise WrongArity("WrongArity: no functions given")
    d, q = fs[0].d, fs[0].q
    if len(fs) != d + 1:
        raise WrongArity(f"WrongArity: need d+1={d + 1} functions, got {len(fs)}")
    if any((g.q, g.d) != (q, d) for g in fs):
        raise MixedDimensions("MixedDimensions: functions on different spaces")
    tfs = [kplane_transform(g, k) for g in fs]
    prod = np.ones(len(tfs[0]), dtype=object)
    den = 1
    for t in tfs:
        prod = prod * np.abs(t.num).astype(object)
        den *= t.den
    product = Fraction(int(prod.sum()), den * len(prod))
    powers = [lp_power(t, d + 1) for t in tfs]
    majorant_power = math.prod(powers, start=Fraction(1))
    majorant = math.prod(_root(x, d + 1) for x in powers)
    return MultilinearResult(product, majorant, product ** (d + 1), majorant_power)
