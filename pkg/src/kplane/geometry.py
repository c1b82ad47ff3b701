"""Points of F_q^d, affine subspaces in canonical form, and plane enumeration.

An affine s-plane is stored as an RREF basis (s rows, pivot columns strictly
increasing) together with a base point whose entries at the pivot columns are
zero.  That representative is unique, which gives every k-plane a dense rank
under the canonical order:

    pivot set (lexicographic) > free basis entries > free base coordinates

where the last two are read as little-endian mixed-radix integers.  Free basis
entries are the positions ``(i, j)`` with ``j > pivots[i]`` and ``j`` not a
pivot, taken row-major.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import EmptyInput, IndexOutOfRange, InvalidDims, MixedDimensions
from .field import Field

Point = tuple  # tuple[int, ...] of length d


# -- points -----------------------------------------------------------------

def point_decode(index: int, F: Field, d: int) -> Point:
    q = F.q
    if not 0 <= index < q**d:
        raise IndexOutOfRange(f"IndexOutOfRange: {index} not in [0, {q}^{d})")
    coords = []
    for _ in range(d):
        index, c = divmod(index, q)
        coords.append(c)
    return tuple(coords)


def point_encode(coords: Sequence[int], F: Field) -> int:
    q = F.q
    index = 0
    for c in reversed(coords):
        if not 0 <= c < q:
            raise IndexOutOfRange(f"IndexOutOfRange: coordinate {c} not in [0, {q})")
        index = index * q + c
    return index


def point_codec(index: int, F: Field, d: int) -> Point:
    return point_decode(index, F, d)


def all_points(q: int, d: int) -> np.ndarray:
    """Coordinates of every point, shape ``(q**d, d)``, in codec order."""
    idx = np.arange(q**d, dtype=np.int64)
    return np.stack([(idx // q**j) % q for j in range(d)], axis=1)


def _weights(q: int, d: int) -> np.ndarray:
    return q ** np.arange(d, dtype=np.int64)


# -- counting ---------------------------------------------------------------

def gaussian_binomial(d: int, k: int, q: int) -> int:
    """Number of k-dimensional linear subspaces of F_q^d."""
    if d < 0 or k < 0 or k > d:
        raise InvalidDims(f"InvalidDims: need 0 <= k <= d, got d={d}, k={k}")
    num, den = 1, 1
    for i in range(k):
        num *= q ** (d - i) - 1
        den *= q ** (k - i) - 1
    return num // den


def num_planes(q: int, d: int, k: int) -> int:
    return q ** (d - k) * gaussian_binomial(d, k, q)


def planes_through_count(d: int, k: int, s: int, q: int) -> int:
    """Number of k-planes containing a fixed s-plane."""
    if not 0 <= s <= k <= d:
        raise InvalidDims(f"InvalidDims: need 0 <= s <= k <= d, got s={s}, k={k}, d={d}")
    return gaussian_binomial(d - s, k - s, q)


# -- row reduction ----------------------------------------------------------

def rref(rows: Iterable[Sequence[int]], q: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form over F_q; zero rows are dropped."""
    m = [[x % q for x in r] for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c]), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = pow(m[r][c], -1, q)
        m[r] = [(x * inv) % q for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(a - f * b) % q for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank_mod_q(rows: Sequence[Sequence[int]], q: int) -> int:
    return len(rref(rows, q)[1])


def _reduce(vec: Sequence[int], basis: Sequence[Sequence[int]], pivots: Sequence[int], q: int) -> list[int]:
    v = [x % q for x in vec]
    for row, p in zip(basis, pivots):
        f = v[p]
        if f:
            v = [(a - f * b) % q for a, b in zip(v, row)]
    return v


# -- affine subspaces -------------------------------------------------------

@dataclass(frozen=True)
class AffineSubspace:
    q: int
    pivots: tuple[int, ...]
    basis: tuple[tuple[int, ...], ...]
    base: tuple[int, ...]

    @property
    def d(self) -> int:
        return len(self.base)

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def size(self) -> int:
        return self.q**self.dim

    def point_indices(self) -> np.ndarray:
        """Codec indices of the member points, coefficient vectors in little-endian order."""
        q, s, d = self.q, self.dim, self.d
        coeffs = all_points(q, s) if s else np.zeros((1, 0), dtype=np.int64)
        B = np.array(self.basis, dtype=np.int64).reshape(s, d)
        pts = (np.array(self.base, dtype=np.int64) + coeffs @ B) % q
        return pts @ _weights(q, d)

    def points(self) -> Iterator[Point]:
        F = Field(self.q)
        for idx in self.point_indices():
            yield point_decode(int(idx), F, self.d)

    def to_json(self, rank: int | None = None) -> dict:
        out = {"pivots": list(self.pivots), "basis": [list(r) for r in self.basis], "base": list(self.base)}
        if rank is not None:
            out = {"rank": rank, **out}
        return out


def canonical_plane(base: Sequence[int], directions: Iterable[Sequence[int]], q: int) -> AffineSubspace:
    """Canonical form of ``base + span(directions)``."""
    base = tuple(x % q for x in base)
    basis, pivots = rref(directions, q)
    base = tuple(_reduce(base, basis, pivots, q))
    return AffineSubspace(q, tuple(pivots), tuple(tuple(r) for r in basis), base)


def affine_span(points: Sequence[Sequence[int]], F: Field) -> AffineSubspace:
    """Smallest affine subspace containing all ``points``."""
    points = list(points)
    if not points:
        raise EmptyInput("EmptyInput: affine_span needs at least one point")
    d = len(points[0])
    if any(len(p) != d for p in points):
        raise MixedDimensions("MixedDimensions: points of different lengths")
    x0 = points[0]
    diffs = [[a - b for a, b in zip(p, x0)] for p in points[1:]]
    return canonical_plane(x0, diffs, F.q)


def contains(plane: AffineSubspace, x: Sequence[int]) -> bool:
    if len(x) != plane.d:
        raise MixedDimensions(f"MixedDimensions: point has length {len(x)}, plane lives in dimension {plane.d}")
    diff = [a - b for a, b in zip(x, plane.base)]
    return not any(_reduce(diff, plane.basis, plane.pivots, plane.q))


# -- canonical enumeration --------------------------------------------------

def _check_dims(d: int, k: int) -> None:
    if d < 1 or not 0 <= k <= d:
        raise InvalidDims(f"InvalidDims: need d >= 1 and 0 <= k <= d, got d={d}, k={k}")


def _free_basis_positions(pivots: Sequence[int], d: int) -> list[tuple[int, int]]:
    ps = set(pivots)
    return [(i, j) for i, p in enumerate(pivots) for j in range(p + 1, d) if j not in ps]


def _free_columns(pivots: Sequence[int], d: int) -> list[int]:
    ps = set(pivots)
    return [j for j in range(d) if j not in ps]


def _pivot_blocks(q: int, d: int, k: int) -> list[tuple[tuple[int, ...], int, int]]:
    """(pivot set, number of basis choices, rank offset) in canonical order."""
    out = []
    offset = 0
    for piv in itertools.combinations(range(d), k):
        nb = q ** len(_free_basis_positions(piv, d))
        out.append((piv, nb, offset))
        offset += nb * q ** (d - k)
    return out


def _digits(n: int, q: int, length: int) -> list[int]:
    out = []
    for _ in range(length):
        n, r = divmod(n, q)
        out.append(r)
    return out


def _undigits(digits: Sequence[int], q: int) -> int:
    n = 0
    for x in reversed(digits):
        n = n * q + x
    return n


def iter_planes(F: Field, d: int, k: int) -> Iterator[AffineSubspace]:
    _check_dims(d, k)
    q = F.q
    for piv in itertools.combinations(range(d), k):
        fpos = _free_basis_positions(piv, d)
        fcols = _free_columns(piv, d)
        for bidx in range(q ** len(fpos)):
            rows = [[0] * d for _ in range(k)]
            for i, p in enumerate(piv):
                rows[i][p] = 1
            for (i, j), v in zip(fpos, _digits(bidx, q, len(fpos))):
                rows[i][j] = v
            basis = tuple(tuple(r) for r in rows)
            for tidx in range(q ** (d - k)):
                base = [0] * d
                for j, v in zip(fcols, _digits(tidx, q, d - k)):
                    base[j] = v
                yield AffineSubspace(q, piv, basis, tuple(base))


def enumerate_planes(F: Field, d: int, k: int) -> list[AffineSubspace]:
    """All affine k-planes of F_q^d in canonical order; list position is the rank."""
    return list(iter_planes(F, d, k))


def plane_rank(plane: AffineSubspace) -> int:
    q, d, k = plane.q, plane.d, plane.dim
    for piv, _nb, offset in _pivot_blocks(q, d, k):
        if piv == plane.pivots:
            bidx = _undigits([plane.basis[i][j] for i, j in _free_basis_positions(piv, d)], q)
            tidx = _undigits([plane.base[j] for j in _free_columns(piv, d)], q)
            return offset + bidx * q ** (d - k) + tidx
    raise InvalidDims(f"InvalidDims: pivots {plane.pivots} invalid for d={d}")


def plane_from_rank(rank: int, F: Field, d: int, k: int) -> AffineSubspace:
    _check_dims(d, k)
    q = F.q
    if not 0 <= rank < num_planes(q, d, k):
        raise IndexOutOfRange(f"IndexOutOfRange: plane rank {rank}")
    for piv, nb, offset in _pivot_blocks(q, d, k):
        if rank < offset + nb * q ** (d - k):
            bidx, tidx = divmod(rank - offset, q ** (d - k))
            rows = [[0] * d for _ in range(k)]
            for i, p in enumerate(piv):
                rows[i][p] = 1
            fpos = _free_basis_positions(piv, d)
            for (i, j), v in zip(fpos, _digits(bidx, q, len(fpos))):
                rows[i][j] = v
            base = [0] * d
            for j, v in zip(_free_columns(piv, d), _digits(tidx, q, d - k)):
                base[j] = v
            return AffineSubspace(q, piv, tuple(tuple(r) for r in rows), tuple(base))
    raise AssertionError("unreachable")


@lru_cache(maxsize=32)
def plane_members(q: int, d: int, k: int) -> np.ndarray:
    """Point indices of every k-plane: row r lists the q^k points of the plane of rank r.

    Read-only; shared through the cache.
    """
    _check_dims(d, k)
    Field(q)
    w = _weights(q, d)
    coeffs = all_points(q, k) if k else np.zeros((1, 0), dtype=np.int64)  # (q^k, k)
    chunks = []
    for piv, nb, _offset in _pivot_blocks(q, d, k):
        fpos = _free_basis_positions(piv, d)
        fcols = _free_columns(piv, d)
        # translations: (q^{d-k}, d)
        T = np.zeros((q ** (d - k), d), dtype=np.int64)
        if fcols:
            T[:, fcols] = all_points(q, d - k)
        # bases: (nb, k, d)
        B = np.zeros((nb, k, d), dtype=np.int64)
        for i, p in enumerate(piv):
            B[:, i, p] = 1
        if fpos:
            digits = all_points(q, len(fpos))
            for col, (i, j) in enumerate(fpos):
                B[:, i, j] = digits[:, col]
        # (nb, q^k, d): linear part, then add translations
        step = max(1, (1 << 22) // max(1, T.shape[0] * coeffs.shape[0] * d))
        for lo in range(0, nb, step):
            lin = np.einsum("ck,bkd->bcd", coeffs, B[lo:lo + step])
            pts = (lin[:, None, :, :] + T[None, :, None, :]) % q  # (b, t, c, d)
            chunks.append((pts @ w).reshape(-1, coeffs.shape[0]))
    members = np.concatenate(chunks, axis=0)
    dtype = np.int32 if q**d < 2**31 else np.int64
    members = members.astype(dtype)
    members.setflags(write=False)
    return members


@lru_cache(maxsize=32)
def point_planes(q: int, d: int, k: int) -> np.ndarray:
    """Ranks of the planes through each point, shape ``(q**d, [d,k]_q)``. Read-only."""
    members = plane_members(q, d, k)
    per = members.shape[1]
    order = np.argsort(members.ravel(), kind="stable")
    out = (order // per).reshape(q**d, -1).astype(np.int64)
    out.setflags(write=False)
    return out


def _linear_subspaces(q: int, n: int, m: int) -> Iterator[list[list[int]]]:
    """RREF bases of all m-dim linear subspaces of F_q^n in canonical order."""
    for piv in itertools.combinations(range(n), m):
        fpos = _free_basis_positions(piv, n)
        for bidx in range(q ** len(fpos)):
            rows = [[0] * n for _ in range(m)]
            for i, p in enumerate(piv):
                rows[i][p] = 1
            for (i, j), v in zip(fpos, _digits(bidx, q, len(fpos))):
                rows[i][j] = v
            yield rows


def planes_through(plane: AffineSubspace, k: int) -> Iterator[AffineSubspace]:
    """Every k-plane containing ``plane``, each exactly once.

    Works in the quotient by the plane's direction space, identified with the
    non-pivot coordinates.
    """
    s, d, q = plane.dim, plane.d, plane.q
    if not s <= k <= d:
        raise InvalidDims(f"InvalidDims: need {s} <= k <= {d}, got k={k}")
    free = _free_columns(plane.pivots, d)
    for rows in _linear_subspaces(q, d - s, k - s):
        lifted = []
        for r in rows:
            v = [0] * d
            for j, x in zip(free, r):
                v[j] = x
            lifted.append(v)
        yield canonical_plane(plane.base, list(plane.basis) + lifted, q)


def export_planes(F: Field, d: int, k: int, fh) -> int:
    """Write every k-plane as one JSON object per line; returns the count."""
    n = 0
    for rank, plane in enumerate(iter_planes(F, d, k)):
        fh.write(json.dumps(plane.to_json(rank)) + "\n")
        n += 1
    return n
