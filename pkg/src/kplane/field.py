"""Arithmetic in the prime field F_q."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NonPrimeModulus, ZeroInverse


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class Field:
    """The prime field with ``q`` elements; elements are the residues 0..q-1."""

    q: int

    def __post_init__(self):
        if not isinstance(self.q, (int, np.integer)) or not is_prime(int(self.q)):
            raise NonPrimeModulus(f"NonPrimeModulus: q={self.q} is not prime")
        if self.q >= 2**31:
            raise NonPrimeModulus(f"NonPrimeModulus: q={self.q} exceeds 2^31")
        object.__setattr__(self, "q", int(self.q))

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def neg(self, a: int) -> int:
        return (-a) % self.q

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.q

    def inverse(self, a: int) -> int:
        a %= self.q
        if a == 0:
            raise ZeroInverse("ZeroInverse: 0 has no multiplicative inverse")
        return pow(a, -1, self.q)

    @cached_property
    def inverse_table(self) -> np.ndarray:
        """Lookup table ``inv[a]`` for vectorized code; ``inv[0]`` is 0."""
        table = np.zeros(self.q, dtype=np.int64)
        for a in range(1, self.q):
            table[a] = pow(a, -1, self.q)
        return table

    def elements(self) -> range:
        return range(self.q)


def field_new(q: int) -> Field:
    return Field(q)


def field_inverse(a: int, F: Field) -> int:
    return F.inverse(a)
