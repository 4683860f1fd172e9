"""Overflow-safe evaluation of sums of p-th powers.

Large exponents (p up to a few hundred) make direct evaluation of
``sum_k a_k**p`` overflow or underflow double precision long before the
quantities of interest (p-th roots, ratios, logs) do.  Every p-th-power
sum in this package is therefore carried as a pair ``(base, scaled)``
with ``base = max_k a_k`` and ``scaled = sum_k (a_k/base)**p``, combined
lazily and converted to roots or logs at the end.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np


@dataclass(frozen=True)
class PowerSum:
    """Value of ``sum_k a_k**p`` for nonnegative roots ``a_k``, in scaled form."""

    p: float
    base: float
    scaled: float

    @classmethod
    def zero(cls, p: float) -> "PowerSum":
        return cls(p, 0.0, 0.0)

    @classmethod
    def from_roots(cls, roots: np.ndarray, p: float) -> "PowerSum":
        """Build from the array of p-th roots of the terms (all >= 0)."""
        a = np.asarray(roots, dtype=float)
        if a.size == 0:
            return cls.zero(p)
        base = float(a.max())
        if base == 0.0:
            return cls(p, 0.0, 0.0)
        scaled = float(np.sum((a / base) ** p))
        return cls(p, base, scaled)

    @property
    def value(self) -> float:
        """Plain float value; may overflow to inf for extreme inputs."""
        if self.base == 0.0:
            return 0.0
        return self.base**self.p * self.scaled

    @property
    def log(self) -> float:
        """log of the sum; -inf when the sum is zero."""
        if self.base == 0.0 or self.scaled == 0.0:
            return -math.inf
        return self.p * math.log(self.base) + math.log(self.scaled)

    def root(self) -> float:
        """``(sum_k a_k**p)**(1/p)``, computed without forming the powers."""
        if self.base == 0.0 or self.scaled == 0.0:
            return 0.0
        return self.base * self.scaled ** (1.0 / self.p)

    def __add__(self, other: "PowerSum") -> "PowerSum":
        if self.p != other.p:
            raise ValueError("cannot combine power sums with different exponents")
        if self.base == 0.0:
            return other
        if other.base == 0.0:
            return self
        if self.base >= other.base:
            big, small = self, other
        else:
            big, small = other, self
        ratio = small.base / big.base
        scaled = big.scaled + small.scaled * ratio**self.p
        return PowerSum(self.p, big.base, scaled)


def log_ratio(num: PowerSum, den: PowerSum) -> float:
    """log(num/den); raises on a zero denominator."""
    if den.base == 0.0 or den.scaled == 0.0:
        raise ZeroDivisionError("power-sum denominator is zero")
    return num.log - den.log
