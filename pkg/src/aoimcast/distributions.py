"""Shifted-exponential link delays and their order statistics.

Every age formula in the package reduces to the first two moments of
``X_{k:n}``, the k-th smallest of n i.i.d. shifted exponentials, which in turn
reduce to harmonic sums ``H_n`` and ``G_n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._accel import jit

__all__ = [
    "ShiftedExp",
    "OrderStatMoments",
    "harmonic",
    "gen_harmonic2",
    "harmonic_table",
    "gen_harmonic2_table",
    "order_stat_moments",
    "order_stat_mean_table",
    "order_stat_var_table",
    "mean_earliest_k_service",
    "earliest_k_service_table",
    "sample_order_stat_prefix",
]


@dataclass(frozen=True)
class ShiftedExp:
    """``c + Exp(rate)``; ``shift=0`` is the plain exponential."""

    rate: float
    shift: float = 0.0

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"rate must be positive and finite, got {self.rate!r}")
        if not (self.shift >= 0 and math.isfinite(self.shift)):
            raise ValueError(f"shift must be nonnegative and finite, got {self.shift!r}")

    @property
    def mean(self) -> float:
        return self.shift + 1.0 / self.rate

    @property
    def variance(self) -> float:
        return 1.0 / self.rate**2


@dataclass(frozen=True)
class OrderStatMoments:
    mean: float
    variance: float
    second_moment: float


# ---------------------------------------------------------------------------
# harmonic sums

@jit
def _compensated_cumsum(terms):
    # Neumaier summation, one running total per prefix.
    out = np.empty(terms.shape[0] + 1)
    out[0] = 0.0
    s = 0.0
    comp = 0.0
    for i in range(terms.shape[0]):
        x = terms[i]
        t = s + x
        if abs(s) >= abs(x):
            comp += (s - t) + x
        else:
            comp += (x - t) + s
        s = t
        out[i + 1] = s + comp
    return out


class _PrefixTable:
    """Grow-only cache of ``sum_{j<=m} 1/j**power`` for m = 0..n."""

    def __init__(self, power: int):
        self.power = power
        self.values = np.zeros(1)

    def get(self, n: int) -> np.ndarray:
        if n >= self.values.shape[0]:
            size = max(n + 1, 2 * self.values.shape[0], 1024)
            j = np.arange(1, size, dtype=np.float64)
            vals = _compensated_cumsum(1.0 / j**self.power)
            # positive terms: enforce monotonicity against last-bit wobble
            self.values = np.maximum.accumulate(vals)
            self.values.setflags(write=False)
        return self.values[: n + 1]


_H = _PrefixTable(1)
_G = _PrefixTable(2)


def _check_count(n, name="n", minimum=0):
    if isinstance(n, bool) or int(n) != n or n < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {n!r}")
    return int(n)


def harmonic_table(n: int) -> np.ndarray:
    """Read-only array ``[H_0, H_1, ..., H_n]`` with ``H_0 = 0``."""
    return _H.get(_check_count(n))


def gen_harmonic2_table(n: int) -> np.ndarray:
    """Read-only array ``[G_0, ..., G_n]`` of partial sums of ``1/j**2``."""
    return _G.get(_check_count(n))


def harmonic(n: int) -> float:
    """``H_n = sum_{j=1}^n 1/j`` for ``n >= 1``."""
    n = _check_count(n, minimum=1)
    return float(_H.get(n)[n])


def gen_harmonic2(n: int) -> float:
    """``G_n = sum_{j=1}^n 1/j**2``; ``G_0 = 0``."""
    n = _check_count(n)
    return float(_G.get(n)[n])


# ---------------------------------------------------------------------------
# order statistics

def _check_kn(k, n):
    n = _check_count(n, "n", 1)
    k = _check_count(k, "k", 1)
    if k > n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return k, n


def order_stat_moments(d: ShiftedExp, k: int, n: int) -> OrderStatMoments:
    """Mean, variance and second moment of ``X_{k:n}`` for ``X ~ d``."""
    k, n = _check_kn(k, n)
    h = harmonic_table(n)
    g = gen_harmonic2_table(n)
    dh = h[n] - h[n - k]
    dg = g[n] - g[n - k]
    c, lam = d.shift, d.rate
    mean = c + dh / lam
    var = dg / lam**2
    second = c * c + 2.0 * c * dh / lam + (dh * dh + dg) / lam**2
    return OrderStatMoments(float(mean), float(var), float(second))


def order_stat_mean_table(d: ShiftedExp, n: int) -> np.ndarray:
    """``E[X_{k:n}]`` for k = 1..n (index 0 holds k=1)."""
    n = _check_count(n, "n", 1)
    h = harmonic_table(n)
    return d.shift + (h[n] - h[n - 1::-1]) / d.rate


def order_stat_var_table(d: ShiftedExp, n: int) -> np.ndarray:
    """``Var[X_{k:n}]`` for k = 1..n."""
    n = _check_count(n, "n", 1)
    g = gen_harmonic2_table(n)
    return (g[n] - g[n - 1::-1]) / d.rate**2


def mean_earliest_k_service(d: ShiftedExp, k: int, n: int) -> float:
    """Mean delay seen by a node that is among the earliest k of n receivers.

    A tagged receiver in the earliest-k set is equally likely to hold any of
    the ranks 1..k, so this is the average of ``E[X_{i:n}]`` over i <= k.
    """
    k, n = _check_kn(k, n)
    return float(np.mean(order_stat_mean_table(d, n)[:k]))


def earliest_k_service_table(d: ShiftedExp, n: int) -> np.ndarray:
    """:func:`mean_earliest_k_service` for every k = 1..n at once."""
    means = order_stat_mean_table(d, n)
    return np.cumsum(means) / np.arange(1, n + 1)


def sample_order_stat_prefix(d: ShiftedExp, k: int, n: int, rng: np.random.Generator,
                             method: str = "spacings") -> np.ndarray:
    """The k smallest of n i.i.d. draws from ``d``, increasing.

    ``method="spacings"`` builds them in O(k) from independent exponential
    spacings, the i-th having rate ``rate * (n - i + 1)``.  ``method="sort"``
    draws all n values and sorts them; it exists as a cross-check.
    """
    k, n = _check_kn(k, n)
    if method == "spacings":
        gaps = rng.standard_exponential(k) / (d.rate * np.arange(n, n - k, -1))
        return d.shift + np.cumsum(gaps)
    if method == "sort":
        draws = d.shift + rng.standard_exponential(n) / d.rate
        return np.sort(draws)[:k]
    raise ValueError(f"unknown method {method!r}")
