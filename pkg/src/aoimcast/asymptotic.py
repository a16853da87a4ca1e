"""Large-n approximations with thresholds written as ratios ``alpha = k / n``.

For shifted-exponential delays the exact ages depend on n only through
harmonic differences ``H_n - H_{n-k} -> -log(1 - alpha)``, so in the limit
they are functions of the ratios alone.  The private ``_*`` kernels broadcast
over numpy arrays; the public wrappers validate and return floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "HopParams",
    "AlphaVector",
    "age_single_hop_limit",
    "age_building_block_approx",
    "age_two_hop_approx",
    "age_L_hop_approx",
    "two_hop_forms",
]


@dataclass(frozen=True)
class HopParams:
    """Link-delay parameters of one hop: rate and shift of ``c + Exp(rate)``."""

    rate: float
    shift: float = 0.0

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"rate must be positive and finite, got {self.rate!r}")
        if not (self.shift >= 0 and math.isfinite(self.shift)):
            raise ValueError(f"shift must be nonnegative and finite, got {self.shift!r}")


@dataclass(frozen=True)
class AlphaVector:
    alphas: tuple[float, ...]

    def __post_init__(self):
        a = tuple(float(x) for x in self.alphas)
        if not a:
            raise ValueError("alpha vector is empty")
        for i, x in enumerate(a):
            if not 0.0 < x < 1.0:
                raise ValueError(f"alpha[{i}] = {x!r} is outside (0, 1)")
        object.__setattr__(self, "alphas", a)

    def __len__(self):
        return len(self.alphas)

    def __iter__(self):
        return iter(self.alphas)

    def __getitem__(self, i):
        return self.alphas[i]


def _as_alphas(a) -> tuple[float, ...]:
    if isinstance(a, AlphaVector):
        return a.alphas
    return AlphaVector(tuple(a)).alphas


def _check_alpha(alpha: float) -> float:
    return AlphaVector((alpha,)).alphas[0]


# --- broadcasting kernels ---------------------------------------------------

def _single_hop_limit(rate, shift, a):
    return shift / a + shift / 2 + 1 / rate - np.log1p(-a) / (2 * rate)


def _building_block_approx(rate, shift, mu, a):
    lg = np.log1p(-a)
    return (
        shift / a + shift / 2 + 1 / rate - lg / (2 * rate)
        + 1 / (a * mu) - 1 / (2 * mu)
        + 0.5 / (mu * mu * shift - mu * mu * lg / rate + mu)
    )


def _two_hop_approx(r1, c1, r2, c2, a1, a2):
    lg1 = np.log1p(-a1)
    lg2 = np.log1p(-a2)
    k1 = r1 * c1 - lg1
    k2 = r2 * c2 - lg2
    return (
        1 / r1 + 1 / r2 + c2 / a2 + c2 / 2 - lg2 / (2 * r2)
        + (2 - a2 + 2 * a1 * a2) / (2 * a1 * a2) * c1
        + r2 * k1 * k1 / (2 * a1 * r1 * (r1 * a1 * k2 + r2 * k1))
        + (3 * a2 - 2 * a1 * a2 - 2) / (2 * a1 * a2 * r1) * lg1
    )


def _l_hop_approx(rates, shifts, alphas):
    """``alphas`` is a sequence of L arrays (or floats) that broadcast together."""
    L = len(alphas)
    service = 0.0
    weights = []
    for r, c, a in zip(rates, shifts, alphas):
        lg = np.log1p(-a)
        service = service + c + 1 / r + (1 - a) / (a * r) * lg
        weights.append(c - lg / r)
    # weight of hop l carries prod_{i=l}^{L-1} 1/alpha_i; the last hop's product is empty
    upstream = 0.0
    for ell in range(L - 1):
        upstream = (upstream + weights[ell]) / alphas[ell]
    total_w = upstream + weights[-1]
    a_last = alphas[-1]
    return service + (2 - a_last) / (2 * a_last) * total_w + upstream * upstream / (2 * total_w)


# --- public API ---------------------------------------------------------------

def age_single_hop_limit(p: HopParams, alpha: float) -> float:
    """Large-n age of a single hop whose source generates updates at will."""
    return float(_single_hop_limit(p.rate, p.shift, _check_alpha(alpha)))


def age_building_block_approx(p: HopParams, mu: float, alpha: float) -> float:
    """Large-n age of the building block under Poisson(``mu``) arrivals."""
    if not (mu > 0 and math.isfinite(mu)):
        raise ValueError(f"mu must be positive and finite, got {mu!r}")
    return float(_building_block_approx(p.rate, p.shift, mu, _check_alpha(alpha)))


def age_two_hop_approx(p1: HopParams, p2: HopParams, a: AlphaVector | Sequence[float]) -> float:
    """Large-n two-hop upper bound in the closed form written for two hops."""
    a1, a2 = _check_len(_as_alphas(a), 2)
    return float(_two_hop_approx(p1.rate, p1.shift, p2.rate, p2.shift, a1, a2))


def age_L_hop_approx(ps: Sequence[HopParams], a: AlphaVector | Sequence[float]) -> float:
    """Large-n L-hop upper bound; does not depend on n."""
    alphas = _check_len(_as_alphas(a), len(ps))
    if not ps:
        raise ValueError("need at least one hop")
    return float(_l_hop_approx([p.rate for p in ps], [p.shift for p in ps], alphas))


def two_hop_forms(p1: HopParams, p2: HopParams, a, rtol: float = 1e-9) -> tuple[float, float, bool]:
    """Evaluate the dedicated two-hop form and the general form at L=2.

    Returns ``(two_hop, general, agree)``; the two are algebraically equal, so
    ``agree`` being False means a transcription error in one of them.
    """
    v2 = age_two_hop_approx(p1, p2, a)
    vl = age_L_hop_approx([p1, p2], a)
    return v2, vl, math.isclose(v2, vl, rel_tol=rtol, abs_tol=0.0)


def _check_len(alphas, L):
    if len(alphas) != L:
        raise ValueError(f"expected {L} alpha values, got {len(alphas)}")
    return alphas
