"""Age-minimising stopping thresholds.

Two searches:

* :func:`optimize_alpha` minimises the large-n approximations over the open
  unit cube with a per-coordinate 0.01 grid scan, golden-section refinement of
  the best grid cell, cyclic sweeps until the point stops moving, and a few
  seeded random restarts.  Unimodality along each coordinate is assumed (it
  holds on every case we have probed); the restarts guard against a bad
  basin.
* :func:`optimize_k_exact` minimises the finite-n expressions over integer
  thresholds by exhaustive scan (one hop) or cyclic coordinate descent with a
  full ``1..n`` scan per coordinate.  :func:`scan_k_exhaustive` is the brute
  force it is checked against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import analytic, asymptotic
from .analytic import HopConfig, NetworkConfig
from .asymptotic import AlphaVector, HopParams
from .distributions import (
    ShiftedExp,
    earliest_k_service_table,
    order_stat_mean_table,
    order_stat_var_table,
)

__all__ = [
    "OptResult",
    "ALPHA_FLOOR",
    "ALPHA_CAP",
    "optimize_alpha",
    "optimize_k_exact",
    "scan_k_exhaustive",
    "golden_section",
]

ALPHA_FLOOR = 1e-6
ALPHA_CAP = 1.0 - 1e-6
GRID_STEP = 0.01
ALPHA_TOL = 1e-4
DEFAULT_SEED = 20181028


@dataclass(frozen=True)
class OptResult:
    argmin: tuple
    value: float
    trace: tuple
    status: str  # "converged" | "boundary" | "max_iters"

    @property
    def alpha(self) -> AlphaVector:
        return AlphaVector(self.argmin)


# ---------------------------------------------------------------------------
# continuous search

def golden_section(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-8):
    """Minimise a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _alpha_objective(objective: str, params: Sequence[HopParams], mu):
    """Broadcasting objective taking a list of per-coordinate arrays."""
    rates = [p.rate for p in params]
    shifts = [p.shift for p in params]
    if objective == "single_hop_limit":
        _require(len(params) == 1, "single_hop_limit takes exactly one hop")
        return lambda a: asymptotic._single_hop_limit(rates[0], shifts[0], a[0])
    if objective == "building_block":
        _require(len(params) == 1, "building_block takes exactly one hop")
        _require(mu is not None and mu > 0, "building_block needs mu > 0")
        return lambda a: asymptotic._building_block_approx(rates[0], shifts[0], mu, a[0])
    if objective == "L_hop":
        return lambda a: asymptotic._l_hop_approx(rates, shifts, a)
    raise ValueError(f"unknown objective {objective!r}")


def _require(cond, msg):
    if not cond:
        raise ValueError(msg)


def optimize_alpha(objective: str, params: Sequence[HopParams] | HopParams, *, mu: float | None = None,
                   starts: int = 5, seed: int = DEFAULT_SEED, max_sweeps: int = 2000) -> OptResult:
    """Minimise a large-n age over the threshold ratios.

    ``objective`` is ``"single_hop_limit"``, ``"building_block"`` (needs
    ``mu``) or ``"L_hop"``; ``params`` holds one :class:`HopParams` per hop.
    The search is deterministic for a given ``seed``.
    """
    if isinstance(params, HopParams):
        params = [params]
    params = list(params)
    _require(len(params) >= 1, "need at least one hop")
    f = _alpha_objective(objective, params, mu)
    L = len(params)
    grid = np.arange(1, 100) * GRID_STEP

    def value(x):
        return float(f([np.float64(v) for v in x]))

    trace: list[tuple[tuple[float, ...], float]] = []
    rng = np.random.default_rng(seed)
    seeds = [np.full(L, 0.5)] + [rng.uniform(0.05, 0.99, size=L) for _ in range(starts)]

    best_x, best_v, best_status = None, math.inf, "max_iters"
    for x0 in seeds:
        x = x0.astype(float)
        v = value(x)
        trace.append((tuple(x), v))
        status = "max_iters"
        for _ in range(max_sweeps):
            moved = 0.0
            for d in range(L):
                coords = [np.float64(c) for c in x]
                coords[d] = grid
                vals = f(coords)
                j = int(np.argmin(vals))
                lo = max(grid[j] - GRID_STEP, ALPHA_FLOOR)
                hi = min(grid[j] + GRID_STEP, ALPHA_CAP)

                def along(t, d=d):
                    y = x.copy()
                    y[d] = t
                    return value(y)

                t, vt = golden_section(along, lo, hi, tol=ALPHA_TOL * 1e-3)
                if vt < v:
                    moved = max(moved, abs(t - x[d]))
                    x[d] = t
                    v = vt
            trace.append((tuple(x), v))
            if moved < ALPHA_TOL * 1e-2:
                status = "converged"
                break
        if np.any(x >= ALPHA_CAP - ALPHA_TOL) or np.any(x <= ALPHA_FLOOR + ALPHA_TOL):
            status = "boundary"
        # merge: lowest value, then lexicographically smallest point
        if v < best_v or (v == best_v and tuple(x) < tuple(best_x)):
            best_x, best_v, best_status = x.copy(), v, status
    return OptResult(tuple(float(a) for a in best_x), best_v, tuple(trace), best_status)


# ---------------------------------------------------------------------------
# integer search

_K_OBJECTIVES = ("building_block_poisson", "two_hop_upper", "L_hop_upper")


def _template(net_template) -> list[tuple[int, ShiftedExp]]:
    if isinstance(net_template, NetworkConfig):
        return [(h.n, h.delay) for h in net_template.hops]
    out = []
    for item in net_template:
        if isinstance(item, HopConfig):
            out.append((item.n, item.delay))
        else:
            n, delay = item
            out.append((int(n), delay))
    _require(len(out) >= 1, "need at least one hop")
    return out


class _Tables:
    """Per-hop ``E[X_{k:n}]``, earliest-k service mean and ``Var[X_{k:n}]`` for all k."""

    def __init__(self, hops):
        self.ns = [n for n, _ in hops]
        self.ex = [order_stat_mean_table(d, n) for n, d in hops]
        self.svc = [earliest_k_service_table(d, n) for n, d in hops]
        self.var = [order_stat_var_table(d, n) for n, d in hops]


def _l_hop_upper_vec(tab: _Tables, ks):
    """Vectorised :func:`analytic.age_L_hop_upper`; ``ks`` entries broadcast."""
    L = len(ks)
    service = 0.0
    for ell in range(L):
        service = service + tab.svc[ell][ks[ell] - 1]
    s = 0.0
    for ell in range(L - 1):
        s = tab.ns[ell] / ks[ell] * (tab.ex[ell][ks[ell] - 1] + s)
    kl, nl = ks[-1], tab.ns[-1]
    ey = tab.ex[-1][kl - 1] + s
    return service + (2 * nl - kl) / (2 * kl) * ey + (tab.var[-1][kl - 1] + s * s) / (2 * ey)


def _bb_poisson_vec(tab: _Tables, mu, ks):
    k = ks[0]
    n = tab.ns[0]
    ex = tab.ex[0][k - 1]
    return (tab.svc[0][k - 1]
            + (2 * n - k) / (2 * k * mu) * (mu * ex + 1)
            + mu * tab.var[0][k - 1] / (2 * (mu * ex + 1))
            + 1 / (2 * (mu * mu * ex + mu)))


def _k_objective(objective, hops, mu):
    tab = _Tables(hops)
    L = len(hops)
    if objective == "building_block_poisson":
        _require(L == 1, "building_block_poisson takes exactly one hop")
        _require(mu is not None and mu > 0, "building_block_poisson needs mu > 0")

        def exact(net):
            return analytic.age_building_block_poisson(net.hops[0], mu).total
        return (lambda ks: _bb_poisson_vec(tab, mu, ks)), exact
    if objective == "two_hop_upper":
        _require(L == 2, "two_hop_upper takes exactly two hops")

        def exact(net):
            return analytic.age_two_hop_upper(*net.hops).total
        return (lambda ks: _l_hop_upper_vec(tab, ks)), exact
    if objective == "L_hop_upper":
        def exact(net):
            return analytic.age_L_hop_upper(net).total
        return (lambda ks: _l_hop_upper_vec(tab, ks)), exact
    raise ValueError(f"unknown objective {objective!r}; expected one of {_K_OBJECTIVES}")


def _network(hops, ks) -> NetworkConfig:
    return NetworkConfig(tuple(HopConfig(n, int(k), d) for (n, d), k in zip(hops, ks)))


def optimize_k_exact(net_template, objective: str = "L_hop_upper", *, mu: float | None = None,
                     start=None, max_sweeps: int = 1000) -> OptResult:
    """Integer thresholds minimising a finite-n age expression.

    ``net_template`` is a :class:`NetworkConfig` (its k values are ignored) or
    a sequence of ``(n, ShiftedExp)`` pairs.  Exact ties go to the smaller k.
    """
    hops = _template(net_template)
    vec, exact = _k_objective(objective, hops, mu)
    ns = [n for n, _ in hops]
    ks = [n for n in ns] if start is None else [int(k) for k in start]
    trace = []
    status = "max_iters"
    for _ in range(max_sweeps):
        changed = False
        for d in range(len(ns)):
            coords = [np.int64(k) for k in ks]
            coords[d] = np.arange(1, ns[d] + 1)
            vals = vec(coords)
            j = int(np.argmin(vals)) + 1
            if j != ks[d]:
                ks[d] = j
                changed = True
            trace.append((tuple(ks), float(vals[j - 1])))
        if not changed:
            status = "converged"
            break
    value = exact(_network(hops, ks))
    return OptResult(tuple(ks), value, tuple(trace), status)


def scan_k_exhaustive(net_template, objective: str = "L_hop_upper", *, mu: float | None = None,
                      max_points: int = 5_000_000) -> OptResult:
    """Brute-force minimum over every threshold vector (the oracle for small n)."""
    hops = _template(net_template)
    vec, exact = _k_objective(objective, hops, mu)
    ns = [n for n, _ in hops]
    _require(math.prod(ns) <= max_points, f"{math.prod(ns)} grid points exceed max_points={max_points}")
    grids = np.meshgrid(*[np.arange(1, n + 1) for n in ns], indexing="ij")
    vals = np.asarray(vec(grids))
    flat = int(np.argmin(vals))  # C order: first hit is lexicographically smallest
    ks = tuple(int(g.flat[flat]) for g in grids)
    value = exact(_network(hops, ks))
    return OptResult(ks, value, ((ks, float(vals.flat[flat])),), "converged")
