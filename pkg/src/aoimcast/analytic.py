"""Exact (finite n) average-age expressions.

The single-hop building block receives updates from outside with a residual
wait ``Z`` after each service period; its age is

    E[Xbar] + E[M^2]/(2E[M]) * E[Y] + Var[Y]/(2E[Y]),   Y = X_{k:n} + Z,

with ``M`` geometric(k/n).  The multihop results reuse it for the last hop,
adding the upstream delays to ``E[Xbar]`` and feeding the upstream
interarrival statistics into ``Z``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .distributions import (
    ShiftedExp,
    mean_earliest_k_service,
    order_stat_moments,
)

__all__ = [
    "HopConfig",
    "NetworkConfig",
    "InterarrivalMoments",
    "AgeBreakdown",
    "geometric_moments",
    "renewal_reward_age",
    "age_from_cycle_moments",
    "age_building_block",
    "age_building_block_poisson",
    "age_two_hop_exact",
    "age_two_hop_upper",
    "age_L_hop_exact",
    "age_L_hop_upper",
    "upstream_interarrival_mean",
]


@dataclass(frozen=True)
class HopConfig:
    """One hop: each transmitter fans out to ``n`` children and stops after ``k``."""

    n: int
    k: int
    delay: ShiftedExp

    def __post_init__(self):
        for name in ("n", "k"):
            v = getattr(self, name)
            if isinstance(v, (bool, str)) or int(v) != v:
                raise ValueError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")

    @property
    def success_prob(self) -> float:
        return self.k / self.n

    def with_k(self, k: int) -> "HopConfig":
        return HopConfig(self.n, k, self.delay)

    @classmethod
    def from_alpha(cls, n: int, alpha: float, delay: ShiftedExp) -> "HopConfig":
        """Threshold ``k = round(alpha * n)`` clipped to ``1..n``."""
        return cls(n, min(max(round(alpha * n), 1), int(n)), delay)


@dataclass(frozen=True)
class NetworkConfig:
    hops: tuple[HopConfig, ...]

    def __post_init__(self):
        hops = tuple(self.hops)
        if not hops:
            raise ValueError("a network needs at least one hop")
        if not all(isinstance(h, HopConfig) for h in hops):
            raise TypeError("hops must be HopConfig instances")
        object.__setattr__(self, "hops", hops)

    @property
    def L(self) -> int:
        return len(self.hops)

    @property
    def ks(self) -> tuple[int, ...]:
        return tuple(h.k for h in self.hops)

    def with_ks(self, ks) -> "NetworkConfig":
        if len(ks) != self.L:
            raise ValueError(f"expected {self.L} thresholds, got {len(ks)}")
        return NetworkConfig(tuple(h.with_k(int(k)) for h, k in zip(self.hops, ks)))


@dataclass(frozen=True)
class InterarrivalMoments:
    """Residual wait ``Z`` and cycle ``Y = X_{k:n} + Z`` statistics of a transmitter.

    ``var_cycle`` is the variance of the whole cycle, so any dependence
    between ``Z`` and the service period is already folded in.
    """

    mean_residual: float
    var_cycle: float

    def __post_init__(self):
        if not (self.mean_residual >= 0 and math.isfinite(self.mean_residual)):
            raise ValueError(f"mean_residual must be finite and >= 0, got {self.mean_residual!r}")
        if not (self.var_cycle >= 0 and math.isfinite(self.var_cycle)):
            raise ValueError(f"var_cycle must be finite and >= 0, got {self.var_cycle!r}")

    @classmethod
    def generate_at_will(cls, hop: HopConfig) -> "InterarrivalMoments":
        """Zero wait: the next update is ready the moment service ends."""
        return cls(0.0, order_stat_moments(hop.delay, hop.k, hop.n).variance)

    @classmethod
    def exponential(cls, hop: HopConfig, mean_wait: float) -> "InterarrivalMoments":
        """Exponential wait independent of service (Poisson arrivals)."""
        var_x = order_stat_moments(hop.delay, hop.k, hop.n).variance
        return cls(mean_wait, var_x + mean_wait**2)


@dataclass(frozen=True)
class AgeBreakdown:
    """Average age and the additive terms it is made of.

    ``total == service_term + cycle_term + variance_term + sum(extra_terms)``.
    ``service_by_hop`` splits ``service_term`` per hop and is not an extra
    summand.
    """

    total: float
    service_term: float
    cycle_term: float
    variance_term: float
    extra_terms: tuple[tuple[str, float], ...] = ()
    service_by_hop: tuple[float, ...] = field(default=())

    @classmethod
    def from_terms(cls, service_by_hop, cycle_term, variance_term, extra_terms=()):
        service = math.fsum(service_by_hop)
        extra = tuple((str(label), float(v)) for label, v in extra_terms)
        total = math.fsum([service, cycle_term, variance_term, *(v for _, v in extra)])
        if not (total > 0 and math.isfinite(total)):
            raise ArithmeticError(f"age evaluated to {total!r}")
        return cls(float(total), float(service), float(cycle_term), float(variance_term),
                   extra, tuple(float(s) for s in service_by_hop))

    def as_dict(self) -> dict:
        out = {
            "total": self.total,
            "service_term": self.service_term,
            "cycle_term": self.cycle_term,
            "variance_term": self.variance_term,
        }
        out.update(dict(self.extra_terms))
        return out


def geometric_moments(p: float) -> tuple[float, float]:
    """``(E[M], E[M^2])`` of the number of trials to first success."""
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p!r}")
    return 1.0 / p, (2.0 - p) / (p * p)


def renewal_reward_age(service_mean: float, s_mean: float, s_second: float) -> float:
    """``E[Xbar] + E[S^2] / (2 E[S])`` for reception interarrival ``S``."""
    if s_mean <= 0:
        raise ValueError("mean interarrival must be positive")
    return service_mean + s_second / (2.0 * s_mean)


def age_from_cycle_moments(service_mean: float, p: float, y_mean: float, y_var: float) -> float:
    """Age with ``S`` a geometric(p) sum of i.i.d. cycles of mean ``y_mean``."""
    if y_mean <= 0:
        raise ValueError("mean cycle length must be positive")
    m1, m2 = geometric_moments(p)
    return service_mean + m2 / (2.0 * m1) * y_mean + y_var / (2.0 * y_mean)


def _cycle_factor(hop: HopConfig) -> float:
    # E[M^2] / (2 E[M]) = (2n - k) / (2k)
    return (2 * hop.n - hop.k) / (2.0 * hop.k)


def _last_hop_terms(hop: HopConfig, mean_wait: float, var_cycle: float):
    ex = order_stat_moments(hop.delay, hop.k, hop.n).mean
    ey = ex + mean_wait
    if not ey > 0:
        raise ValueError("mean cycle E[X_{k:n}] + E[Z] must be positive")
    return _cycle_factor(hop) * ey, var_cycle / (2.0 * ey)


def age_building_block(hop: HopConfig, z: InterarrivalMoments) -> AgeBreakdown:
    """Single transmitter fed by an arrival process with residual wait ``z``."""
    service = mean_earliest_k_service(hop.delay, hop.k, hop.n)
    cycle, var = _last_hop_terms(hop, z.mean_residual, z.var_cycle)
    return AgeBreakdown.from_terms([service], cycle, var)


def age_building_block_poisson(hop: HopConfig, mu: float) -> AgeBreakdown:
    """Building block with Poisson(``mu``) arrivals, dropped while busy."""
    if not (mu > 0 and math.isfinite(mu)):
        raise ValueError(f"mu must be positive and finite, got {mu!r}")
    m = order_stat_moments(hop.delay, hop.k, hop.n)
    service = mean_earliest_k_service(hop.delay, hop.k, hop.n)
    cycle = (2 * hop.n - hop.k) / (2.0 * hop.k * mu) * (mu * m.mean + 1.0)
    var = mu * m.variance / (2.0 * (mu * m.mean + 1.0))
    resid = 1.0 / (2.0 * (mu * mu * m.mean + mu))
    return AgeBreakdown.from_terms([service], cycle, var, [("residual_variance", resid)])


def age_two_hop_exact(h1: HopConfig, h2: HopConfig, z2: InterarrivalMoments) -> AgeBreakdown:
    """Two-hop age given the relay's residual-wait statistics ``z2``.

    The relay's cycle moments are not available in closed form for general
    arrivals; pass them in (e.g. as estimated by a simulation).
    """
    s1 = mean_earliest_k_service(h1.delay, h1.k, h1.n)
    s2 = mean_earliest_k_service(h2.delay, h2.k, h2.n)
    cycle, var = _last_hop_terms(h2, z2.mean_residual, z2.var_cycle)
    return AgeBreakdown.from_terms([s1, s2], cycle, var)


def age_two_hop_upper(h1: HopConfig, h2: HopConfig) -> AgeBreakdown:
    """Two-hop age with the relays' arrivals replaced by a Poisson stream.

    Upper-bounds the true two-hop age.
    """
    s1 = mean_earliest_k_service(h1.delay, h1.k, h1.n)
    s2 = mean_earliest_k_service(h2.delay, h2.k, h2.n)
    x1 = order_stat_moments(h1.delay, h1.k, h1.n).mean
    m2 = order_stat_moments(h2.delay, h2.k, h2.n)
    em1 = h1.n / h1.k
    cyc2 = _cycle_factor(h2)
    denom = m2.mean + em1 * x1
    return AgeBreakdown.from_terms(
        [s1, s2],
        cyc2 * m2.mean,
        m2.variance / (2.0 * denom),
        [
            ("upstream_cycle", cyc2 * em1 * x1),
            ("upstream_variance", (em1 * x1) ** 2 / (2.0 * denom)),
        ],
    )


def age_L_hop_exact(net: NetworkConfig, z_last: InterarrivalMoments) -> AgeBreakdown:
    """L-hop age given the last relay tier's residual-wait statistics."""
    services = [mean_earliest_k_service(h.delay, h.k, h.n) for h in net.hops]
    cycle, var = _last_hop_terms(net.hops[-1], z_last.mean_residual, z_last.var_cycle)
    return AgeBreakdown.from_terms(services, cycle, var)


def upstream_interarrival_mean(net: NetworkConfig) -> float:
    """Mean interarrival ``E[S_{L-1}]`` at the last relay tier, with Poisson-like hops.

    ``E[S_l] = E[M_l] (E[X_{k_l:n}] + E[S_{l-1}])`` and ``E[S_0] = 0`` (the
    source generates at will).
    """
    s = 0.0
    for h in net.hops[:-1]:
        s = (h.n / h.k) * (order_stat_moments(h.delay, h.k, h.n).mean + s)
    return s


def age_L_hop_upper(net: NetworkConfig) -> AgeBreakdown:
    """L-hop upper bound with exponential interarrivals at every relay tier.

    ``L=1`` gives the generate-at-will single-hop age.
    """
    services = [mean_earliest_k_service(h.delay, h.k, h.n) for h in net.hops]
    last = net.hops[-1]
    m = order_stat_moments(last.delay, last.k, last.n)
    es = upstream_interarrival_mean(net)
    ey = m.mean + es
    return AgeBreakdown.from_terms(
        services,
        _cycle_factor(last) * ey,
        (m.variance + es * es) / (2.0 * ey),
    )
