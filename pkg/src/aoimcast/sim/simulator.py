"""Monte Carlo ground truth for earliest-k multicast trees.

Two simulators with the same protocol semantics:

``full_tree``
    event-driven simulation of every node; exact but the node count grows as
    ``n**L``.
``tagged_path``
    one root-to-leaf chain.  Each end node's age process has the same law, and
    a relay's busy periods depend only on its own receptions and its own
    children's delays, so the chain reproduces one leaf of the full tree at
    O(k) cost per transmission.

Both report the post-warm-up time-average age with a batch-means 95% CI and
the empirical per-hop cycle statistics (``Z``, ``Y``, ``M``, ``S``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .. import _accel
from ..analytic import HopConfig, InterarrivalMoments, NetworkConfig
from . import kernels as K
from .stats import BatchMeans, sawtooth_integrals

__all__ = [
    "Arrival",
    "SimConfig",
    "HopStats",
    "SimResult",
    "simulate",
    "simulate_full_tree",
    "simulate_tagged_path",
    "simulate_building_block",
    "MAX_TREE_NODES",
]

MAX_TREE_NODES = 1_000_000
_MODES = ("full_tree", "tagged_path")


@dataclass(frozen=True)
class Arrival:
    """Update process at the root transmitter.

    ``will``: a fresh update is generated the instant the previous one
    completes.  ``poisson``: exogenous arrivals at ``rate``.
    ``deterministic``: one arrival every ``period``.  Exogenous arrivals that
    find the root busy are dropped.
    """

    kind: str = "will"
    rate: float | None = None
    period: float | None = None

    def __post_init__(self):
        if self.kind == "will":
            return
        if self.kind == "poisson":
            if not (self.rate is not None and self.rate > 0 and math.isfinite(self.rate)):
                raise ValueError("poisson arrivals need a positive finite rate")
        elif self.kind == "deterministic":
            if not (self.period is not None and self.period > 0 and math.isfinite(self.period)):
                raise ValueError("deterministic arrivals need a positive finite period")
        else:
            raise ValueError(f"unknown arrival kind {self.kind!r}")

    @classmethod
    def will(cls):
        return cls("will")

    @classmethod
    def poisson(cls, rate: float):
        return cls("poisson", rate=float(rate))

    @classmethod
    def deterministic(cls, period: float):
        return cls("deterministic", period=float(period))

    @property
    def mean_rate(self) -> float | None:
        """Long-run arrival rate; None for generate-at-will."""
        if self.kind == "poisson":
            return self.rate
        if self.kind == "deterministic":
            return 1.0 / self.period
        return None

    def _code(self):
        if self.kind == "will":
            return K.ARRIVAL_WILL, 0.0
        if self.kind == "poisson":
            return K.ARRIVAL_POISSON, float(self.rate)
        return K.ARRIVAL_DETERMINISTIC, float(self.period)


@dataclass(frozen=True)
class SimConfig:
    network: NetworkConfig
    cycles: int
    warmup_cycles: int | None = None  # default: 10% of cycles
    seed: int = 0
    mode: str = "tagged_path"
    batches: int = 30
    arrival: Arrival = field(default_factory=Arrival.will)
    keep_trace: bool = False  # tagged path only

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if int(self.cycles) != self.cycles or self.cycles <= 0:
            raise ValueError(f"cycles must be a positive integer, got {self.cycles!r}")
        warm = self.cycles // 10 if self.warmup_cycles is None else self.warmup_cycles
        if int(warm) != warm or warm < 0:
            raise ValueError(f"warmup_cycles must be a nonnegative integer, got {warm!r}")
        object.__setattr__(self, "warmup_cycles", int(warm))
        if self.cycles <= self.warmup_cycles:
            raise ValueError("cycles must exceed warmup_cycles")
        if self.batches < 10:
            raise ValueError("batches must be at least 10 for a batch-means CI")
        if (self.cycles - self.warmup_cycles) < self.batches:
            raise ValueError("fewer post-warm-up cycles than batches")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class HopStats:
    """Empirical cycle statistics of the transmitters of one hop (post warm-up)."""

    transmissions: int
    receptions: int
    success_prob: float
    cycles_observed: int
    mean_residual: float
    var_residual: float
    mean_cycle: float
    var_cycle: float
    intervals_observed: int
    mean_M: float
    var_M: float
    mean_S: float
    var_S: float

    def interarrival(self) -> InterarrivalMoments | None:
        if self.cycles_observed < 2:
            return None
        return InterarrivalMoments(max(self.mean_residual, 0.0), max(self.var_cycle, 0.0))


@dataclass(frozen=True, eq=False)
class SimResult:
    avg_age: float
    ci_halfwidth: float
    std_error: float
    end_nodes_measured: int
    per_hop_interarrival: tuple
    successful_updates: int
    dropped_updates: int
    preempted_updates: int
    generated_updates: int
    hop_stats: tuple[HopStats, ...]
    batch_means: tuple[float, ...]
    window: tuple[float, float]
    mode: str
    backend: str
    trace: tuple | None = None  # (reception times, stamps) of the tagged end node

    @property
    def interval(self) -> tuple[float, float]:
        return self.avg_age - self.ci_halfwidth, self.avg_age + self.ci_halfwidth

    def covers(self, value: float) -> bool:
        lo, hi = self.interval
        return lo <= value <= hi

    def below(self, bound: float, n_se: float = 3.0) -> bool:
        """``avg_age <= bound + n_se * std_error``."""
        return self.avg_age <= bound + n_se * self.std_error

    def summary(self) -> dict:
        out = {
            "mode": self.mode,
            "avg_age": self.avg_age,
            "ci_halfwidth": self.ci_halfwidth,
            "std_error": self.std_error,
            "end_nodes_measured": self.end_nodes_measured,
            "successful_updates": self.successful_updates,
            "dropped_updates": self.dropped_updates,
            "preempted_updates": self.preempted_updates,
            "generated_updates": self.generated_updates,
        }
        for i, h in enumerate(self.hop_stats, 1):
            out[f"hop{i}_success_prob"] = h.success_prob
            out[f"hop{i}_mean_Z"] = h.mean_residual
            out[f"hop{i}_var_Y"] = h.var_cycle
            out[f"hop{i}_mean_M"] = h.mean_M
            out[f"hop{i}_mean_S"] = h.mean_S
        return out


# ---------------------------------------------------------------------------

def _arrays(net: NetworkConfig):
    ns = np.array([h.n for h in net.hops], dtype=np.int64)
    ks = np.array([h.k for h in net.hops], dtype=np.int64)
    rates = np.array([h.delay.rate for h in net.hops], dtype=np.float64)
    shifts = np.array([h.delay.shift for h in net.hops], dtype=np.float64)
    level = np.concatenate(([1], np.cumprod(ns)))
    offsets = np.concatenate(([0], np.cumsum(level))).astype(np.int64)
    return ns, ks, rates, shifts, offsets


def _mean_var(n, s1, s2):
    if n <= 0:
        return math.nan, math.nan
    mean = s1 / n
    if n < 2:
        return mean, math.nan
    return mean, max(s2 - n * mean * mean, 0.0) / (n - 1)


def _hop_stats(table) -> tuple[HopStats, ...]:
    out = []
    for row in table:
        ny = int(row[K.ST_NY])
        mz, vz = _mean_var(ny, row[K.ST_SUM_Z], row[K.ST_SUM_Z2])
        my, vy = _mean_var(ny, row[K.ST_SUM_Y], row[K.ST_SUM_Y2])
        nm = int(row[K.ST_NM])
        mm, vm = _mean_var(nm, row[K.ST_SUM_M], row[K.ST_SUM_M2])
        ms, vs = _mean_var(nm, row[K.ST_SUM_S], row[K.ST_SUM_S2])
        offered = row[K.ST_OFFERED]
        out.append(HopStats(
            transmissions=int(row[K.ST_TX]),
            receptions=int(row[K.ST_RX]),
            success_prob=float(row[K.ST_RX] / offered) if offered else math.nan,
            cycles_observed=ny,
            mean_residual=mz, var_residual=vz, mean_cycle=my, var_cycle=vy,
            intervals_observed=nm, mean_M=mm, var_M=vm, mean_S=ms, var_S=vs,
        ))
    return tuple(out)


def _boundaries(cfg: SimConfig) -> np.ndarray:
    per = (cfg.cycles - cfg.warmup_cycles) // cfg.batches
    idx = cfg.warmup_cycles + per * np.arange(cfg.batches)
    return np.append(idx, cfg.cycles)


def _finish(cfg, areas, edges, end_nodes, table, counts, generated, trace=None) -> SimResult:
    bm = BatchMeans(areas / end_nodes, np.diff(edges))
    hops = _hop_stats(table)
    return SimResult(
        avg_age=bm.estimate,
        ci_halfwidth=bm.halfwidth,
        std_error=bm.std_error,
        end_nodes_measured=int(end_nodes),
        per_hop_interarrival=tuple(h.interarrival() for h in hops),
        successful_updates=int(counts[0]),
        dropped_updates=int(counts[1]),
        preempted_updates=int(counts[2]),
        generated_updates=int(generated),
        hop_stats=hops,
        batch_means=tuple(float(x) for x in bm.means),
        window=(float(edges[0]), float(edges[-1])),
        mode=cfg.mode,
        backend=_accel.BACKEND,
        trace=trace,
    )


def simulate_tagged_path(cfg: SimConfig) -> SimResult:
    """Age at one end node, simulating only its chain of ancestors."""
    if cfg.mode != "tagged_path":
        raise ValueError("simulate_tagged_path needs mode='tagged_path'")
    ns, ks, rates, shifts, offsets = _arrays(cfg.network)
    L = ns.shape[0]
    code, param = cfg.arrival._code()
    table = np.zeros((L, K.N_STATS))
    gen_times = np.zeros(cfg.cycles + 1)
    rec_t = np.empty(cfg.cycles)
    rec_g = np.empty(cfg.cycles)
    counts = np.zeros(3, dtype=np.int64)
    nrec = K.tagged_path_kernel(ns, ks, rates, shifts, offsets, np.uint64(cfg.seed), cfg.cycles,
                                cfg.warmup_cycles, code, param, table, gen_times, rec_t, rec_g, counts)
    rec_t, rec_g = rec_t[:nrec], rec_g[:nrec]
    edges = gen_times[_boundaries(cfg)]
    areas = sawtooth_integrals(rec_t, rec_g, edges)
    trace = (rec_t.copy(), rec_g.copy()) if cfg.keep_trace else None
    return _finish(cfg, areas, edges, 1, table, counts, cfg.cycles, trace)


def simulate_full_tree(cfg: SimConfig) -> SimResult:
    """Age averaged over every end node of the full tree."""
    if cfg.mode != "full_tree":
        raise ValueError("simulate_full_tree needs mode='full_tree'")
    ns, ks, rates, shifts, offsets = _arrays(cfg.network)
    L = ns.shape[0]
    if offsets[-1] > MAX_TREE_NODES:
        raise ValueError(f"tree has {int(offsets[-1])} nodes; the limit is {MAX_TREE_NODES}")
    code, param = cfg.arrival._code()
    table = np.zeros((L, K.N_STATS))
    gen_times = np.zeros(cfg.cycles + 1)
    areas = np.zeros(cfg.batches)
    edges = np.zeros(cfg.batches + 1)
    counts = np.zeros(3, dtype=np.int64)
    K.full_tree_kernel(ns, ks, rates, shifts, offsets, np.uint64(cfg.seed), cfg.cycles, cfg.warmup_cycles,
                       cfg.batches, code, param, table, gen_times, areas, edges, counts)
    end_nodes = int(offsets[L + 1] - offsets[L])
    return _finish(cfg, areas, edges, end_nodes, table, counts, cfg.cycles * end_nodes)


def simulate(cfg: SimConfig) -> SimResult:
    if cfg.mode == "full_tree":
        return simulate_full_tree(cfg)
    return simulate_tagged_path(cfg)


def simulate_building_block(hop: HopConfig, arrivals: Arrival, cfg: SimConfig) -> SimResult:
    """One transmitter, n children, the tagged child measured.

    ``cfg.network`` and ``cfg.arrival`` are replaced by ``hop`` and
    ``arrivals``; every root arrival ends up successful, dropped or preempted.
    """
    cfg = replace(cfg, network=NetworkConfig((hop,)), arrival=arrivals)
    return simulate(cfg)
