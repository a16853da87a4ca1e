"""Time averages of sawtooth age paths and batch-means confidence intervals."""
from __future__ import annotations

import math

import numpy as np
from scipy import stats as _st

__all__ = ["sawtooth_integrals", "batch_means", "BatchMeans"]


def sawtooth_integrals(rec_times, rec_stamps, edges) -> np.ndarray:
    """Integrals of ``t - u(t)`` over consecutive intervals ``[edges[i], edges[i+1]]``.

    ``u(t)`` is the generation stamp of the latest reception at or before t
    (0 before the first).  Reception times must be nondecreasing.
    """
    rec_times = np.asarray(rec_times, dtype=float)
    rec_stamps = np.asarray(rec_stamps, dtype=float)
    edges = np.asarray(edges, dtype=float)
    starts = np.concatenate(([0.0], rec_times))
    stamps = np.concatenate(([0.0], rec_stamps))
    seg = (starts[1:] - starts[:-1]) * ((starts[1:] + starts[:-1]) * 0.5 - stamps[:-1])
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    idx = np.searchsorted(starts, edges, side="right") - 1
    at_edges = cum[idx] + (edges - starts[idx]) * ((edges + starts[idx]) * 0.5 - stamps[idx])
    return np.diff(at_edges)


class BatchMeans:
    """Ratio estimate ``sum(areas) / sum(lengths)`` with a batch-means CI."""

    def __init__(self, areas, lengths, level: float = 0.95):
        areas = np.asarray(areas, dtype=float)
        lengths = np.asarray(lengths, dtype=float)
        if areas.shape != lengths.shape or areas.size < 2:
            raise ValueError("need at least two batches of matching areas and lengths")
        if np.any(lengths <= 0):
            raise ValueError("batch lengths must be positive")
        self.means = areas / lengths
        self.estimate = float(areas.sum() / lengths.sum())
        b = self.means.size
        self.std_error = float(np.std(self.means, ddof=1) / math.sqrt(b))
        self.halfwidth = float(_st.t.ppf(0.5 + level / 2, b - 1) * self.std_error)

    @property
    def interval(self) -> tuple[float, float]:
        return self.estimate - self.halfwidth, self.estimate + self.halfwidth


def batch_means(areas, lengths, level: float = 0.95) -> BatchMeans:
    return BatchMeans(areas, lengths, level)
