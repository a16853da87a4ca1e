"""Counter-based random streams for the simulation kernels.

A stream is a SplitMix64 sequence whose starting state is a hash of
``(seed, node, cycle, purpose)``, so the draws a node makes for one update do
not depend on how many draws anybody else made before it.  Both backends
produce the same integers; the float conversion may differ in the last bit
between libm and numpy's ``log1p``.
"""
from __future__ import annotations

import numpy as np

from .._accel import USE_NUMBA, jit

__all__ = ["stream_key", "uniform_at", "fill_exponentials", "PURPOSE_DELAY", "PURPOSE_ARRIVAL"]

PURPOSE_DELAY = 0
PURPOSE_ARRIVAL = 1

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_M3 = 0xD6E8FEB86659FD93
_TO_UNIT = 2.0**-53

if USE_NUMBA:
    _U_GAMMA = np.uint64(_GAMMA)
    _U_M1 = np.uint64(_M1)
    _U_M2 = np.uint64(_M2)
    _U_M3 = np.uint64(_M3)
    _S30 = np.uint64(30)
    _S27 = np.uint64(27)
    _S31 = np.uint64(31)
    _S11 = np.uint64(11)
    _ONE = np.uint64(1)

    @jit
    def _mix(z):
        z = (z ^ (z >> _S30)) * _U_M1
        z = (z ^ (z >> _S27)) * _U_M2
        return z ^ (z >> _S31)

    @jit
    def stream_key(seed, node, cycle, purpose):
        k = _mix(np.uint64(seed) + _U_GAMMA)
        k = _mix(k ^ (np.uint64(node) * _U_M3 + _U_GAMMA))
        k = _mix(k ^ (np.uint64(cycle) * _U_M1 + _U_GAMMA))
        return _mix(k ^ (np.uint64(purpose) + _U_GAMMA))

    @jit
    def uniform_at(key, index):
        z = _mix(key + (np.uint64(index) + _ONE) * _U_GAMMA)
        return np.float64(z >> _S11) * _TO_UNIT

    @jit
    def fill_exponentials(key, start, count, out):
        """``out[:count]`` <- standard exponentials at stream indices ``start..``."""
        for i in range(count):
            z = _mix(key + (np.uint64(start + i) + _ONE) * _U_GAMMA)
            u = np.float64(z >> _S11) * _TO_UNIT
            out[i] = -np.log1p(-u)

else:

    def _mix_int(z):
        z = ((z ^ (z >> 30)) * _M1) & _MASK
        z = ((z ^ (z >> 27)) * _M2) & _MASK
        return z ^ (z >> 31)

    def stream_key(seed, node, cycle, purpose):
        k = _mix_int((int(seed) + _GAMMA) & _MASK)
        k = _mix_int(k ^ ((int(node) * _M3 + _GAMMA) & _MASK))
        k = _mix_int(k ^ ((int(cycle) * _M1 + _GAMMA) & _MASK))
        return _mix_int(k ^ ((int(purpose) + _GAMMA) & _MASK))

    def uniform_at(key, index):
        z = _mix_int((key + (int(index) + 1) * _GAMMA) & _MASK)
        return (z >> 11) * _TO_UNIT

    _A_GAMMA = np.uint64(_GAMMA)
    _A_M1 = np.uint64(_M1)
    _A_M2 = np.uint64(_M2)

    def fill_exponentials(key, start, count, out):
        """``out[:count]`` <- standard exponentials at stream indices ``start..``."""
        idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
        z = np.uint64(key) + idx * _A_GAMMA
        z = (z ^ (z >> np.uint64(30))) * _A_M1
        z = (z ^ (z >> np.uint64(27))) * _A_M2
        z ^= z >> np.uint64(31)
        u = (z >> np.uint64(11)).astype(np.float64) * _TO_UNIT
        out[:count] = -np.log1p(-u)
