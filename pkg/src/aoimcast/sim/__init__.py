from .simulator import (
    MAX_TREE_NODES,
    Arrival,
    HopStats,
    SimConfig,
    SimResult,
    simulate,
    simulate_building_block,
    simulate_full_tree,
    simulate_tagged_path,
)
from .stats import BatchMeans, sawtooth_integrals

__all__ = [
    "MAX_TREE_NODES",
    "Arrival",
    "BatchMeans",
    "HopStats",
    "SimConfig",
    "SimResult",
    "sawtooth_integrals",
    "simulate",
    "simulate_building_block",
    "simulate_full_tree",
    "simulate_tagged_path",
]
