"""Age of information in multihop multicast trees with earliest-k stopping."""
from ._accel import BACKEND
from .analytic import (
    AgeBreakdown,
    HopConfig,
    InterarrivalMoments,
    NetworkConfig,
    age_building_block,
    age_building_block_poisson,
    age_L_hop_exact,
    age_L_hop_upper,
    age_two_hop_exact,
    age_two_hop_upper,
    geometric_moments,
)
from .asymptotic import (
    AlphaVector,
    HopParams,
    age_building_block_approx,
    age_L_hop_approx,
    age_single_hop_limit,
    age_two_hop_approx,
)
from .distributions import (
    OrderStatMoments,
    ShiftedExp,
    gen_harmonic2,
    harmonic,
    mean_earliest_k_service,
    order_stat_moments,
    sample_order_stat_prefix,
)
from .optimizer import OptResult, optimize_alpha, optimize_k_exact, scan_k_exhaustive
from .sim import (
    Arrival,
    SimConfig,
    SimResult,
    simulate,
    simulate_building_block,
    simulate_full_tree,
    simulate_tagged_path,
)

__version__ = "0.1.0"
