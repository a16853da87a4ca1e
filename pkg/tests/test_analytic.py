import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aoimcast import asymptotic
from aoimcast.analytic import (
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
from aoimcast.asymptotic import HopParams
from aoimcast.distributions import ShiftedExp, order_stat_moments
from aoimcast.sim import Arrival, SimConfig, simulate_building_block

from conftest import SEED

D11 = ShiftedExp(1, 1)


def _os_oracle(rate, shift, k, n):
    """Order-statistic moments from scratch with exact rational harmonic sums."""
    h = sum(Fraction(1, j) for j in range(n - k + 1, n + 1))
    g = sum(Fraction(1, j * j) for j in range(n - k + 1, n + 1))
    mean = shift + float(h) / rate
    return mean, float(g) / rate**2


def _service_oracle(rate, shift, k, n):
    return math.fsum(_os_oracle(rate, shift, i, n)[0] for i in range(1, k + 1)) / k


def test_config_validation():
    with pytest.raises(ValueError):
        HopConfig(5, 6, D11)
    with pytest.raises(ValueError):
        HopConfig(5, 0, D11)
    with pytest.raises(ValueError):
        HopConfig(5, 2.5, D11)
    with pytest.raises(ValueError):
        NetworkConfig(())
    with pytest.raises(ValueError):
        InterarrivalMoments(-1.0, 1.0)
    assert HopConfig.from_alpha(500, 0.615, D11).k == 308
    assert HopConfig.from_alpha(10, 0.001, D11).k == 1


def test_geometric_moments():
    assert geometric_moments(1.0) == (1.0, 1.0)
    assert geometric_moments(0.5) == pytest.approx((2.0, 6.0))
    for p in (0.0, -0.2, 1.1):
        with pytest.raises(ValueError):
            geometric_moments(p)


def test_geometric_moments_monte_carlo():
    rng = np.random.default_rng(SEED)
    m = rng.geometric(0.3, size=10_000_000).astype(float)
    mean, second = geometric_moments(0.3)
    assert abs(m.mean() - mean) < 3 * m.std() / math.sqrt(m.size)
    m2 = m * m
    assert abs(m2.mean() - second) < 3 * m2.std() / math.sqrt(m.size)


def test_single_link_generate_at_will():
    hop = HopConfig(1, 1, D11)
    b = age_building_block(hop, InterarrivalMoments(0.0, 1.0))
    assert b.total == pytest.approx(3.25, rel=1e-14)
    # renewal-reward with Y = X: E[X] + E[X^2] / (2 E[X])
    assert b.total == pytest.approx(2.0 + 5.0 / 4.0)
    assert b.total == pytest.approx(b.service_term + b.cycle_term + b.variance_term, rel=1e-12)


def test_poisson_single_link_value():
    b = age_building_block_poisson(HopConfig(1, 1, D11), 1.0)
    assert b.total == pytest.approx(23 / 6, rel=1e-12)


def test_poisson_large_mu_limit():
    for k, n in ((1, 1), (5, 10), (30, 40)):
        hop = HopConfig(n, k, D11)
        will = age_building_block(hop, InterarrivalMoments.generate_at_will(hop)).total
        assert abs(age_building_block_poisson(hop, 1e6).total - will) / will < 1e-4


def test_poisson_close_to_asymptotic():
    exact = age_building_block_poisson(HopConfig(100, 84, D11), 1.0).total
    approx = asymptotic.age_building_block_approx(HopParams(1, 1), 1.0, 0.84)
    assert abs(exact - approx) / approx < 0.01
    with pytest.raises(ValueError):
        age_building_block_poisson(HopConfig(10, 5, D11), 0.0)


def test_building_block_with_simulated_poisson_residuals():
    hop = HopConfig(10, 5, D11)
    cfg = SimConfig(NetworkConfig((hop,)), cycles=300_000, seed=SEED)
    res = simulate_building_block(hop, Arrival.poisson(1.0), cfg)
    z = res.per_hop_interarrival[0]
    via_sim = age_building_block(hop, z).total
    formula = age_building_block_poisson(hop, 1.0).total
    assert abs(via_sim - formula) / formula < 0.02


def _random_hop(rng, n_max=60):
    n = int(rng.integers(1, n_max + 1))
    return HopConfig(n, int(rng.integers(1, n + 1)), ShiftedExp(float(rng.uniform(0.2, 5)), float(rng.uniform(0, 3))))


def test_renewal_identity_random_configs():
    # Delta = E[Xbar] + (E[M^2] / 2E[M]) E[Y] + Var[Y] / (2 E[Y]) with independent oracles
    rng = np.random.default_rng(SEED)
    for _ in range(100):
        hop = _random_hop(rng)
        z_mean = float(rng.uniform(0, 4))
        z_var_extra = float(rng.uniform(0, 4))
        r, c, k, n = hop.delay.rate, hop.delay.shift, hop.k, hop.n
        xk_mean, xk_var = _os_oracle(r, c, k, n)
        p = k / n
        m1, m2 = 1 / p, (2 - p) / p**2
        y_mean = xk_mean + z_mean
        y_var = xk_var + z_var_extra
        expected = _service_oracle(r, c, k, n) + m2 / (2 * m1) * y_mean + y_var / (2 * y_mean)
        got = age_building_block(hop, InterarrivalMoments(z_mean, y_var)).total
        assert got == pytest.approx(expected, rel=1e-10)


def test_two_hop_exact_reduces_to_shifted_building_block():
    c = 0.7
    h1 = HopConfig(8, 8, ShiftedExp(1e12, c))
    h2 = HopConfig(8, 5, ShiftedExp(1.3, 0.4))
    z2 = InterarrivalMoments(0.0, order_stat_moments(h2.delay, h2.k, h2.n).variance)
    two = age_two_hop_exact(h1, h2, z2).total
    single = age_building_block(h2, InterarrivalMoments.generate_at_will(h2)).total
    assert two == pytest.approx(single + c, rel=1e-9)


def test_two_hop_exact_with_exponential_wait_is_upper():
    h1, h2 = HopConfig(12, 7, ShiftedExp(0.8, 0.5)), HopConfig(12, 10, ShiftedExp(2.0, 1.5))
    x1 = order_stat_moments(h1.delay, h1.k, h1.n).mean
    wait = (h1.n / h1.k) * x1
    exact = age_two_hop_exact(h1, h2, InterarrivalMoments.exponential(h2, wait))
    upper = age_two_hop_upper(h1, h2)
    assert exact.total == pytest.approx(upper.total, rel=1e-12)


def test_two_hop_upper_terms_and_limits():
    h1, h2 = HopConfig(500, 308, D11), HopConfig(500, 461, D11)
    b = age_two_hop_upper(h1, h2)
    # six terms: two service, last-hop cycle and variance, two upstream
    assert len(b.service_by_hop) + 2 + len(b.extra_terms) == 6
    assert b.total == pytest.approx(math.fsum([b.service_term, b.cycle_term, b.variance_term,
                                               *(v for _, v in b.extra_terms)]), rel=1e-10)
    approx = asymptotic.age_two_hop_approx(HopParams(1, 1), HopParams(1, 1), (0.615, 0.921))
    assert abs(b.total - approx) / approx < 0.01
    # vanishing first hop
    g = HopConfig(6, 4, ShiftedExp(1.0, 0.5))
    single = age_building_block(g, InterarrivalMoments.generate_at_will(g)).total
    fast = age_two_hop_upper(HopConfig(6, 6, ShiftedExp(1e9, 0.0)), g).total
    assert fast == pytest.approx(single, rel=1e-6)


def test_L_hop_upper_specialisations():
    rng = np.random.default_rng(SEED + 5)
    for _ in range(25):
        h1, h2 = _random_hop(rng), _random_hop(rng)
        net = NetworkConfig((h1, h2))
        assert age_L_hop_upper(net).total == pytest.approx(age_two_hop_upper(h1, h2).total, rel=1e-9)
        single = NetworkConfig((h1,))
        assert age_L_hop_upper(single).total == pytest.approx(
            age_building_block(h1, InterarrivalMoments.generate_at_will(h1)).total, rel=1e-12)


def test_L_hop_upper_matches_asymptotic_at_n100():
    net = NetworkConfig(tuple(HopConfig(100, k, D11) for k in (63, 83, 97)))
    approx = asymptotic.age_L_hop_approx([HopParams(1, 1)] * 3, (0.63, 0.83, 0.97))
    assert abs(age_L_hop_upper(net).total - approx) / approx < 0.02


def test_L_hop_exact_consistent_with_two_hop():
    h1, h2 = HopConfig(9, 4, D11), HopConfig(9, 7, ShiftedExp(2, 0.2))
    z = InterarrivalMoments(1.3, 2.4)
    assert age_L_hop_exact(NetworkConfig((h1, h2)), z).total == pytest.approx(
        age_two_hop_exact(h1, h2, z).total, rel=1e-12)


def test_L_hop_upper_decreasing_in_rates():
    rng = np.random.default_rng(SEED + 6)
    for _ in range(40):
        L = int(rng.integers(1, 5))
        hops = [_random_hop(rng, 40) for _ in range(L)]
        n = hops[0].n
        hops = [HopConfig(n, min(h.k, n), h.delay) for h in hops]
        base = age_L_hop_upper(NetworkConfig(tuple(hops))).total
        ell = int(rng.integers(0, L))
        d = hops[ell].delay
        bumped = list(hops)
        bumped[ell] = HopConfig(n, hops[ell].k, ShiftedExp(d.rate * 1.01, d.shift))
        assert age_L_hop_upper(NetworkConfig(tuple(bumped))).total < base


def test_breakdown_rejects_nonpositive():
    with pytest.raises(ArithmeticError):
        AgeBreakdown.from_terms([0.0], 0.0, 0.0)


@settings(max_examples=80, deadline=None)
@given(
    n=st.integers(1, 300),
    frac=st.floats(0.0, 1.0),
    rate=st.floats(0.01, 50),
    shift=st.floats(0, 10),
    L=st.integers(1, 5),
)
def test_totals_positive_and_finite(n, frac, rate, shift, L):
    k = max(1, min(n, round(frac * n)))
    net = NetworkConfig(tuple(HopConfig(n, k, ShiftedExp(rate, shift)) for _ in range(L)))
    b = age_L_hop_upper(net)
    assert b.total > 0 and math.isfinite(b.total)
    parts = [b.service_term, b.cycle_term, b.variance_term, *(v for _, v in b.extra_terms)]
    assert b.total == pytest.approx(math.fsum(parts), rel=1e-10)
