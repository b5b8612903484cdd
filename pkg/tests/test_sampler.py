import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instantons.partitions import Partition, PeriodicPotential, partitions_up_to
from instantons.sampler import (add_box_log_ratio, batch_means, log_weight, mcmc_profile_average, mcmc_sample,
                                profile_l1, state_histogram)

partition_st = st.lists(st.integers(1, 6), max_size=6).map(lambda p: Partition(tuple(sorted(p, reverse=True))))


@settings(max_examples=40)
@given(partition_st, st.sampled_from([(0.0,), (0.6, -0.6), (0.3, 0.5, -0.8)]), st.floats(0.05, 1.0))
def test_add_ratio_is_exact_weight_ratio(lam, xi, eps):
    V = PeriodicPotential(xi)
    for row in lam.addable():
        mu = lam.add_box(row)
        expected = log_weight(mu, V, eps, 0.7) - log_weight(lam, V, eps, 0.7)
        assert abs(add_box_log_ratio(lam, row, V, eps, 0.7) - expected) < 1e-9


def test_non_addable_row_rejected():
    with pytest.raises(ValueError):
        add_box_log_ratio(Partition((1, 1)), 1, PeriodicPotential((0.0,)), 0.5, 1.0)


def test_same_seed_same_chain():
    V = PeriodicPotential((0.4, -0.4))
    a = mcmc_sample(V, 0.3, 1.0, 20000, seed=11)
    b = mcmc_sample(V, 0.3, 1.0, 20000, seed=11)
    assert a.partition == b.partition and a.accepted == b.accepted


def test_eps_must_be_positive():
    with pytest.raises(ValueError):
        mcmc_sample(PeriodicPotential((0.0,)), 0.0, 1.0, 10, seed=1)


@pytest.mark.parametrize("xi", [(0.0,), (0.5, -0.5)])
def test_stationary_distribution_on_small_states(xi):
    # restricted to |lam| <= 4 the chain must sample the normalized weights
    V = PeriodicPotential(xi)
    eps, lam = 0.6, 0.5
    hist = state_histogram(V, eps, lam, 2_000_000, seed=5, max_size=4)
    states = list(partitions_up_to(4))
    w = np.array([math.exp(log_weight(s, V, eps, lam)) for s in states])
    p = w / w.sum()
    n = sum(hist.values())
    freq = np.array([hist.get(s, 0) / n for s in states])
    # autocorrelated chain: allow a few standard errors with an inflation factor
    se = np.sqrt(p * (1 - p) / n) * 10
    assert np.all(np.abs(freq - p) < 5 * se + 1e-4), (freq, p)


def test_profile_l1_of_identical_shapes():
    lam = Partition((3, 1))
    from instantons.partitions import profile

    psi = profile(lam, 0.2)
    assert profile_l1(lam, 0.2, psi, -2, 2) == 0


def test_batch_means_of_iid():
    rng = np.random.default_rng(0)
    m, se = batch_means(rng.normal(1.0, 2.0, 100000))
    assert abs(m - 1.0) < 4 * se and 0.003 < se < 0.01


def test_r1_time_average_is_close_to_arcsine():
    from oracles import arcsine_profile

    grid = np.linspace(-3, 3, 301)
    avg = mcmc_profile_average(PeriodicPotential((0.0,)), 0.1, 1.0, 2_000_000, seed=3, grid=grid, chunks=100)
    ref = np.array([arcsine_profile(x, 1.0) for x in grid])
    assert np.trapezoid(np.abs(avg.mean_profile - ref), grid) < 0.1
    # Poisson size: mean |lam| = (Lambda/eps)^2
    assert abs(np.mean(avg.sizes[20:]) - 100) < 15
