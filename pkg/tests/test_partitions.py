import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instantons.partitions import (FermionConfig, Partition, PeriodicPotential, RQuotients, char_G,
                                   combine_quotients, dim_partition, fermion_set, partitions_of,
                                   partitions_up_to, plancherel_mass, potential_energy, profile,
                                   r_quotients, rho_vector)

from oracles import abel_char_G

partition_st = st.lists(st.integers(1, 8), max_size=8).map(lambda p: Partition(tuple(sorted(p, reverse=True))))


def test_partition_counts():
    assert [sum(1 for _ in partitions_of(n)) for n in range(11)] == [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]


def test_rejects_increasing_parts():
    with pytest.raises(ValueError):
        Partition((1, 2))


def test_zero_parts_are_stripped():
    assert Partition((2, 1, 0, 0)) == Partition((2, 1))


@given(partition_st)
def test_conjugate_is_involution(lam):
    assert lam.conjugate().conjugate() == lam
    assert lam.conjugate().size == lam.size


@given(partition_st)
def test_hook_formula_matches_branching(lam):
    # dim lam = sum of dims after removing one corner
    if lam.size == 0:
        assert dim_partition(lam) == 1
        return
    assert dim_partition(lam) == sum(dim_partition(lam.remove_box(i)) for i in lam.removable())


@pytest.mark.parametrize("n", range(9))
def test_plancherel_is_a_probability(n):
    assert sum(plancherel_mass(lam) for lam in partitions_of(n)) == 1


def test_plancherel_example():
    assert plancherel_mass(Partition((2, 1))) == Fraction(2, 3)


@given(partition_st)
def test_add_remove_roundtrip(lam):
    for i in lam.addable():
        mu = lam.add_box(i)
        assert mu.size == lam.size + 1
        assert mu.remove_box(i) == lam


def test_fermion_set_of_empty_partition():
    assert fermion_set(Partition(()), 3).points == (Fraction(-1, 2), Fraction(-3, 2), Fraction(-5, 2))


def test_fermion_config_must_be_strictly_decreasing():
    with pytest.raises(ValueError):
        FermionConfig((1, 1), 2)


def test_rho():
    assert rho_vector(3) == (1, 0, -1)
    assert sum(rho_vector(4)) == 0


@pytest.mark.parametrize("r", [2, 3, 4, 5])
def test_quotient_roundtrip_and_size(r):
    for lam in partitions_up_to(16):
        q = r_quotients(lam, r)
        assert combine_quotients(q) == lam
        assert q.size() == lam.size


def test_empty_partition_quotients_have_rho_shifts():
    q = r_quotients(Partition(()), 3)
    assert all(mu.size == 0 for mu in q.quotients)
    assert q.shifts == tuple(Fraction(x, 3) for x in rho_vector(3))


def test_quotients_json_roundtrip():
    q = r_quotients(Partition((5, 2, 2, 1)), 3)
    assert RQuotients.from_json(q.to_json()) == q


def test_inconsistent_shifts_rejected():
    with pytest.raises(ValueError):
        RQuotients(2, (Partition(()), Partition(())), (Fraction(1, 2), Fraction(-1, 2)))


@settings(max_examples=40)
@given(partition_st, st.integers(2, 5), st.floats(0.05, 2.5), st.floats(0.01, 0.5))
def test_generating_function_splits_over_quotients(lam, r, re, im):
    eps = complex(re, -im)
    q = r_quotients(lam, r)
    whole = char_G((lam,), eps / r, (0.0,))
    split = char_G(q.quotients, eps, [eps * float(s) for s in q.shifts])
    assert abs(whole - split) <= 1e-12 * max(1.0, abs(whole))


@pytest.mark.parametrize("parts", [(), (1,), (3, 1), (4, 4, 2)])
def test_char_G_tail_against_direct_sum(parts):
    lam = Partition(parts)
    eps = 0.9 - 0.02j
    assert abs(char_G((lam,), eps, (0.3,)) - abel_char_G((lam,), eps, (0.3,))) < 1e-9


def test_char_G_vacuum():
    eps = 0.4
    q = complex(math.cos(eps / 2), math.sin(eps / 2))
    assert abs(char_G((Partition(()),), eps, (0.0,)) - 1 / (q - 1 / q)) < 1e-13


def test_potential_energy_of_single_box():
    V = PeriodicPotential((0.7, -0.7))
    # one box moves the particle at -1/2 to +1/2
    dE = potential_energy(Partition((1,)), V) - potential_energy(Partition(()), V)
    assert math.isclose(dE, V.at(1) - V.at(-1))


def test_potential_must_have_mean_zero():
    with pytest.raises(ValueError):
        PeriodicPotential((1.0, 0.5))


@given(partition_st, st.sampled_from([0.5, 0.1, 0.03]))
def test_profile_area_counts_boxes(lam, eps):
    psi = profile(lam, eps)
    assert math.isclose(psi.excess_area(), 2 * eps * eps * lam.size, abs_tol=1e-12)
    x = np.linspace(-20, 20, 11)
    assert np.all(psi(x) >= np.abs(x) - 1e-12)


def test_profile_slopes_are_unit():
    psi = profile(Partition((3, 1)), 1.0)
    assert set(np.abs(psi.slopes)) == {1.0}


@pytest.mark.parametrize("r", [2, 3])
def test_staircase_roundtrip(r):
    # staircases have empty quotients and large shifts
    lam = Partition((5, 4, 3, 2, 1))
    assert combine_quotients(r_quotients(lam, r)) == lam
