import cmath
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instantons.barnes import BarnesParams, log_gamma2, log_gamma2_symmetric

from oracles import log_barnes_gamma2_unit


def _mod_2pi_i(z):
    # equality of logarithms up to the branch
    return abs((z.imag + math.pi) % (2 * math.pi) - math.pi)


@pytest.mark.parametrize("w", [0.3, 0.5, 1.0, 2.3, 4.7, -0.4])
def test_unit_quasi_periods_match_barnes_G(w):
    got = log_gamma2(w, 1.0, -1.0)
    assert abs(got.real - float(log_barnes_gamma2_unit(w).real)) < 1e-10


def test_far_negative_argument_matches_modulo_branch():
    got = log_gamma2(-2.6, 1.0, -1.0)
    ref = complex(log_barnes_gamma2_unit(-2.6))
    assert abs(got.real - ref.real) < 1e-10
    assert _mod_2pi_i(complex(0, got.imag - ref.imag)) < 1e-9


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.3, 2.0), st.floats(0.3, 2.0))
def test_difference_equation(w, c1, c2):
    lhs = math.log(w) + log_gamma2(w, c1, c2) + log_gamma2(w + c1 + c2, c1, c2)
    rhs = log_gamma2(w + c1, c1, c2) + log_gamma2(w + c2, c1, c2)
    assert abs(lhs - rhs) < 1e-10


@settings(max_examples=10, deadline=None)
@given(st.floats(0.2, 2.0), st.floats(0.3, 1.5), st.floats(0.5, 3.0))
def test_scaling_relation(w, c, M):
    lhs = log_gamma2(M * w, M * c, -M * c)
    rhs = (w * w / (2 * c * c) - 1 / 12) * math.log(M) + log_gamma2(w, c, -c)
    assert abs(lhs - rhs) < 1e-9


def test_symmetric_form_with_complex_period():
    c = 0.4j
    w = 1.3j
    # rotating both arguments by -i reduces to real periods
    direct = log_gamma2_symmetric(w, c)
    reduced = (1.3 ** 2 / (2 * 0.4 ** 2) - 1 / 12) * cmath.log(1j) + log_gamma2(1.3, 0.4, -0.4)
    assert abs(direct - reduced) < 1e-12


def test_zero_period_rejected():
    with pytest.raises(ValueError):
        BarnesParams(1.0, 0.0, 1.0)
