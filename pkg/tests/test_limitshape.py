import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from instantons.limitshape import (SurfaceTension, action_plancherel, action_surf, facet_intercepts,
                                   facet_slope, log_potential, minimizer_action, psi_star, psi_star_prime,
                                   psi_star_values,
                                   slackness_check, total_action, xi_from_gaps, convolution_L)
from instantons.partitions import Partition, PeriodicPotential, ProfileFunction, profile
from instantons.swcurve import SWCurve, periods_a, periods_a_dual

from oracles import arcsine_profile

TRIANGLE = SWCurve((1.0, 0.0, -3.5, 0.0), 1.0)


def _mix(p, q, t):
    """(1 - t) p + t q as a ProfileFunction on the union of breakpoints."""
    b = np.union1d(p.breakpoints, q.breakpoints)
    mid = 0.5 * (b[1:] + b[:-1])
    s = (1 - t) * p.derivative(mid) + t * q.derivative(mid)
    return ProfileFunction(b, s)


def test_facet_slopes():
    assert [facet_slope(i, 4) for i in range(5)] == [-1, -0.5, 0, 0.5, 1]


@pytest.mark.parametrize("lam", [1.0, 0.45])
def test_r1_minimizer_is_arcsine(lam):
    C = SWCurve((1.0, 0.0), lam)
    x = np.linspace(-2 * lam, 2 * lam, 201)
    ref = np.array([arcsine_profile(t, lam) for t in x])
    assert np.max(np.abs(psi_star_values(x, C) - ref)) < 1e-8
    # the interpolant converges like the square of the knot spacing
    assert np.max(np.abs(psi_star(C, 400)(x) - ref)) < 1e-5


def test_direct_values_agree_with_interpolant_at_knots():
    psi = psi_star(TRIANGLE, 100)
    assert np.max(np.abs(psi_star_values(psi.breakpoints, TRIANGLE) - psi.knot_values)) < 1e-12
    x = np.linspace(-4, 4, 301)
    assert np.max(np.abs(psi_star_values(x, TRIANGLE) - psi(x))) < 1e-4


def test_psi_prime_outside_bands():
    x = np.array([-10.0, 10.0])
    assert np.allclose(psi_star_prime(x, TRIANGLE), [-1, 1])


def test_closure_residual_is_small():
    assert abs(psi_star(TRIANGLE).closure_residual) < 1e-10


def test_surface_tension_shape():
    S = SurfaceTension(PeriodicPotential((0.4, -0.9, 0.5)))
    assert S(-1.0) == 0 and abs(S(1.0)) < 1e-15
    assert np.all(S.kinks() > 0)
    with pytest.raises(ValueError):
        S(1.5)


@settings(max_examples=20)
@given(st.lists(st.floats(-2, 2), min_size=2, max_size=5), st.floats(-1, 1), st.floats(-1, 1))
def test_surface_tension_is_convex(xs, s, t):
    xi = np.array(xs) - np.mean(xs)
    S = SurfaceTension(PeriodicPotential(tuple(xi)))
    assert S(0.5 * (s + t)) <= 0.5 * (S(s) + S(t)) + 1e-12


def _action_pl_oracle(psi, lam):
    b = psi.breakpoints

    def f(y, x):
        return (1 + psi.derivative(x)) * (1 - psi.derivative(y)) * math.log(abs(x - y) / lam)

    val = 0.0
    for i in range(len(b) - 1):
        for j in range(i, len(b) - 1):
            if i == j:
                g = lambda y, x: f(y, x)
                v, _ = integrate.dblquad(g, b[i], b[i + 1], lambda x: x, lambda x: b[i + 1], epsabs=1e-11)
            else:
                v, _ = integrate.dblquad(f, b[i], b[i + 1], lambda x: b[j], lambda x: b[j + 1], epsabs=1e-11)
            val += v
    return 0.5 * val


@pytest.mark.parametrize("parts,eps,lam", [((1,), 1.0, 1.0), ((2, 1), 0.5, 0.7), ((3, 1, 1), 0.3, 1.3)])
def test_plancherel_action_against_double_integral(parts, eps, lam):
    psi = profile(Partition(parts), eps)
    assert abs(action_plancherel(psi, lam) - _action_pl_oracle(psi, lam)) < 1e-8


def test_r1_action_is_minus_lambda_squared():
    C = SWCurve((1.0, 0.0), 0.8)
    res = minimizer_action(C, SurfaceTension(PeriodicPotential((0.0,))))
    assert abs(res["value"] + 0.64) < 1e-8


@pytest.mark.parametrize("t", [0.05, 0.2])
def test_minimizer_beats_perturbations(t):
    S = SurfaceTension(xi_from_gaps(TRIANGLE))
    psi = psi_star(TRIANGLE, 200)
    base = total_action(psi, S, 1.0)
    other = _mix(psi, profile(Partition(()), 1.0), t)
    assert total_action(other, S, 1.0) > base
    stretched = ProfileFunction(1.1 * psi.breakpoints, psi.slopes)
    assert total_action(stretched, S, 1.0) > base


def test_surface_action_of_facets():
    S = SurfaceTension(PeriodicPotential((-1.0, 1.0)))
    psi = ProfileFunction(np.array([-1.0, 1.0]), np.array([0.0]))
    assert action_surf(psi, S) == pytest.approx(0.5 * 2 * S(0.0))


def test_log_potential_is_derivative_of_convolution():
    x, h = 0.37, 1e-5
    fd = (convolution_L(x + h, TRIANGLE) - convolution_L(x - h, TRIANGLE)) / (2 * h)
    assert abs(fd - log_potential(x, TRIANGLE)) < 1e-7


def test_xi_matches_dual_periods():
    xi = np.array(xi_from_gaps(TRIANGLE).xi)
    ad = periods_a_dual(TRIANGLE).a_dual
    assert np.max(np.abs(xi + ad / 3)) < 1e-6


def test_facet_intercepts_recover_periods():
    fd = facet_intercepts(psi_star(TRIANGLE), 3)
    assert np.max(np.abs(fd.a - periods_a(TRIANGLE))) < 1e-5


@pytest.mark.parametrize("curve", [SWCurve((1.0, 0.0), 1.0), TRIANGLE, SWCurve((1.0, 0.0, -1.2), 0.4)])
def test_slackness(curve):
    rep = slackness_check(curve)
    assert rep.passed, rep.to_dict()


def test_slackness_rejects_a_wrong_profile():
    psi = ProfileFunction(1.05 * psi_star(TRIANGLE, 200).breakpoints, psi_star(TRIANGLE, 200).slopes)
    rep = slackness_check(TRIANGLE, psi=psi)
    assert not rep.passed
