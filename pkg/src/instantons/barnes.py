"""Barnes double gamma function from the zeta-regularized integral.

ln Gamma_2(w | c1, c2) = d/ds zeta_2(s; w | c1, c2) at s = 0, where

    zeta_2(s) = 1/Gamma(s) int_0^inf t^(s-1) e^(-w t) / prod(1 - e^(-c_i t)) dt.

The integral is continued to s = 0 by subtracting the t^-2, t^-1, t^0 terms
of the integrand on (0, 1).  Outside its convergence half-plane the function
is reached with the difference equation

    w Gamma_2(w) Gamma_2(w + c1 + c2) = Gamma_2(w + c1) Gamma_2(w + c2).
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import mpmath as mp

WORK_DPS = 50


@dataclass(frozen=True)
class BarnesParams:
    w: complex
    c1: float
    c2: float

    def __post_init__(self):
        if self.c1 == 0 or self.c2 == 0:
            raise ValueError("quasi-periods must be nonzero")


def _laurent_coeffs(w, c1, c2):
    """Coefficients of t^-2, t^-1, t^0 in e^(-wt) / prod(1 - e^(-c t))."""
    A = 1 / (c1 * c2)
    B = (c1 + c2) / (2 * c1 * c2)
    C = (c1 * c1 + c2 * c2 + 3 * c1 * c2) / (12 * c1 * c2)
    return A, B - w * A, C - w * B + w * w * A / 2


def _converges(w, c1, c2, margin):
    decay = w.real + sum(-c for c in (c1, c2) if c < 0)
    return decay > margin


def _log_gamma2_integral(w, c1, c2):
    with mp.workdps(WORK_DPS):
        w_, c1_, c2_ = mp.mpc(w), mp.mpf(c1), mp.mpf(c2)
        b2, b1, b0 = _laurent_coeffs(w_, c1_, c2_)

        def full(t):
            return mp.exp(-w_ * t) / ((1 - mp.exp(-c1_ * t)) * (1 - mp.exp(-c2_ * t)))

        def regular(t):
            return (full(t) - b2 / t**2 - b1 / t - b0) / t

        near = mp.quad(regular, [0, 0.5, 1], method="gauss-legendre")
        far = mp.quad(lambda t: full(t) / t, [1, 4, mp.inf])
        val = near + far - b2 / 2 - b1 + mp.euler * b0
        return complex(val)


def log_gamma2(p: BarnesParams | complex, c1: float | None = None, c2: float | None = None) -> complex:
    """ln Gamma_2(w | c1, c2) for real nonzero quasi-periods.

    The branch of the logarithm is the one produced by the integral in its
    convergence region, continued through the difference equation with
    principal logarithms of w.
    """
    if not isinstance(p, BarnesParams):
        p = BarnesParams(complex(p), float(c1), float(c2))
    w, c1, c2 = complex(p.w), float(p.c1), float(p.c2)
    margin = 0.5 * min(abs(c1), abs(c2))
    memo: dict[tuple[float, float], complex] = {}

    def at(v):
        key = (round(v.real, 11), round(v.imag, 11))
        if key in memo:
            return memo[key]
        if _converges(v, c1, c2, margin):
            out = _log_gamma2_integral(v, c1, c2)
        elif c1 > 0 and c2 > 0:
            out = at(v + c1) + at(v + c2) - _log(v) - at(v + c1 + c2)
        elif c1 < 0 and c2 < 0:
            out = at(v - c1) + at(v - c2) - _log(v - c1 - c2) - at(v - c1 - c2)
        else:
            pos, neg = (c1, c2) if c2 < 0 else (c2, c1)
            out = _log(v - neg) + at(v - neg) + at(v + pos) - at(v + pos - neg)
        memo[key] = out
        return out

    return at(w)


def _log(v: complex) -> complex:
    if abs(v) < 1e-300:
        raise ValueError("argument hits a pole of Gamma_2")
    return cmath.log(v)


def log_gamma2_symmetric(w: complex, c: complex) -> complex:
    """ln Gamma_2(w | c, -c) for complex c off the imaginary-free negative axis.

    Reduced to real quasi-periods with the scaling relation
    Gamma_2(M w | M c, -M c) = M^(w^2/2c^2 - 1/12) Gamma_2(w | c, -c).
    """
    c = complex(c)
    if c == 0:
        raise ValueError("quasi-period must be nonzero")
    M = c / abs(c)
    if M.imag == 0 and M.real < 0:
        M = -M
    c0 = (c / M).real
    w0 = w / M
    expo = w0 * w0 / (2 * c0 * c0) - 1.0 / 12
    return expo * cmath.log(M) + log_gamma2(BarnesParams(w0, c0, -c0))
