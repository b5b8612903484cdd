"""Variational problem for the periodically weighted Plancherel measure.

The action of a profile psi is S = S_pl + S_surf with

    S_pl   = 1/2 int int_{x<y} (1 + psi'(x)) (1 - psi'(y)) ln(|x - y| / Lambda),
    S_surf = 1/2 int sigma(psi'(t)) dt,

and the minimizer is read off from the curve: psi*' = Re Phi on the real line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev, legendre
from scipy import integrate

from .partitions import PeriodicPotential, ProfileFunction
from .swcurve import (
    SWCurve,
    band_gap,
    conformal_phi,
    fit_curve_from_xi,
    periods_a,
    prepotential,
    sum_zero_basis,
)

__all__ = [
    "conformal_phi",
    "psi_star_prime",
    "psi_star",
    "psi_star_values",
    "SurfaceTension",
    "action_plancherel",
    "action_surf",
    "total_action",
    "minimizer_action",
    "slackness_check",
    "VariationalReport",
    "log_potential",
    "xi_from_gaps",
    "facet_intercepts",
    "legendre_check",
]


def facet_slope(i: int, r: int) -> float:
    return -1 + 2 * i / r


def psi_star_prime(x, C: SWCurve):
    """Re Phi(x + i0); equals -1 left of the bands and +1 right of them."""
    return np.real(conformal_phi(np.asarray(x, dtype=float), C))


def _band_antiderivative(C, i, deg=160):
    """psi*(x) - psi*(left end) on band i (0-based), as a function of the Chebyshev angle."""
    lo, hi = band_gap(C).bands[i]
    m, h = 0.5 * (lo + hi), 0.5 * (hi - lo)

    def g(phi):
        x = np.clip(m - h * np.cos(phi), lo, hi)
        return psi_star_prime(x, C) * h * np.sin(phi)

    cheb = chebyshev.Chebyshev.interpolate(g, deg, domain=[0, math.pi])
    return cheb.integ(lbnd=0), m, h


def _band_pieces(C: SWCurve):
    """Per band: (lo, hi, antiderivative, m, h, value at lo)."""
    bg = band_gap(C)
    pieces = []
    base = -bg.band_endpoints[0]
    for i, (lo, hi) in enumerate(bg.bands):
        F, m, h = _band_antiderivative(C, i)
        pieces.append((lo, hi, F, m, h, base))
        base = base + float(F(math.pi))
        if i < C.r - 1:
            g_lo, g_hi = bg.gaps[i]
            base = base + facet_slope(i + 1, C.r) * (g_hi - g_lo)
    return pieces


def psi_star_values(x, C: SWCurve):
    """psi*(x) evaluated directly (no interpolation): spectral on bands, linear on facets."""
    x = np.asarray(x, dtype=float)
    out = np.abs(x).astype(float)
    pieces = _band_pieces(C)
    for i, (lo, hi, F, m, h, base) in enumerate(pieces):
        on = (x >= lo) & (x <= hi)
        phi = np.arccos(np.clip((m - x[on]) / h, -1, 1))
        out[on] = base + F(phi)
        if i + 1 < len(pieces):
            g_hi, end = pieces[i + 1][0], base + float(F(math.pi))
            gap = (x > hi) & (x < g_hi)
            out[gap] = end + facet_slope(i + 1, C.r) * (x[gap] - hi)
    return out


def psi_star(C: SWCurve, n_per_band: int = 400) -> ProfileFunction:
    """Piecewise-linear interpolant of psi* through exact values at knots.

    Knots are equally spaced in the Chebyshev angle on each band; each gap is
    one linear piece (a facet).
    """
    knots, values = [], []
    for lo, hi, F, m, h, base in _band_pieces(C):
        phi = np.linspace(0, math.pi, n_per_band + 1)
        x = m - h * np.cos(phi)
        x[0], x[-1] = lo, hi
        knots.append(x)
        values.append(base + F(phi))
    b = np.concatenate(knots)
    v = np.concatenate(values)
    slopes = np.clip(np.diff(v) / np.diff(b), -1.0, 1.0)
    # the last knot value must equal b[-1]; absorb the quadrature residual
    return _profile_with_residual(b, slopes, v)


@dataclass(frozen=True)
class _Profile(ProfileFunction):
    closure_residual: float = 0.0


def _profile_with_residual(b, slopes, v):
    resid = float(v[-1] - abs(b[-1]))
    return _Profile(b, slopes, resid)


# ---------------------------------------------------------------------------
# surface tension


@dataclass(frozen=True)
class SurfaceTension:
    """Convex piecewise-linear sigma on [-1, 1] with slopes sorted(xi), sigma(-1) = 0."""

    xi: PeriodicPotential

    @property
    def r(self) -> int:
        return self.xi.r

    @property
    def slopes(self) -> np.ndarray:
        return np.sort(np.asarray(self.xi.xi, dtype=float))

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([facet_slope(i, self.r) for i in range(self.r + 1)])

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(np.abs(s) > 1 + 1e-12):
            raise ValueError("slope outside [-1, 1]")
        bp = self.breakpoints
        vals = np.concatenate([[0.0], np.cumsum(self.slopes * np.diff(bp))])
        return np.interp(s, bp, vals)

    def kinks(self) -> np.ndarray:
        return np.diff(self.slopes)


def action_surf(psi: ProfileFunction, S: SurfaceTension) -> float:
    """1/2 int sigma(psi') over the breakpoints; exact for piecewise-linear psi.

    sigma(+-1) = 0 so the rays outside contribute nothing.
    """
    if not len(psi.breakpoints):
        return 0.0
    return 0.5 * float(np.dot(S(psi.slopes), np.diff(psi.breakpoints)))


def _G(t):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(t > 0, 0.5 * t * t * np.log(t) - 0.75 * t * t, 0.0)
    return out


def action_plancherel(psi: ProfileFunction, lambda_scale: float) -> float:
    """Exact S_pl for a piecewise-linear profile."""
    b = psi.breakpoints
    if not len(b):
        return 0.0
    s = psi.slopes
    u, v = 1 + s, 1 - s
    L = np.diff(b)
    total = float(np.dot(u * v, _G(L)))
    area = 0.5 * float(np.dot(u * v, L * L))
    n = len(L)
    for i in range(n - 1):
        if u[i] == 0:
            continue
        j = slice(i + 1, n)
        lo, hi = b[i], b[i + 1]
        c, d = b[i + 1:n], b[i + 2:n + 1]
        K = _G(d - lo) - _G(c - lo) - _G(d - hi) + _G(c - hi)
        total += u[i] * float(np.dot(v[j], K))
        area += u[i] * L[i] * float(np.dot(v[j], L[j]))
    return 0.5 * total - 0.5 * math.log(lambda_scale) * area


def total_action(psi: ProfileFunction, S: SurfaceTension, lambda_scale: float) -> float:
    return action_plancherel(psi, lambda_scale) + action_surf(psi, S)


def minimizer_action(C: SWCurve, S: SurfaceTension, n_per_band=(200, 400)) -> dict:
    """S(psi*) with Richardson extrapolation in the knot count (observed error ~ n^-3)."""
    vals = [total_action(psi_star(C, n), S, C.lambda_scale) for n in n_per_band]
    n1, n2 = n_per_band
    w = (n2 / n1) ** 3
    extrap = (w * vals[1] - vals[0]) / (w - 1)
    return {"value": extrap, "raw": vals, "error": abs(extrap - vals[1])}


# ---------------------------------------------------------------------------
# Euler-Lagrange conditions


def _kernel_L(x, lam):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x == 0, 0.0, x * np.log(np.abs(x) / lam) - x)


def _band_measure(C, i):
    """phi -> (y(phi), density) with psi'' dy = density dphi on band i."""
    e = band_gap(C).band_endpoints
    lo, hi = e[2 * i], e[2 * i + 1]
    m, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
    mask = np.ones(len(e), bool)
    mask[[2 * i, 2 * i + 1]] = False
    other = e[mask]

    def measure(phi):
        y = m - h * np.cos(phi)
        Q = np.abs(np.prod(np.subtract.outer(np.atleast_1d(y), other), axis=-1)) if len(other) else 1.0
        return y, 2 / (math.pi * C.r) * np.abs(C.dP(y)) / np.sqrt(Q)

    return measure, m, h


def _convolve(kernel, x, C):
    total = 0.0
    for i in range(C.r):
        measure, m, h = _band_measure(C, i)

        def f(phi):
            y, dens = measure(phi)
            return float(np.ravel(kernel(x - y) * dens)[0])

        pts = None
        if m - h < x < m + h:
            pts = [math.acos((m - x) / h)]
        total += integrate.quad(f, 0, math.pi, points=pts, limit=200, epsabs=1e-13, epsrel=1e-12)[0]
    return total


def convolution_L(x, C: SWCurve) -> float:
    """(L * psi*'')(x) with L(t) = t ln(|t|/Lambda) - t."""
    lam = C.lambda_scale
    return _convolve(lambda t: _kernel_L(t, lam), x, C)


def log_potential(x, C: SWCurve) -> float:
    """int ln(|x - y|/Lambda) psi*''(y) dy, the x-derivative of the L-convolution."""
    lam = C.lambda_scale
    return _convolve(lambda t: np.log(np.abs(t) / lam) if t != 0 else 0.0, x, C)


@dataclass
class VariationalReport:
    c0: float
    band_residuals: list
    gap_residuals: list
    gap_monotone: bool
    action_value: float
    tolerance: float
    passed: bool = field(default=False)

    def to_dict(self):
        return {
            "c0": self.c0,
            "band_residuals": list(map(float, self.band_residuals)),
            "gap_residuals": list(map(float, self.gap_residuals)),
            "gap_monotone": self.gap_monotone,
            "action_value": self.action_value,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def slackness_check(C: SWCurve, S: SurfaceTension | None = None, n_points: int = 9,
                    tolerance: float = 1e-5, psi: ProfileFunction | None = None) -> VariationalReport:
    """Check L * psi'' + c0 = xi_i on band i and in [xi_i, xi_{i+1}] on gap i.

    With ``psi`` given, psi'' is taken from that profile instead of psi*
    (used as a negative control).
    """
    if S is None:
        S = SurfaceTension(xi_from_gaps(C))
    xi = S.slopes
    bg = band_gap(C)
    conv = _profile_convolution(psi, C.lambda_scale) if psi is not None else (lambda x: convolution_L(x, C))
    t = np.cos(np.linspace(0.1, math.pi - 0.1, n_points))
    band_vals = []
    for lo, hi in bg.bands:
        xs = 0.5 * (lo + hi) - 0.5 * (hi - lo) * t
        band_vals.append(np.array([conv(x) for x in xs]))
    c0 = float(np.mean(np.concatenate([xi[i] - v for i, v in enumerate(band_vals)])))
    band_res = [float(np.max(np.abs(v + c0 - xi[i]))) for i, v in enumerate(band_vals)]
    gap_res, monotone = [], True
    for i, (lo, hi) in enumerate(bg.gaps):
        xs = np.linspace(lo, hi, n_points + 2)[1:-1]
        vals = np.array([conv(x) for x in xs]) + c0
        monotone &= bool(np.all(np.diff(vals) > 0))
        below = np.maximum(xi[i] - vals, 0)
        above = np.maximum(vals - xi[i + 1], 0)
        gap_res.append(float(np.max(below + above)))
    action = minimizer_action(C, S)["value"]
    passed = max(band_res + gap_res + [0.0]) <= tolerance and monotone
    return VariationalReport(c0, band_res, gap_res, monotone, action, tolerance, passed)


def _profile_convolution(psi: ProfileFunction, lam):
    """L * psi'' for a piecewise-linear psi (psi'' is a sum of point masses)."""
    b = psi.breakpoints
    slopes = np.concatenate([[-1.0], psi.slopes, [1.0]])
    jumps = np.diff(slopes)

    def conv(x):
        return float(np.dot(_kernel_L(x - b, lam), jumps))

    return conv


# ---------------------------------------------------------------------------
# chamber data from the curve


def _gap_integral_phi(C: SWCurve, n: int = 200) -> np.ndarray:
    x, w = legendre.leggauss(n)
    theta = 0.5 * math.pi * (x + 1)
    w = 0.5 * math.pi * w
    out = []
    for lo, hi in band_gap(C).gaps:
        m, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
        y = m - h * np.cos(theta)
        im = np.imag(conformal_phi(y, C))
        out.append(float(np.dot(w, im * h * np.sin(theta))))
    return np.array(out)


def xi_from_gaps(C: SWCurve) -> PeriodicPotential:
    """xi_{i+1} - xi_i = pi int_{gap i} Im Phi, normalized to mean zero."""
    if C.r == 1:
        return PeriodicPotential((0.0,))
    d = math.pi * _gap_integral_phi(C)
    xi = np.concatenate([[0.0], np.cumsum(d)])
    return PeriodicPotential(tuple(xi - xi.mean()))


@dataclass
class FacetData:
    intercepts: np.ndarray
    a: np.ndarray


def facet_intercepts(psi: ProfileFunction, r: int, min_length: float = 1e-9) -> FacetData:
    """Intercepts at x = 0 of the facets with slopes -1 + 2i/r, and a_i = (r/2)(I_{i-1} - I_i)."""
    b, s = psi.breakpoints, psi.slopes
    v = psi.knot_values
    I = np.zeros(r + 1)
    for i in range(1, r):
        target = facet_slope(i, r)
        hits = np.where(np.abs(s - target) < 1e-9)[0]
        if not len(hits):
            raise ValueError(f"no facet with slope {target}")
        lengths = b[hits + 1] - b[hits]
        k = hits[np.argmax(lengths)]
        if lengths.max() < min_length:
            raise ValueError(f"facet with slope {target} is too short to fit")
        I[i] = v[k] - target * b[k]
    a = 0.5 * r * (I[:-1] - I[1:])
    return FacetData(I, a)


# ---------------------------------------------------------------------------
# Legendre duality


@dataclass
class LegendreReport:
    xi: np.ndarray
    a_star: np.ndarray
    dual_action: float          # route (i): S(psi*)
    dual_prepotential: float    # route (ii): min_a F/r^2 - (xi, a)/r
    relative_gap: float
    gradient_lhs: np.ndarray    # -(d/dxi_i - d/dxi_{i+1}) F_dual
    gradient_rhs: np.ndarray    # (a_i - a_{i+1}) / r
    gradient_error: float
    grid_minimum_interior: bool
    hessian_eigenvalues: np.ndarray

    def to_dict(self):
        return {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.__dict__.items()}


def dual_free_energy(xi, lambda_scale) -> float:
    """F_dual(xi) as the action of the minimizer (route (i))."""
    xi = np.asarray(xi, float)
    C = fit_curve_from_xi(xi, lambda_scale)
    return minimizer_action(C, SurfaceTension(PeriodicPotential(tuple(xi))))["value"]


def legendre_check(xi, lambda_scale, step: float = 1e-3, grid_step: float = 0.05) -> LegendreReport:
    xi = np.asarray(xi, float)
    xi = xi - xi.mean()
    r = len(xi)
    C = fit_curve_from_xi(xi, lambda_scale)
    a_star = periods_a(C)
    a_star = a_star - a_star.mean()
    S = SurfaceTension(PeriodicPotential(tuple(xi)))
    route1 = minimizer_action(C, S)["value"]

    def objective(a):
        return prepotential(a, lambda_scale) / r ** 2 - float(np.dot(xi, a)) / r

    route2 = objective(a_star)
    U = sum_zero_basis(r)
    interior = True
    for j in range(r - 1):
        for sgn in (1, -1):
            if objective(a_star + sgn * grid_step * U[:, j]) < route2:
                interior = False
    if not interior:
        raise ValueError("grid minimum lies on the boundary; widen the grid")

    lhs, rhs = [], []
    for i in range(r - 1):
        e = np.zeros(r)
        e[i], e[i + 1] = 1.0, -1.0
        fp = dual_free_energy(xi + step * e, lambda_scale)
        fm = dual_free_energy(xi - step * e, lambda_scale)
        # (d/dxi_i - d/dxi_{i+1}) F_dual along e with |e|^2 = 2
        lhs.append(-(fp - fm) / (2 * step))
        rhs.append((a_star[i] - a_star[i + 1]) / r)
    lhs, rhs = np.array(lhs), np.array(rhs)
    grad_err = float(np.max(np.abs(lhs - rhs) / np.abs(rhs))) if r > 1 else 0.0

    eig = np.zeros(0)
    if r > 1:
        H = np.empty((r - 1, r - 1))
        for j in range(r - 1):
            for k in range(j, r - 1):
                d = step * 10
                ej, ek = d * U[:, j], d * U[:, k]
                fpp = dual_free_energy(xi + ej + ek, lambda_scale)
                fpm = dual_free_energy(xi + ej - ek, lambda_scale)
                fmp = dual_free_energy(xi - ej + ek, lambda_scale)
                fmm = dual_free_energy(xi - ej - ek, lambda_scale)
                H[j, k] = H[k, j] = (fpp - fpm - fmp + fmm) / (4 * d * d)
        eig = np.linalg.eigvalsh(H)
    gap = abs(route1 - route2) / max(abs(route2), 1e-300)
    return LegendreReport(xi, a_star, route1, route2, gap, lhs, rhs, grad_err, interior, eig)
