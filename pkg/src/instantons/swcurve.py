"""Seiberg-Witten geometry of the curve Lambda^r (w + 1/w) = P(z).

Conventions.  w(z) is the root with |w| <= 1, analytic off the bands.  On the
real line, boundary values are taken from the upper half plane, where

    arg w(x + i0) = -pi * #{roots of P greater than x}   (off the bands).

Periods are oriented so that a lies in the chamber a_1 < ... < a_r and the
dual periods a_dual are decreasing:

    a_i = (1/pi) int_{band i} x d(arg w),
    a_dual_i - a_dual_{i+1} = -2 int_{gap i} ln|w| dx  (> 0).

The prepotential satisfies grad F = -a_dual on sum-zero vectors.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre
from scipy import optimize


class NotMaximal(ValueError):
    """P(z) = +-2 Lambda^r has non-real or repeated roots."""

    def __init__(self, roots, message="curve is not maximal"):
        super().__init__(f"{message}: roots {np.array2string(np.asarray(roots), precision=6)}")
        self.roots = np.asarray(roots)


class FitError(RuntimeError):
    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


@dataclass(frozen=True)
class SWCurve:
    """Monic P(z) = z^r + c_{r-2} z^{r-2} + ... + c_0, coefficients highest first."""

    coeffs: tuple
    lambda_scale: float

    def __post_init__(self):
        c = tuple(float(x) for x in self.coeffs)
        object.__setattr__(self, "coeffs", c)
        if len(c) < 2 or c[0] != 1.0:
            raise ValueError("P must be monic of degree >= 1")
        if c[1] != 0.0:
            raise ValueError("subleading coefficient of P must vanish")
        if not self.lambda_scale > 0:
            raise ValueError("lambda must be positive")

    @classmethod
    def from_free(cls, free, lambda_scale):
        """Build from the r-1 free coefficients (c_{r-2}, ..., c_0)."""
        return cls((1.0, 0.0) + tuple(free), lambda_scale)

    @property
    def r(self) -> int:
        return len(self.coeffs) - 1

    @property
    def free(self) -> np.ndarray:
        return np.array(self.coeffs[2:])

    @property
    def lam_r(self) -> float:
        return self.lambda_scale ** self.r

    def P(self, z):
        return np.polyval(self.coeffs, z)

    def dP(self, z):
        return np.polyval(np.polyder(self.coeffs), z)

    def roots(self) -> np.ndarray:
        return np.sort(np.roots(self.coeffs).real) if self.r > 1 else np.array([0.0])

    def to_json(self) -> str:
        return json.dumps({"r": self.r, "coeffs": list(self.coeffs), "lambda": self.lambda_scale})

    @classmethod
    def from_json(cls, text: str) -> "SWCurve":
        d = json.loads(text)
        c = tuple(d["coeffs"])
        if len(c) != d["r"] + 1:
            raise ValueError("coefficient count does not match r")
        return cls(c, d["lambda"])


@dataclass(frozen=True)
class BandGapStructure:
    band_endpoints: np.ndarray
    maximal: bool = True

    @property
    def bands(self) -> list[tuple[float, float]]:
        e = self.band_endpoints
        return [(e[2 * i], e[2 * i + 1]) for i in range(len(e) // 2)]

    @property
    def gaps(self) -> list[tuple[float, float]]:
        e = self.band_endpoints
        return [(e[2 * i + 1], e[2 * i + 2]) for i in range(len(e) // 2 - 1)]


def _polish(coeffs, x, steps=3):
    d = np.polyder(coeffs)
    for _ in range(steps):
        dx = np.polyval(coeffs, x) / np.polyval(d, x)
        x = x - dx
    return x


def band_gap(C: SWCurve, rtol: float = 1e-9) -> BandGapStructure:
    r, L = C.r, C.lam_r
    roots = []
    for sign in (1, -1):
        shifted = np.array(C.coeffs)
        shifted[-1] -= sign * 2 * L
        roots.append(np.roots(shifted) if r > 1 else np.array([sign * 2 * L]))
    allroots = np.concatenate(roots)
    scale = max(1.0, np.max(np.abs(allroots)))
    if np.any(np.abs(allroots.imag) > rtol * scale):
        raise NotMaximal(allroots)
    e = []
    for sign, rr in zip((1, -1), roots):
        shifted = np.array(C.coeffs)
        shifted[-1] -= sign * 2 * L
        e.extend(_polish(shifted, np.sort(rr.real)) if r > 1 else rr.real)
    e = np.sort(np.array(e))
    if np.any(np.diff(e) <= rtol * scale):
        raise NotMaximal(allroots, "repeated roots")
    return BandGapStructure(e)


def is_maximal(C: SWCurve) -> bool:
    try:
        band_gap(C)
        return True
    except NotMaximal:
        return False


# ---------------------------------------------------------------------------
# branch of w


def log_w(z, C: SWCurve):
    """ln w(z) on the upper half plane and on the real axis from above."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    real = np.abs(z.imag) == 0
    if np.any(~real):
        out[~real] = _log_w_complex(z[~real], C)
    if np.any(real):
        out[real] = _log_w_real(z[real].real, C)
    return out if out.shape else complex(out)


def _log_w_complex(z, C):
    P = C.P(z)
    s = np.sqrt(1 - 4 * C.lam_r ** 2 / P ** 2)
    zr = np.roots(C.coeffs) if C.r > 1 else np.array([0.0])
    total = C.r * math.log(C.lambda_scale) + math.log(2) - np.log(1 + s)
    for zj in zr:
        total = total - np.log(z - zj)
    return total


def _log_w_real(x, C):
    bg = band_gap(C)
    r, L = C.r, C.lam_r
    e = bg.band_endpoints
    P = C.P(x)
    out = np.empty(x.shape, dtype=complex)
    # number of bands entirely to the right, and band membership
    for idx in range(len(x)):
        xi = x[idx]
        k = int(np.searchsorted(e, xi, side="right"))  # endpoints <= x
        if k % 2 == 1 and xi < e[k]:  # inside band (k+1)//2, 1-based
            i = (k + 1) // 2
            sgn = (-1) ** (r - i + 1)
            c = np.clip(sgn * P[idx] / (2 * L), -1.0, 1.0)
            out[idx] = 1j * (-math.pi * (r - i + 1) + math.acos(c))
        elif k % 2 == 1:
            i = (k + 1) // 2
            out[idx] = 1j * (-math.pi * (r - i))
        else:
            right = r - k // 2
            out[idx] = -_arccosh_gap(xi, P[idx], C, e) - 1j * math.pi * right
    return out


def _arccosh_gap(x, Px, C, e):
    """-ln|w| = arccosh(|P| / 2 Lambda^r), accurate near band endpoints."""
    L = C.lam_r
    y2m1 = np.prod(x - e) / (4 * L * L)
    y = abs(Px) / (2 * L)
    y2m1 = max(y2m1, 0.0)
    return math.log1p(y2m1 / (y + 1) + math.sqrt(y2m1))


def w_branch(z, C: SWCurve):
    return np.exp(log_w(z, C))


def conformal_phi(z, C: SWCurve):
    """Phi = 1 + 2 ln w / (pi i r): Re Phi is the limit-shape slope on the real line."""
    return 1 + 2 * np.asarray(log_w(z, C)) / (1j * math.pi * C.r)


def ds_density(z, C: SWCurve):
    """dS/dz = (1/2 pi i) z d ln w/dz off the real axis."""
    z = np.asarray(z, dtype=complex)
    P = C.P(z)
    s = np.sqrt(1 - 4 * C.lam_r ** 2 / P ** 2)
    return z * (-C.dP(z) / (P * s)) / (2j * math.pi)


# ---------------------------------------------------------------------------
# periods


def _gauss(n):
    x, w = legendre.leggauss(n)
    theta = 0.5 * math.pi * (x + 1)
    return theta, 0.5 * math.pi * w


def _other_factor(y, e, skip):
    mask = np.ones(len(e), bool)
    mask[list(skip)] = False
    return np.prod(y[:, None] - e[None, mask], axis=1)


def band_density(C: SWCurve, i: int, n: int = 64):
    """Nodes y and weights so that sum weights * f(y) = int_band f d(arg w); 0-based band i."""
    e = band_gap(C).band_endpoints
    lo, hi = e[2 * i], e[2 * i + 1]
    m, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
    theta, wts = _gauss(n)
    y = m - h * np.cos(theta)
    Q = np.abs(_other_factor(y, e, (2 * i, 2 * i + 1)))
    dens = np.abs(C.dP(y)) / np.sqrt(Q)
    return y, wts * dens


def _converged(fn, n0=32, tol=1e-13, nmax=4096):
    n, prev = n0, fn(n0)
    while n < nmax:
        n *= 2
        cur = fn(n)
        if np.max(np.abs(cur - prev)) <= tol * max(1.0, np.max(np.abs(cur))):
            return cur
        prev = cur
    raise FitError("quadrature did not converge", prev, np.max(np.abs(cur - prev)))


@dataclass
class Periods:
    a: np.ndarray
    a_dual: np.ndarray
    checksum: float = 0.0
    gap_differences: np.ndarray = field(default_factory=lambda: np.zeros(0))


def periods_a(C: SWCurve, tol: float = 1e-13) -> np.ndarray:
    r = C.r
    if r == 1:
        band_gap(C)
        return np.zeros(1)

    def compute(n):
        out = []
        for i in range(r):
            y, w = band_density(C, i, n)
            out.append(np.dot(w, y) / math.pi)
        return np.array(out)

    return _converged(compute, tol=tol)


def period_checksum(C: SWCurve) -> float:
    """Raw sum of a_i before any normalization (zero up to quadrature error)."""
    return float(np.sum(periods_a(C)))


def gap_integrals(C: SWCurve, tol: float = 1e-13) -> np.ndarray:
    """-2 int_{gap i} ln|w| dx for each gap (the oval areas)."""
    bg = band_gap(C)
    gaps = bg.gaps
    e = bg.band_endpoints

    def compute(n):
        theta, wts = _gauss(n)
        out = []
        for lo, hi in gaps:
            m, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
            y = m - h * np.cos(theta)
            vals = np.array([_arccosh_gap(t, C.P(t), C, e) for t in y])
            out.append(2 * h * np.dot(wts * np.sin(theta), vals))
        return np.array(out)

    if not gaps:
        return np.zeros(0)
    return _converged(compute, tol=tol)


def periods_a_dual(C: SWCurve) -> Periods:
    d = gap_integrals(C)
    r = C.r
    tail = np.concatenate([np.cumsum(d[::-1])[::-1], [0.0]]) if r > 1 else np.zeros(1)
    a_dual = tail - tail.mean()
    a = periods_a(C)
    return Periods(a - a.mean(), a_dual, float(np.sum(a)), d)


def oval_area(C: SWCurve, gap: int, n: int = 4000) -> float:
    """Shoelace area of the closed image of the real oval over a gap under (x, ln|w|)."""
    lo, hi = band_gap(C).gaps[gap]
    t = np.linspace(0, math.pi, n)
    x = 0.5 * (lo + hi) - 0.5 * (hi - lo) * np.cos(t)
    lw = np.log(np.abs(w_branch(x, C)))
    xs = np.concatenate([x, x[::-1]])
    ys = np.concatenate([lw, -lw[::-1]])
    return 0.5 * abs(np.dot(xs, np.roll(ys, -1)) - np.dot(ys, np.roll(xs, -1)))


# ---------------------------------------------------------------------------
# inverse maps


def _newton(residual, c0, lam, tol=1e-12, maxiter=60, step=1e-7):
    c = np.array(c0, float)
    f = residual(c)
    for _ in range(maxiter):
        nf = np.linalg.norm(f)
        if nf < tol * max(1.0, np.max(np.abs(c))):
            return c, nf
        J = np.empty((len(f), len(c)))
        for j in range(len(c)):
            h = step * max(1.0, abs(c[j]))
            cp, cm = c.copy(), c.copy()
            cp[j] += h
            cm[j] -= h
            J[:, j] = (residual(cp) - residual(cm)) / (2 * h)
        dc = np.linalg.solve(J, -f)
        t = 1.0
        while t > 1e-6:
            cand = c + t * dc
            try:
                fc = residual(cand)
            except (NotMaximal, FitError):
                t *= 0.5
                continue
            if np.linalg.norm(fc) < nf:
                c, f = cand, fc
                break
            t *= 0.5
        else:
            raise FitError("Newton iteration stalled", SWCurve.from_free(c, lam), nf)
    nf = np.linalg.norm(f)
    if nf < 1e3 * tol * max(1.0, np.max(np.abs(c))):
        return c, nf
    raise FitError("Newton iteration did not converge", SWCurve.from_free(c, lam), nf)


def _poly_from_roots(a):
    c = np.poly(np.asarray(a, float)).real
    c[1] = 0.0
    return c[2:]


def fit_curve_from_a(a_target, lambda_scale, initial: SWCurve | None = None, tol=1e-12) -> SWCurve:
    a = np.sort(np.asarray(a_target, float))
    if not np.allclose(a, np.asarray(a_target, float)):
        raise ValueError("a must be increasing")
    if abs(a.sum()) > 1e-10 * max(1.0, np.abs(a).max()):
        raise ValueError("a must sum to zero")
    r = len(a)
    if r == 1:
        return SWCurve((1.0, 0.0), lambda_scale)

    def residual_for(lam):
        def res(c):
            return periods_a(SWCurve.from_free(c, lam))[:-1] - a[:-1]
        return res

    c0 = initial.free if initial is not None else _poly_from_roots(a)
    try:
        c, _ = _newton(residual_for(lambda_scale), c0, lambda_scale, tol)
        return SWCurve.from_free(c, lambda_scale)
    except (FitError, NotMaximal, np.linalg.LinAlgError):
        pass
    # continuation in Lambda from a weakly coupled curve
    lams = np.geomspace(1e-3 * lambda_scale, lambda_scale, 12)
    c = _poly_from_roots(a)
    for lam in lams:
        c, _ = _newton(residual_for(lam), c, lam, tol)
    return SWCurve.from_free(c, lambda_scale)


def perturbative_gradient(a, lambda_scale) -> np.ndarray:
    """grad F_pert with F_pert = sum_{k != l} (a_kl^2/2) ln|a_kl/Lambda| - 3 a_kl^2/4."""
    a = np.asarray(a, float)
    d = a[:, None] - a[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(d == 0, 0.0, d * np.log(np.abs(d) / lambda_scale) - d)
    return 2 * f.sum(axis=1)


def perturbative_prepotential(a, lambda_scale) -> float:
    a = np.asarray(a, float)
    d = a[:, None] - a[None, :]
    off = ~np.eye(len(a), dtype=bool)
    dd = d[off]
    return float(np.sum(dd ** 2 / 2 * np.log(np.abs(dd) / lambda_scale) - 0.75 * dd ** 2))


def fit_curve_from_xi(xi, lambda_scale, tol=1e-12) -> SWCurve:
    xi = np.asarray(xi, float)
    r = len(xi)
    if np.any(np.diff(xi) <= 0):
        raise ValueError("xi must be strictly increasing (interior of the chamber)")
    target = -r * (xi - xi.mean())
    if r == 1:
        return SWCurve((1.0, 0.0), lambda_scale)

    def pert(b):
        a = np.concatenate([b, [-b.sum()]])
        return (-perturbative_gradient(a, lambda_scale) - target)[:-1]

    guess = np.linspace(-1, 1, r) * max(1.0, np.ptp(target))
    b = optimize.fsolve(pert, guess[:-1], xtol=1e-12)
    a0 = np.sort(np.concatenate([b, [-b.sum()]]))
    try:
        start = fit_curve_from_a(a0, lambda_scale)
    except (FitError, NotMaximal):
        start = SWCurve.from_free(_poly_from_roots(a0), lambda_scale)

    def res(c):
        return periods_a_dual(SWCurve.from_free(c, lambda_scale)).a_dual[:-1] - target[:-1]

    c, _ = _newton(res, start.free, lambda_scale, tol)
    return SWCurve.from_free(c, lambda_scale)


# ---------------------------------------------------------------------------
# prepotential


def sum_zero_basis(r: int) -> np.ndarray:
    """Orthonormal basis (columns) of the sum-zero hyperplane."""
    q, _ = np.linalg.qr(np.eye(r) - 1.0 / r)
    return q[:, : r - 1]


def dual_from_a(a, lambda_scale) -> np.ndarray:
    return periods_a_dual(fit_curve_from_a(a, lambda_scale)).a_dual


def _ray_integrand(a, u, lambda_scale):
    """d/du F_inst(a/u) = u^-2 <a_dual(a/u) + grad F_pert(a/u), a>."""
    b = a / u
    diff = periods_a_dual(fit_curve_from_a(b, lambda_scale)).a_dual + perturbative_gradient(b, lambda_scale)
    return float(np.dot(diff, a)) / (u * u)


def prepotential(a_target, lambda_scale, reference=None, nodes: int = 16, terms: int = 3) -> float:
    """F(a), normalized by F - F_pert -> 0 as a -> infinity along rays.

    F_inst(a/u) is a series in u^{2r}, so d/du F_inst(a/u) = sum_k c_k u^{2rk-3}.
    Near u = 0 the integrand is a small difference of large periods; there the
    first ``terms`` powers are fitted on [u_c, 2 u_c] and integrated exactly,
    with Gauss-Legendre on [u_c, 1].  u_c puts the separations at 10 Lambda.

    With reference=(a_ref, F_ref) the value is shifted so that F(a_ref) = F_ref.
    """
    a = np.asarray(a_target, float)
    r = len(a)
    if r == 1:
        # Z_inst = exp(Lambda^2/eps^2) exactly, so F = -Lambda^2 for any a
        return -lambda_scale ** 2 if reference is None else float(reference[1])
    sep = np.min(np.abs(np.diff(np.sort(a))))
    u_c = min(1.0, sep / (10 * lambda_scale))
    total = perturbative_prepotential(a, lambda_scale)
    x, w = legendre.leggauss(nodes)
    if u_c < 1.0:
        u = u_c + 0.5 * (1 - u_c) * (x + 1)
        total += 0.5 * (1 - u_c) * sum(wi * _ray_integrand(a, ui, lambda_scale) for ui, wi in zip(u, w))
    powers = np.array([2 * r * k - 3 for k in range(1, terms + 1)], float)
    hi = min(1.0, 2 * u_c)
    us = u_c + 0.5 * (hi - u_c) * (1 - np.cos(np.pi * (np.arange(2 * terms) + 0.5) / (2 * terms)))
    vals = np.array([_ray_integrand(a, ui, lambda_scale) for ui in us])
    coef = np.linalg.lstsq(us[:, None] ** powers[None, :], vals, rcond=None)[0]
    total += float(np.sum(coef * u_c ** (powers + 1) / (powers + 1)))
    if reference is not None:
        a_ref, f_ref = reference
        total += f_ref - prepotential(a_ref, lambda_scale, None, nodes, terms)
    return float(total)


def integrate_gradient(points, lambda_scale, nodes: int = 12) -> float:
    """F(points[-1]) - F(points[0]) along a polyline, from grad F = -a_dual."""
    pts = [np.asarray(p, float) for p in points]
    x, w = legendre.leggauss(nodes)
    total = 0.0
    for p, q in zip(pts[:-1], pts[1:]):
        for xi, wi in zip(x, w):
            t = 0.5 * (xi + 1)
            total += 0.5 * wi * np.dot(-dual_from_a(p + t * (q - p), lambda_scale), q - p)
    return float(total)


@dataclass
class Hessian:
    matrix: np.ndarray          # r x r, acting on sum-zero vectors
    reduced: np.ndarray         # (r-1) x (r-1) in the orthonormal basis
    asymmetry: float
    eigenvalues: np.ndarray


def period_jacobian(C: SWCurve, step: float = 1e-6) -> np.ndarray:
    """d a_dual / d a on the sum-zero hyperplane, via derivatives in the coefficients."""
    c = C.free
    r = C.r
    Da = np.empty((r, r - 1))
    Dd = np.empty((r, r - 1))
    for j in range(r - 1):
        h = step * max(1.0, abs(c[j]))
        cp, cm = c.copy(), c.copy()
        cp[j] += h
        cm[j] -= h
        pp = periods_a_dual(SWCurve.from_free(cp, C.lambda_scale))
        pm = periods_a_dual(SWCurve.from_free(cm, C.lambda_scale))
        Da[:, j] = (pp.a - pm.a) / (2 * h)
        Dd[:, j] = (pp.a_dual - pm.a_dual) / (2 * h)
    U = sum_zero_basis(r)
    return Dd @ np.linalg.inv(U.T @ Da) @ U.T


def prepotential_hessian(a_target=None, lambda_scale=None, curve: SWCurve | None = None) -> Hessian:
    if curve is None:
        curve = fit_curve_from_a(a_target, lambda_scale)
    U = sum_zero_basis(curve.r)
    J = period_jacobian(curve)
    red = -U.T @ J @ U
    asym = float(np.max(np.abs(red - red.T)))
    sym = 0.5 * (red + red.T)
    return Hessian(U @ sym @ U.T, sym, asym, np.linalg.eigvalsh(sym))


# ---------------------------------------------------------------------------
# reports


def write_periods_csv(path, C: SWCurve):
    p = periods_a_dual(C)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["i", "a", "a_dual"])
        for i, (x, y) in enumerate(zip(p.a, p.a_dual), start=1):
            wr.writerow([i, f"{x:.17g}", f"{y:.17g}"])
