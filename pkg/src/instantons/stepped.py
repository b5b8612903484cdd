"""Stepped surfaces: Ronkin functions, amoebas, surface tension, complex Burgers.

The Ronkin function is evaluated with Jensen's formula in w (exact inner
integral) and piecewise Gauss-Legendre quadrature in arg z, split at the
angles where a root |w_j(z)| crosses e^y.  Between those angles the integrand
is analytic, so the outer quadrature converges geometrically.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np
from numpy.polynomial import legendre
from numpy.polynomial import polynomial as npoly
from scipy import optimize, spatial

TWO_PI = 2 * math.pi


# ---------------------------------------------------------------------------
# plane curves


@dataclass(frozen=True)
class PlaneCurve:
    """Laurent polynomial P(z, w) = sum c_ij z^i w^j, stored as ((i, j), c) pairs."""

    monomials: tuple

    def __post_init__(self):
        merged: dict[tuple[int, int], float] = {}
        for (i, j), c in self.monomials:
            merged[(int(i), int(j))] = merged.get((int(i), int(j)), 0.0) + float(c)
        mons = tuple(sorted((k, v) for k, v in merged.items() if v != 0.0))
        if len(mons) < 2:
            raise ValueError("a plane curve needs at least two monomials")
        object.__setattr__(self, "monomials", mons)

    @property
    def exponents(self) -> np.ndarray:
        return np.array([k for k, _ in self.monomials])

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([v for _, v in self.monomials])

    @property
    def is_segment(self) -> bool:
        e = self.exponents - self.exponents[0]
        return np.linalg.matrix_rank(e) < 2

    def newton_polygon(self) -> np.ndarray:
        """Vertices of the Newton polygon (counterclockwise); endpoints for a segment."""
        e = self.exponents.astype(float)
        if self.is_segment:
            d = e[-1] - e[0]
            t = (e - e[0]) @ d
            return e[[np.argmin(t), np.argmax(t)]]
        hull = spatial.ConvexHull(e)
        return e[hull.vertices]

    def contains_slope(self, s, tol: float = 1e-12) -> bool:
        s = np.asarray(s, dtype=float)
        if self.is_segment:
            a, b = self.newton_polygon()
            d = b - a
            t = np.dot(s - a, d) / np.dot(d, d)
            return bool(-tol <= t <= 1 + tol and np.linalg.norm(a + t * d - s) <= tol)
        v = self.newton_polygon()
        for k in range(len(v)):
            p, q = v[k], v[(k + 1) % len(v)]
            if (q[0] - p[0]) * (s[1] - p[1]) - (q[1] - p[1]) * (s[0] - p[0]) < -tol:
                return False
        return True

    def interior_lattice_points(self) -> list[tuple[int, int]]:
        if self.is_segment:
            return []
        v = self.newton_polygon()
        lo, hi = v.min(axis=0).astype(int), v.max(axis=0).astype(int)
        out = []
        for i in range(lo[0], hi[0] + 1):
            for j in range(lo[1], hi[1] + 1):
                if self.contains_slope((i, j), -1e-9):
                    out.append((i, j))
        return out

    def __call__(self, z, w):
        z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
        return sum(c * z ** i * w ** j for (i, j), c in self.monomials)

    def swap(self) -> "PlaneCurve":
        return PlaneCurve(tuple(((j, i), c) for (i, j), c in self.monomials))

    def w_coefficients(self, z):
        """A[..., k] = coefficient of w^(jmin + k) at the given z values, and jmin."""
        z = np.asarray(z, dtype=complex)
        e = self.exponents
        jmin, jmax = e[:, 1].min(), e[:, 1].max()
        A = np.zeros(z.shape + (jmax - jmin + 1,), dtype=complex)
        for (i, j), c in self.monomials:
            A[..., j - jmin] += c * z ** i
        return A, int(jmin)

    def to_json(self) -> str:
        return json.dumps({"monomials": [[i, j, c] for (i, j), c in self.monomials]})

    @classmethod
    def from_json(cls, text: str) -> "PlaneCurve":
        d = json.loads(text)
        return cls(tuple(((m[0], m[1]), m[2]) for m in d["monomials"]))


LINE = PlaneCurve((((1, 0), 1.0), ((0, 1), 1.0), ((0, 0), -1.0)))


def _batch_roots(A):
    """Roots of sum_k A[n, k] w^k for each row n (companion eigenvalues)."""
    d = A.shape[-1] - 1
    if d == 0:
        return np.zeros(A.shape[:-1] + (0,), dtype=complex)
    if d == 1:
        return (-A[..., 0] / A[..., 1])[..., None]
    comp = np.zeros(A.shape[:-1] + (d, d), dtype=complex)
    comp[..., 1:, :-1] = np.eye(d - 1)
    comp[..., :, -1] = -A[..., :-1] / A[..., -1:]
    return np.linalg.eigvals(comp)


def _jensen(P: PlaneCurve, theta, x, y):
    """Inner torus average over arg w, and the number of w-roots inside |w| < e^y."""
    z = np.exp(x + 1j * np.asarray(theta))
    A, jmin = P.w_coefficients(z)
    roots = _batch_roots(A)
    mod = np.abs(roots)
    lead = np.abs(A[..., -1])
    with np.errstate(divide="ignore"):
        val = np.log(lead) + np.sum(np.log(np.maximum(math.exp(y), mod)), axis=-1) + jmin * y
    count = jmin + np.sum(mod < math.exp(y), axis=-1)
    return val, count, mod


class RonkinError(RuntimeError):
    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


def _kinks(P, x, y, n0=512):
    """Angles in [0, 2pi) where the inside-root count changes."""
    th = np.linspace(0, TWO_PI, n0 + 1)
    _, cnt, _ = _jensen(P, th, x, y)
    out = []
    for k in range(n0):
        if cnt[k] != cnt[k + 1]:
            a, b = th[k], th[k + 1]
            ca = cnt[k]
            for _ in range(60):
                m = 0.5 * (a + b)
                if _jensen(P, np.array([m]), x, y)[1][0] == ca:
                    a = m
                else:
                    b = m
            out.append(0.5 * (a + b))
    return out


def _pieces(P, x, y):
    cuts = [0.0] + _kinks(P, x, y) + [TWO_PI]
    return [(a, b) for a, b in zip(cuts[:-1], cuts[1:]) if b > a]


def ronkin(P: PlaneCurve, x: float, y: float, tol: float = 1e-12) -> float:
    """R(x, y) = average of log|P| over the torus |z| = e^x, |w| = e^y."""
    pieces = _pieces(P, x, y)
    trace = []
    prev = None
    for n in (16, 32, 64, 128, 256):
        g, wts = legendre.leggauss(n)
        total = 0.0
        for a, b in pieces:
            th = 0.5 * (b - a) * g + 0.5 * (a + b)
            val = _jensen(P, th, x, y)[0]
            total += 0.5 * (b - a) * np.dot(wts, val)
        total /= TWO_PI
        trace.append((n, total))
        if prev is not None and abs(total - prev) <= tol * max(1.0, abs(total)):
            return float(total)
        prev = total
    raise RonkinError("Ronkin quadrature did not converge", trace)


def ronkin_gradient(P: PlaneCurve, x: float, y: float) -> np.ndarray:
    """grad R: dR/dy is the mean count of w-roots inside |w| < e^y (Jensen), dR/dx likewise in z."""
    out = []
    for Q, (u, v) in ((P.swap(), (y, x)), (P, (x, y))):
        total = 0.0
        for a, b in _pieces(Q, u, v):
            mid = np.array([0.5 * (a + b)])
            total += (b - a) * float(_jensen(Q, mid, u, v)[1][0])
        out.append(total / TWO_PI)
    return np.array(out)


@dataclass
class AmoebaStatus:
    """inside: the torus meets P = 0; borderline: decided by the margin tolerance alone."""

    inside: bool
    borderline: bool
    margin: float


def amoeba_membership(P: PlaneCurve, x: float, y: float, n: int = 2048, tol: float = 1e-7) -> AmoebaStatus:
    """Whether the torus |z| = e^x, |w| = e^y meets P = 0 (root scan in arg z)."""
    th = np.linspace(0, TWO_PI, n, endpoint=False)
    _, cnt, mod = _jensen(P, th, x, y)
    with np.errstate(divide="ignore"):
        margin = float(np.min(np.abs(np.log(mod) - y))) if mod.size else math.inf
    crossing = bool(np.any(cnt != cnt[0]))
    # roots can cross |w| = e^y in pairs without changing the count; a root on
    # the torus (within tol) still puts the point in the amoeba
    touching = margin <= tol
    return AmoebaStatus(crossing or touching, touching and not crossing, margin)


def compact_facets(P: PlaneCurve, xs, ys) -> list[tuple[int, int]]:
    """Interior lattice points of the Newton polygon realized as grad R on complement points of a grid."""
    interior = set(P.interior_lattice_points())
    found = set()
    for x in xs:
        for y in ys:
            if amoeba_membership(P, x, y, n=512).inside:
                continue
            g = np.rint(ronkin_gradient(P, x, y)).astype(int)
            if tuple(g) in interior:
                found.add(tuple(int(v) for v in g))
    return sorted(found)


# ---------------------------------------------------------------------------
# surface tension


def lobachevsky(theta: float) -> float:
    """Lobachevsky function -int_0^theta log|2 sin t| dt = Cl_2(2 theta)/2."""
    return float(mp.clsin(2, 2 * theta)) / 2


def line_surface_tension(s) -> float:
    """Closed form for z + w = 1: -(1/pi) sum Lobachevsky(pi p_i), p the barycentric slope."""
    s = np.asarray(s, dtype=float)
    p = (s[0], s[1], 1 - s[0] - s[1])
    return -sum(lobachevsky(math.pi * q) for q in p) / math.pi


def _edge_tension(P, s, v0, v1):
    """sigma on a boundary edge via the one-variable Ronkin function of the edge truncation."""
    g = int(round(np.gcd.reduce(np.abs((v1 - v0).astype(int)))))
    e = (v1 - v0) / g
    coeffs = np.zeros(g + 1)
    for (i, j), c in P.monomials:
        k = np.dot(np.array([i, j]) - v0, e) / np.dot(e, e)
        if abs(k - round(k)) < 1e-9 and np.allclose(v0 + round(k) * e, (i, j)):
            coeffs[int(round(k))] += c
    p = float(np.dot(s - v0, e) / np.dot(e, e))
    roots = np.abs(np.roots(coeffs[::-1])) if g > 0 else np.array([])
    lead = abs(coeffs[-1])

    def r(u):
        return math.log(lead) + float(np.sum(np.log(np.maximum(math.exp(u), roots))))

    if p <= 1e-12:
        return -math.log(abs(coeffs[0]))
    if p >= g - 1e-12:
        return -math.log(lead)
    res = optimize.minimize_scalar(lambda u: r(u) - p * u, bounds=(-60, 60), method="bounded",
                                   options={"xatol": 1e-12})
    return float(-res.fun)


def surface_tension_step(P: PlaneCurve, slope, tol: float = 1e-10) -> float:
    """sigma(s) = sup_{x,y} (s.(x,y) - R(x,y)) for s in the Newton polygon."""
    s = np.asarray(slope, dtype=float)
    if not P.contains_slope(s, 1e-12):
        raise ValueError(f"slope {s} lies outside the Newton polygon")
    verts = P.newton_polygon()
    for (i, j), c in P.monomials:
        if np.allclose(s, (i, j), atol=1e-12) and any(np.allclose(v, (i, j)) for v in verts):
            return -math.log(abs(c))
    for k in range(len(verts)):
        v0, v1 = verts[k], verts[(k + 1) % len(verts)]
        d = v1 - v0
        cross = d[0] * (s[1] - v0[1]) - d[1] * (s[0] - v0[0])
        t = np.dot(s - v0, d) / np.dot(d, d)
        if abs(cross) <= 1e-12 and -1e-12 <= t <= 1 + 1e-12:
            return _edge_tension(P, s, v0, v1)

    def fun(X):
        return ronkin(P, X[0], X[1]) - float(np.dot(s, X))

    def jac(X):
        return ronkin_gradient(P, X[0], X[1]) - s

    res = optimize.minimize(fun, np.zeros(2), jac=jac, method="BFGS", options={"gtol": tol})
    return float(-res.fun)


# ---------------------------------------------------------------------------
# complex Burgers equation


@dataclass(frozen=True)
class TernaryForm:
    """Homogeneous polynomial F(n1, n2, d) = sum c_ijk n1^i n2^j d^k.

    The real points are the lines n1 x + n2 y = d in the (x, y) chart; F is
    the dual of the frozen boundary.
    """

    terms: tuple

    def __post_init__(self):
        terms = tuple(sorted(((int(i), int(j), int(k)), float(c)) for (i, j, k), c in self.terms if c != 0))
        degs = {i + j + k for (i, j, k), _ in terms}
        if len(degs) != 1:
            raise ValueError("form must be homogeneous")
        object.__setattr__(self, "terms", terms)

    @property
    def degree(self) -> int:
        return sum(self.terms[0][0])

    def __call__(self, n1, n2, d):
        return sum(c * n1 ** i * n2 ** j * d ** k for (i, j, k), c in self.terms)

    def gradient(self, n1, n2, d):
        g1 = sum(c * i * n1 ** (i - 1) * n2 ** j * d ** k for (i, j, k), c in self.terms if i)
        g2 = sum(c * j * n1 ** i * n2 ** (j - 1) * d ** k for (i, j, k), c in self.terms if j)
        g3 = sum(c * k * n1 ** i * n2 ** j * d ** (k - 1) for (i, j, k), c in self.terms if k)
        return g1, g2, g3

    def to_json(self) -> str:
        return json.dumps({"terms": [[i, j, k, c] for (i, j, k), c in self.terms]})

    @classmethod
    def from_json(cls, text: str) -> "TernaryForm":
        return cls(tuple(((t[0], t[1], t[2]), t[3]) for t in json.loads(text)["terms"]))


@dataclass(frozen=True)
class BurgersData:
    """P(z, w) = 0 together with the characteristic relation.

    With a PlaneCurve Q:  Q(e^{-cx} z, e^{-cy} w) = 0.
    With a TernaryForm Q (c = 0, P the line):  Q(z, w, x z + y w) = 0, the
    characteristic lines of z_x/z + w_y/w = 0.
    """

    P: PlaneCurve
    Q: object
    c: float = 0.0

    def __post_init__(self):
        e = self.P.exponents
        if e[:, 1].max() - e[:, 1].min() != 1:
            raise ValueError("P must have degree one in w")
        if isinstance(self.Q, TernaryForm):
            if self.c != 0:
                raise ValueError("characteristic lines require c = 0")
            if self.P != LINE:
                raise ValueError("the linear characteristic form is implemented for the line z + w = 1")
        elif not isinstance(self.Q, PlaneCurve):
            raise TypeError("Q must be a PlaneCurve or a TernaryForm")

    @property
    def linear(self) -> bool:
        return isinstance(self.Q, TernaryForm)

    def w_of_z(self, z):
        A, jmin = self.P.w_coefficients(z)
        return -A[..., 0] / A[..., 1] if jmin == 0 else None

    def z_polynomial(self, x: float, y: float) -> np.ndarray:
        """Ascending coefficients of the polynomial in z whose roots solve the system at (x, y)."""
        if self.linear:
            # n1 = z, n2 = 1 - z, d = x z + y (1 - z)
            n1, n2, d = np.array([0.0, 1.0]), np.array([1.0, -1.0]), np.array([y, x - y])
            out = np.zeros(1)
            for (i, j, k), c in self.Q.terms:
                term = c * npoly.polymul(npoly.polypow(n1, i), npoly.polymul(npoly.polypow(n2, j), npoly.polypow(d, k)))
                out = npoly.polyadd(out, term)
            return out
        # w = -p0(z)/p1(z); clear denominators of Q(e^{-cx} z, e^{-cy} w)
        p0, p1 = _w_linear_parts(self.P)
        Qe = self.Q.exponents
        J = Qe[:, 1].max()
        jmin = Qe[:, 1].min()
        imin = min(Qe[:, 0].min(), 0)
        out = np.zeros(1)
        for (i, j), c in self.Q.monomials:
            scale = c * math.exp(-self.c * (i * x + j * y))
            zpart = np.zeros(i - imin + 1)
            zpart[-1] = 1.0
            term = npoly.polymul(zpart, npoly.polymul(npoly.polypow(-p0, j - jmin), npoly.polypow(p1, J - j)))
            out = npoly.polyadd(out, scale * term)
        return out


def _w_linear_parts(P: PlaneCurve):
    """P = p0(z) + p1(z) w, as ascending polynomial coefficient arrays (z-exponents shifted to >= 0)."""
    e = P.exponents
    imin = min(e[:, 0].min(), 0)
    jmin = e[:, 1].min()
    deg = e[:, 0].max() - imin
    p0, p1 = np.zeros(deg + 1), np.zeros(deg + 1)
    for (i, j), c in P.monomials:
        (p0 if j == jmin else p1)[i - imin] += c
    return p0, p1


def _trim(c, tol=1e-14):
    c = np.array(c, dtype=float)
    scale = np.max(np.abs(c)) if c.size else 0.0
    while len(c) > 1 and abs(c[-1]) <= tol * scale:
        c = c[:-1]
    return c


@dataclass
class BurgersPoint:
    z: complex
    w: complex
    grad: np.ndarray
    liquid: bool
    roots: np.ndarray


def frozen_gradient(t: float) -> np.ndarray:
    """Limit of (arg w, -arg z)/pi as the liquid root tends to real z = t from below."""
    if t < 0:
        return np.array([0.0, 1.0])
    if t < 1:
        return np.array([0.0, 0.0])
    return np.array([1.0, 0.0])


def burgers_solve(B: BurgersData, x: float, y: float, tol: float = 1e-10) -> BurgersPoint:
    """Solve at one point; liquid if a non-real root exists (the one with Im z < 0 is used)."""
    coeffs = _trim(B.z_polynomial(x, y))
    if len(coeffs) < 2:
        raise ValueError(f"no solutions at ({x}, {y})")
    roots = npoly.polyroots(coeffs)
    scale = max(1.0, float(np.max(np.abs(roots))))
    below = roots[roots.imag < -tol * scale]
    if len(below):
        z = below[np.argmin(below.imag)]
        w = complex(B.w_of_z(np.array([z]))[0])
        grad = np.array([np.angle(w), -np.angle(z)]) / math.pi
        return BurgersPoint(complex(z), w, grad, True, roots)
    return BurgersPoint(complex("nan"), complex("nan"), np.full(2, np.nan), False, roots)


def burgers_grid(B: BurgersData, xs, ys):
    """z, grad h (NaN where frozen) and the liquid mask on a grid indexed [iy, ix]."""
    xs, ys = np.asarray(xs), np.asarray(ys)
    Z = np.full((len(ys), len(xs)), np.nan + 0j)
    G = np.full((len(ys), len(xs), 2), np.nan)
    L = np.zeros((len(ys), len(xs)), bool)
    for a, y in enumerate(ys):
        for b, x in enumerate(xs):
            p = burgers_solve(B, x, y)
            if p.liquid:
                Z[a, b], G[a, b], L[a, b] = p.z, p.grad, True
    return Z, G, L


def pde_residual(B: BurgersData, x: float, y: float, h: float = 1e-3) -> float:
    """|z_x/z + w_y/w - c| by central differences."""
    def zw(px, py):
        p = burgers_solve(B, px, py)
        if not p.liquid:
            raise ValueError("stencil leaves the liquid region")
        return p.z, p.w

    zp, _ = zw(x + h, y)
    zm, _ = zw(x - h, y)
    z0, w0 = zw(x, y)
    _, wp = zw(x, y + h)
    _, wm = zw(x, y - h)
    return abs((zp - zm) / (2 * h) / z0 + (wp - wm) / (2 * h) / w0 - B.c)


# ---------------------------------------------------------------------------
# frozen boundary


@dataclass
class FrozenBoundary:
    points: np.ndarray          # (n, 2) samples in the (x, y) chart
    double_root: np.ndarray     # real double root z = t at each sample
    branch: np.ndarray          # index of the d-root branch
    cusps: list = field(default_factory=list)


def _support_roots(F: TernaryForm, phi):
    """Real roots d of F(cos phi, sin phi, d) = 0."""
    n1, n2 = math.cos(phi), math.sin(phi)
    coeffs = np.zeros(F.degree + 1)
    for (i, j, k), c in F.terms:
        coeffs[k] += c * n1 ** i * n2 ** j
    coeffs = _trim(coeffs)
    r = npoly.polyroots(coeffs) if len(coeffs) > 1 else np.array([])
    return np.sort(r[np.abs(r.imag) < 1e-9].real)


def _envelope_point(F: TernaryForm, phi, d):
    n1, n2 = math.cos(phi), math.sin(phi)
    g1, g2, g3 = F.gradient(n1, n2, d)
    dd = -(g1 * (-n2) + g2 * n1) / g3
    return np.array([d * n1 - dd * n2, d * n2 + dd * n1]), dd


def frozen_boundary(B: BurgersData, resolution: int = 2000) -> FrozenBoundary:
    """Envelope of the real characteristic lines (linear case) sampled over the line direction."""
    if not B.linear:
        raise NotImplementedError("frozen boundary tracing is implemented for characteristic-line data")
    F = B.Q
    pts, ts, br = [], [], []
    for phi in np.linspace(0, math.pi, resolution, endpoint=False):
        roots = _support_roots(F, phi)
        for k, d in enumerate(roots):
            # merged roots sit at a node of the dual curve (a bitangent), not on the envelope
            if len(roots) > 1 and np.min(np.abs(np.delete(roots, k) - d)) < 1e-6 * max(1.0, abs(d)):
                continue
            p, _ = _envelope_point(F, phi, d)
            n1, n2 = math.cos(phi), math.sin(phi)
            pts.append(p)
            ts.append(n1 / (n1 + n2) if abs(n1 + n2) > 1e-14 else math.inf)
            br.append(k)
    fb = FrozenBoundary(np.array(pts), np.array(ts), np.array(br))
    fb.cusps = find_cusps(B)
    return fb


def _radius_of_curvature(F, phi, k, h=1e-4):
    """d + d'' along the k-th real branch (zero at a cusp of the envelope)."""
    def d_of(p):
        r = _support_roots(F, p)
        return r[k] if k < len(r) else math.nan

    d0, dp, dm = d_of(phi), d_of(phi + h), d_of(phi - h)
    return d0 + (dp - 2 * d0 + dm) / (h * h)


@dataclass
class Cusp:
    point: np.ndarray
    t: float
    residuals: tuple


def find_cusps(B: BurgersData, n: int = 720) -> list[Cusp]:
    F = B.Q
    phis = np.linspace(1e-3, math.pi - 1e-3, n)
    out = []
    nroots = [len(_support_roots(F, p)) for p in phis]
    for k in range(max(nroots)):
        vals = np.array([_radius_of_curvature(F, p, k) for p in phis])
        for i in range(n - 1):
            a, b = vals[i], vals[i + 1]
            if np.isfinite(a) and np.isfinite(b) and a * b < 0 and nroots[i] == nroots[i + 1]:
                phi = optimize.brentq(lambda p: _radius_of_curvature(F, p, k), phis[i], phis[i + 1], xtol=1e-13)
                d = _support_roots(F, phi)[k]
                pt, _ = _envelope_point(F, phi, d)
                t = math.cos(phi) / (math.cos(phi) + math.sin(phi))
                out.append(Cusp(pt, t, triple_root_residuals(B, pt, t)))
    return out


def triple_root_residuals(B: BurgersData, point, t) -> tuple:
    """Normalized |q(t)|, |q'(t)|, |q''(t)| for the z-polynomial at a boundary point."""
    q = B.z_polynomial(point[0], point[1])
    scale = np.max(np.abs(q))
    return tuple(abs(npoly.polyval(t, npoly.polyder(q, m) if m else q)) / scale for m in range(3))


# ---------------------------------------------------------------------------
# the cardioid example


ISO = np.array([[1.0, -0.5], [0.0, math.sqrt(3) / 2]])   # (x, y) chart -> Euclidean projection plane


def cardioid(a: float, cusp, rotation: float, theta):
    """Points cusp + 2a(1 - cos t)(cos(t + rotation), sin(t + rotation)) in the projection plane."""
    theta = np.asarray(theta)
    r = 2 * a * (1 - np.cos(theta))
    return np.stack([cusp[0] + r * np.cos(theta + rotation), cusp[1] + r * np.sin(theta + rotation)], axis=-1)


def _ternary_monomials(deg):
    return [(i, j, deg - i - j) for i in range(deg + 1) for j in range(deg + 1 - i)]


def dual_form_from_lines(lines, deg: int = 3) -> tuple[TernaryForm, float]:
    """Fit the homogeneous form vanishing on lines (n1, n2, d) by an SVD null vector."""
    L = np.asarray(lines, dtype=float)
    L = L / np.linalg.norm(L, axis=1, keepdims=True)
    mons = _ternary_monomials(deg)
    M = np.stack([L[:, 0] ** i * L[:, 1] ** j * L[:, 2] ** k for i, j, k in mons], axis=1)
    _, sv, vt = np.linalg.svd(M)
    c = vt[-1]
    c = c / c[np.argmax(np.abs(c))]
    return TernaryForm(tuple((m, float(v)) for m, v in zip(mons, c) if abs(v) > 1e-13)), float(sv[-1] / sv[0])


def cardioid_example(a: float = 0.25, cusp=(0.55, 0.45), rotation: float = -math.pi / 2, n: int = 400):
    """Characteristic data whose frozen boundary is a cardioid in the Euclidean projection plane."""
    th = np.linspace(0.05, TWO_PI - 0.05, n)
    P = cardioid(a, cusp, rotation, th)
    dP = (cardioid(a, cusp, rotation, th + 1e-6) - cardioid(a, cusp, rotation, th - 1e-6)) / 2e-6
    nu = np.stack([-dP[:, 1], dP[:, 0]], axis=1)
    d = np.sum(nu * P, axis=1)
    # nu . (ISO @ (x, y)) = d  =>  (ISO^T nu) . (x, y) = d
    n_xy = nu @ ISO
    F, cond = dual_form_from_lines(np.column_stack([n_xy, d]))
    return BurgersData(LINE, F, 0.0), cond


def to_plane(points):
    return np.asarray(points) @ ISO.T


@dataclass
class CardioidFit:
    a: float
    cusp: np.ndarray
    rotation: float
    residual: float        # max geometric distance / bounding-box diameter


def _cardioid_distance(params, pts, n=4096):
    """Distance from each point to the cardioid: KD-tree seed, then a bounded 1D refinement."""
    a, cx, cy, rot = params
    th = np.linspace(0, TWO_PI, n, endpoint=False)
    _, idx = spatial.cKDTree(cardioid(a, (cx, cy), rot, th)).query(pts)
    step = TWO_PI / n
    out = np.empty(len(pts))
    for m, (p, k) in enumerate(zip(pts, idx)):
        f = lambda t: float(np.sum((cardioid(a, (cx, cy), rot, t) - p) ** 2))
        res = optimize.minimize_scalar(f, bounds=(th[k] - step, th[k] + step), method="bounded",
                                       options={"xatol": 1e-12})
        out[m] = math.sqrt(res.fun)
    return out


def fit_cardioid(points, cusp_guess=None, max_points: int = 300) -> CardioidFit:
    """Least-squares cardioid through points in the Euclidean plane; residual is geometric.

    The starting cusp is cusp_guess (or the point farthest from the far end);
    the axis points from it to the farthest sample.
    """
    pts = np.asarray(points, dtype=float)
    span = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    sub = pts[np.linspace(0, len(pts) - 1, min(max_points, len(pts))).astype(int)]
    if cusp_guess is None:
        far = pts[np.argmax(np.linalg.norm(pts - pts.mean(axis=0), axis=1))]
        cusp_guess = pts[np.argmax(np.linalg.norm(pts - far, axis=1))]
    cusp_guess = np.asarray(cusp_guess, dtype=float)
    dist = np.linalg.norm(pts - cusp_guess, axis=1)
    tip = pts[np.argmax(dist)]
    axis = math.atan2(tip[1] - cusp_guess[1], tip[0] - cusp_guess[0])
    guess = (dist.max() / 4, cusp_guess[0], cusp_guess[1], axis - math.pi)
    res = optimize.least_squares(lambda q: _cardioid_distance(q, sub), guess, x_scale=span,
                                 xtol=1e-12, ftol=1e-12)
    a, cx, cy, rot = res.x
    resid = float(np.max(_cardioid_distance(res.x, pts))) / span
    return CardioidFit(float(a), np.array([cx, cy]), float(rot % TWO_PI), resid)


def pokrovsky_talapov_exponent(B: BurgersData, point, t: float, normal, deltas=None) -> float:
    """Log-log slope of |grad h - frozen value| against distance into the liquid region."""
    deltas = np.geomspace(1e-7, 1e-4, 12) if deltas is None else np.asarray(deltas)
    g0 = frozen_gradient(t)
    vals = []
    for dl in deltas:
        p = burgers_solve(B, point[0] + dl * normal[0], point[1] + dl * normal[1])
        if not p.liquid:
            raise ValueError("probe did not enter the liquid region")
        vals.append(np.linalg.norm(p.grad - g0))
    slope = np.polyfit(np.log(deltas), np.log(vals), 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# height function


@dataclass
class HeightField:
    xs: np.ndarray
    ys: np.ndarray
    h: np.ndarray
    hx: np.ndarray
    hy: np.ndarray
    liquid: np.ndarray
    curl_residual: float


def _cumtrapz(f, x, axis):
    from scipy.integrate import cumulative_trapezoid

    return cumulative_trapezoid(f, x, axis=axis, initial=0)


def height_reconstruct(xs, ys, grad, liquid=None, h0: float = 0.0, tol: float | None = None,
                       interior_margin: int = 2, boundary_points=None,
                       min_distance: float = 0.0) -> HeightField:
    """Integrate grad h along x on the first row, then along y; report the curl residual.

    grad has shape (ny, nx, 2).  The curl residual is taken over nodes whose
    (2 margin + 1)^2 neighbourhood is liquid and, if boundary_points are given,
    that lie at least min_distance from them (grad h is singular at the boundary).
    """
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    hx, hy = grad[..., 0], grad[..., 1]
    if liquid is None:
        liquid = np.ones(hx.shape, bool)
    if np.any(~np.isfinite(grad)):
        raise ValueError("gradient field must be finite (fill frozen nodes first)")
    first_row = h0 + _cumtrapz(hx[0], xs, 0)
    h = first_row[None, :] + _cumtrapz(hy, ys, 0)
    dyhx = np.gradient(hx, ys, axis=0)
    dxhy = np.gradient(hy, xs, axis=1)
    curl = np.abs(dyhx - dxhy)
    m = interior_margin
    ok = np.zeros_like(liquid)
    ny, nx = liquid.shape
    for i in range(m, ny - m):
        for j in range(m, nx - m):
            ok[i, j] = liquid[i - m:i + m + 1, j - m:j + m + 1].all()
    if boundary_points is not None and min_distance > 0:
        X, Y = np.meshgrid(xs, ys)
        dist, _ = spatial.cKDTree(boundary_points).query(np.column_stack([X.ravel(), Y.ravel()]))
        ok &= dist.reshape(X.shape) >= min_distance
    resid = float(curl[ok].max()) if ok.any() else 0.0
    if tol is not None and resid > tol:
        raise ValueError(f"curl residual {resid} exceeds tolerance {tol}")
    return HeightField(xs, ys, h, hx, hy, liquid, resid)


def fill_frozen(grad, liquid, xs, ys, boundary: FrozenBoundary):
    """Frozen nodes take the facet gradient of the nearest traced boundary sample."""
    out = grad.copy()
    tree = spatial.cKDTree(boundary.points)
    X, Y = np.meshgrid(xs, ys)
    idx = np.argwhere(~liquid)
    if len(idx):
        _, k = tree.query(np.column_stack([X[~liquid], Y[~liquid]]))
        for (a, b), kk in zip(idx, k):
            out[a, b] = frozen_gradient(boundary.double_root[kk])
    return out
