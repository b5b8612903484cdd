"""Exact combinatorics of integer partitions.

Half-integers (particle positions, shifts times r) are carried as doubled
integers or :class:`fractions.Fraction` so that every identity here holds
exactly.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np


@dataclass(frozen=True)
class Partition:
    """A partition stored as a weakly decreasing tuple of positive parts."""

    parts: tuple[int, ...] = ()
    size: int = field(init=False, compare=False)

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        if any(p < 0 for p in parts):
            raise ValueError(f"negative part in {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError(f"parts not weakly decreasing: {parts}")
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "size", sum(parts))

    def __len__(self):
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def __repr__(self):
        return f"Partition({list(self.parts)})"

    def part(self, i: int) -> int:
        """Zero-based part with implicit trailing zeros."""
        return self.parts[i] if i < len(self.parts) else 0

    def conjugate(self) -> Partition:
        if not self.parts:
            return self
        return Partition(tuple(sum(1 for p in self.parts if p > j) for j in range(self.parts[0])))

    def cells(self) -> Iterator[tuple[int, int]]:
        """Cells (row, column), zero-based, row-major."""
        for i, p in enumerate(self.parts):
            for j in range(p):
                yield i, j

    def hooks(self) -> list[int]:
        conj = self.conjugate().parts
        return [self.parts[i] - j + conj[j] - i - 1 for i, j in self.cells()]

    def addable(self) -> list[int]:
        """Rows where a box can be added (row len(parts) starts a new row)."""
        rows = []
        for i in range(len(self.parts) + 1):
            if i == 0 or self.part(i) < self.parts[i - 1]:
                rows.append(i)
        return rows

    def removable(self) -> list[int]:
        return [i for i in range(len(self.parts)) if self.part(i) > self.part(i + 1)]

    def add_box(self, row: int) -> Partition:
        parts = list(self.parts) + [0]
        parts[row] += 1
        return Partition(tuple(parts))

    def remove_box(self, row: int) -> Partition:
        parts = list(self.parts)
        parts[row] -= 1
        return Partition(tuple(parts))

    def to_json(self) -> str:
        return json.dumps(list(self.parts))

    @classmethod
    def from_json(cls, text: str) -> Partition:
        return cls(tuple(json.loads(text)))


EMPTY = Partition()


def partitions_of(n: int) -> Iterator[Partition]:
    """All partitions of n in reverse lexicographic order."""
    for parts in _partitions_tuple(n, n):
        yield Partition(parts)


@lru_cache(maxsize=None)
def _partitions_tuple(n: int, largest: int) -> tuple[tuple[int, ...], ...]:
    if n == 0:
        return ((),)
    out = []
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions_tuple(n - first, first):
            out.append((first,) + rest)
    return tuple(out)


def partitions_up_to(n: int) -> Iterator[Partition]:
    for k in range(n + 1):
        yield from partitions_of(k)


def dim_partition(lam: Partition) -> int:
    """Number of standard Young tableaux of shape lam (hook length formula)."""
    n = lam.size
    prod = 1
    for h in lam.hooks():
        prod *= h
    return math.factorial(n) // prod


def plancherel_mass(lam: Partition) -> Fraction:
    """(dim lam)^2 / |lam|!"""
    return Fraction(dim_partition(lam) ** 2, math.factorial(lam.size))


# ---------------------------------------------------------------------------
# particles


@dataclass(frozen=True)
class FermionConfig:
    """Particle positions x = lambda_i - i + 1/2, stored doubled (odd ints).

    ``points2`` lists the first ``cutoff`` positions in decreasing order; all
    positions below the last stored one are occupied.
    """

    points2: tuple[int, ...]
    cutoff: int

    def __post_init__(self):
        pts = self.points2
        if len(pts) != self.cutoff:
            raise ValueError("cutoff must equal the number of stored points")
        if any(p % 2 == 0 for p in pts):
            raise ValueError("doubled half-integers must be odd")
        if any(pts[i] <= pts[i + 1] for i in range(len(pts) - 1)):
            raise ValueError("points must be strictly decreasing")

    @property
    def points(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(p, 2) for p in self.points2)


def fermion_set(lam: Partition, depth: int) -> FermionConfig:
    if depth < len(lam):
        raise ValueError(f"depth {depth} is smaller than the number of parts {len(lam)}")
    return FermionConfig(tuple(2 * (lam.part(i) - i - 1) + 1 for i in range(depth)), depth)


# ---------------------------------------------------------------------------
# r-quotients


def rho_vector(r: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(r + 1, 2) - k for k in range(1, r + 1))


@dataclass(frozen=True)
class RQuotients:
    r: int
    quotients: tuple[Partition, ...]
    shifts: tuple[Fraction, ...]

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be positive")
        if len(self.quotients) != self.r or len(self.shifts) != self.r:
            raise ValueError("need exactly r quotients and r shifts")
        object.__setattr__(self, "shifts", tuple(Fraction(s) for s in self.shifts))
        if sum(self.shifts) != 0:
            raise ValueError(f"shifts must sum to zero, got {self.shifts}")
        for rk, s in zip(rho_vector(self.r), self.shifts):
            if (self.r * s - rk) % self.r != 0:
                raise ValueError(f"r*s = {self.r * s} is not congruent to rho mod r")

    def size(self) -> Fraction:
        """Size of the combined partition from the quotient data."""
        r = self.r
        return (r * (sum(q.size for q in self.quotients) + sum(s * s for s in self.shifts) / 2)
                + Fraction(1 - r * r, 24))

    def to_json(self) -> str:
        return json.dumps({
            "r": self.r,
            "quotients": [list(q.parts) for q in self.quotients],
            "shifts": [[s.numerator, s.denominator] for s in self.shifts],
        })

    @classmethod
    def from_json(cls, text: str) -> RQuotients:
        d = json.loads(text)
        return cls(d["r"], tuple(Partition(tuple(q)) for q in d["quotients"]),
                   tuple(Fraction(n, m) for n, m in d["shifts"]))


def _maya_charge(occupied: set[int], lowest: int) -> int:
    """Charge of the half-integer set {m + 1/2 : m in occupied}.

    Every label below ``lowest`` (which must be <= 0) is occupied.
    """
    positive = sum(1 for m in occupied if m >= 0)
    holes = sum(1 for m in range(lowest, 0) if m not in occupied)
    return positive - holes


def r_quotients(lam: Partition, r: int) -> RQuotients:
    """Split the particles of lam into residue classes mod r.

    Class k (1-based) holds the positions congruent to 1/2 - k mod r; this is
    the only assignment compatible with r*s = rho mod r.
    """
    if r < 1:
        raise ValueError("r must be positive")
    depth = len(lam) + r
    pts2 = fermion_set(lam, depth).points2
    floor2 = pts2[-1]
    quotients, shifts = [], []
    for k in range(1, r + 1):
        c2 = 1 - 2 * k
        labels = {(x2 - c2) // (2 * r) for x2 in pts2 if (x2 - c2) % (2 * r) == 0}
        # every class is dense below the window; smallest label of this class in range
        lowest = -((c2 - floor2) // (2 * r))
        labels = {m for m in labels if m >= lowest}
        q = _maya_charge(labels, lowest)
        # T = {m + 1/2}, shifted T - q is the particle set of the quotient
        ts = sorted((m - q for m in labels), reverse=True)
        parts = []
        for j, t in enumerate(ts, start=1):
            parts.append(t + j)  # (t + 1/2) + j - 1/2
        quotients.append(Partition(tuple(p for p in parts if p > 0)))
        shifts.append(Fraction(c2, 2 * r) - Fraction(1, 2) + q)
    return RQuotients(r, tuple(quotients), tuple(shifts))


def combine_quotients(q: RQuotients) -> Partition:
    """Inverse of :func:`r_quotients`."""
    r = q.r
    # lam has at most |lam| parts, so every position below -|lam| - 1/2 is occupied;
    # list each class down past a common floor below that
    floor = int(q.size()) + r + 1
    points = []
    lows = []
    for mu, s in zip(q.quotients, q.shifts):
        depth = len(mu) + math.ceil(floor / r + abs(s)) + 2
        xs = [r * (Fraction(2 * (mu.part(j) - j) - 1, 2) + s) for j in range(depth)]
        points.extend(xs)
        lows.append(xs[-1])
    threshold = max(lows)
    points = sorted((x for x in points if x > threshold), reverse=True)
    parts = []
    for i, x in enumerate(points, start=1):
        val = x + i - Fraction(1, 2)
        if val.denominator != 1:
            raise ValueError("inconsistent quotient data")
        parts.append(int(val))
    if any(p < 0 for p in parts):
        raise ValueError("shifts do not describe a charge-zero configuration")
    return Partition(tuple(parts))


# ---------------------------------------------------------------------------
# periodic potential


@dataclass(frozen=True)
class PeriodicPotential:
    """Mean-zero period-r function on Z + 1/2, xi[k-1] = xi(1/2 - k)."""

    xi: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(self.xi))
        if not self.xi:
            raise ValueError("empty potential")
        scale = max(1.0, max(abs(float(v)) for v in self.xi))
        if abs(float(sum(self.xi))) > 1e-12 * scale * len(self.xi):
            raise ValueError(f"potential must have mean zero, got sum {sum(self.xi)}")

    @property
    def r(self) -> int:
        return len(self.xi)

    def at(self, x2: int):
        """Value at the half-integer x2/2."""
        k = ((1 - x2) // 2 - 1) % self.r  # 1/2 - x = k + 1 (mod r), zero-based index
        return self.xi[k]


def potential_energy(lam: Partition, V: PeriodicPotential):
    """Abel-regularized energy sum(xi(x), x in particles) = (s, xi)."""
    s = r_quotients(lam, V.r).shifts
    return sum(sk * xk for sk, xk in zip(s, V.xi))


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class ProfileFunction:
    """Continuous piecewise-linear function equal to |x| outside the breakpoints.

    ``slopes[i]`` is the slope on ``(breakpoints[i], breakpoints[i+1])``.
    """

    breakpoints: np.ndarray
    slopes: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        s = np.asarray(self.slopes, dtype=float)
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "slopes", s)
        if len(s) != max(len(b) - 1, 0):
            raise ValueError("need one slope per interval")
        if np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must increase")
        if np.any(np.abs(s) > 1 + 1e-12):
            raise ValueError("slopes must lie in [-1, 1]")
        if len(b):
            end = abs(b[0]) + np.sum(s * np.diff(b))
            if abs(end - abs(b[-1])) > 1e-9 * max(1.0, abs(b[-1])):
                raise ValueError("profile does not return to |x|")
            if b[0] > 0 or b[-1] < 0:
                raise ValueError("breakpoints must straddle the origin")

    @property
    def knot_values(self) -> np.ndarray:
        b = self.breakpoints
        if not len(b):
            return b
        return np.concatenate([[abs(b[0])], abs(b[0]) + np.cumsum(self.slopes * np.diff(b))])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        b = self.breakpoints
        if not len(b):
            return np.abs(x)
        inside = np.interp(x, b, self.knot_values)
        return np.where((x < b[0]) | (x > b[-1]), np.abs(x), inside)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        b = self.breakpoints
        out = np.sign(x).astype(float)
        if len(b):
            idx = np.clip(np.searchsorted(b, x, side="right") - 1, 0, len(self.slopes) - 1)
            inside = (x >= b[0]) & (x < b[-1])
            out = np.where(inside, self.slopes[idx], out)
        return out

    def excess_area(self) -> float:
        """Integral of psi(x) - |x|."""
        b = self.breakpoints
        if not len(b):
            return 0.0
        v = self.knot_values
        total = np.sum(0.5 * (v[1:] + v[:-1]) * np.diff(b))
        return float(total - 0.5 * (b[-1] ** 2 + b[0] ** 2))


def profile(lam: Partition, eps: float) -> ProfileFunction:
    """Rotated boundary of the diagram, scaled by eps in both directions."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if lam.size == 0:
        return ProfileFunction(np.array([]), np.array([]))
    lo, hi = -len(lam), lam.parts[0]
    occupied = {2 * (lam.part(i) - i - 1) + 1 for i in range(len(lam) + 1)}
    slopes = [(-1.0 if (2 * k + 1) in occupied else 1.0) for k in range(lo, hi)]
    return ProfileFunction(eps * np.arange(lo, hi + 1, dtype=float), np.array(slopes))


# ---------------------------------------------------------------------------
# generating function


def char_G(tup: Sequence[Partition], eps: complex, a: Sequence[complex], depth: int | None = None) -> complex:
    """sum_k e^{i a_k} sum_j exp(i eps (lam^k_j - j + 1/2)), packed tail in closed form."""
    if eps == 0:
        raise ValueError("eps = 0 is a pole of the tail resummation")
    if len(tup) != len(a):
        raise ValueError("one Coulomb parameter per partition")
    q_half = cmath.exp(0.5j * eps)
    total = 0j
    for lam, ak in zip(tup, a):
        d = max(len(lam), depth or 0)
        head = sum(cmath.exp(1j * eps * (lam.part(j) - j - 0.5)) for j in range(d))
        # sum_{j>d} q^{-j+1/2} = q^{-d-1/2} / (1 - q^{-1})
        tail = cmath.exp(-1j * eps * (d + 0.5)) / (1 - 1 / (q_half * q_half))
        total += cmath.exp(1j * ak) * (head + tail)
    return total
