"""Localization sums for the pure U(r) instanton partition function.

The tangent space at a fixed point (r-tuple of partitions) is handled through
its torus character, a Laurent polynomial in q = e^{i eps} with coefficients
in u_k / u_l, u_k = e^{i a_k}.  The character is computed once per tuple in
exact integer arithmetic and then evaluated for any (eps, a).
"""
from __future__ import annotations

import cmath
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import mpmath as mp

from .barnes import log_gamma2_symmetric
from .partitions import (
    Partition,
    PeriodicPotential,
    dim_partition,
    partitions_of,
    potential_energy,
    rho_vector,
)

ZETA_PRIME_M1 = float(mp.zeta(-1, derivative=1))


class PoleError(ValueError):
    """Raised when a_i - a_j lies on the lattice eps*Z."""

    def __init__(self, i, j, message):
        super().__init__(message)
        self.pair = (i, j)


@dataclass(frozen=True)
class GaugeParams:
    epsilon: float
    a: tuple
    lambda_scale: float
    margin: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(self.a))
        if self.epsilon == 0:
            raise ValueError("epsilon must be nonzero")
        if self.lambda_scale < 0:
            raise ValueError("lambda must be nonnegative")
        scale = max([1.0] + [abs(float(x)) for x in self.a])
        if abs(float(sum(self.a))) > 1e-12 * scale * len(self.a):
            raise ValueError(f"Coulomb parameters must sum to zero, got {sum(self.a)}")

    @property
    def r(self) -> int:
        return len(self.a)

    @property
    def beta(self) -> float:
        return -self.r * math.log(self.lambda_scale) / (4 * math.pi ** 2)

    def check_poles(self):
        eps = self.epsilon
        for i, j in itertools.permutations(range(self.r), 2):
            ratio = (self.a[i] - self.a[j]) / eps
            if abs(ratio - round(ratio)) * abs(eps) <= self.margin * abs(eps):
                raise PoleError(i, j, f"a_{i + 1} - a_{j + 1} = {self.a[i] - self.a[j]} lies in eps*Z (eps={eps})")


@dataclass(frozen=True)
class PartitionTuple:
    parts: tuple[Partition, ...]
    total_size: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        object.__setattr__(self, "total_size", sum(p.size for p in self.parts))

    @property
    def r(self):
        return len(self.parts)


def partition_tuples(r: int, n: int) -> Iterator[PartitionTuple]:
    """All r-tuples of total size n, in a fixed order."""
    for sizes in _compositions(n, r):
        for combo in itertools.product(*(list(partitions_of(s)) for s in sizes)):
            yield PartitionTuple(combo)


def _compositions(n, r):
    if r == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, r - 1):
            yield (first,) + rest


# ---------------------------------------------------------------------------
# tangent character


def _shifted_diff(lam: Partition) -> dict[int, int]:
    """Coefficients of q^{1/2} D(q), D = sum_j q^{lam_j - j + 1/2} - q^{-j + 1/2}."""
    out: dict[int, int] = {}
    for j, p in enumerate(lam.parts, start=1):
        if p:
            out[p - j + 1] = out.get(p - j + 1, 0) + 1
            out[-j + 1] = out.get(-j + 1, 0) - 1
    return {k: v for k, v in out.items() if v}


def _divide_one_minus_q(c: dict[int, int]) -> dict[int, int]:
    if not c:
        return {}
    lo, hi = min(c), max(c)
    out, acc = {}, 0
    for m in range(lo, hi + 1):
        acc += c.get(m, 0)
        if acc:
            out[m] = acc
    return out


def _invert(c: dict[int, int]) -> dict[int, int]:
    return {-k: v for k, v in c.items()}


@lru_cache(maxsize=200_000)
def tangent_character(parts: tuple[Partition, ...]) -> tuple[tuple[int, int, int, int], ...]:
    """Character of the tangent space as (k, l, m, multiplicity) for u_k/u_l q^m.

    Equals X_{O^r} - |G_F|^2; the infinite vacuum parts cancel exactly.
    """
    shifted = [_shifted_diff(lam) for lam in parts]
    # D(q) D'(q^-1) = (q^{1/2} D)(q) (q^{1/2} D')(q)^-1 ... exponents stay integral
    first = [_divide_one_minus_q(s) for s in shifted]            # q^{1/2} D_k / (1 - q)
    terms = []
    r = len(parts)
    for k in range(r):
        for l in range(r):
            poly: dict[int, int] = {}
            for m, v in first[k].items():
                poly[m] = poly.get(m, 0) - v
            # q^{-1/2} D_l(q^-1) / (1 - q^-1) is the q -> 1/q image of q^{1/2} D_l(q) / (1 - q)
            for m, v in _invert(first[l]).items():
                poly[m] = poly.get(m, 0) - v
            for m1, v1 in shifted[k].items():
                for m2, v2 in shifted[l].items():
                    poly[m1 - m2] = poly.get(m1 - m2, 0) - v1 * v2
            for m in sorted(poly):
                if poly[m] < 0:
                    raise ArithmeticError(f"negative multiplicity in tangent character of {parts}")
                if poly[m]:
                    terms.append((k, l, m, poly[m]))
    return tuple(terms)


def tangent_weight(F: PartitionTuple | Sequence[Partition], g: GaugeParams, check: bool = True):
    """det of the torus action on the tangent space at the fixed point F.

    Exact when eps and a are rationals.
    """
    parts = F.parts if isinstance(F, PartitionTuple) else tuple(F)
    if len(parts) != g.r:
        raise ValueError("tuple length must match the rank")
    if check:
        g.check_poles()
    eps, a = g.epsilon, g.a
    det = 1
    count = 0
    for k, l, m, mult in tangent_character(parts):
        det *= (a[k] - a[l] + eps * m) ** mult
        count += mult
    # each weight carries a factor i; count = 2rn
    return det if (count // 2) % 2 == 0 else -det


def _coefficient_terms(tuples, g):
    return [1 / tangent_weight(F, g, check=False) for F in tuples]


def instanton_coefficient(n: int, g: GaugeParams, threads: int = 1):
    """Coefficient of Lambda^{2rn} in Z_inst (sum of inverse fixed-point weights)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    g.check_poles()
    tuples = list(partition_tuples(g.r, n))
    exact = isinstance(g.epsilon, (int, Fraction)) and all(isinstance(x, (int, Fraction)) for x in g.a)
    if threads > 1 and len(tuples) > 64:
        chunk = -(-len(tuples) // threads)
        pieces = [tuples[i:i + chunk] for i in range(0, len(tuples), chunk)]
        with ThreadPoolExecutor(threads) as pool:
            terms = [t for part in pool.map(lambda p: _coefficient_terms(p, g), pieces) for t in part]
    else:
        terms = _coefficient_terms(tuples, g)
    if exact:
        return sum((Fraction(t) for t in terms), Fraction(0))
    return math.fsum(terms)


def _canonical(g: GaugeParams) -> GaugeParams:
    # Z is even in eps and symmetric in a; evaluating at a canonical
    # representative makes both symmetries exact.
    return GaugeParams(abs(g.epsilon), tuple(sorted(g.a)), g.lambda_scale, g.margin)


@dataclass
class InstantonSeries:
    value: float
    coefficients: list
    last_term: float


def z_inst(g: GaugeParams, n_max: int, threads: int = 1) -> InstantonSeries:
    """Truncated Z_inst = sum_{n <= n_max} Lambda^{2rn} c_n."""
    g = _canonical(g)
    coeffs = [instanton_coefficient(n, g, threads) for n in range(n_max + 1)]
    lam2r = g.lambda_scale ** (2 * g.r)
    terms = [c * lam2r ** n for n, c in enumerate(coeffs)]
    if isinstance(terms[0], Fraction):
        value = sum(terms, Fraction(0))
    else:
        value = math.fsum(float(t) for t in terms)
    return InstantonSeries(value, coeffs, abs(float(terms[-1])))


@lru_cache(maxsize=4096)
def _log_gamma2_cached(w_re, c_re):
    return log_gamma2_symmetric(1j * w_re, 1j * c_re)


def log_z_pert(g: GaugeParams) -> complex:
    """ln of prod_{k,k'} Gamma_2(i a_kk'/L | i eps/L, -i eps/L)^{-1}."""
    g.check_poles()
    g = _canonical(g)
    lam = g.lambda_scale
    total = 0j
    for ak in g.a:
        for al in g.a:
            total -= _log_gamma2_cached(round((ak - al) / lam, 15), round(g.epsilon / lam, 15))
    return total


def z_pert(g: GaugeParams) -> complex:
    return cmath.exp(log_z_pert(g))


def log_z_full(g: GaugeParams, n_max: int, threads: int = 1) -> complex:
    inst = z_inst(g, n_max, threads).value
    return log_z_pert(g) + cmath.log(float(inst))


def z_full(g: GaugeParams, n_max: int, threads: int = 1) -> complex:
    return cmath.exp(log_z_full(g, n_max, threads))


# ---------------------------------------------------------------------------
# eps -> 0


@dataclass
class FreeEnergyEstimate:
    value: float
    error: float
    eps: list
    samples: list
    monotone: bool
    table: list


def richardson(hs: Sequence[float], fs: Sequence[float]):
    """Neville extrapolation of f(h) to h = 0 assuming a power series in h.

    Returns (value, error, table) where error is the change from the previous
    order.
    """
    n = len(hs)
    table = [list(fs)]
    for level in range(1, n):
        prev = table[-1]
        row = []
        for i in range(n - level):
            h0, h1 = hs[i], hs[i + level]
            row.append((h0 * prev[i + 1] - h1 * prev[i]) / (h0 - h1))
        table.append(row)
    value = table[-1][0]
    error = abs(value - table[-2][-1]) if n > 1 else float("inf")
    return value, error, table


def free_energy_estimate(a, lambda_scale, eps_sequence, n_max, threads: int = 1) -> FreeEnergyEstimate:
    """Richardson-extrapolated -eps^2 ln|Z(eps; a; Lambda)| as eps -> 0 (series in eps^2)."""
    eps = [abs(float(e)) for e in eps_sequence]
    samples = []
    for e in eps:
        g = GaugeParams(e, tuple(a), lambda_scale)
        samples.append(-e * e * log_z_full(g, n_max, threads).real)
    value, error, table = richardson([e * e for e in eps], samples)
    diffs = [samples[i + 1] - samples[i] for i in range(len(samples) - 1)]
    monotone = all(d >= 0 for d in diffs) or all(d <= 0 for d in diffs)
    return FreeEnergyEstimate(value, error, eps, samples, monotone, table)


# ---------------------------------------------------------------------------
# dual partition function


@dataclass
class DualSum:
    value: complex
    tail: float
    terms: int


DUAL_PREFACTOR = cmath.exp(ZETA_PRIME_M1 + 1j * math.pi / 24)


def dual_z_partitions(V: PeriodicPotential, eps: float, lambda_scale: float, size_max: int) -> DualSum:
    """Periodically weighted Plancherel sum over |lam| <= size_max."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    ratio = abs(lambda_scale / eps)
    xi = tuple(float(x) for x in V.xi)
    pot = PeriodicPotential(xi)
    shells = []
    for n in range(size_max + 1):
        shell = []
        for lam in partitions_of(n):
            d = dim_partition(lam)
            energy = float(potential_energy(lam, pot))
            log_term = (2 * n - 1 / 12) * math.log(ratio) + 2 * (math.log(d) - math.lgamma(n + 1)) + energy / eps
            shell.append(math.exp(log_term))
        shells.append(math.fsum(shell))
    total = math.fsum(shells)
    return DualSum(DUAL_PREFACTOR * total, abs(shells[-1]), size_max)


def lattice_points(r: int, radius: int) -> Iterator[tuple[int, ...]]:
    """Integer vectors with zero sum and max-norm <= radius."""
    for m in itertools.product(range(-radius, radius + 1), repeat=r - 1):
        last = -sum(m)
        if abs(last) <= radius:
            yield tuple(m) + (last,)


def dual_z_lattice(V: PeriodicPotential, eps: float, lambda_scale: float, radius: int, n_max: int) -> DualSum:
    """sum over a in eps(rho + r Z^r_0) of exp((xi, a)/(r eps^2)) Z(r eps; a; Lambda)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    r = V.r
    rho = [float(x) for x in rho_vector(r)]
    logs, shell_logs, skipped = [], [], []
    for m in lattice_points(r, radius):
        a = tuple(eps * (rho[k] + r * m[k]) for k in range(r))
        a = tuple(x - sum(a) / r for x in a)
        g = GaugeParams(r * eps, a, lambda_scale)
        try:
            lz = log_z_full(g, n_max)
        except PoleError:
            skipped.append(m)
            continue
        lt = sum(x * y for x, y in zip(V.xi, a)) / (r * eps * eps) + lz
        logs.append(lt)
        if max(abs(x) for x in m) == radius:
            shell_logs.append(lt)
    with mp.workdps(30):
        total = mp.fsum(mp.exp(mp.mpc(z)) for z in logs)
        tail = mp.fsum(abs(mp.exp(mp.mpc(z))) for z in shell_logs) if shell_logs else mp.mpf(0)
        return DualSum(complex(total), float(tail), len(logs))
