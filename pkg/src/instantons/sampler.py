"""Metropolis-Hastings chain on partitions targeting the terms of the dual sum.

Target weight: |Lambda/eps|^{2n} (dim lam / n!)^2 exp(Xi(lam)/eps).  Moves add
or remove one corner box; the corner is chosen uniformly among all addable
and removable corners, with the matching Hastings correction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .partitions import Partition, PeriodicPotential, profile


@numba.njit(cache=True)
def _xi_at(x2, xi):
    r = xi.shape[0]
    return xi[((1 - x2) // 2 - 1) % r]


@numba.njit(cache=True)
def _log_add_ratio(lam, nrows, col, row, xi, log_scale2, inv_eps):
    """ln w(lam + box in row) - ln w(lam); lam and col are zero-padded arrays."""
    j = lam[row]
    acc = 0.0
    # hooks in the same row, left of the new box
    for jj in range(j):
        h = lam[row] - jj + col[jj] - row - 1
        acc += math.log(h / (h + 1.0))
    # hooks in the same column, above the new box
    for ii in range(row):
        h = lam[ii] - j + row - ii - 1
        acc += math.log(h / (h + 1.0))
    x2 = 2 * (lam[row] - row - 1) + 1
    d_xi = _xi_at(x2 + 2, xi) - _xi_at(x2, xi)
    return log_scale2 + 2.0 * acc + d_xi * inv_eps


@numba.njit(cache=True)
def _corners(lam, nrows, add_rows, rem_rows):
    na = 0
    nr = 0
    for i in range(nrows + 1):
        if i == 0 or lam[i] < lam[i - 1]:
            add_rows[na] = i
            na += 1
    for i in range(nrows):
        if lam[i] > lam[i + 1]:
            rem_rows[nr] = i
            nr += 1
    return na, nr


@numba.njit(cache=True)
def _run(lam, col, nrows, steps, xi, log_scale2, inv_eps, max_size, seed, record, counts, codes_base):
    np.random.seed(seed)
    cap = lam.shape[0] - 2
    add_rows = np.empty(cap + 2, np.int64)
    rem_rows = np.empty(cap + 2, np.int64)
    size = 0
    for i in range(nrows):
        size += lam[i]
    accepted = 0
    for _ in range(steps):
        na, nr = _corners(lam, nrows, add_rows, rem_rows)
        k = np.random.randint(na + nr)
        if k < na:
            row = add_rows[k]
            if not (size + 1 > max_size or row >= cap or lam[row] >= cap):
                log_acc = _log_add_ratio(lam, nrows, col, row, xi, log_scale2, inv_eps)
                j = lam[row]
                lam[row] += 1
                col[j] += 1
                new_nrows = nrows + 1 if row == nrows else nrows
                na2, nr2 = _corners(lam, new_nrows, add_rows, rem_rows)
                log_acc += math.log((na + nr) / (na2 + nr2))
                if log_acc >= 0 or np.random.random() < math.exp(log_acc):
                    nrows = new_nrows
                    size += 1
                    accepted += 1
                else:
                    lam[row] -= 1
                    col[j] -= 1
        else:
            row = rem_rows[k - na]
            j = lam[row] - 1
            lam[row] -= 1
            col[j] -= 1
            new_nrows = nrows - 1 if (row == nrows - 1 and lam[row] == 0) else nrows
            log_acc = -_log_add_ratio(lam, new_nrows, col, row, xi, log_scale2, inv_eps)
            na2, nr2 = _corners(lam, new_nrows, add_rows, rem_rows)
            log_acc += math.log((na + nr) / (na2 + nr2))
            if log_acc >= 0 or np.random.random() < math.exp(log_acc):
                nrows = new_nrows
                size -= 1
                accepted += 1
            else:
                lam[row] += 1
                col[j] += 1
        if record:
            code = 0
            for i in range(nrows):
                code = code * codes_base + lam[i]
            counts[code] += 1
    return nrows, accepted


@dataclass
class ChainResult:
    partition: Partition
    accepted: int
    steps: int


def _state(lam: Partition, cap: int):
    arr = np.zeros(cap + 2, np.int64)
    col = np.zeros(cap + 2, np.int64)
    for i, p in enumerate(lam.parts):
        arr[i] = p
    for j, c in enumerate(lam.conjugate().parts):
        col[j] = c
    return arr, col


def _params(V, eps, lambda_scale):
    if eps <= 0:
        raise ValueError("eps must be positive")
    xi = np.asarray(V.xi, dtype=np.float64)
    return xi, 2 * math.log(abs(lambda_scale / eps)), 1.0 / eps


def mcmc_sample(V: PeriodicPotential, eps: float, lambda_scale: float, steps: int, seed: int,
                start: Partition | None = None, max_size: int | None = None, cap: int = 4096) -> ChainResult:
    """Run the chain for ``steps`` proposals from ``start`` (default empty); deterministic in seed."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    xi, ls2, ie = _params(V, eps, lambda_scale)
    start = start or Partition(())
    lam, col = _state(start, cap)
    counts = np.zeros(1, np.int64)
    nrows, acc = _run(lam, col, len(start), steps, xi, ls2, ie,
                      max_size if max_size is not None else 1 << 60, seed, False, counts, 1)
    return ChainResult(Partition(tuple(int(x) for x in lam[:nrows])), int(acc), steps)


def state_histogram(V: PeriodicPotential, eps: float, lambda_scale: float, steps: int, seed: int,
                    max_size: int) -> dict[Partition, int]:
    """Visit counts per state for the chain restricted to |lam| <= max_size."""
    base = max_size + 1
    xi, ls2, ie = _params(V, eps, lambda_scale)
    lam, col = _state(Partition(()), max_size + 4)
    counts = np.zeros(base ** max_size, np.int64)
    _run(lam, col, 0, steps, xi, ls2, ie, max_size, seed, True, counts, base)
    out = {}
    for code in np.nonzero(counts)[0]:
        parts, c = [], int(code)
        while c:
            parts.append(c % base)
            c //= base
        out[Partition(tuple(reversed(parts)))] = int(counts[code])
    return out


def add_box_log_ratio(lam: Partition, row: int, V: PeriodicPotential, eps: float, lambda_scale: float) -> float:
    """ln of w(lam + box)/w(lam) as used by the chain."""
    if row not in lam.addable():
        raise ValueError("row is not addable")
    xi, ls2, ie = _params(V, eps, lambda_scale)
    arr, col = _state(lam, lam.size + 4)
    return float(_log_add_ratio(arr, len(lam), col, row, xi, ls2, ie))


def log_weight(lam: Partition, V: PeriodicPotential, eps: float, lambda_scale: float) -> float:
    from .partitions import dim_partition, potential_energy

    n = lam.size
    return (2 * n * math.log(abs(lambda_scale / eps)) + 2 * (math.log(dim_partition(lam)) - math.lgamma(n + 1))
            + float(potential_energy(lam, V)) / eps)


def profile_l1(lam: Partition, eps: float, target, lo: float, hi: float, n: int = 4001) -> float:
    """int_lo^hi |psi_lam(x) - target(x)| dx for the eps-scaled profile."""
    x = np.linspace(lo, hi, n)
    d = np.abs(profile(lam, eps)(x) - target(x))
    return float(np.trapezoid(d, x))


def batch_means(samples, n_batches: int = 20):
    """Mean and batch-means standard error of a correlated series."""
    s = np.asarray(samples, dtype=float)
    m = len(s) // n_batches
    means = s[: m * n_batches].reshape(n_batches, m).mean(axis=1)
    return float(s.mean()), float(means.std(ddof=1) / math.sqrt(n_batches))


@dataclass
class ProfileAverage:
    grid: np.ndarray
    mean_profile: np.ndarray
    sizes: np.ndarray
    final: Partition


def mcmc_profile_average(V: PeriodicPotential, eps: float, lambda_scale: float, steps: int, seed: int,
                         grid, chunks: int = 200, burn_fraction: float = 0.2) -> ProfileAverage:
    """Time-averaged eps-scaled profile of the chain, sampled every steps/chunks proposals.

    Each chunk continues from the previous state with seed derived from (seed, chunk).
    """
    grid = np.asarray(grid, dtype=float)
    per = max(steps // chunks, 1)
    state = Partition(())
    acc, sizes = [], []
    for c in range(chunks):
        state = mcmc_sample(V, eps, lambda_scale, per, seed * 1_000_003 + c, start=state).partition
        sizes.append(state.size)
        if c >= burn_fraction * chunks:
            acc.append(profile(state, eps)(grid))
    return ProfileAverage(grid, np.mean(acc, axis=0), np.array(sizes), state)
