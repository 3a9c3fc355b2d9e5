"""Monte Carlo oracle for the largest-root distribution.

Rows of X are independent complex Gaussian CN(v_i, Id) with the circularly
symmetric convention (real and imaginary parts each of variance 1/2, unit
total variance per complex entry); V is the n x m matrix with sqrt(lam_i)
on the leading diagonal, so V*V has the requested noncentrality
eigenvalues.  The largest eigenvalue of S = X*X comes from a self-contained
cyclic Jacobi sweep on the m x m Hermitian matrix -- deliberately not a
LAPACK call, so the sampler is an independent check of the analytic
routes.  Draws are deterministic per seed (counter-based Philox streams).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .distribution import EvalConfig, WishartParams


class EigenConvergenceError(ArithmeticError):
    """The Jacobi sweep failed to reduce the off-diagonal norm."""


@dataclass
class McConfig:
    samples: int = 100_000
    seed: int = 20240801
    bins: int = 60
    batch: int = 20_000

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("need at least one sample")


def hermitian_eigvals(a: List[List[complex]], tol: float = 1e-13, max_sweeps: int = 30) -> List[float]:
    """All eigenvalues (ascending) of a small Hermitian matrix via the same
    Jacobi sweep as ``hermitian_eig_max``."""
    diag = _jacobi_diagonal(a, tol, max_sweeps)
    return sorted(diag)


def hermitian_eig_max(a: List[List[complex]], tol: float = 1e-13, max_sweeps: int = 30) -> float:
    """Largest eigenvalue of a small Hermitian matrix by cyclic Jacobi.

    Each rotation zeroes one off-diagonal pair with a complex Givens
    rotation; sweeps repeat until the off-diagonal Frobenius mass falls
    below tol * ||A||_F.
    """
    return max(_jacobi_diagonal(a, tol, max_sweeps))


def _jacobi_diagonal(a: List[List[complex]], tol: float, max_sweeps: int) -> List[float]:
    n = len(a)
    a = [row[:] for row in a]
    if n == 1:
        return [a[0][0].real]
    norm = math.sqrt(sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(n)))
    if norm == 0.0:
        return [0.0] * n
    for _ in range(max_sweeps):
        off = math.sqrt(sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(n) if i != j))
        if off <= tol * norm:
            return [a[i][i].real for i in range(n)]
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if abs(apq) <= 1e-300:
                    continue
                app = a[p][p].real
                aqq = a[q][q].real
                # unitary = diag(1, e^{-i arg apq}) then a real Jacobi angle
                phase = apq / abs(apq)
                tau = (aqq - app) / (2.0 * abs(apq))
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                pc = phase.conjugate()
                for k in range(n):  # columns: A <- A U
                    akp = a[k][p]
                    akq = a[k][q]
                    a[k][p] = c * akp - s * (pc * akq)
                    a[k][q] = s * akp + c * (pc * akq)
                for k in range(n):  # rows: A <- U^H A
                    apk = a[p][k]
                    aqk = a[q][k]
                    a[p][k] = c * apk - s * (phase * aqk)
                    a[q][k] = s * apk + c * (phase * aqk)
    raise EigenConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")


def sample_largest_eig(params: WishartParams, cfg: McConfig) -> np.ndarray:
    """Seeded draws of the largest eigenvalue of S = X*X."""
    n, m = params.n, params.m
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    sqrt_lam = np.zeros((n, m))
    for i, lam in enumerate(params.lambdas):
        sqrt_lam[i, i] = math.sqrt(lam)
    out = np.empty(cfg.samples)
    done = 0
    while done < cfg.samples:
        count = min(cfg.batch, cfg.samples - done)
        g = rng.standard_normal((count, n, m)) + 1j * rng.standard_normal((count, n, m))
        x = sqrt_lam[None, :, :] + g / math.sqrt(2.0)
        s = np.einsum("bij,bik->bjk", x.conj(), x)
        if m == 1:
            out[done:done + count] = s[:, 0, 0].real
        else:
            for b in range(count):
                out[done + b] = hermitian_eig_max([list(row) for row in s[b]])
        done += count
    return out


def empirical_cdf(draws: np.ndarray, x: float) -> float:
    return float(np.count_nonzero(draws <= x)) / draws.size


def compare_cdf(
    params: WishartParams,
    cfg: McConfig,
    analytic: Callable[[float], float],
    points: int = 20,
    z: float = 3.2905,
    perturb: float = 0.0,
) -> dict:
    """Empirical CDF versus an analytic route at equally spaced quantile
    probes, with a two-sided 99.9% binomial band (z = 3.2905).

    ``perturb`` shifts the analytic values (negative-control hook).
    """
    draws = np.sort(sample_largest_eig(params, cfg))
    N = draws.size
    rows = []
    ok = True
    for i in range(1, points + 1):
        prob = i / (points + 1)
        xq = float(draws[min(N - 1, max(0, int(round(prob * N)) - 1))])
        emp = empirical_cdf(draws, xq)
        ana = analytic(xq) + perturb
        band = z * math.sqrt(max(ana * (1.0 - ana), 1e-12) / N)
        inside = abs(emp - ana) <= band
        ok = ok and inside
        rows.append({
            "x": xq,
            "empirical": emp,
            "analytic": ana,
            "band": band,
            "inside": inside,
        })
    return {
        "check": "mc_cdf_band",
        "params": {"n": params.n, "m": params.m, "lambdas": list(params.lambdas),
                   "samples": N, "seed": cfg.seed, "z": z},
        "points": rows,
        "pass": ok,
    }


def histogram_csv(draws: np.ndarray, bins: int) -> str:
    """Density histogram and empirical CDF as CSV text."""
    hist, edges = np.histogram(draws, bins=bins, density=True)
    lines = ["bin_left,bin_right,density,cdf_at_right"]
    total = draws.size
    for i in range(bins):
        cdf = float(np.count_nonzero(draws <= edges[i + 1])) / total
        lines.append(
            f"{edges[i]:.17g},{edges[i + 1]:.17g},{hist[i]:.17g},{cdf:.17g}"
        )
    return "\n".join(lines)
