"""Saddle point alpha(x, y) of the friable count and local density factors.

alpha(x, y) is the unique positive solution of

    log x = sum_{p <= y} log p / (p^alpha - 1).

The left-hand side minus the right is strictly increasing in alpha, blows
up as alpha -> 0+ and tends to -log x as alpha -> infinity, so a bracket
always exists.  Only log x is needed, so x may exceed every counting cap;
the primes up to y must be sievable.  alpha above 1 is legitimate (large
y) and is not clamped: the defining equation governs the solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import factor


@dataclass(frozen=True)
class SaddlePoint:
    x: float
    y: int
    alpha: float
    residual: float  # |sum_{p<=y} log p/(p^alpha - 1) - log x|
    primes_used: int
    tol: float
    method: str


def _prime_logs(y: int) -> tuple[np.ndarray, np.ndarray]:
    primes = factor.primes_up_to(y).astype(np.float64)
    return primes, np.log(primes)


def _prime_sum(alpha: float, primes: np.ndarray, logs: np.ndarray) -> float:
    # log p / (p^alpha - 1) written via t = p^-alpha to avoid overflow.
    t = primes**-alpha
    terms = logs * t / (1.0 - t)
    return math.fsum(terms.tolist())


def _prime_sum_derivative(alpha: float, primes: np.ndarray, logs: np.ndarray) -> float:
    t = primes**-alpha
    terms = -(logs**2) * t / (1.0 - t) ** 2
    return math.fsum(terms.tolist())


def solve_alpha(
    x: float,
    y: int,
    tol: float = 1e-12,
    *,
    method: str = "hybrid",
) -> SaddlePoint:
    """Solve for alpha(x, y) with residual at most tol * log x.

    method="hybrid" brackets by bisection then polishes with Newton
    steps kept inside the bracket; method="bisection" bisects all the
    way (independent solver used for the uniqueness cross-check).
    The prime sum is evaluated with exact compensated summation, so the
    result does not depend on the thread count.
    """
    x = float(x)
    y = int(y)
    if x < 3:
        raise ValueError(f"x must be >= 3, got {x}")
    if y < 2:
        raise ValueError(f"y must be >= 2, got {y}")
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    if method not in ("hybrid", "bisection"):
        raise ValueError(f"unknown method {method!r}")

    log_x = math.log(x)
    primes, logs = _prime_logs(y)
    target = tol * log_x

    def f(a: float) -> float:
        return _prime_sum(a, primes, logs) - log_x

    lo, hi = 0.5, 1.0
    for _ in range(200):
        if f(lo) > 0:
            break
        lo /= 2
    else:
        raise ArithmeticError("could not bracket alpha from below")
    for _ in range(200):
        if f(hi) < 0:
            break
        hi *= 2
    else:
        raise ArithmeticError("could not bracket alpha from above")

    if method == "bisection":
        mid = 0.5 * (lo + hi)
        for _ in range(500):
            mid = 0.5 * (lo + hi)
            val = f(mid)
            if abs(val) <= target or (hi - lo) <= 1e-15 * max(1.0, mid):
                break
            if val > 0:
                lo = mid
            else:
                hi = mid
        alpha = mid
    else:
        # Bisect to a narrow bracket, then Newton with bracket safeguard.
        for _ in range(60):
            if hi - lo <= 1e-3:
                break
            mid = 0.5 * (lo + hi)
            if f(mid) > 0:
                lo = mid
            else:
                hi = mid
        alpha = 0.5 * (lo + hi)
        for _ in range(100):
            val = f(alpha)
            if abs(val) <= target:
                break
            if val > 0:
                lo = max(lo, alpha)
            else:
                hi = min(hi, alpha)
            step = val / _prime_sum_derivative(alpha, primes, logs)
            candidate = alpha - step
            if not (lo < candidate < hi):
                candidate = 0.5 * (lo + hi)
            if candidate == alpha:
                break
            alpha = candidate

    residual = abs(f(alpha))
    return SaddlePoint(
        x=x,
        y=y,
        alpha=float(alpha),
        residual=residual,
        primes_used=int(primes.shape[0]),
        tol=tol,
        method=method,
    )


def coprime_density(q: int, beta: float, *, sieve: factor.FactorSieve | None = None) -> float:
    """prod_{p | q} (1 - p^-beta) over the distinct primes of q.

    At beta = 1 this is phi(q)/q, the density of residues coprime to q;
    at the saddle point it is the local density of friable integers
    coprime to q.  Always in (0, 1] for beta > 0, multiplicative in q.
    """
    q = int(q)
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    beta = float(beta)
    if not 0.0 <= beta <= 2.0:
        raise ValueError(f"beta must be in [0, 2], got {beta}")
    if q == 1:
        return 1.0
    if sieve is None:
        sieve = factor.build_sieve(q)
    out = 1.0
    for p, _ in factor.factorize(q, sieve):
        out *= 1.0 - p ** (-beta)
    return out


def coprime_density_exact(q: int, *, sieve: factor.FactorSieve | None = None) -> Fraction:
    """Exact rational prod_{p | q} (1 - 1/p); equals phi(q)/q."""
    q = int(q)
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if q == 1:
        return Fraction(1)
    if sieve is None:
        sieve = factor.build_sieve(q)
    out = Fraction(1)
    for p, _ in factor.factorize(q, sieve):
        out *= Fraction(p - 1, p)
    return out


@dataclass(frozen=True)
class AlphaGapDiagnostic:
    """1 - alpha against log(u+1)/log y, with their ratio.

    Reported, never asserted: the two scales are only known to be
    equivalent when min(x, y, u) grows with (log x)^2 <= y; in_regime
    records whether the inputs satisfy that inequality.
    """

    x: float
    y: int
    u: float
    alpha: float
    one_minus_alpha: float
    log_scale: float
    ratio: float
    in_regime: bool


def alpha_gap_diagnostic(x: float, y: int, tol: float = 1e-12) -> AlphaGapDiagnostic:
    sp = solve_alpha(x, y, tol)
    u = math.log(x) / math.log(y)
    log_scale = math.log(u + 1) / math.log(y)
    one_minus = 1.0 - sp.alpha
    return AlphaGapDiagnostic(
        x=float(x),
        y=int(y),
        u=u,
        alpha=sp.alpha,
        one_minus_alpha=one_minus,
        log_scale=log_scale,
        ratio=one_minus / log_scale,
        in_regime=math.log(float(x)) ** 2 <= y,
    )
