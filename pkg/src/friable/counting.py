"""Exact counting of friable integers.

An integer n is y-friable when its largest prime factor is at most y.
This module counts friable integers up to x in total, per residue class,
and under coprimality constraints, entirely in integer arithmetic.

Two independent code paths exist on purpose:

* segmented counting divides each window of consecutive integers by all
  primes <= min(y, sqrt(x)) with multiplicity and tests the remaining
  cofactor, holding only O(segment) memory (x up to 10^9);
* enumeration materializes the friable set from a largest-prime-factor
  table (x up to 10^8), used as a cross-check and to drive per-element
  sums.

Gaps against phi(q)-equidistribution combine exact integer counts in
double precision only at the last step.
"""

from __future__ import annotations

import math
from math import gcd

import numpy as np

from . import factor
from ._parallel import ordered_map
from .reports import DiscrepancyReport, LocalLawReport

# Segmented counting never holds a full table; enumeration does (uint32).
COUNT_LIMIT_MAX = 1_000_000_000
ENUM_LIMIT_MAX = 100_000_000
DEFAULT_SEGMENT = 1 << 22


def _validate_xy(x: int, y: int, cap: int) -> tuple[int, int]:
    x = int(x)
    y = int(y)
    if x < 2:
        raise ValueError(f"x must be >= 2, got {x}")
    if y < 2:
        raise ValueError(f"y must be >= 2, got {y}")
    if x > cap:
        raise ValueError(f"x={x} exceeds cap {cap}")
    return x, y


def _segments(lo: int, hi: int, segment: int) -> list[tuple[int, int]]:
    return [(a, min(a + segment, hi)) for a in range(lo, hi, segment)]


def divide_out(lo: int, hi: int, primes: list[int]) -> np.ndarray:
    """Remainders of [lo, hi) after removing the given primes with multiplicity."""
    rem = np.arange(lo, hi, dtype=np.int64)
    for p in primes:
        pk = p
        while pk < hi:
            start = ((lo + pk - 1) // pk) * pk
            if start >= hi:
                break
            rem[start - lo :: pk] //= p
            pk *= p
    return rem


def friable_mask(lo: int, hi: int, y: int, primes: list[int]) -> np.ndarray:
    """Boolean friability of [lo, hi); primes must cover min(y, sqrt(hi-1)).

    After dividing out those primes the cofactor is 1, or has all prime
    factors above min(y, sqrt(hi-1)); in both prime sets the cofactor is
    y-friable exactly when it is 1 or at most y.
    """
    rem = divide_out(lo, hi, primes)
    return (rem == 1) | (rem <= y)


def _base_primes(x: int, y: int) -> list[int]:
    return factor.primes_up_to(min(y, math.isqrt(x))).tolist()


def psi(x: int, y: int, *, threads: int = 1, segment: int = DEFAULT_SEGMENT) -> int:
    """Count of y-friable integers in [1, x], by segmented sieve."""
    x, y = _validate_xy(x, y, COUNT_LIMIT_MAX)
    primes = _base_primes(x, y)

    def work(span):
        lo, hi = span
        return int(friable_mask(lo, hi, y, primes).sum())

    return sum(ordered_map(work, _segments(1, x + 1, segment), threads))


def enumerate_friable(x: int, y: int) -> np.ndarray:
    """The y-friable integers in [1, x], increasing, as an int64 array.

    Materializes the set through a largest-prime-factor table; capped at
    ENUM_LIMIT_MAX.  1 is included (its largest prime factor is 1).
    """
    x, y = _validate_xy(x, y, ENUM_LIMIT_MAX)
    lpf = factor.largest_factor_table(x)
    mask = lpf[1:] <= y
    return np.nonzero(mask)[0].astype(np.int64) + 1


def psi_by_enumeration(x: int, y: int) -> int:
    """Friable count via the largest-prime-factor table (cross-check path)."""
    return int(enumerate_friable(x, y).shape[0])


def residue_counts(
    x: int,
    y: int,
    qs: list[int],
    *,
    threads: int = 1,
    segment: int = DEFAULT_SEGMENT,
) -> dict[int, np.ndarray]:
    """Counts of friable n <= x per residue class, for every modulus in qs.

    Returns {q: int64 array c with c[a] = #{n <= x friable, n = a mod q}}.
    One friability pass over the segments is shared by all moduli.
    """
    x, y = _validate_xy(x, y, COUNT_LIMIT_MAX)
    qs = [int(q) for q in qs]
    for q in qs:
        if q < 1:
            raise ValueError(f"modulus must be >= 1, got {q}")
    primes = _base_primes(x, y)

    def work(span):
        lo, hi = span
        vals = np.nonzero(friable_mask(lo, hi, y, primes))[0].astype(np.int64) + lo
        return [np.bincount(vals % q, minlength=q) for q in qs]

    parts = ordered_map(work, _segments(1, x + 1, segment), threads)
    out: dict[int, np.ndarray] = {}
    for i, q in enumerate(qs):
        total = np.zeros(q, dtype=np.int64)
        for part in parts:
            total += part[i]
        out[q] = total
    return out


def psi_progression(x: int, y: int, a: int, q: int, *, threads: int = 1) -> int:
    """Count of friable n <= x with n = a (mod q); a is normalized mod q."""
    q = int(q)
    if q < 1:
        raise ValueError(f"modulus must be >= 1, got {q}")
    a = int(a) % q
    counts = residue_counts(x, y, [q], threads=threads)[q]
    return int(counts[a])


def coprime_residues(q: int) -> list[int]:
    return [a for a in range(q) if gcd(a, q) == 1]


def psi_coprime(x: int, y: int, q: int, *, threads: int = 1) -> int:
    """Count of friable n <= x coprime to q.

    Equals the count coprime to the y-friable part of q, since a friable
    n can only share friable primes with q.
    """
    q = int(q)
    if q < 1:
        raise ValueError(f"modulus must be >= 1, got {q}")
    if q == 1:
        return psi(x, y, threads=threads)
    counts = residue_counts(x, y, [q], threads=threads)[q]
    return int(counts[coprime_residues(q)].sum())


# ---------------------------------------------------------------------------
# discrepancy sums
# ---------------------------------------------------------------------------

def tau_cubed(q: int) -> float:
    """tau(q)^3, the weight used for the heaviest weighted discrepancy runs."""
    n = int(q)
    tau = 1
    d = 2
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        tau *= e + 1
        d += 1
    if n > 1:
        tau *= 2
    return float(tau**3)


WEIGHTS = {"one": lambda q: 1.0, "tau_cubed": tau_cubed}


def _weight_callable(weight):
    if weight is None:
        return "one", WEIGHTS["one"]
    if isinstance(weight, str):
        return weight, WEIGHTS[weight]
    if callable(weight):
        return getattr(weight, "__name__", "custom"), weight
    # ArithmeticFunctionSpec-style object: use its lambda values.
    name = getattr(weight, "name", "spec")
    sieve = factor.build_sieve(100_000)

    def w(q: int) -> float:
        return weight.lambda_value(q, sieve)

    return name, w


def discrepancy_report(
    x: int,
    y: int,
    q_max: int,
    *,
    weight=None,
    threads: int = 1,
) -> DiscrepancyReport:
    """Per-modulus gaps |count in class a - coprime count / phi(q)| for q <= q_max.

    The class-one gaps sum to the plain discrepancy total; the per-q
    maximum is taken over all residues coprime to q (every class is
    scanned, not sampled).  Counts are exact integers, combined in
    double precision only here.
    """
    q_max = int(q_max)
    if q_max < 1:
        raise ValueError(f"q_max must be >= 1, got {q_max}")
    weight_name, w = _weight_callable(weight)
    qs = list(range(1, q_max + 1))
    counts = residue_counts(x, y, qs, threads=threads)
    psi_value = int(counts[1][0])
    sieve = factor.build_sieve(max(q_max, 2))

    rows = []
    total = 0.0
    max_total = 0.0
    weighted_total = 0.0
    for q in qs:
        c = counts[q]
        cop = coprime_residues(q)
        phi_q = len(cop)
        psi_q = int(c[cop].sum())
        expected = psi_q / phi_q
        gap_one = abs(float(c[1 % q]) - expected)
        gap_max = max(abs(float(c[a]) - expected) for a in cop)
        wq = w(q)
        if wq < 0:
            raise ValueError(f"negative weight at q={q}: {wq}")
        rows.append((q, int(c[1 % q]), expected, gap_one, gap_max))
        total += gap_one
        max_total += gap_max
        weighted_total += wq * gap_max
    return DiscrepancyReport(
        x=int(x),
        y=int(y),
        q_max=q_max,
        psi=psi_value,
        weight_name=weight_name,
        rows=rows,
        total=total,
        max_total=max_total,
        weighted_total=weighted_total,
    )


def weighted_discrepancy(x: int, y: int, q_max: int, weight, *, threads: int = 1) -> float:
    """sum_{q <= q_max} weight(q) * max_{(a,q)=1} |count(a,q) - coprime/phi(q)|."""
    return discrepancy_report(x, y, q_max, weight=weight, threads=threads).weighted_total


# ---------------------------------------------------------------------------
# scale helpers
# ---------------------------------------------------------------------------

def h_scale(u: float) -> float:
    """Growth scale exp(u / log(u+2)^2) used in discrepancy error budgets."""
    u = float(u)
    if u < 0:
        raise ValueError(f"u must be >= 0, got {u}")
    return math.exp(u / math.log(u + 2.0) ** 2)


def in_hildebrand_domain(x: float, y: float, eps: float) -> bool:
    """Whether 2 <= exp((log log x)^(5/3+eps)) <= y <= x (natural logs).

    This is the classical range in which x * rho(u) approximates the
    friable count; requires x >= 16 so the iterated log is positive.
    """
    x = float(x)
    y = float(y)
    eps = float(eps)
    if x < 16:
        raise ValueError(f"x must be >= 16, got {x}")
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    lower = math.exp(math.log(math.log(x)) ** (5.0 / 3.0 + eps))
    return 2.0 <= lower <= y <= x


def local_law_report(x: int, y: int, m: int, *, threads: int = 1) -> LocalLawReport:
    """Measured ratio psi_m / (g_m(alpha) * psi) with its scale exponents.

    m is reduced to its y-friable part first (the coprime count only
    sees friable primes).  gamma = log(omega(m)+2) * log(u+1) / log(y);
    the error surrogate (exp(2*gamma)-1)/log(u) is displayed untouched
    (infinite at u <= 1) and never asserted.
    """
    from .saddle import coprime_density, solve_alpha

    x, y = _validate_xy(x, y, COUNT_LIMIT_MAX)
    m = int(m)
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    sieve = factor.build_sieve(max(m, 2))
    m_reduced = factor.friable_part(m, y, sieve)
    psi_value = psi(x, y, threads=threads)
    psi_m = psi_coprime(x, y, m_reduced, threads=threads)
    alpha = solve_alpha(x, y).alpha
    g = coprime_density(m_reduced, alpha, sieve=sieve)
    u = math.log(x) / math.log(y)
    omega_m = factor.omega_distinct(m_reduced, sieve)
    gamma = math.log(omega_m + 2) * math.log(u + 1) / math.log(y)
    log_u = math.log(u)
    surrogate = (math.expm1(2 * gamma)) / log_u if log_u > 0 else math.inf
    return LocalLawReport(
        x=x,
        y=y,
        m=m,
        m_reduced=m_reduced,
        alpha=alpha,
        g_m_alpha=g,
        psi=psi_value,
        psi_m=psi_m,
        ratio=psi_m / (g * psi_value),
        gamma=gamma,
        error_surrogate=surrogate,
    )
