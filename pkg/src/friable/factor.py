"""Prime-factor sieves and elementary multiplicative functions.

Everything downstream (friable counting, saddle points, mean values)
reads prime data from this module.  Full in-memory factor tables cost
4 bytes per integer, so they are capped at SIEVE_LIMIT_MAX; the counting
module uses segmented passes to reach larger ranges without a table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

# Full tables hold one uint32 per integer: 10^8 entries ~ 400 MB.
SIEVE_LIMIT_MAX = 100_000_000


def primes_up_to(limit: int) -> np.ndarray:
    """All primes <= limit as an int64 array (empty when limit < 2)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    limit = int(limit)
    composite = np.zeros(limit + 1, dtype=bool)
    composite[:2] = True
    for p in range(2, math.isqrt(limit) + 1):
        if not composite[p]:
            composite[p * p :: p] = True
    return np.nonzero(~composite)[0].astype(np.int64)


@dataclass(frozen=True)
class FactorSieve:
    """Smallest-prime-factor table for every n in [2, limit].

    spf[n] is the least prime dividing n; spf[p] == p exactly for primes.
    The table is immutable after construction, so concurrent reads are
    safe.  spf[0] = 0 and spf[1] = 1 are sentinels.
    """

    limit: int
    spf: np.ndarray

    def __post_init__(self):
        self.spf.setflags(write=False)


def build_sieve(limit: int) -> FactorSieve:
    """Build the smallest-prime-factor table up to ``limit``.

    Parameters
    ----------
    limit : int
        Inclusive upper bound, 2 <= limit <= SIEVE_LIMIT_MAX (10^8,
        ~400 MB of uint32; the memory bound for full tables).

    Returns
    -------
    FactorSieve
    """
    limit = int(limit)
    if limit < 2:
        raise ValueError(f"sieve limit must be >= 2, got {limit}")
    if limit > SIEVE_LIMIT_MAX:
        raise ValueError(
            f"sieve limit {limit} exceeds SIEVE_LIMIT_MAX={SIEVE_LIMIT_MAX} "
            "(full tables are memory-bound; use the segmented counting API "
            "for larger ranges)"
        )
    spf = np.zeros(limit + 1, dtype=np.uint32)
    spf[1] = 1
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            spf[p] = p
            block = spf[p * p :: p]
            block[block == 0] = p
    remaining = np.nonzero(spf == 0)[0]
    remaining = remaining[remaining >= 2]  # primes above sqrt(limit)
    spf[remaining] = remaining
    return FactorSieve(limit=limit, spf=spf)


def largest_factor_table(limit: int) -> np.ndarray:
    """Table of the largest prime factor of every n <= limit (uint32).

    Entry 1 is 1 by convention, entry 0 is 0.  Cost is one strided pass
    per prime, so expect a few seconds near the 10^8 cap.
    """
    limit = int(limit)
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    if limit > SIEVE_LIMIT_MAX:
        raise ValueError(
            f"limit {limit} exceeds SIEVE_LIMIT_MAX={SIEVE_LIMIT_MAX}"
        )
    lpf = np.zeros(limit + 1, dtype=np.uint32)
    if limit >= 1:
        lpf[1] = 1
    for p in primes_up_to(limit).tolist():
        lpf[p::p] = p
    return lpf


def factorize(n: int, sieve: FactorSieve) -> list[tuple[int, int]]:
    """Factor n into sorted (prime, exponent) pairs; n = 1 gives [].

    Requires 1 <= n <= sieve.limit.
    """
    n = int(n)
    if not 1 <= n <= sieve.limit:
        raise ValueError(f"n={n} outside factorizable range [1, {sieve.limit}]")
    spf = sieve.spf
    pairs: list[tuple[int, int]] = []
    while n > 1:
        p = int(spf[n])
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        pairs.append((p, e))
    return pairs


def largest_prime_factor(n: int, sieve: FactorSieve) -> int:
    """P(n), with the convention P(1) = 1."""
    n = int(n)
    if not 1 <= n <= sieve.limit:
        raise ValueError(f"n={n} outside factorizable range [1, {sieve.limit}]")
    if n == 1:
        return 1
    spf = sieve.spf
    p = 1
    while n > 1:
        p = int(spf[n])
        while n % p == 0:
            n //= p
    return p


def friable_part(n: int, y: int, sieve: FactorSieve) -> int:
    """Largest y-friable divisor of n: the product of p^e over p^e || n, p <= y.

    The cofactor n / friable_part(n, y) has all prime factors > y.
    """
    n = int(n)
    y = int(y)
    if not 1 <= n <= sieve.limit:
        raise ValueError(f"n={n} outside factorizable range [1, {sieve.limit}]")
    if y < 1:
        raise ValueError(f"y must be >= 1, got {y}")
    part = 1
    for p, e in factorize(n, sieve):
        if p <= y:
            part *= p**e
    return part


class MultValues(NamedTuple):
    phi: int
    mu: int
    tau: int
    omega: int


def mult_functions(n: int, sieve: FactorSieve) -> MultValues:
    """Euler phi, Mobius mu, divisor count tau, distinct-prime count omega.

    Conventions at n = 1: phi = 1, mu = 1, tau = 1, omega = 0.
    """
    pairs = factorize(n, sieve)
    phi = 1
    mu = 1
    tau = 1
    for p, e in pairs:
        phi *= (p - 1) * p ** (e - 1)
        mu = 0 if e >= 2 else -mu
        tau *= e + 1
    return MultValues(phi=phi, mu=mu, tau=tau, omega=len(pairs))


def euler_phi(n: int, sieve: FactorSieve) -> int:
    return mult_functions(n, sieve).phi


def mobius(n: int, sieve: FactorSieve) -> int:
    return mult_functions(n, sieve).mu


def divisor_count(n: int, sieve: FactorSieve) -> int:
    return mult_functions(n, sieve).tau


def omega_distinct(n: int, sieve: FactorSieve) -> int:
    return mult_functions(n, sieve).omega


def divisor_list(n: int, sieve: FactorSieve) -> list[int]:
    """All divisors of n, sorted increasing."""
    divs = [1]
    for p, e in factorize(n, sieve):
        powers = [p**k for k in range(1, e + 1)]
        divs += [d * q for d in divs for q in powers]
    return sorted(divs)


def totient_table(limit: int) -> np.ndarray:
    """phi(n) for all n <= limit as an exact int64 array (phi[0] = 0)."""
    limit = int(limit)
    if limit > SIEVE_LIMIT_MAX:
        raise ValueError(f"limit {limit} exceeds SIEVE_LIMIT_MAX={SIEVE_LIMIT_MAX}")
    phi = np.arange(limit + 1, dtype=np.int64)
    for p in primes_up_to(limit).tolist():
        phi[p::p] //= p
        phi[p::p] *= p - 1
    return phi


def multiplicative_table(
    limit: int,
    prime_power_value: Callable[[int, int], float],
    *,
    exponent_sensitive: bool = True,
) -> np.ndarray:
    """Values of a multiplicative function on [0, limit] as float64.

    Parameters
    ----------
    limit : int
        Inclusive bound of the table.
    prime_power_value : callable
        (p, e) -> value of the function at p^e.
    exponent_sensitive : bool
        When False the function only depends on the distinct primes of n
        (the value at p^e equals the value at p); this enables a cheaper
        single slice per prime.

    Notes
    -----
    Entry 1 is 1 (empty product), entry 0 is 0.  One strided multiply per
    prime, plus exact-exponent masks for primes below sqrt(limit); total
    work is O(limit log log limit) in vectorized numpy operations.
    """
    limit = int(limit)
    if limit > SIEVE_LIMIT_MAX:
        raise ValueError(f"limit {limit} exceeds SIEVE_LIMIT_MAX={SIEVE_LIMIT_MAX}")
    val = np.ones(limit + 1, dtype=np.float64)
    val[0] = 0.0
    for p in primes_up_to(limit).tolist():
        if not exponent_sensitive or p * p > limit:
            # No higher power of p fits, or the exponent is irrelevant:
            # one factor per multiple of p.
            val[p::p] *= prime_power_value(p, 1)
            continue
        pe = p
        e = 1
        while pe <= limit:
            idx = np.arange(pe, limit + 1, pe, dtype=np.int64)
            if pe * p <= limit:
                idx = idx[(idx // pe) % p != 0]  # exact exponent e
            val[idx] *= prime_power_value(p, e)
            pe *= p
            e += 1
    return val
