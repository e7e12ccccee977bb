"""Erdos-Kac statistics for shifted friable integers.

The central object is the exact histogram of omega(n-1) (distinct prime
divisors, optionally truncated to primes <= Y) over friable 2 <= n <= x,
built in one segmented sieve pass (add 1 per prime divisor below the
window's square root, plus 1 for the surviving cofactor) rather than by
per-n factorization.  Everything downstream -- the empirical CDF, the
sup distance to the Gaussian, characteristic-function gaps and the
Berry-Esseen style bound -- is a pure read of that histogram.

Constants caveat: the Berry-Esseen inequality carries an unspecified
absolute constant; berry_esseen_bound reports the bracketed expression
with constant 1 and is a diagnostic, not a proven bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import factor
from ._parallel import ordered_map
from .counting import COUNT_LIMIT_MAX, DEFAULT_SEGMENT, _segments, divide_out, friable_mask
from .reports import EkMoments, EkReport, LandreauScan


def gaussian_cdf(t: float) -> float:
    """Standard normal CDF via erfc, accurate to ~1e-15."""
    return 0.5 * math.erfc(-float(t) / math.sqrt(2.0))


@dataclass(frozen=True)
class EkConfig:
    """Truncation parameters: Y = exp(log x / (log log x)^c_y), xi = log log Y.

    Requires Y > e so that xi > 0; Y is clamped to x from above.  c_y
    defaults to 2 and is a user knob: no claim is made about which
    exponent any asymptotic statement actually needs.
    """

    x: int
    y: int
    c_y: float
    Y: float
    xi: float

    @classmethod
    def build(cls, x: int, y: int, c_y: float = 2.0) -> "EkConfig":
        x = int(x)
        y = int(y)
        if x < 16:
            raise ValueError(f"x must be >= 16, got {x}")
        c_y = float(c_y)
        if c_y <= 0:
            raise ValueError(f"c_y must be > 0, got {c_y}")
        Y = min(math.exp(math.log(x) / math.log(math.log(x)) ** c_y), float(x))
        if Y <= math.e:
            raise ValueError(
                f"derived Y={Y:.3f} <= e gives xi <= 0; lower c_y or raise x"
            )
        return cls(x=x, y=y, c_y=c_y, Y=Y, xi=math.log(math.log(Y)))


@dataclass(frozen=True)
class OmegaScan:
    """Histograms of omega(n-1) over friable 2 <= n <= x.

    hist_full[k]  = #{n friable in [2, x] : omega(n-1) = k}
    hist_trunc[k] = same with primes counted only up to Y
    psi           = full friable count including n = 1, so the histograms
                    sum to psi - 1.
    """

    x: int
    y: int
    Y: float
    psi: int
    hist_full: np.ndarray
    hist_trunc: np.ndarray


def _omega_segment(mlo: int, mhi: int, primes: list[int], Y: float):
    """omega(m) and omega(m, Y) for m in [mlo, mhi); primes cover sqrt(mhi-1)."""
    size = mhi - mlo
    om = np.zeros(size, dtype=np.int16)
    omt = np.zeros(size, dtype=np.int16)
    for p in primes:
        start = ((mlo + p - 1) // p) * p
        if start >= mhi:
            continue
        sl = slice(start - mlo, None, p)
        om[sl] += 1
        if p <= Y:
            omt[sl] += 1
    rem = divide_out(mlo, mhi, primes)
    big = rem > 1
    om[big] += 1
    omt[big & (rem <= Y)] += 1
    return om, omt


def omega_scan(
    x: int,
    y: int,
    Y: float | None = None,
    *,
    threads: int = 1,
    segment: int = DEFAULT_SEGMENT,
) -> OmegaScan:
    """One segmented pass building the omega(n-1) histograms over friable n."""
    x = int(x)
    y = int(y)
    if x < 4:
        raise ValueError(f"x must be >= 4, got {x}")
    if y < 2:
        raise ValueError(f"y must be >= 2, got {y}")
    if x > COUNT_LIMIT_MAX:
        raise ValueError(f"x={x} exceeds cap {COUNT_LIMIT_MAX}")
    if Y is None:
        Y = float(x)
    omega_primes = factor.primes_up_to(math.isqrt(x - 1)).tolist()
    all_friable = y >= x
    friable_primes = None if all_friable else factor.primes_up_to(min(y, math.isqrt(x))).tolist()
    nbins = 72  # omega(m) < 16 for m <= 10^9; headroom is free

    def work(span):
        lo, hi = span
        if all_friable:
            mask = np.ones(hi - lo, dtype=bool)
            count = hi - lo
        else:
            mask = friable_mask(lo, hi, y, friable_primes)
            count = int(mask.sum())
        om, omt = _omega_segment(lo - 1, hi - 1, omega_primes, Y)
        hf = np.bincount(om[mask].astype(np.int64), minlength=nbins)
        ht = np.bincount(omt[mask].astype(np.int64), minlength=nbins)
        return count, hf, ht

    parts = ordered_map(work, _segments(2, x + 1, segment), threads)
    psi_value = 1  # n = 1 is friable but excluded from the histograms
    hist_full = np.zeros(nbins, dtype=np.int64)
    hist_trunc = np.zeros(nbins, dtype=np.int64)
    for count, hf, ht in parts:
        psi_value += count
        hist_full += hf
        hist_trunc += ht
    return OmegaScan(
        x=x, y=y, Y=float(Y), psi=psi_value, hist_full=hist_full, hist_trunc=hist_trunc
    )


def omega_truncated(n: int, Y: float, sieve: factor.FactorSieve) -> int:
    """Count of distinct primes p <= Y dividing n (per-element route)."""
    return sum(1 for p, _ in factor.factorize(n, sieve) if p <= Y)


# ---------------------------------------------------------------------------
# distribution functions
# ---------------------------------------------------------------------------

def _cdf_from_hist(hist: np.ndarray, psi_value: int, threshold: float) -> float:
    kmax = math.floor(threshold)
    if kmax < 0:
        return 0.0
    kmax = min(kmax, hist.shape[0] - 1)
    return float(hist[: kmax + 1].sum()) / psi_value


def empirical_cdf(scan: OmegaScan, t: float) -> float:
    """Fraction of S*(x, y) with (omega(n-1) - loglog x)/sqrt(loglog x) <= t.

    The divisor is the full friable count Psi(x, y) (n = 1 included), so
    the t -> +inf limit is (Psi - 1)/Psi, not 1.
    """
    ll = math.log(math.log(scan.x))
    return _cdf_from_hist(scan.hist_full, scan.psi, ll + float(t) * math.sqrt(ll))


def truncated_cdf(scan: OmegaScan, t: float, xi: float) -> float:
    """Same with omega(n-1, Y) and centering xi = log log Y."""
    xi = float(xi)
    return _cdf_from_hist(scan.hist_trunc, scan.psi, xi + float(t) * math.sqrt(xi))


def ek_discrepancy(scan: OmegaScan) -> tuple[float, bool]:
    """sup_t |empirical CDF - Phi(t)|, exact at the jump points.

    Both one-sided limits are evaluated at every jump of the step
    function, plus the t -> +inf deficit 1/Psi.  Returns (sup, degenerate)
    with degenerate set when Psi <= 2 (too few points to mean anything).
    """
    ll = math.log(math.log(scan.x))
    sll = math.sqrt(ll)
    cum = np.cumsum(scan.hist_full) / scan.psi
    sup = 1.0 / scan.psi  # t -> +inf: empirical tops out at (Psi-1)/Psi
    for k in range(scan.hist_full.shape[0]):
        if scan.hist_full[k] == 0:
            continue
        t_k = (k - ll) / sll
        phi = gaussian_cdf(t_k)
        right = float(cum[k])
        left = float(cum[k - 1]) if k > 0 else 0.0
        sup = max(sup, abs(right - phi), abs(left - phi))
    return sup, scan.psi <= 2


def ek_moments(scan: OmegaScan, xi: float) -> EkMoments:
    """Exact moment sums of omega(n-1, Y) and the centered second moment.

    centered_second_over_xi is (1/(xi * Psi)) * sum (omega(n-1, Y) - xi)^2,
    the quantity controlling the characteristic-function gap near 0.
    """
    xi = float(xi)
    k = np.arange(scan.hist_trunc.shape[0], dtype=np.int64)
    h = scan.hist_trunc
    s1 = int(np.sum(k * h))
    s2 = int(np.sum(k * k * h))
    n_terms = int(h.sum())
    mean = s1 / n_terms if n_terms else 0.0
    var = s2 / n_terms - mean * mean if n_terms else 0.0
    centered = float(np.sum((k - xi) ** 2 * h))
    return EkMoments(
        x=scan.x,
        y=scan.y,
        Y=scan.Y,
        xi=xi,
        psi=scan.psi,
        sum_omega=s1,
        sum_omega_sq=s2,
        mean=mean,
        variance=var,
        centered_second_over_xi=centered / (xi * scan.psi),
    )


# ---------------------------------------------------------------------------
# characteristic function
# ---------------------------------------------------------------------------

def char_coefficient(d: int, theta: float, xi: float, sieve: factor.FactorSieve) -> complex:
    """mu^2(d) * (exp(i*theta/sqrt(xi)) - 1)^omega(d).

    Its divisor sum over d | m with P(d) <= Y reproduces
    exp(i*theta*omega(m, Y)/sqrt(xi)) exactly.
    """
    vals = factor.mult_functions(d, sieve)
    if vals.mu == 0:
        return 0.0 + 0.0j
    base = complex(math.cos(theta / math.sqrt(xi)) - 1.0, math.sin(theta / math.sqrt(xi)))
    return base**vals.omega


def char_fn_gap(scan: OmegaScan, theta: float, xi: float) -> complex:
    """R(theta): normalized characteristic function of the standardized
    truncated omega, minus the Gaussian exp(-theta^2/2).

    Computed from the histogram in one weighted complex sum.  theta must
    lie in [0, sqrt(xi)]; negative theta follows by conjugation.
    """
    theta = float(theta)
    xi = float(xi)
    if not 0.0 <= theta <= math.sqrt(xi) + 1e-12:
        raise ValueError(f"theta={theta} outside [0, sqrt(xi)={math.sqrt(xi):.6f}]")
    k = np.arange(scan.hist_trunc.shape[0], dtype=np.float64)
    phase = theta * (k - xi) / math.sqrt(xi)
    z = np.sum(scan.hist_trunc * np.exp(1j * phase)) / scan.psi
    return complex(z - math.exp(-0.5 * theta * theta))


@dataclass(frozen=True)
class BerryEsseenResult:
    bound: float
    base: float            # 1/sqrt(xi)
    small_theta_part: float
    integral_part: float
    eps0: float
    panels: int


def berry_esseen_bound(
    scan: OmegaScan,
    xi: float,
    *,
    eps0: float = 1e-3,
    rel_change: float = 1e-6,
) -> BerryEsseenResult:
    """1/sqrt(xi) + int_0^sqrt(xi) |R(theta)| dtheta/theta, constant 1.

    On [0, eps0] the integrand is replaced by the measured slope of the
    characteristic function at 0 (|first moment| / sqrt(xi)), sidestepping
    the removable singularity; the rest uses composite Simpson with the
    panel count doubled until the value moves by less than rel_change.
    """
    xi = float(xi)
    upper = math.sqrt(xi)
    if eps0 <= 0 or eps0 >= upper:
        raise ValueError(f"eps0 must be in (0, sqrt(xi)), got {eps0}")
    k = np.arange(scan.hist_trunc.shape[0], dtype=np.float64)
    h = scan.hist_trunc.astype(np.float64)
    slope = abs(float(np.sum((k - xi) * h))) / (scan.psi * math.sqrt(xi))
    small = slope * eps0

    def integrand(thetas: np.ndarray) -> np.ndarray:
        phase = np.outer(thetas / math.sqrt(xi), k - xi)
        z = (np.exp(1j * phase) * h).sum(axis=1) / scan.psi
        r = np.abs(z - np.exp(-0.5 * thetas**2))
        return r / thetas

    panels = 64
    prev = None
    for _ in range(16):
        grid = np.linspace(eps0, upper, 2 * panels + 1)
        vals = integrand(grid)
        hstep = (upper - eps0) / (2 * panels)
        simpson = hstep / 3.0 * (
            vals[0] + vals[-1] + 4.0 * vals[1:-1:2].sum() + 2.0 * vals[2:-1:2].sum()
        )
        if prev is not None and abs(simpson - prev) <= rel_change * max(1.0, abs(simpson)):
            break
        prev = simpson
        panels *= 2
    base = 1.0 / math.sqrt(xi)
    return BerryEsseenResult(
        bound=base + small + float(simpson),
        base=base,
        small_theta_part=small,
        integral_part=float(simpson),
        eps0=eps0,
        panels=panels,
    )


# ---------------------------------------------------------------------------
# Landreau decomposition
# ---------------------------------------------------------------------------

def landreau_scan(limit: int) -> LandreauScan:
    """max over 2 <= n <= limit of tau(n) / sum_{d|n, d^3 <= n} tau(d)^3.

    The divisor d = 1 always qualifies, so the denominator is >= 1; at
    primes the ratio is exactly 2.  Comparisons are exact (small-integer
    ratios in float64 stay exact well past this range).
    """
    limit = int(limit)
    if not 2 <= limit <= 10_000_000:
        raise ValueError(f"limit must be in [2, 10^7], got {limit}")
    tau = factor.multiplicative_table(limit, lambda p, e: float(e + 1))
    weight = np.zeros(limit + 1, dtype=np.float64)
    d = 1
    while d * d * d <= limit:
        weight[d * d * d :: d] += tau[d] ** 3
        d += 1
    ratios = tau[2:] / weight[2:]
    arg = int(np.argmax(ratios)) + 2
    return LandreauScan(
        limit=limit,
        max_ratio=float(ratios[arg - 2]),
        argmax=arg,
        tau=int(tau[arg]),
        weight_sum=int(weight[arg]),
    )


# ---------------------------------------------------------------------------
# assembled report
# ---------------------------------------------------------------------------

def ek_report(
    x: int,
    y: int,
    *,
    c_y: float = 2.0,
    t_grid: np.ndarray | None = None,
    threads: int = 1,
) -> EkReport:
    """Full distribution report: CDF grid, sup discrepancy, moments of the
    plain and truncated counts, and the Berry-Esseen style diagnostic."""
    config = EkConfig.build(x, y, c_y)
    scan = omega_scan(x, y, config.Y, threads=threads)
    if t_grid is None:
        t_grid = np.linspace(-4.0, 4.0, 81)
    rows = []
    for t in np.asarray(t_grid, dtype=np.float64).tolist():
        emp = empirical_cdf(scan, t)
        phi = gaussian_cdf(t)
        rows.append((t, emp, phi, emp - phi))
    sup, degenerate = ek_discrepancy(scan)

    def _stats(hist: np.ndarray) -> tuple[float, float]:
        n = int(hist.sum())
        if n == 0:
            return 0.0, 0.0
        k = np.arange(hist.shape[0], dtype=np.float64)
        mean = float(np.sum(k * hist)) / n
        var = float(np.sum((k - mean) ** 2 * hist)) / n
        return mean, var

    mean_full, var_full = _stats(scan.hist_full)
    mean_tr, var_tr = _stats(scan.hist_trunc)
    be = berry_esseen_bound(scan, config.xi)
    lll = math.log(math.log(math.log(x)))
    ll = math.log(math.log(x))
    return EkReport(
        x=int(x),
        y=int(y),
        c_y=config.c_y,
        Y=config.Y,
        xi=config.xi,
        psi=scan.psi,
        rows=rows,
        discrepancy=sup,
        degenerate=degenerate,
        mean_omega=mean_full,
        var_omega=var_full,
        mean_omega_truncated=mean_tr,
        var_omega_truncated=var_tr,
        berry_esseen=be.bound,
        budget=lll / math.sqrt(ll),
    )
