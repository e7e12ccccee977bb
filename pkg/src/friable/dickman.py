"""Dickman rho: numerical solution of u rho'(u) + rho(u-1) = 0.

rho is 1 on [0, 1], 0 below 0, and on each interval [k, k+1] satisfies

    rho(u) = rho(k) - int_k^u rho(v-1) / v dv.

Integrating that relation by parts once gives the subtraction-free form

    u * rho(u) = int_{u-1}^{u} rho(t) dt,

which is what the solver discretizes (composite Simpson on a dense
uniform grid, interval by interval, implicit in the current interval and
iterated to a fixed point).  The distinction matters: in the literal
prefix-subtraction form the absolute rounding error of the early
intervals (~1e-19 even in 80-bit arithmetic) persists forever and
swamps rho(u) < 1e-16 beyond u ~ 15, while in the windowed-mean form
every value is a positive average of the recent past, so errors decay
with the solution and the tail down to rho(50) ~ 4e-65 keeps relative
accuracy.  The step is halved until consecutive grids agree to the
requested tolerance; evaluation between grid points uses a monotone
cubic (PCHIP), which cannot overshoot the decreasing data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .reports import write_csv

U_MAX_LIMIT = 50.0
TOL_MIN, TOL_MAX = 1e-14, 1e-6
UNDERFLOW_FLOOR = 1e-60


@dataclass(frozen=True)
class RhoTable:
    """Dense-grid representation of rho on [0, u_max].

    Grid values are raw float64 (positive all the way down); evaluation
    clips anything below 1e-60 to exact 0.0, and underflow_u records the
    first grid point where that happens (None when it never does).
    """

    u_max: float
    h: float
    tol: float
    grid_u: np.ndarray
    grid_rho: np.ndarray
    refinements: int
    underflow_u: float | None
    _interp: PchipInterpolator = field(repr=False, compare=False)

    def __call__(self, u: float) -> float:
        return rho(u, self)


def _cumulative_simpson(y: np.ndarray, dx) -> np.ndarray:
    """Cumulative composite Simpson over a uniform grid of even length-1.

    Even indices get the standard pair rule, odd indices the half-panel
    quadratic rule (5, 8, -1)/12.  Works in the dtype of y, which the
    solver sets to longdouble: the end-of-interval cancellation in the
    rho recursion amplifies summation rounding by ~1/(k log k) ratios,
    and 64-bit accumulation would freeze the tail's relative accuracy.
    """
    n = y.shape[0]
    out = np.zeros(n, dtype=y.dtype)
    pair = (dx / 3.0) * (y[0:-2:2] + 4.0 * y[1:-1:2] + y[2::2])
    out[2::2] = np.cumsum(pair)
    out[1::2] = out[0:-1:2] + (dx / 12.0) * (5.0 * y[0:-1:2] + 8.0 * y[1::2] - y[2::2])
    return out


def _solve_grid(units: int, m: int) -> np.ndarray:
    """rho at the uniform grid j/m for 0 <= j <= units*m.

    Interval k solves rho(u) = (1/u) int_{u-1}^{u} rho via fixed-point
    iteration: the window integral splits into a known suffix over the
    previous interval plus a prefix over the current one, and the
    prefix's dependence on the unknown values contracts with ratio at
    most (u-k)/u <= 1/(k+1), so a few dozen vectorized sweeps suffice.
    """
    hd = np.longdouble(1.0) / m
    out = np.empty(units * m + 1, dtype=np.longdouble)
    out[: m + 1] = 1.0
    offsets = np.arange(m + 1, dtype=np.longdouble) * hd
    tiny = np.longdouble(1e-4000)
    for k in range(1, units):
        base = k * m
        prev = out[base - m : base + 1]
        c_prev = _cumulative_simpson(prev, hd)
        suffix_prev = c_prev[-1] - c_prev  # int from k-1+j*h to k
        u = k + offsets
        knot = out[base]
        cur = np.full(m + 1, knot, dtype=np.longdouble)
        for _ in range(400):
            new = (suffix_prev + _cumulative_simpson(cur, hd)) / u
            new[0] = knot  # shared grid point stays anchored
            delta = float(np.max(np.abs(new - cur) / np.maximum(new, tiny)))
            cur = new
            if delta <= 5e-19:
                break
        else:
            raise ArithmeticError(f"fixed point stalled on interval [{k}, {k + 1}]")
        out[base + 1 : base + m + 1] = cur[1:]
    return out.astype(np.float64)


def build_rho(u_max: float = 50.0, tol: float = 1e-12) -> RhoTable:
    """Build a rho table on [0, u_max] accurate to about tol at the grid.

    u_max is rounded up to an integer number of unit intervals (at most
    50); tol must lie in [1e-14, 1e-6].  The grid step starts near
    (180*tol)^(1/4) and is halved until consecutive solutions agree to
    tol/4 absolutely and 1e-8 relatively at the shared grid points.
    """
    u_max = float(u_max)
    if not 1.0 <= u_max <= U_MAX_LIMIT:
        raise ValueError(f"u_max must be in [1, {U_MAX_LIMIT}], got {u_max}")
    if not TOL_MIN <= tol <= TOL_MAX:
        raise ValueError(f"tol must be in [{TOL_MIN}, {TOL_MAX}], got {tol}")
    units = int(math.ceil(u_max))

    # Step from the quadrature error (h^4) and from the PCHIP evaluation
    # error between knots (h^3), whichever is finer.
    h0 = min((180.0 * tol) ** 0.25, (0.25 * tol) ** (1.0 / 3.0))
    m = 16
    while 1.0 / m > h0:
        m *= 2

    coarse = _solve_grid(units, m)
    refinements = 0
    for _ in range(12):
        fine = _solve_grid(units, 2 * m)
        shared = fine[::2]
        diff = np.abs(shared - coarse)
        denom = np.maximum(np.abs(shared), 1e-300)
        if diff.max() <= 0.25 * tol and (diff / denom).max() <= 1e-8:
            break
        coarse = fine
        m *= 2
        refinements += 1
    else:
        raise ArithmeticError("rho grid failed to self-converge")

    m_final = 2 * m
    grid_rho = fine
    grid_u = np.arange(units * m_final + 1, dtype=np.float64) / m_final
    underflow = grid_u[grid_rho < UNDERFLOW_FLOOR]
    return RhoTable(
        u_max=float(units),
        h=1.0 / m_final,
        tol=tol,
        grid_u=grid_u,
        grid_rho=grid_rho,
        refinements=refinements,
        underflow_u=float(underflow[0]) if underflow.size else None,
        _interp=PchipInterpolator(grid_u, grid_rho, extrapolate=False),
    )


def rho(u: float, table: RhoTable) -> float:
    """rho(u) from the table: exactly 0 below 0, exactly 1 on [0, 1].

    Values that fall under the 1e-60 double-precision comfort floor are
    reported as 0.0 (see table.underflow_u).  u beyond the table is
    rejected.
    """
    u = float(u)
    if u < 0.0:
        return 0.0
    if u <= 1.0:
        return 1.0
    if u > table.u_max:
        raise ValueError(f"u={u} beyond table u_max={table.u_max}")
    val = float(table._interp(u))
    if val < UNDERFLOW_FLOOR:
        return 0.0
    return val


_TABLE_CACHE: dict[tuple[float, float], RhoTable] = {}


def default_table(u_max: float = 50.0, tol: float = 1e-12) -> RhoTable:
    key = (float(math.ceil(u_max)), float(tol))
    if key not in _TABLE_CACHE:
        _TABLE_CACHE[key] = build_rho(key[0], tol)
    return _TABLE_CACHE[key]


def hildebrand_ratio(
    x: int,
    y: int,
    *,
    table: RhoTable | None = None,
    threads: int = 1,
) -> float:
    """Exact friable count divided by x * rho(u), u = log x / log y.

    A diagnostic of how well the rho approximation tracks the count at
    the given scale; no limit statement is attached to it.
    """
    from . import counting

    u = math.log(x) / math.log(y)
    if table is None:
        table = default_table(u_max=min(U_MAX_LIMIT, max(1.0, math.ceil(u))))
    exact = counting.psi(x, y, threads=threads)
    return exact / (float(x) * rho(u, table))


def dump_grid_csv(table: RhoTable, path: str) -> None:
    """Write the grid as CSV with columns u, rho."""
    rows = list(zip(table.grid_u.tolist(), table.grid_rho.tolist()))
    write_csv(path, "rho-grid v1", ["u", "rho"], rows)
