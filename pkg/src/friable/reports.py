"""Report records and their CSV/JSON serialization.

CSV schemas are frozen: the first line is a versioned comment
(``# friable-csv <name> v1``), the second line the column header.  Floats
are written with repr (shortest round-trip form), so identical inputs
produce byte-identical files regardless of thread count, and JSON
reports re-parse into equal records.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Any


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: str, schema: str, columns: list[str], rows: list[tuple]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# friable-csv {schema}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def to_json(report) -> str:
    payload = {"schema": report.schema, **asdict(report)}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_json(path: str, report) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(to_json(report))


_REPORT_TYPES: dict[str, type] = {}


def _register(cls):
    _REPORT_TYPES[cls.schema] = cls
    return cls


def from_json(text: str):
    """Re-parse a JSON report into the dataclass it came from."""
    payload = json.loads(text)
    schema = payload.pop("schema")
    cls = _REPORT_TYPES[schema]
    kwargs = {}
    for f in fields(cls):
        v = payload[f.name]
        if f.name in getattr(cls, "_row_fields", ()):
            v = [tuple(r) for r in v]
        kwargs[f.name] = v
    return cls(**kwargs)


@_register
@dataclass(frozen=True)
class DiscrepancyReport:
    """Per-modulus gaps between friable counts in progressions and the
    coprime count split evenly over phi(q) classes.

    rows: (q, count_class_one, coprime_over_phi, gap_class_one, gap_max)
    where gap_max is the maximum over residues a coprime to q.
    total is the sum of the class-one gaps, max_total the sum of the
    per-q maxima, weighted_total the weight-lambda(q) weighted sum of
    the maxima.
    """

    schema = "discrepancy v1"
    _row_fields = ("rows",)

    x: int
    y: int
    q_max: int
    psi: int
    weight_name: str
    rows: list[tuple]
    total: float
    max_total: float
    weighted_total: float

    csv_columns = ["q", "count_class_one", "coprime_over_phi", "gap_class_one", "gap_max"]

    def csv_rows(self) -> list[tuple]:
        return list(self.rows)


@_register
@dataclass(frozen=True)
class LocalLawReport:
    """Observed ratio of the m-coprime friable count against the local
    density g_m(alpha) = prod_{p|m}(1 - p^-alpha) times the full count.

    The error surrogate (exp(2*gamma) - 1)/log(u) is displayed as-is;
    nothing asymptotic is asserted (its implied constant is unspecified).
    """

    schema = "local-law v1"

    x: int
    y: int
    m: int
    m_reduced: int
    alpha: float
    g_m_alpha: float
    psi: int
    psi_m: int
    ratio: float
    gamma: float
    error_surrogate: float


@_register
@dataclass(frozen=True)
class MainTermEstimate:
    """Truncated Dirichlet series sum_q lambda(q) g_q(alpha)/phi(q), with a
    certified tail, and (for multiplicative specs) the matching Euler
    product with its own certified prime tail."""

    schema = "main-term v1"

    spec_name: str
    alpha: float
    series_value: float
    series_truncation: int
    series_tail: float
    euler_value: float | None
    euler_prime_cutoff: int | None
    euler_tail: float | None
    certified: bool
    cap_hit: bool

    def combined_tail(self) -> float:
        tail = self.series_tail
        if self.euler_tail is not None:
            tail += self.euler_tail
        return tail


@_register
@dataclass(frozen=True)
class MeanValueReport:
    """Empirical mean of f(n-1) over friable n <= x against the predicted
    local-density series, evaluated both at the saddle point alpha and
    at 1, with the error budget min(1/u, log(u+1)/log y)."""

    schema = "meanvalue v1"

    x: int
    y: int
    u: float
    alpha: float
    spec_name: str
    psi: int
    empirical: float
    predicted_alpha: float
    predicted_one: float
    series_truncation: int
    series_tail: float
    euler_value: float | None
    budget: float
    observed_gap: float
    alpha_vs_one_gap: float
    regime_exponent: float
    in_regime: bool
    certified: bool
    cap_hit: bool

    csv_columns = [
        "x", "y", "u", "alpha", "spec_name", "psi", "empirical",
        "predicted_alpha", "predicted_one", "series_truncation",
        "series_tail", "budget", "observed_gap", "alpha_vs_one_gap",
    ]

    def csv_rows(self) -> list[tuple]:
        return [tuple(getattr(self, c) for c in self.csv_columns)]


@_register
@dataclass(frozen=True)
class EkMoments:
    """Exact first and second moments of the truncated prime-divisor
    count over shifted friable integers."""

    schema = "ek-moments v1"

    x: int
    y: int
    Y: float
    xi: float
    psi: int
    sum_omega: int
    sum_omega_sq: int
    mean: float
    variance: float
    centered_second_over_xi: float


@_register
@dataclass(frozen=True)
class EkReport:
    """Empirical distribution of the standardized prime-divisor count of
    n-1 over friable n, against the Gaussian.

    rows: (t, empirical_cdf, phi, gap).  budget is the reported scale
    log_3 x / sqrt(log_2 x); nothing asymptotic is asserted.
    """

    schema = "erdoskac v1"
    _row_fields = ("rows",)

    x: int
    y: int
    c_y: float
    Y: float
    xi: float
    psi: int
    rows: list[tuple]
    discrepancy: float
    degenerate: bool
    mean_omega: float
    var_omega: float
    mean_omega_truncated: float
    var_omega_truncated: float
    berry_esseen: float
    budget: float

    csv_columns = ["t", "empirical_cdf", "phi", "gap"]

    def csv_rows(self) -> list[tuple]:
        return list(self.rows)


@_register
@dataclass(frozen=True)
class LandreauScan:
    """Largest observed ratio tau(n) / sum_{d|n, d^3<=n} tau(d)^3 and
    where it occurs."""

    schema = "landreau v1"

    limit: int
    max_ratio: float
    argmax: int
    tau: int
    weight_sum: int
