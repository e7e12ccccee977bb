"""Mean values of arithmetic functions over shifted friable integers.

For f with Mobius transform lambda = f * mu, the empirical quantity is

    R_f(x, y) = (1 / Psi(x, y)) * sum f(n - 1)  over friable 2 <= n <= x,

and the predicted main term is the series sum_q lambda(q) g_q(alpha) / phi(q)
with g_q(beta) = prod_{p|q} (1 - p^-beta) and alpha the saddle point.  For
multiplicative f the same value is an Euler product

    prod_p ( 1 + (1 - p^-alpha) / (1 - 1/p) * sum_v lambda(p^v) / p^v ),

and both routes are computed with certified truncation tails so that the
series/product agreement is a machine-checkable consistency statement,
not an article of faith.

Specs carry a growth budget (B, beta) meaning sum_q |lambda(q)| / q^(1-beta) <= B,
which is spot-checked numerically and drives the default truncation rules.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable

import numpy as np

from . import counting, factor
from .reports import MainTermEstimate, MeanValueReport
from .saddle import solve_alpha

SERIES_CAP = 10_000_000
DIRECT_SERIES_CAP = 20_000
DIRECT_EVAL_CAP = 1_000_000
DEFAULT_TAIL_TARGET = 1e-8
DEFAULT_PRIME_CUTOFF = 4_000_000


def prime_square_tail(cutoff: float) -> float:
    """Upper bound for sum over primes p > cutoff of 1/p^2.

    Partial summation with pi(t) < 1.26 t / log t (valid for t > 1)
    gives 2.52 / (cutoff * log(cutoff)).
    """
    cutoff = float(cutoff)
    if cutoff < 2:
        raise ValueError("cutoff must be >= 2")
    return 2.52 / (cutoff * math.log(cutoff))


@dataclass(frozen=True)
class ArithmeticFunctionSpec:
    """An arithmetic function given on prime powers, plus its growth budget.

    mode:
      "multiplicative"  f(p^e) supplied, lambda derived as f(p^e) - f(p^(e-1));
      "lambda"          lambda(p^e) supplied (lambda multiplicative);
      "direct"          arbitrary f as a callable, lambda via divisor sums.

    prime_tail(P) must return a certified upper bound for
    sum_{p > P} sum_{v >= 1} |lambda(p^v)| / p^v; the default B * P^-beta
    follows from the budget, built-ins override it with sharp 1/p^2-type
    bounds.
    """

    name: str
    mode: str
    B: float
    beta: float
    f_prime_power: Callable[[int, int], float] | None = None
    lambda_prime_power: Callable[[int, int], float] | None = None
    f_direct: Callable[[int], float] | None = None
    prime_tail: Callable[[float], float] | None = None

    def __post_init__(self):
        if self.mode not in ("multiplicative", "lambda", "direct"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.B <= 0:
            raise ValueError("B must be > 0")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must be in (0, 1]")
        if self.mode == "multiplicative" and self.f_prime_power is None:
            raise ValueError("multiplicative mode needs f_prime_power")
        if self.mode == "lambda" and self.lambda_prime_power is None:
            raise ValueError("lambda mode needs lambda_prime_power")
        if self.mode == "direct" and self.f_direct is None:
            raise ValueError("direct mode needs f_direct")

    @property
    def multiplicative(self) -> bool:
        return self.mode in ("multiplicative", "lambda")

    def lambda_pp(self, p: int, e: int) -> float:
        if self.mode == "lambda":
            return self.lambda_prime_power(p, e)
        if self.mode == "multiplicative":
            prev = 1.0 if e == 1 else self.f_prime_power(p, e - 1)
            return self.f_prime_power(p, e) - prev
        raise ValueError("direct-mode specs have no prime-power lambda")

    def f_pp(self, p: int, e: int) -> float:
        if self.mode == "multiplicative":
            return self.f_prime_power(p, e)
        if self.mode == "lambda":
            return 1.0 + math.fsum(self.lambda_prime_power(p, j) for j in range(1, e + 1))
        raise ValueError("direct-mode specs have no prime-power f")

    def f_value(self, n: int, sieve: factor.FactorSieve) -> float:
        if self.mode == "direct":
            return self.f_direct(n)
        out = 1.0
        for p, e in factor.factorize(n, sieve):
            out *= self.f_pp(p, e)
        return out

    def lambda_value(self, q: int, sieve: factor.FactorSieve) -> float:
        if self.mode == "direct":
            return lambda_from_f(self.f_direct, q, sieve)
        out = 1.0
        for p, e in factor.factorize(q, sieve):
            out *= self.lambda_pp(p, e)
        return out

    def prime_tail_bound(self, cutoff: float) -> float:
        if self.prime_tail is not None:
            return self.prime_tail(cutoff)
        # |lambda(q)|/q <= B q^-beta termwise from the budget, summed over
        # prime powers q > cutoff.
        return self.B * float(cutoff) ** (-self.beta)

    def budget_check(self, limit: int = 100_000, sieve: factor.FactorSieve | None = None):
        """Numerically spot-check sum_{q<=limit} |lambda(q)|/q^(1-beta) <= B."""
        if sieve is None:
            sieve = factor.build_sieve(limit)
        if self.multiplicative:
            lam = np.abs(lambda_table(self, limit))
        else:
            lam = np.abs(
                np.array([0.0] + [self.lambda_value(q, sieve) for q in range(1, limit + 1)])
            )
        q = np.arange(limit + 1, dtype=np.float64)
        q[0] = 1.0
        total = float(np.sum(lam / q ** (1.0 - self.beta)))
        return total, total <= self.B


def lambda_from_f(f: Callable[[int], float], n: int, sieve: factor.FactorSieve) -> float:
    """Mobius transform sum_{d | n} f(d) mu(n/d)."""
    n = int(n)
    total = []
    for d in factor.divisor_list(n, sieve):
        mu = factor.mobius(n // d, sieve)
        if mu:
            total.append(mu * f(d))
    return math.fsum(total)


# ---------------------------------------------------------------------------
# built-in catalog
# ---------------------------------------------------------------------------
# tau is deliberately absent: its Mobius transform is identically 1, which
# breaks every (B, beta) budget with beta > 0.

def _spec_one() -> ArithmeticFunctionSpec:
    return ArithmeticFunctionSpec(
        name="one",
        mode="lambda",
        B=1.0,
        beta=1.0,
        lambda_prime_power=lambda p, e: 0.0,
        prime_tail=lambda P: 0.0,
    )


def _spec_phi_over_n() -> ArithmeticFunctionSpec:
    # f(n) = phi(n)/n, lambda(p) = -1/p, lambda(p^e) = 0 for e >= 2.
    return ArithmeticFunctionSpec(
        name="phi_over_n",
        mode="multiplicative",
        B=3.0,
        beta=0.5,
        f_prime_power=lambda p, e: 1.0 - 1.0 / p,
        prime_tail=lambda P: prime_square_tail(P),  # sum 1/p^2
    )


def _spec_sigma_over_n() -> ArithmeticFunctionSpec:
    # f(n) = sigma(n)/n, lambda(p^e) = p^-e, hence lambda(q) = 1/q.
    return ArithmeticFunctionSpec(
        name="sigma_over_n",
        mode="multiplicative",
        B=3.0,
        beta=0.5,
        f_prime_power=lambda p, e: (p - p ** (-e)) / (p - 1.0),
        prime_tail=lambda P: (4.0 / 3.0) * prime_square_tail(P),  # sum 1/(p^2-1)
    )


def _spec_n_over_phi() -> ArithmeticFunctionSpec:
    # f(n) = n/phi(n), lambda(p) = 1/(p-1), lambda(p^e) = 0 for e >= 2.
    return ArithmeticFunctionSpec(
        name="n_over_phi",
        mode="lambda",
        B=4.0,
        beta=0.5,
        lambda_prime_power=lambda p, e: 1.0 / (p - 1.0) if e == 1 else 0.0,
        prime_tail=lambda P: 2.0 * prime_square_tail(P),  # sum 1/(p(p-1))
    )


BUILTIN_SPECS: dict[str, Callable[[], ArithmeticFunctionSpec]] = {
    "one": _spec_one,
    "phi_over_n": _spec_phi_over_n,
    "sigma_over_n": _spec_sigma_over_n,
    "n_over_phi": _spec_n_over_phi,
}


def get_spec(name_or_spec) -> ArithmeticFunctionSpec:
    if isinstance(name_or_spec, ArithmeticFunctionSpec):
        return name_or_spec
    try:
        return BUILTIN_SPECS[name_or_spec]()
    except KeyError:
        raise ValueError(
            f"unknown spec {name_or_spec!r}; built-ins: {sorted(BUILTIN_SPECS)}"
        ) from None


# ---------------------------------------------------------------------------
# vectorized tables
# ---------------------------------------------------------------------------

def lambda_table(spec: ArithmeticFunctionSpec, limit: int) -> np.ndarray:
    """lambda(q) for q <= limit (multiplicative specs only)."""
    if not spec.multiplicative:
        raise ValueError("lambda_table requires a multiplicative spec")
    return factor.multiplicative_table(limit, spec.lambda_pp)


def coprime_density_table(limit: int, alpha: float) -> np.ndarray:
    """g_q(alpha) = prod_{p|q}(1 - p^-alpha) for q <= limit."""
    a = float(alpha)
    return factor.multiplicative_table(
        limit, lambda p, e: 1.0 - p ** (-a), exponent_sensitive=False
    )


_PHI_CACHE: dict[int, np.ndarray] = {}


def _phi_table(limit: int) -> np.ndarray:
    if limit not in _PHI_CACHE:
        _PHI_CACHE.clear()  # keep at most one (80 MB at the cap)
        _PHI_CACHE[limit] = factor.totient_table(limit)
    return _PHI_CACHE[limit]


# ---------------------------------------------------------------------------
# Euler products
# ---------------------------------------------------------------------------

def _euler_products(
    spec: ArithmeticFunctionSpec, alpha: float, prime_cutoff: int
) -> tuple[float, float, float]:
    """(signed product, absolute-lambda product, relative tail bound).

    Factors are 1 + (1 - p^-alpha)/(1 - 1/p) * sum_v lambda(p^v)/p^v over
    p <= prime_cutoff; the relative tail expm1(2 * prime_tail(cutoff))
    bounds what the missing primes can multiply either product by.
    """
    signed = 1.0
    absolute = 1.0
    for p in factor.primes_up_to(prime_cutoff).tolist():
        mult = (1.0 - p ** (-alpha)) / (1.0 - 1.0 / p)
        s_signed = 0.0
        s_abs = 0.0
        pe = float(p)
        e = 1
        while True:
            lam = spec.lambda_pp(p, e)
            term = lam / pe
            s_signed += term
            s_abs += abs(term)
            e += 1
            pe *= p
            # Budget guarantees |lambda(p^e)|/p^e <= B p^(-e*beta).
            if spec.B * pe ** (-spec.beta) < 1e-18 * (1.0 + s_abs) or e > 200:
                break
        signed *= 1.0 + mult * s_signed
        absolute *= 1.0 + mult * s_abs
    rel_tail = math.expm1(2.0 * spec.prime_tail_bound(prime_cutoff))
    return signed, absolute, rel_tail


# ---------------------------------------------------------------------------
# main term
# ---------------------------------------------------------------------------

def _series_partial(
    spec: ArithmeticFunctionSpec, alpha: float, limit: int
) -> tuple[np.ndarray, np.ndarray]:
    """(terms, cumulative |terms|) of lambda(q) g_q(alpha)/phi(q), q <= limit."""
    lam = lambda_table(spec, limit)
    g = coprime_density_table(limit, alpha)
    phi = _phi_table(limit).astype(np.float64)
    phi[0] = 1.0
    terms = lam * g / phi
    terms[0] = 0.0
    return terms, np.cumsum(np.abs(terms))


def predicted_main_term(
    spec,
    alpha: float,
    truncation: int | None = None,
    *,
    tail_target: float = DEFAULT_TAIL_TARGET,
    max_terms: int = SERIES_CAP,
    prime_cutoff: int = DEFAULT_PRIME_CUTOFF,
) -> MainTermEstimate:
    """Truncated series and Euler product for the predicted mean value.

    The series tail is certified by comparing the running absolute sum
    against the absolute-lambda Euler product (itself certified through
    the spec's prime tail); when truncation is None the smallest q-limit
    with certified tail below tail_target is used, capped at max_terms
    with the report flagged on a cap hit.  Dual routes stay independent:
    the signed series is a q-sum of sieved tables, the product a p-loop.
    """
    spec = get_spec(spec)
    alpha = float(alpha)
    cap_hit = False

    if not spec.multiplicative:
        limit = int(truncation) if truncation else DIRECT_SERIES_CAP
        limit = min(limit, DIRECT_SERIES_CAP)
        sieve = factor.build_sieve(limit)
        g_cache = {}

        def g_of(q):
            key = tuple(p for p, _ in factor.factorize(q, sieve))
            if key not in g_cache:
                g_cache[key] = math.prod(1.0 - p ** (-alpha) for p in key)
            return g_cache[key]

        series = math.fsum(
            spec.lambda_value(q, sieve) * g_of(q) / factor.euler_phi(q, sieve)
            for q in range(1, limit + 1)
        )
        tail = _phi_ratio_bound(spec.beta) * spec.B * limit ** (-spec.beta / 2)
        return MainTermEstimate(
            spec_name=spec.name,
            alpha=alpha,
            series_value=series,
            series_truncation=limit,
            series_tail=tail,
            euler_value=None,
            euler_prime_cutoff=None,
            euler_tail=None,
            certified=tail <= 1e-6,
            cap_hit=False,
        )

    signed_prod, abs_prod, rel_tail = _euler_products(spec, alpha, prime_cutoff)
    euler_tail = abs(signed_prod) * rel_tail
    abs_full_upper = abs_prod * (1.0 + rel_tail)

    if truncation is not None:
        limit = min(int(truncation), max_terms)
        terms, cum_abs = _series_partial(spec, alpha, limit)
        series_tail = max(abs_full_upper - float(cum_abs[limit]), 0.0)
    else:
        limit = min(max_terms, SERIES_CAP)
        terms, cum_abs = _series_partial(spec, alpha, limit)
        need = abs_full_upper - tail_target
        idx = int(np.searchsorted(cum_abs, need))
        if idx >= limit:
            cap_hit = True
            idx = limit
        limit = max(idx, 1)
        terms = terms[: limit + 1]
        series_tail = max(abs_full_upper - float(cum_abs[limit]), 0.0)

    series = float(math.fsum(terms[: limit + 1].tolist()))
    combined = series_tail + euler_tail
    certified = (abs(series - signed_prod) <= combined) and (combined <= 1e-6)
    return MainTermEstimate(
        spec_name=spec.name,
        alpha=alpha,
        series_value=series,
        series_truncation=int(limit),
        series_tail=series_tail,
        euler_value=signed_prod,
        euler_prime_cutoff=int(prime_cutoff),
        euler_tail=euler_tail,
        certified=certified,
        cap_hit=cap_hit,
    )


def _phi_ratio_bound(beta: float) -> float:
    """sup over q of (q / phi(q)) * q^(-beta/2), attained at a primorial."""
    best = 1.0
    ratio = 1.0
    log_q = 0.0
    for p in factor.primes_up_to(10_000).tolist():
        ratio *= p / (p - 1.0)
        log_q += math.log(p)
        best = max(best, ratio * math.exp(-0.5 * beta * log_q))
        if (p / (p - 1.0)) * math.exp(-0.5 * beta * math.log(p)) < 1.0 and p > 100:
            break  # further factors only shrink the candidate
    return best


# ---------------------------------------------------------------------------
# empirical side
# ---------------------------------------------------------------------------

def f_value_table(spec: ArithmeticFunctionSpec, limit: int) -> np.ndarray:
    """f(m) for all m <= limit (multiplicative specs)."""
    if not spec.multiplicative:
        raise ValueError("f_value_table requires a multiplicative spec")
    return factor.multiplicative_table(limit, spec.f_pp)


def empirical_mean(x: int, y: int, spec, *, threads: int = 1) -> float:
    """(1 / Psi(x, y)) * sum of f(n-1) over friable 2 <= n <= x.

    n = 1 is excluded from the sum but Psi(x, y) stays the divisor.
    Multiplicative specs are evaluated by a sieved value table over
    [1, x-1]; direct-mode callables are applied per element (capped at
    x <= 10^6).
    """
    spec = get_spec(spec)
    friable = counting.enumerate_friable(x, y)
    psi_value = int(friable.shape[0])
    shifted = friable[friable >= 2] - 1
    if spec.multiplicative:
        values = f_value_table(spec, int(x) - 1)
        total = math.fsum(values[shifted].tolist())
    else:
        if x > DIRECT_EVAL_CAP:
            raise ValueError(
                f"direct-mode empirical mean capped at x <= {DIRECT_EVAL_CAP}"
            )
        total = math.fsum(spec.f_direct(int(m)) for m in shifted)
    return total / psi_value


def truncation_level(x: int, y: int, beta: float, *, psi_value: int | None = None) -> int:
    """ceil((x (log x)^2 / Psi(x, y))^(1/beta)), with Psi the exact count.

    At y >= x the exact count is floor(x) = x for integer x, so the
    level reduces to ceil((log x)^(2/beta)).
    """
    x = int(x)
    beta = float(beta)
    if beta <= 0:
        raise ValueError("beta must be > 0")
    if psi_value is None:
        psi_value = counting.psi(x, y)
    ratio = x * math.log(x) ** 2 / psi_value
    return int(math.ceil(ratio ** (1.0 / beta)))


def mean_value_report(
    x: int,
    y: int,
    spec,
    *,
    truncation: int | None = None,
    tail_target: float = DEFAULT_TAIL_TARGET,
    prime_cutoff: int = DEFAULT_PRIME_CUTOFF,
    regime_exponent: float = 3.0,
    threads: int = 1,
) -> MeanValueReport:
    """Empirical mean against the predicted main term at the saddle point.

    The error budget min(1/u, log(u+1)/log y) is reported next to the
    observed gap; nothing asymptotic is asserted here.  regime_exponent c
    records whether (log x)^c <= y, with no claim that this c matches any
    particular admissible constant.
    """
    spec = get_spec(spec)
    x = int(x)
    y = int(y)
    u = math.log(x) / math.log(y)
    sp = solve_alpha(x, y)
    emp = empirical_mean(x, y, spec, threads=threads)
    psi_value = counting.psi(x, y, threads=threads)
    at_alpha = predicted_main_term(
        spec, sp.alpha, truncation, tail_target=tail_target, prime_cutoff=prime_cutoff
    )
    at_one = predicted_main_term(
        spec, 1.0, truncation, tail_target=tail_target, prime_cutoff=prime_cutoff
    )
    budget = min(1.0 / u, math.log(u + 1.0) / math.log(y))
    return MeanValueReport(
        x=x,
        y=y,
        u=u,
        alpha=sp.alpha,
        spec_name=spec.name,
        psi=psi_value,
        empirical=emp,
        predicted_alpha=at_alpha.series_value,
        predicted_one=at_one.series_value,
        series_truncation=at_alpha.series_truncation,
        series_tail=at_alpha.series_tail,
        euler_value=at_alpha.euler_value,
        budget=budget,
        observed_gap=abs(emp - at_alpha.series_value),
        alpha_vs_one_gap=abs(at_alpha.series_value - at_one.series_value),
        regime_exponent=float(regime_exponent),
        in_regime=math.log(x) ** float(regime_exponent) <= y,
        certified=at_alpha.certified and at_one.certified,
        cap_hit=at_alpha.cap_hit or at_one.cap_hit,
    )


# ---------------------------------------------------------------------------
# spec files
# ---------------------------------------------------------------------------

_ALLOWED_AST = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd,
)


def _rule_expression(text: str) -> Callable[[int, int], float]:
    """Compile an arithmetic expression in p and nu to a (p, e) callable.

    Only +, -, *, /, ** with numeric literals and the names p, nu are
    accepted (e.g. "-1/p", "p**-nu", "1/(p-1)").
    """
    tree = ast.parse(text, mode="eval")
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_AST):
            raise ValueError(f"disallowed syntax in rule {text!r}")
        if isinstance(node, ast.Name) and node.id not in ("p", "nu"):
            raise ValueError(f"unknown name {node.id!r} in rule {text!r}")
    code = compile(tree, "<spec-rule>", "eval")

    def value(p: int, e: int) -> float:
        return float(eval(code, {"__builtins__": {}}, {"p": float(p), "nu": float(e)}))

    return value


def parse_spec_file(path: str) -> ArithmeticFunctionSpec:
    """Read an arithmetic-function spec from a plain-text file.

    Grammar (one directive per line, '#' comments allowed):

        builtin <name>                    # use a built-in, ignore the rest
        name <identifier>
        B <float>
        beta <float>
        rule nu=<k> <expression>          # lambda(p^k), expression in p, nu
        rule default <expression>         # lambda(p^nu) for unlisted nu

    Unlisted exponents default to 0 when no default rule is given.
    """
    name = None
    B = None
    beta = None
    exact: dict[int, Callable[[int, int], float]] = {}
    default_rule: Callable[[int, int], float] | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, rest = line.partition(" ")
            rest = rest.strip()
            if key == "builtin":
                return get_spec(rest)
            if key == "name":
                name = rest
            elif key == "B":
                B = float(Fraction(rest))
            elif key == "beta":
                beta = float(Fraction(rest))
            elif key == "rule":
                pattern, _, expr = rest.partition(" ")
                fn = _rule_expression(expr.strip())
                if pattern == "default":
                    default_rule = fn
                elif pattern.startswith("nu="):
                    exact[int(pattern[3:])] = fn
                else:
                    raise ValueError(f"bad rule pattern {pattern!r}")
            else:
                raise ValueError(f"unknown directive {key!r}")
    if name is None or B is None or beta is None:
        raise ValueError("spec file must set name, B and beta")

    def lam(p: int, e: int) -> float:
        fn = exact.get(e, default_rule)
        return fn(p, e) if fn is not None else 0.0

    return ArithmeticFunctionSpec(
        name=name, mode="lambda", B=B, beta=beta, lambda_prime_power=lam
    )
