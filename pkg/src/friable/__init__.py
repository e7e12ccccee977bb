"""Friable-number statistics at desk scale.

Exact counts of y-friable integers (totals, residue classes, coprime
counts, discrepancy sums), the Dickman rho function, the saddle point
alpha(x, y), mean values of arithmetic functions over shifted friable
integers, and Erdos-Kac distribution diagnostics, with a CLI front end.
"""

from .counting import (
    discrepancy_report,
    enumerate_friable,
    h_scale,
    in_hildebrand_domain,
    local_law_report,
    psi,
    psi_by_enumeration,
    psi_coprime,
    psi_progression,
    weighted_discrepancy,
)
from .dickman import RhoTable, build_rho, hildebrand_ratio, rho
from .erdoskac import (
    EkConfig,
    berry_esseen_bound,
    char_coefficient,
    char_fn_gap,
    ek_discrepancy,
    ek_moments,
    ek_report,
    empirical_cdf,
    gaussian_cdf,
    landreau_scan,
    omega_scan,
    omega_truncated,
    truncated_cdf,
)
from .factor import (
    FactorSieve,
    build_sieve,
    factorize,
    friable_part,
    largest_prime_factor,
    mult_functions,
    primes_up_to,
)
from .meanvalue import (
    BUILTIN_SPECS,
    ArithmeticFunctionSpec,
    empirical_mean,
    get_spec,
    lambda_from_f,
    mean_value_report,
    parse_spec_file,
    predicted_main_term,
    truncation_level,
)
from .saddle import (
    SaddlePoint,
    alpha_gap_diagnostic,
    coprime_density,
    coprime_density_exact,
    solve_alpha,
)

__version__ = "0.1.0"
