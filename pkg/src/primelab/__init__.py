"""primelab: a desk-scale laboratory for prime windows, sieve majorants,
admissible tuples, and progression variance statistics."""

__version__ = "0.1.0"

from .errors import (
    DegenerateBlockError,
    InputError,
    InvariantError,
    PrimelabError,
    ResourceError,
)
from .windows import (
    PrimeWindow,
    Window,
    count_primes_progression,
    psi_delta,
    sieve_theta_window,
    sieve_window,
    theta_delta,
    theta_delta_progression,
)
from .wtrick import (
    Block,
    WModulus,
    align_block,
    build_modulus,
    density,
    prime_weights,
    select_residue,
)
from .majorant import (
    MajorantTable,
    divisor_sum_table,
    majorization_check,
    moment_diagnostic,
    nu_weights,
)
from .apcount import (
    APCountReport,
    ap_report,
    cap_factor,
    count_prime_aps,
    lower_bound_ledger,
    prime_power_exclusions,
    weighted_ap_sum,
)
from .maynard import (
    AdmissibleTuple,
    SieveF,
    build_tuple,
    cluster_search,
    crt_residue,
    greedy_survivors,
    is_admissible,
    maynard_lambda,
    omega_weight,
    optimize_F,
    sieve_integrals,
    sieve_sums,
    tuple_from_shifts,
)
from .bdh import (
    EmptyClassReport,
    VarianceReport,
    bdh_variance,
    empty_class_bound,
    monotonicity_check,
    offdiag_divisor_count,
    psi_pp_decomposition,
    variance_scan,
)
