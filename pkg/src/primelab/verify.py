"""Self-check registry behind `primelab verify`.

Each check re-derives an identity, inequality, or oracle comparison at desk
scale and reports pass/fail.  Keys are `module.check-name`; `--only` filters
by the prefix before the dot.  Everything is deterministic: fixed seeds,
fixed parameters, no timestamps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import apcount, bdh, majorant, maynard, windows, wtrick
from .arith import is_prime, tree_sum


@dataclass(frozen=True)
class CheckResult:
    key: str
    passed: bool
    detail: str


def _trial_primes(lo: int, hi: int) -> list[int]:
    out = []
    for n in range(max(lo, 2), hi + 1):
        if n < 2:
            continue
        d = 2
        ok = True
        while d * d <= n:
            if n % d == 0:
                ok = False
                break
            d += 1
        if ok:
            out.append(n)
    return out


def _check_sieve_oracle(_):
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = int(rng.integers(0, 10**6 - 600))
        H = int(rng.integers(0, 400))
        pw = windows.sieve_window(x, H)
        want = [p - x for p in _trial_primes(x + 1, x + H)]
        if pw.prime_offsets.tolist() != want:
            return False, f"prime mismatch at window ({x}, {H})"
        powers = []
        for n in range(x + 1, x + H + 1):
            e = 2
            while 2**e <= n:
                from .arith import iroot

                r = iroot(n, e)
                if r >= 2 and r**e == n and is_prime(r):
                    powers.append((n - x, r, e))
                e += 1
        if sorted(powers) != sorted(pw.prime_powers):
            return False, f"prime-power mismatch at window ({x}, {H})"
    return True, "20 windows vs trial division"


def _check_sieve_partition(_):
    pw = windows.sieve_window(100, 40)
    total = windows.theta_delta(pw)
    for q in (1, 2, 3, 4, 6, 7, 12):
        parts = [windows.theta_delta_progression(pw, q, a) for a in range(q)]
        if abs(tree_sum(parts) - total) > 1e-9 * max(1.0, abs(total)):
            return False, f"partition broken at q={q}"
    return True, "theta partition over residue classes"


def _check_sieve_psi_theta(_):
    pw = windows.sieve_window(100, 40)
    diff = windows.psi_delta(pw) - windows.theta_delta(pw)
    want = tree_sum([math.log(p) for _, p, _ in pw.prime_powers])
    ok = abs(diff - want) <= 1e-12 * max(1.0, want)
    return ok, "psi - theta reconstructs the prime-power mass"


def _check_wtrick_pigeonhole(_):
    rng = np.random.default_rng(1)
    for _ in range(10):
        x = int(rng.integers(10**4, 10**5))
        H = int(rng.integers(500, 3000))
        pw = windows.sieve_window(x, H)
        mod = wtrick.build_modulus(7.0)
        b, score = wtrick.select_residue(pw, mod)
        total = wtrick.pigeonhole_total(pw, mod)
        if score * mod.phi_W < total * (1 - 1e-12) - 1e-12:
            return False, f"pigeonhole broken at ({x}, {H})"
    return True, "score * phi(W) >= total over reduced classes"


def _check_wtrick_alignment(_):
    pw = windows.sieve_window(100, 40)
    mod = wtrick.build_modulus(3.0)
    b, _ = wtrick.select_residue(pw, mod)
    block = wtrick.align_block(pw, mod, b)
    x, H = 100, 40
    for t in range(1, block.N + 1):
        v = block.entry(t)
        if not x < v <= x + H:
            return False, f"entry {v} at t={t} escapes the window"
    return True, "every block entry stays inside the window"


def _check_wtrick_density_band(_):
    x = 10**9
    pw = windows.sieve_theta_window(x, 0.6)
    mod = wtrick.build_modulus(0.5 * math.log(math.log(x)))
    b, _ = wtrick.select_residue(pw, mod)
    block = wtrick.align_block(pw, mod, b)
    R = float(block.N) ** 0.05
    f = wtrick.prime_weights(block, pw, R)
    product = wtrick.density(f) * math.log(R)
    ok = 0.5 <= product <= 1.5
    return ok, f"density * log R = {product:.4f}"


def _check_majorant_oracle(_):
    pw = windows.sieve_window(0, 3000)
    mod = wtrick.build_modulus(2.0)
    block = wtrick.align_block(pw, mod, 1)
    eta = math.log(60.0) / math.log(block.N)
    table = majorant.divisor_sum_table(block, eta)
    R = table.R
    limit = int(R)
    from .arith import factorize

    for t in (1, 2, 3, 5, 29, 100, 144, 600, 892, 1499):
        m = block.entry(t)
        total = 0.0
        for d in range(1, limit + 1):
            if m % d:
                continue
            fac = factorize(d)
            if any(e >= 2 for e in fac.values()):
                continue
            total += (-1) ** len(fac) * math.log(R / d)
        if abs(total - table.lambdaR[t - 1]) > 1e-9:
            return False, f"divisor sum mismatch at entry {m}"
    return True, "progression sieve vs direct divisor enumeration"


def _check_majorant_prime_identity(corrupt):
    pw = windows.sieve_window(10**4, 4000)
    mod = wtrick.build_modulus(2.0)
    block = wtrick.align_block(pw, mod, 1)
    eta = math.log(50.0) / math.log(block.N)
    table = majorant.divisor_sum_table(block, eta)
    log_r = math.log(table.R)
    for off in pw.prime_offsets.tolist():
        t = block.offset_to_index(int(off))
        if t is None:
            continue
        if table.lambdaR[t - 1] != log_r:
            return False, f"Lambda_R != log R at prime offset {off}"
    return True, "divisor sum equals log R on primes above R"


def _check_majorant_majorization(_):
    x = 10**9
    pw = windows.sieve_theta_window(x, 0.6)
    mod = wtrick.build_modulus(0.5 * math.log(math.log(x)))
    b, _ = wtrick.select_residue(pw, mod)
    block = wtrick.align_block(pw, mod, b)
    table = majorant.nu_weights(majorant.divisor_sum_table(block, 0.05))
    f = wtrick.prime_weights(block, pw, table.R, prime_only=True)
    rep = majorant.majorization_check(f, table)
    return rep.holds, f"worst ratio {rep.worst_ratio:.4f} at t={rep.worst_index}"


def _check_majorant_moment_bands(_):
    x = 10**9
    pw = windows.sieve_theta_window(x, 0.6)
    mod = wtrick.build_modulus(0.5 * math.log(math.log(x)))
    b, _ = wtrick.select_residue(pw, mod)
    block = wtrick.align_block(pw, mod, b)
    raw = majorant.nu_weights(majorant.divisor_sum_table(block, 0.05))
    mean = tree_sum(raw.nu) / block.N
    if not 0.5 <= mean <= 1.5:
        return False, f"first moment {mean:.4f} outside [0.5, 1.5]"
    normed = majorant.nu_weights(majorant.divisor_sum_table(block, 0.05),
                                 normalize=True)
    rep = majorant.moment_diagnostic(normed, [0, 1], sample_count=200_000)
    if not 0.4 <= rep.mean <= 1.8:
        return False, f"two-point moment {rep.mean:.4f} outside [0.4, 1.8]"
    return True, f"first {mean:.4f}, two-point {rep.mean:.4f}"


def _check_apcount_oracle(_):
    pw = windows.sieve_window(0, 15)
    mod = wtrick.build_modulus(0.0)
    block = wtrick.align_block(pw, mod, 0)
    got = apcount.count_prime_aps(pw, block, 3, "all")
    if got != 2:
        return False, f"3-AP count in (0, 15] is {got}, want 2"
    pw2 = windows.sieve_window(0, 10)
    block2 = wtrick.align_block(pw2, mod, 0)
    got2 = apcount.count_prime_aps(pw2, block2, 2, "all")
    if got2 != 6:
        return False, f"2-AP count in (0, 10] is {got2}, want 6"
    return True, "toy AP counts match brute force"


def _check_apcount_ledger(_):
    pw = windows.sieve_window(10**4, 3000)
    mod = wtrick.build_modulus(3.0)
    b, _ = wtrick.select_residue(pw, mod)
    block = wtrick.align_block(pw, mod, b)
    R = float(block.N) ** 0.2
    f = wtrick.prime_weights(block, pw, R)
    rep = apcount.ap_report(pw, block, f, R, 3)
    led = rep.lower_bound_ledger
    if not led["weight_cap_holds"]:
        return False, "weight-cap inequality failed"
    if not led["unweighted_lower_holds"]:
        return False, "unweighted lower bound failed"
    t_direct = apcount.count_prime_power_tuples(pw, block, 3)
    if t_direct != rep.count_prime_aps + rep.count_prime_power_pairs:
        return False, "disjoint union #T = #M + #E failed"
    return True, "cap inequality and disjoint union hold"


def _check_maynard_integrals(_):
    F = maynard.SieveF.one_minus_sum(2)
    I, J, M = maynard.sieve_integrals(F)
    ok = (I == Fraction(1, 12) and J == [Fraction(1, 20)] * 2
          and M == Fraction(6, 5))
    if not ok:
        return False, f"got I={I}, J={J}, M={M}"
    I1, J1, M1 = maynard.sieve_integrals(maynard.SieveF.constant(1))
    if not (I1 == 1 and J1 == [Fraction(1)] and M1 == 1):
        return False, "k=1 constant profile integrals wrong"
    return True, "exact rational integrals match hand values"


def _check_maynard_scale_invariance(_):
    F = maynard.SieveF.one_minus_sum(3)
    _, _, M = maynard.sieve_integrals(F)
    _, _, M5 = maynard.sieve_integrals(F.scale_by(Fraction(5, 3)))
    return M == M5, "ratio invariant under rational rescaling"


def _check_maynard_optimizer(_):
    _, M2 = maynard.optimize_F(2, 3)
    if M2 < Fraction(6, 5):
        return False, f"optimized ratio {float(M2):.4f} below 6/5"
    _, M1 = maynard.optimize_F(1, 3)
    if M1 > 1 + Fraction(1, 10**6) or M1 < 1 - Fraction(1, 10**6):
        return False, f"k=1 ratio {float(M1)} should be 1"
    return True, f"M_2 = {float(M2):.4f} >= 6/5, M_1 = {float(M1):.6f}"


def _check_maynard_greedy(_):
    rng = np.random.default_rng(2)
    for _ in range(20):
        span = int(rng.integers(5, 2000))
        y = int(rng.integers(2, 40))
        q = int(rng.integers(1, 12))
        maynard.greedy_survivors(span, y, q)  # raises on bound violation
    survivors, residues = maynard.greedy_survivors(10, 3, 1)
    if survivors != [1, 3, 7, 9] or residues != {2: 0, 3: 2}:
        return False, f"deterministic greedy output changed: {survivors}"
    return True, "greedy bound holds; tie-break output fixed"


def _check_maynard_admissibility(_):
    ok, p = maynard.is_admissible((0, 2, 4))
    if ok or p != 3:
        return False, "did not reject the covering triple {0,2,4}"
    survivors, residues = maynard.greedy_survivors(50, 8, 1)
    tup = maynard.build_tuple(survivors, 4, 1, 0, residues, 8)
    ok, _ = maynard.is_admissible(tup.shifts)
    return ok, f"built shifts {tup.shifts} admissible"


def _check_maynard_lambda_consistency(corrupt):
    pw = windows.sieve_window(0, 400)
    mod = wtrick.build_modulus(0.0)
    block = wtrick.align_block(pw, mod, 0)
    eta = math.log(5.0) / math.log(block.N)
    table = majorant.divisor_sum_table(block, eta)
    R = table.R
    log_r = math.log(R)
    tup = maynard.tuple_from_shifts([0], q=1, a=0)
    F = maynard.SieveF.one_minus_sum(1)
    for n in range(2, 200):
        w = maynard.omega_weight(n, tup, F, R, 1)
        if corrupt:
            w += 1e-3
        lam = table.lambdaR[n - 1]
        if abs(w - (lam / log_r) ** 2) > 1e-9:
            return False, f"omega vs divisor-sum mismatch at n={n}"
    return True, "omega(n) = (Lambda_R(n)/log R)^2 on the test block"


def _check_bdh_oracle(_):
    rng = np.random.default_rng(3)
    for _ in range(10):
        x = int(rng.integers(5, 4000))
        H = int(rng.integers(1, 100))
        Q = int(rng.integers(1, 50))
        pw = windows.sieve_window(x, H)
        rep = bdh.bdh_variance(pw, Q)
        brute = 0.0
        primes = [x + int(o) for o in pw.prime_offsets.tolist()]
        from .arith import euler_phi

        for q in range(1, Q + 1):
            for a in range(q):
                th = math.fsum(math.log(p) for p in primes if p % q == a)
                brute += (th - H / euler_phi(q)) ** 2
        if abs(brute - rep.S_total) > 1e-9 * max(1.0, brute):
            return False, f"variance mismatch at ({x}, {H}, {Q})"
    return True, "bucketed variance vs triple loop"


def _check_bdh_split(_):
    pw = windows.sieve_window(10, 30)
    rep = bdh.bdh_variance(pw, 10)
    if abs(rep.S_total - (rep.S_star + rep.S_zero)) > 1e-12:
        return False, "S != S* + S0"
    if rep.S_star > 2 * rep.S_psi + 2 * rep.S_pp + 1e-9:
        return False, "S* > 2 S_psi + 2 S_pp"
    bdh.psi_pp_decomposition(pw, 10)
    return True, "split identities hold"


def _check_bdh_monotonic(_):
    pw = windows.sieve_window(10, 30)
    ok, values, increments = bdh.monotonicity_check(pw, [1, 2, 5, 5, 10])
    if any(i < 0 for i in increments):
        return False, "variance decreased in Q"
    return True, f"values {['%.3f' % v for v in values]}"


def _check_emptyclass(_):
    pw = windows.sieve_window(10**5, 100)
    rep = bdh.empty_class_bound(pw, 316)
    primes_in = pw.prime_values.tolist()
    for q, a in rep.witnesses:
        if any(p % q == a for p in primes_in):
            return False, f"witness class {a} mod {q} is not empty"
    if abs(rep.mertens_sum - math.log(1 / 0.8)) > 0.05:
        return False, f"Mertens sum {rep.mertens_sum:.4f} off reference"
    return True, f"{len(rep.witnesses)} witnesses; Mertens {rep.mertens_sum:.4f}"


CHECKS = [
    ("sieve.trial-division-oracle", _check_sieve_oracle),
    ("sieve.progression-partition", _check_sieve_partition),
    ("sieve.psi-theta-reconstruction", _check_sieve_psi_theta),
    ("wtrick.pigeonhole", _check_wtrick_pigeonhole),
    ("wtrick.alignment", _check_wtrick_alignment),
    ("wtrick.density-band", _check_wtrick_density_band),
    ("majorant.divisor-oracle", _check_majorant_oracle),
    ("majorant.prime-identity", _check_majorant_prime_identity),
    ("majorant.majorization", _check_majorant_majorization),
    ("majorant.moment-bands", _check_majorant_moment_bands),
    ("apcount.brute-oracle", _check_apcount_oracle),
    ("apcount.conversion-ledger", _check_apcount_ledger),
    ("maynard.integrals-exact", _check_maynard_integrals),
    ("maynard.scale-invariance", _check_maynard_scale_invariance),
    ("maynard.optimizer-dominance", _check_maynard_optimizer),
    ("maynard.greedy-bound", _check_maynard_greedy),
    ("maynard.admissibility", _check_maynard_admissibility),
    ("maynard.lambda-omega-consistency", _check_maynard_lambda_consistency),
    ("bdh.brute-oracle", _check_bdh_oracle),
    ("bdh.split-identities", _check_bdh_split),
    ("bdh.monotonicity", _check_bdh_monotonic),
    ("emptyclass.witness-and-mertens", _check_emptyclass),
]


def run_checks(only: str | None = None,
               corrupt_lambda: bool = False) -> list[CheckResult]:
    """Run the registry (optionally one module group), collecting results."""
    results = []
    for key, fn in CHECKS:
        if only and key.split(".")[0] != only:
            continue
        corrupt = corrupt_lambda and key == "maynard.lambda-omega-consistency"
        try:
            passed, detail = fn(corrupt)
        except Exception as exc:  # a crash is a failure, not an abort
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(key=key, passed=passed, detail=detail))
    return results
