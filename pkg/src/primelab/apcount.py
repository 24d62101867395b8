"""Weighted k-AP sums, exact prime-AP counts, and the conversion ledger.

The weighted sum runs over the box 1 <= r <= N/(3k), 1 <= n <= N-(k-1)r.
A progression is identified by (first index, common difference r >= 1);
reversed progressions are not identified with each other.  Counts are exact
enumerations.  The ledger records both sides of the weight-cap inequality
S <= cap_factor * #T and of the unweighted lower bound derived from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arith import tree_sum
from .errors import InputError
from .windows import PrimeWindow
from .wtrick import Block


@dataclass(frozen=True)
class APCountReport:
    k: int
    S_weighted: float
    count_prime_aps: int
    count_prime_power_pairs: int
    cap_factor: float
    lower_bound_ledger: dict = field(default_factory=dict)
    degenerate: bool = False


def _r_limit(N: int, k: int) -> int:
    return int(math.floor(N / (3.0 * k)))


def weighted_ap_sum(f: np.ndarray, k: int, r_max: int | None = None) -> float:
    """S = sum over the box of prod_j f(n + j*r), exact with compensated sums.

    r_max defaults to floor(N/(3k)); pass a larger value (or N) to widen the
    box.  N < k returns 0 (degenerate).
    """
    if k < 2:
        raise InputError(f"progression length k must be >= 2, got {k}")
    N = len(f)
    if N < k:
        return 0.0
    if r_max is None:
        r_max = _r_limit(N, k)
    r_cap = min(r_max, (N - 1) // (k - 1))
    per_r = []
    for r in range(1, r_cap + 1):
        n_max = N - (k - 1) * r
        prod = f[:n_max].copy()
        for j in range(1, k):
            if not prod.any():
                break
            prod *= f[j * r : j * r + n_max]
        per_r.append(float(prod.sum()))
    return tree_sum(per_r)


def _indicator_pair_count(mask: np.ndarray, k: int, r_max: int) -> int:
    total = 0
    N = len(mask)
    r_cap = min(r_max, (N - 1) // (k - 1)) if k > 1 else 0
    for r in range(1, r_cap + 1):
        n_max = N - (k - 1) * r
        hit = mask[:n_max].copy()
        for j in range(1, k):
            if not hit.any():
                break
            hit &= mask[j * r : j * r + n_max]
        total += int(np.count_nonzero(hit))
    return total


def prime_indicator(pw: PrimeWindow, block: Block) -> np.ndarray:
    """Boolean vector over block indices: entry t is prime."""
    mask = np.zeros(block.N, dtype=bool)
    _ok, idx = block.offsets_to_indices(pw.prime_offsets)
    mask[idx] = True
    return mask


def prime_power_indicators(pw: PrimeWindow, block: Block) -> tuple[np.ndarray, np.ndarray]:
    """(prime-power indicator, exponent->=2 indicator) over block indices."""
    pp = prime_indicator(pw, block).copy()
    high = np.zeros(block.N, dtype=bool)
    for (off, _base, _e) in pw.prime_powers:
        t = block.offset_to_index(int(off))
        if t is not None:
            pp[t - 1] = True
            high[t - 1] = True
    return pp, high


def count_prime_aps(pw: PrimeWindow, block: Block, k: int,
                    r_cap_mode: str = "paper_box") -> int:
    """Exact number of (n, r) pairs whose k block entries are all prime.

    r_cap_mode 'paper_box' restricts r <= N/(3k); 'all' allows every r with
    n + (k-1) r <= N.
    """
    if k < 2:
        raise InputError(f"progression length k must be >= 2, got {k}")
    mask = prime_indicator(pw, block)
    if r_cap_mode == "paper_box":
        r_max = _r_limit(block.N, k)
    elif r_cap_mode == "all":
        r_max = block.N
    else:
        raise InputError(f"unknown r_cap_mode {r_cap_mode!r}")
    return _indicator_pair_count(mask, k, r_max)


def prime_power_exclusions(pw: PrimeWindow, block: Block, k: int
                           ) -> tuple[int, list[tuple[int, int]]]:
    """Pairs (n, r) in the box whose entries are all prime powers with at
    least one exponent >= 2.  Returns the exact count and the witnesses."""
    if k < 2:
        raise InputError(f"progression length k must be >= 2, got {k}")
    pp, high = prime_power_indicators(pw, block)
    N = block.N
    r_max = _r_limit(N, k)
    witnesses: list[tuple[int, int]] = []
    r_cap = min(r_max, (N - 1) // (k - 1))
    for r in range(1, r_cap + 1):
        n_max = N - (k - 1) * r
        all_pp = pp[:n_max].copy()
        any_high = high[:n_max].copy()
        for j in range(1, k):
            if not all_pp.any():
                break
            all_pp &= pp[j * r : j * r + n_max]
            any_high |= high[j * r : j * r + n_max]
        sel = all_pp & any_high
        for n0 in np.nonzero(sel)[0].tolist():
            witnesses.append((n0 + 1, r))
    return len(witnesses), witnesses


def count_prime_power_tuples(pw: PrimeWindow, block: Block, k: int) -> int:
    """Pairs (n, r) in the box whose k entries are all prime powers (#T)."""
    pp, _ = prime_power_indicators(pw, block)
    return _indicator_pair_count(pp, k, _r_limit(block.N, k))


def cap_factor(block: Block, R: float, k: int) -> float:
    """((phi(W)/(W log R)) * cap_log)**k with cap_log >= log(max entry).

    cap_log is log(3x) in the asymptotic regime; for toy windows with
    3x < x+H it falls back to log(x+H) so the bound stays valid.
    """
    if R <= 1:
        raise InputError(f"sieve level R must exceed 1, got {R}")
    mod = block.modulus
    x, H = block.window.x, block.window.H
    cap_log = math.log(max(3 * x, x + H))
    return (mod.phi_W / (mod.W * math.log(R)) * cap_log) ** k


def lower_bound_ledger(S: float, cap: float, m_count: int, e_count: int,
                       C_k: float = 1.0, c_k_rel_sz: float = 1.0,
                       delta: float | None = None, N: int | None = None,
                       x: int | None = None, theta: float | None = None,
                       k: int | None = None) -> dict:
    """Arithmetic ledger for the weighted -> unweighted conversion.

    Verifies S <= cap * #T and S/cap - C_k * #E <= #M with exact enumerations
    on the right; the density-based reference lower bound (scaled by the
    externally supplied constant c_k_rel_sz) and the benchmark ratio against
    x**(2 theta) / (log x)**(k+1) are reported, never asserted.
    """
    t_count = m_count + e_count
    supper_rhs = cap * t_count
    mlower = S / cap - C_k * e_count if cap > 0 else float("-inf")
    ledger = {
        "S_weighted": S,
        "cap_factor": cap,
        "count_all_prime_power": t_count,
        "count_all_prime": m_count,
        "count_excluded": e_count,
        "weight_cap_rhs": supper_rhs,
        "weight_cap_holds": S <= supper_rhs * (1 + 1e-12) + 1e-12,
        "C_k": C_k,
        "c_k_rel_sz": c_k_rel_sz,
        "unweighted_lower_bound": mlower,
        "unweighted_lower_holds": mlower <= m_count + 1e-9,
    }
    if delta is not None and N is not None and k is not None:
        ledger["density_reference_lower"] = c_k_rel_sz * (delta**k) * (N**2)
    if x is not None and x > 1 and k is not None:
        th = theta
        if th is None and N is not None and N > 1:
            th = math.log(N) / math.log(x)
        if th is not None:
            bench = (float(x) ** (2 * th)) / (math.log(x) ** (k + 1))
            ledger["benchmark_scale"] = bench
            ledger["benchmark_ratio"] = m_count / bench if bench > 0 else None
    return ledger


def ap_report(pw: PrimeWindow, block: Block, f: np.ndarray, R: float, k: int,
              C_k: float = 1.0, c_k_rel_sz: float = 1.0) -> APCountReport:
    """Assemble the full report for one block: S, #M, #E, cap, and ledger."""
    if k < 2:
        raise InputError(f"progression length k must be >= 2, got {k}")
    degenerate = block.N < k
    S = weighted_ap_sum(f, k) if not degenerate else 0.0
    m_count = count_prime_aps(pw, block, k, "paper_box") if not degenerate else 0
    e_count, _wit = prime_power_exclusions(pw, block, k) if not degenerate else (0, [])
    cap = cap_factor(block, R, k)
    from .wtrick import density as _density

    delta = _density(f) if len(f) else 0.0
    ledger = lower_bound_ledger(
        S, cap, m_count, e_count, C_k=C_k, c_k_rel_sz=c_k_rel_sz,
        delta=delta, N=block.N, x=block.window.x,
        theta=block.window.theta_exponent, k=k,
    )
    return APCountReport(
        k=k, S_weighted=S, count_prime_aps=m_count,
        count_prime_power_pairs=e_count, cap_factor=cap,
        lower_bound_ledger=ledger, degenerate=degenerate,
    )
