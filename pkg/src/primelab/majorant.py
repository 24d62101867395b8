"""Truncated divisor sums over a block and the derived majorant weights.

For each block entry m_t the table holds
    L_R(m_t) = sum over d | m_t, d <= R of mu(d) * log(R/d),
computed by a progression-restricted divisor sieve: each squarefree d <= R
coprime to W hits the single index class t = t_d (mod d) obtained from the
modular inverse of W mod d, so the fill cost is sum over d of (N/d + log d).
Divisors sharing a factor with W are skipped; they cannot divide m_t.

The majorant is nu(t) = normalization * (phi(W)/W) * L_R(m_t)^2 / log R.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .arith import mobius_upto, tree_sum
from .errors import InputError, InvariantError
from .wtrick import Block


@dataclass(frozen=True)
class MajorantTable:
    """Divisor-sum values and majorant weights over a block."""

    block: Block
    eta: float
    R: float
    lambdaR: np.ndarray
    nu: np.ndarray | None = None
    normalization: float = 1.0

    def __post_init__(self):
        self.lambdaR.setflags(write=False)
        if self.nu is not None:
            self.nu.setflags(write=False)


@dataclass(frozen=True)
class MajorizationReport:
    holds: bool
    worst_index: int
    worst_ratio: float


@dataclass(frozen=True)
class MomentReport:
    mean: float
    shifts: tuple[int, ...]
    exact: bool
    box_size: int
    samples: int
    std_error: float | None
    seed: int


def divisor_sum_table(block: Block, eta: float | None = None,
                      R: float | None = None) -> MajorantTable:
    """Fill the truncated divisor sums for a block with sieve level R = N**eta.

    Pass R explicitly to pin an exact level (eta is then derived); otherwise
    R is computed from eta.
    """
    W, b, m0, N = block.modulus.W, block.b, block.m0, block.N
    if W > 1 and math.gcd(b, W) != 1:
        raise InvariantError(f"block residue {b} shares a factor with W={W}")
    if R is None:
        if eta is None or not 0 < eta < 1:
            raise InputError(f"eta must lie in (0, 1), got {eta}")
        R = float(N) ** eta
    else:
        R = float(R)
        if N > 1:
            eta = math.log(R) / math.log(N)
    if eta is None:
        eta = 0.0
    if R <= 1.0:
        raise InputError(f"sieve level R = {R} must exceed 1")
    log_r = math.log(R)
    d_max = int(math.floor(R))
    mu = mobius_upto(d_max)
    lam = np.zeros(N, dtype=np.float64)
    lam += log_r  # d = 1
    base = W * (m0 - 1) + b  # entry at t is base + W*t
    for d in range(2, d_max + 1):
        m = int(mu[d])
        if m == 0 or math.gcd(d, W) != 1:
            continue
        c = (-base * pow(W, -1, d)) % d
        start = c if c != 0 else d  # smallest t >= 1 in the class
        if start > N:
            continue
        lam[start - 1 :: d] += m * (log_r - math.log(d))
    return MajorantTable(block=block, eta=eta, R=R, lambdaR=lam)


def nu_from_lambda(lambdaR: np.ndarray, phi_over_w: float, log_r: float,
                   normalization: float = 1.0) -> np.ndarray:
    """normalization * (phi/W) * lambdaR**2 / log_r, as a fresh array."""
    return normalization * phi_over_w * lambdaR * lambdaR / log_r


def nu_weights(table: MajorantTable, normalize: bool = False) -> MajorantTable:
    """Fill nu on the table; with normalize the empirical mean becomes 1."""
    if table.block.N == 0:
        raise InputError("cannot normalize over an empty block")
    mod = table.block.modulus
    raw = nu_from_lambda(table.lambdaR, mod.phi_W / mod.W, math.log(table.R))
    if normalize:
        mean = tree_sum(raw) / len(raw)
        if mean == 0.0:
            raise InputError("cannot normalize an identically-zero majorant")
        c0 = 1.0 / mean
        return replace(table, nu=c0 * raw, normalization=c0)
    return replace(table, nu=raw, normalization=1.0)


def majorization_check(f: np.ndarray, table: MajorantTable) -> MajorizationReport:
    """Verify 0 <= f(t) <= nu(t) pointwise; report the worst ratio and index."""
    if table.nu is None:
        raise InputError("majorant table has no nu weights; call nu_weights first")
    if table.normalization != 1.0:
        raise InputError("majorization is defined against the un-normalized nu")
    nu = table.nu
    if len(f) != len(nu):
        raise InputError(f"length mismatch: f has {len(f)}, nu has {len(nu)}")
    if len(f) == 0:
        return MajorizationReport(holds=True, worst_index=0, worst_ratio=0.0)
    neg = f < 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(nu > 0, f / nu, np.where(f > 0, np.inf, 0.0))
    worst = int(np.argmax(ratios))
    worst_ratio = float(ratios[worst])
    holds = not bool(neg.any()) and worst_ratio <= 1.0
    if neg.any():
        worst = int(np.argmax(neg))
        worst_ratio = float(f[worst])
    return MajorizationReport(holds=holds, worst_index=worst + 1, worst_ratio=worst_ratio)


def moment_diagnostic(table: MajorantTable, shifts: list[int],
                      box_fraction: float | None = None,
                      exact_limit: int = 10**8,
                      sample_count: int = 1_000_000,
                      seed: int = 0) -> MomentReport:
    """Empirical mean of prod_i nu(n + j_i * r) over the (n, r) box.

    Box: 1 <= r <= floor(box_fraction * N) (default fraction 1/(3k) with
    k = max shift + 1) and 1 <= n <= N - (max shift) * r.  Exact double loop
    when the box has at most `exact_limit` pairs, else uniform sampling with
    the given seed (sample count and standard error are reported).
    """
    if table.nu is None:
        raise InputError("majorant table has no nu weights; call nu_weights first")
    if len(set(shifts)) != len(shifts):
        raise InputError("shifts must be distinct")
    if not shifts or min(shifts) < 0:
        raise InputError("shifts must be nonnegative and nonempty")
    nu = table.nu
    N = len(nu)
    k = max(shifts) + 1
    if k > N:
        raise InputError(f"max shift {k - 1} out of range for block length {N}")
    frac = box_fraction if box_fraction is not None else 1.0 / (3.0 * k)
    r_max = int(math.floor(frac * N))
    if r_max < 1:
        raise InputError("empty box: no admissible common difference r")
    span = k - 1
    counts = [N - span * r for r in range(1, r_max + 1)]
    box_size = sum(c for c in counts if c > 0)
    if box_size <= 0:
        raise InputError("empty box")

    if box_size <= exact_limit:
        per_r = []
        for r in range(1, r_max + 1):
            n_max = N - span * r
            if n_max < 1:
                continue
            prod = np.ones(n_max, dtype=np.float64)
            for j in sorted(shifts):
                prod = prod * nu[j * r : j * r + n_max]
            per_r.append(float(prod.sum()))
        mean = tree_sum(per_r) / box_size
        return MomentReport(mean=mean, shifts=tuple(shifts), exact=True,
                            box_size=box_size, samples=box_size,
                            std_error=None, seed=seed)

    rng = np.random.default_rng(seed)
    needed = sample_count
    total = 0.0
    total_sq = 0.0
    got = 0
    n_bound = N - span  # largest n at r = 1
    while got < needed:
        batch = max(needed - got, 1) * 2
        rs = rng.integers(1, r_max + 1, size=batch)
        ns = rng.integers(1, n_bound + 1, size=batch)
        ok = ns <= N - span * rs
        rs, ns = rs[ok], ns[ok]
        if rs.size == 0:
            continue
        take = min(rs.size, needed - got)
        rs, ns = rs[:take], ns[:take]
        prod = np.ones(take, dtype=np.float64)
        for j in sorted(shifts):
            prod = prod * nu[ns - 1 + j * rs]
        total += float(prod.sum())
        total_sq += float((prod * prod).sum())
        got += take
    mean = total / got
    var = max(total_sq / got - mean * mean, 0.0)
    se = math.sqrt(var / got)
    return MomentReport(mean=mean, shifts=tuple(shifts), exact=False,
                        box_size=box_size, samples=got, std_error=se, seed=seed)
