"""Variance of prime counts over residue classes, and its decomposition.

S(x; Q) sums |theta(x+H; q, a) - theta(x; q, a) - H/phi(q)|^2 over all
moduli q <= Q and all classes a (coprime or not, following the display
convention).  One bucketing pass per q over the window's prime list keeps
the cost at O(Q * pi_window); unoccupied classes enter through closed
forms.  The psi-based split and the prime-power term are produced in the
same pass, with the per-class identity
    theta-term = Psi - P  (coprime classes)
spot-checked exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arith import phi_upto, primes_upto, tree_sum
from .errors import InputError, InvariantError
from .windows import PrimeWindow, sieve_window
from .arith import floor_power


@dataclass(frozen=True)
class VarianceReport:
    x: int
    H: int
    Q: int
    A: float
    S_total: float
    S_star: float
    S_zero: float
    S_psi: float
    S_pp: float
    per_q: list = field(default_factory=list, repr=False)
    ratios: dict = field(default_factory=dict)
    norm_x: int = 0


@dataclass(frozen=True)
class EmptyClassReport:
    lower_bound: float
    witnesses: list
    mertens_sum: float
    mertens_reference: float | None
    delta_class: float
    Q: int
    H: int


@dataclass(frozen=True)
class ScanRow:
    x: int
    H: int
    Q: int
    S_total: float
    ratio: float


@dataclass(frozen=True)
class ScanTable:
    rows: list
    max_ratio: float
    mean_ratio: float
    X: int
    theta: float
    A: float
    B: float
    seed: int


def _per_q_components(pw: PrimeWindow, Q: int):
    """Yield per-q variance components in increasing q.

    Each item: (q, star, zero, psi, pp) where star/zero split the theta-based
    variance by coprimality, psi is the Lambda-based coprime-class variance,
    and pp the squared prime-power class sums.
    """
    H = pw.window.H
    primes = pw.prime_values
    plogs = pw.prime_logs
    pp_vals = np.array(pw.prime_power_values(), dtype=np.int64)
    pp_logs = np.array(pw.prime_power_logs(), dtype=np.float64)
    phi = phi_upto(Q)
    for q in range(1, Q + 1):
        phi_q = int(phi[q])
        c = H / phi_q
        star_parts = [phi_q * c * c]
        zero_parts = [(q - phi_q) * c * c]
        psi_parts = [phi_q * c * c]
        pp_parts = []

        if primes.size:
            res = primes % q
            vals, inv = np.unique(res, return_inverse=True)
            sums = np.bincount(inv, weights=plogs)
        else:
            vals, sums = np.zeros(0, dtype=np.int64), np.zeros(0)
        theta_cls = {int(v): float(s) for v, s in zip(vals, sums)}

        pp_cls: dict[int, float] = {}
        if pp_vals.size:
            res = pp_vals % q
            for r, lg in zip(res.tolist(), pp_logs.tolist()):
                pp_cls[int(r)] = pp_cls.get(int(r), 0.0) + lg

        for a in sorted(set(theta_cls) | set(pp_cls)):
            s_theta = theta_cls.get(a, 0.0)
            s_pp = pp_cls.get(a, 0.0)
            coprime = math.gcd(a, q) == 1
            if coprime:
                if s_theta:
                    star_parts.append((s_theta - c) ** 2 - c * c)
                lam = s_theta + s_pp
                if lam:
                    psi_parts.append((lam - c) ** 2 - c * c)
                if s_pp:
                    pp_parts.append(s_pp * s_pp)
            else:
                if s_theta:
                    zero_parts.append((s_theta - c) ** 2 - c * c)
        yield (q, tree_sum(star_parts), tree_sum(zero_parts),
               tree_sum(psi_parts), tree_sum(pp_parts))


def bdh_variance(pw: PrimeWindow, Q: int, A: float = 1.0) -> VarianceReport:
    """Full variance report for the window at level Q.

    Asserts the split identities S = S* + S0 and S* <= 2 S_psi + 2 S_pp.
    """
    if Q < 1:
        raise InputError(f"Q must be >= 1, got {Q}")
    per_q = list(_per_q_components(pw, Q))
    S_star = tree_sum([st for _, st, _, _, _ in per_q])
    S_zero = tree_sum([z for _, _, z, _, _ in per_q])
    S_psi = tree_sum([ps for _, _, _, ps, _ in per_q])
    S_pp = tree_sum([pp for _, _, _, _, pp in per_q])
    S_total = S_star + S_zero
    bound = 2.0 * S_psi + 2.0 * S_pp
    if S_star > bound * (1 + 1e-9) + 1e-9:
        raise InvariantError(
            f"S* = {S_star} exceeds 2 S_psi + 2 S_pp = {bound}"
        )
    x, H = pw.window.x, pw.window.H
    ratios = {}
    if x > 1 and H > 0:
        lx = math.log(x)
        ratios = {
            "HX": S_total / (H * x),
            "HX_logX": S_total / (H * x * lx),
            "HX_logX_pow": S_total / (H * x * lx ** (1.0 - A)),
        }
    return VarianceReport(
        x=x, H=H, Q=Q, A=A, S_total=S_total, S_star=S_star, S_zero=S_zero,
        S_psi=S_psi, S_pp=S_pp,
        per_q=[{"q": q, "star": st, "zero": z, "total": st + z,
                "psi": ps, "pp": pp} for q, st, z, ps, pp in per_q],
        ratios=ratios, norm_x=x,
    )


def psi_pp_decomposition(pw: PrimeWindow, Q: int,
                         sample_classes: int = 8) -> tuple[float, float]:
    """(S_psi, S_pp) over coprime classes, with the per-class identity
    theta-term = Psi - P verified exactly on a sample of (q, a)."""
    if Q < 1:
        raise InputError(f"Q must be >= 1, got {Q}")
    per_q = list(_per_q_components(pw, Q))
    S_psi = tree_sum([ps for _, _, _, ps, _ in per_q])
    S_pp = tree_sum([pp for _, _, _, _, pp in per_q])

    H = pw.window.H
    primes = pw.prime_values
    plogs = pw.prime_logs
    pps = pw.prime_power_values()
    pplogs = pw.prime_power_logs()
    phi = phi_upto(Q)
    checked = 0
    for q in range(1, Q + 1):
        if checked >= sample_classes:
            break
        for a in range(q):
            if math.gcd(a, q) != 1:
                continue
            c = H / int(phi[q])
            th = tree_sum(plogs[primes % q == a]) if primes.size else 0.0
            pp = tree_sum([lg for v, lg in zip(pps, pplogs) if v % q == a])
            psi_term = (th + pp) - c
            lhs = th - c
            rhs = psi_term - pp
            if abs(lhs - rhs) > 1e-9 * max(1.0, abs(lhs)):
                raise InvariantError(
                    f"theta/psi identity broken at (q={q}, a={a})"
                )
            checked += 1
            if checked >= sample_classes:
                break
    return S_psi, S_pp


def _tau_upto(h: int, Q: int) -> int:
    """Number of divisors of h that are <= Q."""
    count = 0
    d = 1
    while d * d <= h:
        if h % d == 0:
            if d <= Q:
                count += 1
            other = h // d
            if other != d and other <= Q:
                count += 1
        d += 1
    return count


def offdiag_divisor_count(pw: PrimeWindow, Q: int) -> float:
    """Off-diagonal prime-power sum: over ordered pairs of distinct higher
    prime powers, (log p)(log p') times the count of divisors <= Q of their
    gap."""
    if Q < 1:
        raise InputError(f"Q must be >= 1, got {Q}")
    vals = pw.prime_power_values()
    logs = pw.prime_power_logs()
    parts = []
    for i in range(len(vals)):
        for j in range(len(vals)):
            if i == j:
                continue
            gap = abs(vals[i] - vals[j])
            parts.append(logs[i] * logs[j] * _tau_upto(gap, Q))
    return tree_sum(parts)


def monotonicity_check(pw: PrimeWindow, Q_grid) -> tuple[bool, list[float], list[float]]:
    """S(x; Q) along an increasing grid: values and increments, asserting
    the nondecreasing property (each q adds a nonnegative inner sum)."""
    grid = [int(q) for q in Q_grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise InputError("Q grid must be nondecreasing")
    if not grid:
        raise InputError("empty Q grid")
    per_q = list(_per_q_components(pw, grid[-1]))
    totals = {}
    running: list[float] = []
    for q, st, z, _, _ in per_q:
        running.append(st + z)
        totals[q] = tree_sum(running)
    totals[0] = 0.0
    values = [totals[q] for q in grid]
    increments = [b - a for a, b in zip(values, values[1:])]
    for inc in increments:
        if inc < -1e-9 * max(1.0, max(values)):
            raise InvariantError("variance decreased along the Q grid")
    return True, values, increments


def variance_scan(X: int, theta: float, B: float, A: float,
                  sample_count: int, seed: int = 0) -> ScanTable:
    """Sample x in [X, 2X]; for each, S(x; Q) with H = floor(x**theta) and
    Q = floor(sqrt(X) / (log X)**B), normalized by H X (log X)**(1-A)."""
    if X < 4:
        raise InputError("X too small to scan")
    if sample_count < 1:
        raise InputError("sample_count must be >= 1")
    lX = math.log(X)
    Q = int(math.floor(math.sqrt(X) * lX ** (-B)))
    if Q < 1:
        raise InputError(f"Q = floor(sqrt(X) (log X)^-B) vanished (B={B})")
    rng = np.random.default_rng(seed)
    xs = sorted(int(v) for v in rng.integers(X, 2 * X, size=sample_count,
                                             endpoint=True))
    rows = []
    for x in xs:
        H = floor_power(x, theta)
        pw = sieve_window(x, H, theta)
        rep = bdh_variance(pw, Q, A)
        denom = H * X * lX ** (1.0 - A)
        rows.append(ScanRow(x=x, H=H, Q=Q, S_total=rep.S_total,
                            ratio=rep.S_total / denom))
    ratios = [r.ratio for r in rows]
    return ScanTable(rows=rows, max_ratio=max(ratios),
                     mean_ratio=tree_sum(ratios) / len(ratios),
                     X=X, theta=theta, A=A, B=B, seed=seed)


def empty_class_bound(pw: PrimeWindow, Q: int, delta_class: float = 1.0,
                      subclass: tuple[int, frozenset] | None = None
                      ) -> EmptyClassReport:
    """Lower bound from empty reduced classes at prime moduli q in (H+1, Q].

    For each such prime q the restricted primes occupy at most H < q - 1
    classes, so some reduced class a_q is empty and contributes
    delta_class * (H / log x) / phi(q).  Also returns the Mertens sum
    over the same primes and its log log Q - log log(H+1) reference.
    """
    x, H = pw.window.x, pw.window.H
    if Q <= H + 1:
        raise InputError(f"need Q > H + 1, got Q={Q}, H={H}")
    if x < 2:
        raise InputError("empty-class bound needs x >= 2 for log x")
    if not 0 < delta_class <= 1:
        raise InputError("delta_class must lie in (0, 1]")
    values = pw.prime_values
    if subclass is not None:
        m, residue_set = subclass
        keep = np.isin(values % m, np.array(sorted(residue_set), dtype=np.int64))
        values = values[keep]
    lx = math.log(x)
    witnesses = []
    bound_parts = []
    mertens_parts = []
    for q in primes_upto(Q).tolist():
        q = int(q)
        if q <= H + 1:
            continue
        occupied = set((values % q).tolist())
        a_q = next(a for a in range(1, q) if a not in occupied)
        witnesses.append((q, int(a_q)))
        bound_parts.append(delta_class * (H / lx) / (q - 1))
        mertens_parts.append(1.0 / q)
    mertens = tree_sum(mertens_parts)
    reference = None
    if H >= 1 and Q > 1:
        reference = math.log(math.log(Q)) - math.log(math.log(H + 1))
    return EmptyClassReport(
        lower_bound=tree_sum(bound_parts), witnesses=witnesses,
        mertens_sum=mertens, mertens_reference=reference,
        delta_class=delta_class, Q=Q, H=H,
    )
