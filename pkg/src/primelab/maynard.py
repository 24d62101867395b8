"""Admissible tuples by greedy residue selection, and the multi-shift sieve.

The pipeline: a greedy pass over primes p <= y deletes one residue class per
prime from {1..span}, leaving survivors b_i whose scaled shifts h_i = q*b_i
form an admissible tuple; a CRT residue pins n (mod W) so every n + h_i is
coprime to W; squarefree-supported weights built from a polynomial on the
simplex produce the sums S1, S2, S2' whose ratio witnesses prime clusters.
All sieve integrals are exact rationals, so the quality ratio of a weight
polynomial is an exact Fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import factorize, iroot, is_prime, primes_upto, squarefree_divisors, tree_sum
from .errors import InputError, InvariantError, ResourceError
from .simplex import (
    elementary_symmetric,
    inner_integral,
    integrate_inner_product,
    integrate_product,
    is_symmetric,
    poly_mul,
    scaled_terms,
)
from .wtrick import WModulus


@dataclass(frozen=True)
class AdmissibleTuple:
    """Shifts h_1 < ... < h_k, all divisible by q, with greedy certificates."""

    q: int
    a: int
    span_L: int
    k: int
    shifts: tuple[int, ...]
    greedy_residues: dict


@dataclass(frozen=True)
class SieveF:
    """Polynomial weight profile on the simplex {t_i >= 0, sum t_i <= 1}.

    Stored as exact rational monomial coefficients; evaluates to 0 outside
    the simplex.
    """

    k: int
    coeffs: dict

    @classmethod
    def constant(cls, k: int, value=1) -> "SieveF":
        return cls(k, {(0,) * k: Fraction(value)})

    @classmethod
    def one_minus_sum(cls, k: int) -> "SieveF":
        coeffs = {(0,) * k: Fraction(1)}
        for i in range(k):
            e = [0] * k
            e[i] = 1
            coeffs[tuple(e)] = Fraction(-1)
        return cls(k, coeffs)

    @classmethod
    def from_int_terms(cls, k: int, terms: dict, scale=Fraction(1)) -> "SieveF":
        return cls(k, {e: Fraction(c) * scale for e, c in terms.items() if c})

    def scale_by(self, c) -> "SieveF":
        c = Fraction(c)
        return SieveF(self.k, {e: v * c for e, v in self.coeffs.items()})

    def evaluate(self, ts) -> float:
        if len(ts) != self.k:
            raise InputError(f"expected {self.k} coordinates, got {len(ts)}")
        if any(t < -1e-12 for t in ts) or sum(ts) > 1 + 1e-12:
            return 0.0
        total = 0.0
        for e, c in self.coeffs.items():
            term = float(c)
            for t, a in zip(ts, e):
                if a:
                    term *= t**a
            total += term
        return total


@dataclass(frozen=True)
class SieveSums:
    S1: float
    S2: float
    S2prime: float
    ratio: float
    n_terms: int
    log_R: float


@dataclass(frozen=True)
class ClusterReport:
    best_n: int
    best_hits: int
    weighted_avg_hits: float | None
    congruence_verified: bool
    interval_verified: bool
    scanned: int


# ---------------------------------------------------------------------------
# greedy residue selection and admissibility


def greedy_survivors(survivor_span: int, y: int, q: int = 1
                     ) -> tuple[list[int], dict[int, int]]:
    """Greedy pass: for each prime p <= y with p not dividing q, delete the
    residue class (mod p) holding the fewest current survivors of {1..span}.

    Ties break toward the smallest class.  The exact lower bound
    |survivors| >= span * prod (1 - 1/p) - pi(y) is asserted on every run.
    """
    if survivor_span < 1:
        raise InputError("survivor_span must be >= 1")
    if y < 2:
        raise InputError("greedy cutoff y must be >= 2")
    if q < 1:
        raise InputError("q must be >= 1")
    surv = np.arange(1, survivor_span + 1, dtype=np.int64)
    residues: dict[int, int] = {}
    all_primes = primes_upto(y).tolist()
    for p in all_primes:
        p = int(p)
        if q % p == 0:
            continue
        counts = np.bincount(surv % p, minlength=p)
        cls = int(np.argmin(counts))
        residues[p] = cls
        surv = surv[surv % p != cls]
    survivors = [int(v) for v in surv.tolist()]
    bound = Fraction(survivor_span)
    for p in residues:
        bound *= Fraction(p - 1, p)
    if Fraction(len(survivors)) < bound - len(all_primes):
        raise InvariantError(
            f"greedy bound violated: {len(survivors)} < {bound} - pi({y})"
        )
    return survivors, residues


def is_admissible(shifts) -> tuple[bool, int | None]:
    """Direct checker: for every prime p <= k the shifts omit a class mod p.

    Primes p > k can never be covered by k residues, so this is complete.
    Returns (admissible, first failing prime or None).
    """
    k = len(shifts)
    for p in primes_upto(k).tolist():
        p = int(p)
        if len({h % p for h in shifts}) == p:
            return False, p
    return True, None


def build_tuple(survivors, k: int, q: int, a: int,
                residues: dict | None = None, y: int | None = None
                ) -> AdmissibleTuple:
    """Admissible tuple from the k smallest survivors: h_i = q * b_i.

    Verifies the three certificate cases (p <= y via the greedy residue,
    p | q via h_i = 0 mod p, p > y via p > k) when residues are supplied,
    and always runs the direct checker over all p <= k.
    """
    if math.gcd(a, q) != 1:
        raise InputError(f"a={a} must be coprime to q={q}")
    if len(survivors) < k:
        raise InputError(
            f"need {k} survivors but only {len(survivors)} available"
        )
    chosen = sorted(int(b) for b in survivors)[:k]
    shifts = tuple(q * b for b in chosen)
    ok, bad_p = is_admissible(shifts)
    if not ok:
        raise InputError(f"shifts cover every class mod {bad_p}; not admissible")
    residues = dict(residues or {})
    for p, r in residues.items():
        if q % p == 0:
            continue
        omitted = (q * r) % p
        if any(h % p == omitted for h in shifts):
            raise InvariantError(
                f"certificate broken at p={p}: shift hits the omitted class"
            )
    if y is not None and y < k:
        # primes in (y, k] carry no certificate; the direct checker above
        # already validated them.
        pass
    return AdmissibleTuple(q=q, a=a, span_L=q * max(chosen), k=k,
                           shifts=shifts, greedy_residues=residues)


def tuple_from_shifts(shifts, q: int = 1, a: int = 0) -> AdmissibleTuple:
    """Wrap explicit shifts, validating admissibility (rejects e.g. {0,2,4})."""
    shifts = tuple(sorted(int(h) for h in shifts))
    if math.gcd(a, q) != 1:
        raise InputError(f"a={a} must be coprime to q={q}")
    if any(h % q != 0 for h in shifts):
        raise InputError("every shift must be divisible by q")
    ok, bad_p = is_admissible(shifts)
    if not ok:
        raise InputError(f"shifts cover every class mod {bad_p}; not admissible")
    return AdmissibleTuple(q=q, a=a, span_L=max(shifts) if shifts else 0,
                           k=len(shifts), shifts=shifts, greedy_residues={})


def crt_residue(tup: AdmissibleTuple, mod: WModulus) -> int:
    """Residue nu mod W with nu = a (mod q) and every nu + h_i coprime to W.

    Per prime p | W: the class a mod p when p | q (compatible since
    gcd(a, q) = 1), otherwise the smallest class avoiding all -h_i mod p.
    """
    W = mod.W
    if W % tup.q != 0:
        raise InputError(f"modulus W={W} was not built with extra_factor={tup.q}")
    congruences: list[tuple[int, int]] = []  # (modulus p**e, residue)
    for p, e in sorted(factorize(W).items()):
        pe = p**e
        if tup.q % p == 0:
            if tup.a % p == 0:
                raise InvariantError(f"a={tup.a} shares the factor {p} with q")
            congruences.append((pe, tup.a % pe))
            continue
        forbidden = {(-h) % p for h in tup.shifts}
        cls = next((c for c in range(p) if c not in forbidden), None)
        if cls is None:
            raise InvariantError(
                f"no admissible class mod {p}: shifts cover every residue"
            )
        congruences.append((pe, cls))
    nu, M = 0, 1
    for m, r in congruences:
        inv = pow(M % m, -1, m)
        nu = nu + M * ((r - nu) * inv % m)
        M *= m
        nu %= M
    if nu % tup.q != tup.a % tup.q:
        raise InvariantError("CRT residue lost the congruence to a mod q")
    for h in tup.shifts:
        if math.gcd(nu + h, W) != 1:
            raise InvariantError(f"nu + {h} shares a factor with W")
    return nu


# ---------------------------------------------------------------------------
# weights


def maynard_lambda(d_vector, F: SieveF, R: float, W: int = 1) -> float:
    """mu(d_1)...mu(d_k) * F(log d_i / log R) on the supported tuples, else 0.

    Support: every d_i squarefree, coprime to W, pairwise coprime, d_i <= R,
    and prod d_i <= R (the simplex support of F).
    """
    if R <= 1:
        raise InputError(f"sieve level R must exceed 1, got {R}")
    ds = [int(d) for d in d_vector]
    if len(ds) != F.k:
        raise InputError(f"expected {F.k} components, got {len(ds)}")
    limit = int(math.floor(R))
    prod = 1
    sign = 1
    seen_primes: set[int] = set()
    for d in ds:
        if d < 1 or d > limit:
            return 0.0
        if math.gcd(d, W) != 1:
            return 0.0
        fac = factorize(d)
        if any(e >= 2 for e in fac.values()):
            return 0.0
        if any(p in seen_primes for p in fac):
            return 0.0
        seen_primes.update(fac)
        sign *= (-1) ** len(fac)
        prod *= d
    if prod > limit:
        return 0.0
    log_r = math.log(R)
    ts = [math.log(d) / log_r for d in ds]
    return sign * F.evaluate(ts)


def _divisor_sum(values, F: SieveF, R: float, W: int,
                 budget: int = 10**15) -> float:
    """sum over supported (d_1, .., d_k), d_i | values[i], of the lambda weight."""
    limit = int(math.floor(R))
    log_r = math.log(R)
    options = []
    for v in values:
        if v < 1:
            raise InputError(f"shifted value {v} must be >= 1")
        if v > budget:
            raise ResourceError(f"factorization budget exceeded at {v}")
        options.append(squarefree_divisors(v, limit, coprime_to=W))

    total = 0.0

    def rec(i: int, prod: int, sign: int, used: frozenset, ts: list[float]):
        nonlocal total
        if i == len(options):
            total += sign * F.evaluate(ts)
            return
        for d, mu, ps in options[i]:
            if prod * d > limit:
                continue
            if used and any(p in used for p in ps):
                continue
            ts.append(math.log(d) / log_r if d > 1 else 0.0)
            rec(i + 1, prod * d, sign * mu, used | frozenset(ps), ts)
            ts.pop()

    rec(0, 1, 1, frozenset(), [])
    return total


def omega_weight(n: int, tup: AdmissibleTuple, F: SieveF, R: float,
                 W: int = 1, budget: int = 10**15) -> float:
    """Squared divisor-sum weight at n: (sum of lambda over d_i | n + h_i)^2."""
    if R <= 1:
        raise InputError(f"sieve level R must exceed 1, got {R}")
    inner = _divisor_sum([n + h for h in tup.shifts], F, R, W, budget)
    return inner * inner


def _prime_mask(limit: int) -> np.ndarray:
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return mask


def _von_mangoldt(m: int, mask: np.ndarray) -> float:
    if m < 2:
        return 0.0
    if mask[m]:
        return math.log(m)
    e = 2
    while (1 << e) <= m + 1:
        r = iroot(m, e)
        if r < 2:
            break
        if r**e == m and mask[r]:
            return math.log(r)
        e += 1
    return 0.0


def sieve_sums(X_lo: int, X_hi: int, mod: WModulus, crt: int,
               tup: AdmissibleTuple, F: SieveF, R: float) -> SieveSums:
    """Exact S1 = sum omega(n), S2 with the full von Mangoldt weight, and
    S2' with the prime-only log, over n in (X_lo, X_hi], n = crt (mod W).

    ratio = S2' / (S1 log R); NaN when S1 vanishes (e.g. F identically 0).
    """
    W = mod.W
    if not 0 <= crt < max(W, 1):
        raise InputError(f"residue {crt} out of range for W={W}")
    if X_hi <= X_lo:
        raise InputError("empty range")
    first = X_lo + 1 + ((crt - (X_lo + 1)) % W)
    if first > X_hi:
        raise InputError("no integers = crt (mod W) in the range")
    mask = _prime_mask(X_hi + max(tup.shifts) + 1)
    s1_parts, s2_parts, s2p_parts = [], [], []
    count = 0
    for n in range(first, X_hi + 1, W):
        count += 1
        w = omega_weight(n, tup, F, R, W)
        if w == 0.0:
            continue
        lam = 0.0
        th = 0.0
        for h in tup.shifts:
            m = n + h
            lam += _von_mangoldt(m, mask)
            if mask[m]:
                th += math.log(m)
        s1_parts.append(w)
        s2_parts.append(w * lam)
        s2p_parts.append(w * th)
    S1 = tree_sum(s1_parts)
    S2 = tree_sum(s2_parts)
    S2p = tree_sum(s2p_parts)
    log_r = math.log(R)
    ratio = S2p / (S1 * log_r) if S1 > 0 else float("nan")
    return SieveSums(S1=S1, S2=S2, S2prime=S2p, ratio=ratio,
                     n_terms=count, log_R=log_r)


def cluster_search(X_lo: int, X_hi: int, tup: AdmissibleTuple, mod: WModulus,
                   crt: int, F: SieveF, R: float) -> ClusterReport:
    """Scan n = crt (mod W) for the most prime values among n + h_i.

    Also reports the omega-weighted average hit count and verifies that the
    winners are congruent to a (mod q) and lie in [n, n + span_L].
    """
    W = mod.W
    if not 0 <= crt < max(W, 1):
        raise InputError(f"residue {crt} out of range for W={W}")
    if X_hi <= X_lo:
        raise InputError("empty range")
    first = X_lo + 1 + ((crt - (X_lo + 1)) % W)
    if first > X_hi:
        raise InputError("no integers = crt (mod W) in the range")
    mask = _prime_mask(X_hi + max(tup.shifts) + 1)
    best_n, best_hits = first, -1
    wsum_parts, whit_parts = [], []
    scanned = 0
    for n in range(first, X_hi + 1, W):
        scanned += 1
        hits = sum(1 for h in tup.shifts if mask[n + h])
        if hits > best_hits:
            best_n, best_hits = n, hits
        w = omega_weight(n, tup, F, R, W)
        if w:
            wsum_parts.append(w)
            whit_parts.append(w * hits)
    wsum = tree_sum(wsum_parts)
    weighted_avg = tree_sum(whit_parts) / wsum if wsum > 0 else None
    cong_ok = True
    interval_ok = True
    for h in tup.shifts:
        if mask[best_n + h]:
            if (best_n + h) % tup.q != tup.a % tup.q:
                cong_ok = False
            if not best_n <= best_n + h <= best_n + max(tup.span_L, max(tup.shifts)):
                interval_ok = False
    return ClusterReport(best_n=best_n, best_hits=best_hits,
                         weighted_avg_hits=weighted_avg,
                         congruence_verified=cong_ok,
                         interval_verified=interval_ok, scanned=scanned)


# ---------------------------------------------------------------------------
# exact sieve integrals and the quality-ratio optimizer


def sieve_integrals(F: SieveF) -> tuple[Fraction, list[Fraction], Fraction]:
    """Exact (I_k, [J_k1..J_kk], M_k) for a rational polynomial profile.

    I = integral of F^2 over the simplex; J_i squares the partial integral in
    t_i and integrates over the remaining coordinates; M = sum(J) / I.
    """
    k = F.k
    sc = scaled_terms(F.coeffs)
    I = integrate_product(sc, sc, k)
    if I == 0:
        raise InputError("degenerate profile: I_k(F) = 0")
    if is_symmetric(F.coeffs, k):
        inner = inner_integral(sc, k - 1, k)
        Jk = integrate_inner_product(inner, inner, k - 1)
        J = [Jk] * k
    else:
        J = []
        for i in range(k):
            inner = inner_integral(sc, i, k)
            J.append(integrate_inner_product(inner, inner, k - 1))
    M = sum(J, Fraction(0)) / I
    return I, J, M


def symmetric_basis(k: int, max_degree: int = 3) -> list[tuple[str, dict]]:
    """Products of elementary symmetric polynomials of total degree <= max_degree."""
    es = {}
    for j in range(1, min(k, max_degree) + 1):
        terms = elementary_symmetric(k, j)
        if terms:
            es[j] = terms
    basis: list[tuple[str, dict]] = []

    def extend(j_min: int, degree_left: int, label: str, terms: dict):
        basis.append((label or "1", terms))
        for j in range(j_min, max_degree + 1):
            if j not in es or j > degree_left:
                continue
            new_terms = poly_mul(terms, es[j])
            new_label = f"{label}*e{j}" if label else f"e{j}"
            extend(j, degree_left - j, new_label, new_terms)

    extend(1, max_degree, "", {(0,) * k: 1})
    return basis


def _independent_subset(gram: list[list[Fraction]]) -> list[int]:
    """Greedy subset of indices whose Gram submatrix is exactly nonsingular."""
    kept: list[int] = []
    for i in range(len(gram)):
        trial = kept + [i]
        sub = [[gram[r][c] for c in trial] for r in trial]
        if _det(sub) != 0:
            kept.append(i)
    return kept


def _det(mat: list[list[Fraction]]) -> Fraction:
    n = len(mat)
    mat = [row[:] for row in mat]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if mat[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            mat[col], mat[pivot] = mat[pivot], mat[col]
            det = -det
        det *= mat[col][col]
        inv = 1 / mat[col][col]
        for r in range(col + 1, n):
            factor = mat[r][col] * inv
            if factor:
                mat[r] = [a - factor * b for a, b in zip(mat[r], mat[col])]
    return det


def optimize_F(k: int, max_degree: int = 3) -> tuple[SieveF, Fraction]:
    """Maximize M_k(F) over the symmetric polynomial basis span.

    Exact Gram matrices feed a dense symmetric-definite generalized
    eigenproblem; the top eigenvector is rationalized and its ratio is
    recomputed exactly, so the returned value is an exact Fraction and is
    guaranteed >= the ratio of every single basis element.
    """
    import scipy.linalg

    if k < 1:
        raise InputError("k must be >= 1")
    basis = symmetric_basis(k, max_degree)
    scaled = [scaled_terms({e: Fraction(c) for e, c in terms.items()})
              for _label, terms in basis]
    inners = [inner_integral(sc, k - 1, k) for sc in scaled]
    m = len(basis)
    I_gram = [[integrate_product(scaled[i], scaled[j], k) for j in range(m)]
              for i in range(m)]
    J_gram = [[k * integrate_inner_product(inners[i], inners[j], k - 1)
               for j in range(m)] for i in range(m)]
    keep = _independent_subset(I_gram)
    A = np.array([[float(J_gram[i][j]) for j in keep] for i in keep])
    B = np.array([[float(I_gram[i][j]) for j in keep] for i in keep])
    eigvals, eigvecs = scipy.linalg.eigh(A, B)
    v = eigvecs[:, -1]
    v = v / v[int(np.argmax(np.abs(v)))]

    coeffs: dict = {}
    for idx, vi in zip(keep, v):
        c = Fraction(float(vi)).limit_denominator(10**9)
        if c == 0:
            continue
        for e, ci in basis[idx][1].items():
            coeffs[e] = coeffs.get(e, Fraction(0)) + c * ci
    coeffs = {e: c for e, c in coeffs.items() if c != 0}
    candidates: list[tuple[Fraction, SieveF]] = []
    if coeffs:
        F_opt = SieveF(k, coeffs)
        try:
            _, _, M_opt = sieve_integrals(F_opt)
            candidates.append((M_opt, F_opt))
        except InputError:
            pass
    for i in keep:
        if I_gram[i][i] == 0:
            continue
        M_i = Fraction(J_gram[i][i]) / I_gram[i][i]
        candidates.append((M_i, SieveF.from_int_terms(k, basis[i][1])))
    if not candidates:
        raise InputError("optimizer found no usable profile")
    best_M, best_F = max(candidates, key=lambda t: t[0])
    return best_F, best_M
