"""Integer and prime utilities shared across the lab."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import InputError, ResourceError

U64_MAX = 2**64 - 1

# Deterministic Miller-Rabin witness set: correct for all n < 3.3 * 10**24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def primes_upto(n: int) -> np.ndarray:
    """All primes <= n, as an int64 array (plain sieve; n expected modest)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    mask = np.ones(n + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.nonzero(mask)[0].astype(np.int64)


def mobius_upto(n: int) -> np.ndarray:
    """Mobius function mu(0..n) as int8 (mu(0) is set to 0)."""
    if n < 0:
        raise InputError("mobius_upto: negative bound")
    mu = np.ones(n + 1, dtype=np.int8)
    if n >= 0:
        mu[0] = 0
    for p in primes_upto(n):
        p = int(p)
        mu[p::p] *= -1
        sq = p * p
        if sq <= n:
            mu[sq::sq] = 0
    return mu


def phi_upto(n: int) -> np.ndarray:
    """Euler phi(0..n) as int64 (phi(0) is set to 0)."""
    if n < 0:
        raise InputError("phi_upto: negative bound")
    phi = np.arange(n + 1, dtype=np.int64)
    for p in primes_upto(n):
        p = int(p)
        phi[p::p] -= phi[p::p] // p
    return phi


def iroot(n: int, k: int) -> int:
    """Largest integer r with r**k <= n (exact, arbitrary precision)."""
    if n < 0 or k < 1:
        raise InputError(f"iroot: invalid arguments n={n}, k={k}")
    if n == 0:
        return 0
    if k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    r = int(round(n ** (1.0 / k)))
    while r > 0 and r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def floor_power(x: int, theta: float) -> int:
    """floor(x**theta), computed exactly via a rational approximation of theta.

    theta is snapped to the nearest fraction with denominator <= 10**6, which
    recovers the intended value for inputs like 0.6 or 0.7 given as floats.
    """
    from fractions import Fraction

    if x < 0:
        raise InputError("floor_power: negative base")
    if theta <= 0:
        raise InputError("floor_power: exponent must be positive")
    frac = Fraction(theta).limit_denominator(10**6)
    return iroot(x**frac.numerator, frac.denominator)


def is_prime(n: int) -> bool:
    """Deterministic primality for n < 3.3e24 (fixed Miller-Rabin bases)."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = (x * x) % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    """A nontrivial factor of composite odd n (Brent's cycle variant)."""
    if n % 2 == 0:
        return 2
    for c in range(1, 64):
        x = y = 2
        d = 1
        f = lambda v: (v * v + c) % n
        while d == 1:
            x = f(x)
            y = f(f(y))
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
    raise ResourceError(f"factorization stalled on n={n}")


def factorize(n: int, budget: int = 10**15) -> dict[int, int]:
    """Prime factorization of n >= 1 as {prime: exponent}.

    Trial division by small primes, then deterministic Miller-Rabin plus
    Pollard rho for the remaining cofactor.  `budget` caps the admissible n.
    """
    if n < 1:
        raise InputError(f"factorize: n must be >= 1, got {n}")
    if n > budget:
        raise ResourceError(f"factorize: n={n} exceeds budget {budget}")
    factors: dict[int, int] = {}
    for p in (2, 3, 5):
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
    p = 7
    wheel = (4, 2, 4, 2, 4, 6, 2, 6)
    i = 0
    while p * p <= n and p < 10**6:
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
        p += wheel[i]
        i = (i + 1) % 8
    # cofactor: prime, prime power, or split recursively
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            factors[m] = factors.get(m, 0) + 1
            continue
        d = _pollard_rho(m)
        stack.append(d)
        stack.append(m // d)
    return factors


def euler_phi(n: int) -> int:
    """phi(n) via factorization."""
    phi = n
    for p in factorize(n):
        phi = phi // p * (p - 1)
    return phi


def squarefree_divisors(
    n: int,
    limit: int,
    coprime_to: int = 1,
) -> list[tuple[int, int, tuple[int, ...]]]:
    """Squarefree divisors d <= limit of n with gcd(d, coprime_to) = 1.

    Returns (d, mu(d), primes of d) triples, deterministic order.
    """
    primes = [p for p in sorted(factorize(n)) if coprime_to % p != 0]
    out: list[tuple[int, int, tuple[int, ...]]] = [(1, 1, ())]
    for p in primes:
        extra = []
        for d, mu, ps in out:
            nd = d * p
            if nd <= limit:
                extra.append((nd, -mu, ps + (p,)))
        out.extend(extra)
    out.sort()
    return out


@lru_cache(maxsize=None)
def _primorial_cached(cut: int) -> int:
    prod = 1
    for p in primes_upto(cut):
        prod *= int(p)
    return prod


def primorial(w_cut: float) -> int:
    """Product of all primes <= w_cut (1 for w_cut < 2)."""
    if w_cut < 0:
        raise InputError("primorial: negative cutoff")
    return _primorial_cached(int(math.floor(w_cut)))


def tree_sum(values) -> float:
    """Compensated deterministic sum (Shewchuk algorithm via math.fsum)."""
    if isinstance(values, np.ndarray):
        values = values.tolist()
    return math.fsum(values)
