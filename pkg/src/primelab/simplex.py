"""Exact polynomial integration over the standard simplex.

Monomial moments follow the Dirichlet identity

    integral over {t_i >= 0, sum t_i <= 1} of prod t_i^a_i * (1 - sum t)^m
        = prod(a_i!) * m! / (d + sum a_i + m)!

in d variables, so every integral of a rational-coefficient polynomial is an
exact Fraction.  Polynomials are monomial dicts; internally coefficients are
cleared to integers with a single Fraction scale so the hot accumulation
loops stay in integer arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

Monomials = Mapping[tuple[int, ...], Fraction]
IntTerms = dict[tuple[int, ...], int]


@lru_cache(maxsize=None)
def _factorial(n: int) -> int:
    return math.factorial(n)


@lru_cache(maxsize=None)
def simplex_moment(exps: tuple[int, ...], m: int, dims: int) -> Fraction:
    """Dirichlet moment of prod t^exps * (1 - sum t)^m over the d-simplex."""
    num = _factorial(m)
    tot = m
    for a in exps:
        num *= _factorial(a)
        tot += a
    return Fraction(num, _factorial(dims + tot))


def scaled_terms(coeffs: Monomials) -> tuple[Fraction, IntTerms]:
    """Clear denominators: coeffs = scale * integer-terms."""
    if not coeffs:
        return Fraction(1), {}
    denom = 1
    for c in coeffs.values():
        denom = denom * c.denominator // math.gcd(denom, c.denominator)
    terms = {e: int(c * denom) for e, c in coeffs.items() if c != 0}
    return Fraction(1, denom), terms


def poly_mul(a: IntTerms, b: IntTerms) -> IntTerms:
    """Product of two integer-coefficient monomial dicts."""
    out: IntTerms = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            out[key] = out.get(key, 0) + ca * cb
    return {e: c for e, c in out.items() if c != 0}


def elementary_symmetric(k: int, j: int) -> IntTerms:
    """e_j in k variables as a monomial dict (empty when j > k)."""
    if j == 0:
        return {(0,) * k: 1}
    if j > k:
        return {}
    from itertools import combinations

    out: IntTerms = {}
    for idx in combinations(range(k), j):
        e = [0] * k
        for i in idx:
            e[i] = 1
        out[tuple(e)] = 1
    return out


def integrate_product(a: tuple[Fraction, IntTerms], b: tuple[Fraction, IntTerms],
                      dims: int) -> Fraction:
    """Exact integral of the product of two scaled polynomials over the simplex."""
    sa, ta = a
    sb, tb = b
    acc: dict[tuple[int, ...], int] = {}
    for ea, ca in ta.items():
        for eb, cb in tb.items():
            key = tuple(sorted((x + y for x, y in zip(ea, eb)), reverse=True))
            acc[key] = acc.get(key, 0) + ca * cb
    total = Fraction(0)
    for key, c in acc.items():
        if c:
            total += c * simplex_moment(key, 0, dims)
    return sa * sb * total


def inner_integral(p: tuple[Fraction, IntTerms], axis: int, k: int
                   ) -> tuple[Fraction, dict[tuple[tuple[int, ...], int], int]]:
    """Integrate out t_axis from 0 to 1 - sum of the other coordinates.

    Each monomial t^e maps to t'^e' * S^(e_axis + 1) / (e_axis + 1) where
    S = 1 - sum t'.  Returns scaled terms keyed by (remaining exps, S power).
    """
    scale, terms = p
    denoms = {e[axis] + 1 for e in terms}
    L = 1
    for d in denoms:
        L = L * d // math.gcd(L, d)
    out: dict[tuple[tuple[int, ...], int], int] = {}
    for e, c in terms.items():
        m = e[axis] + 1
        rest = e[:axis] + e[axis + 1 :]
        key = (rest, m)
        out[key] = out.get(key, 0) + c * (L // m)
    return scale / L, out


def integrate_inner_product(a, b, dims: int) -> Fraction:
    """Integral over the (dims)-simplex of the product of two inner integrals."""
    sa, ta = a
    sb, tb = b
    acc: dict[tuple[tuple[int, ...], int], int] = {}
    for (ea, ma), ca in ta.items():
        for (eb, mb), cb in tb.items():
            key = (tuple(sorted((x + y for x, y in zip(ea, eb)), reverse=True)),
                   ma + mb)
            acc[key] = acc.get(key, 0) + ca * cb
    total = Fraction(0)
    for (exps, m), c in acc.items():
        if c:
            total += c * simplex_moment(exps, m, dims)
    return sa * sb * total


def is_symmetric(coeffs: Monomials, k: int) -> bool:
    """True when the polynomial is invariant under coordinate permutations."""
    from math import factorial

    groups: dict[tuple[int, ...], list[Fraction]] = {}
    for e, c in coeffs.items():
        if c == 0:
            continue
        groups.setdefault(tuple(sorted(e, reverse=True)), []).append(c)
    for sig, cs in groups.items():
        if len(set(cs)) != 1:
            return False
        # count distinct permutations of the signature
        perms = factorial(k)
        for v in set(sig):
            perms //= factorial(sig.count(v))
        if len(cs) != perms:
            return False
    return True
