import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import primelab as pl
from primelab.errors import InputError, InvariantError
from primelab.maynard import AdmissibleTuple, symmetric_basis

from oracles import is_prime_trial, omega_brute


# ---------------------------------------------------------------------------
# greedy survivors and admissibility


def test_greedy_hand_simulation():
    survivors, residues = pl.greedy_survivors(10, 3, 1)
    # p=2: classes tie 5/5 -> smallest class 0 deleted; p=3: class 2 is rarest
    assert survivors == [1, 3, 7, 9]
    assert residues == {2: 0, 3: 2}


def test_greedy_skips_primes_dividing_q():
    survivors, residues = pl.greedy_survivors(8, 2, 2)
    assert survivors == list(range(1, 9))
    assert residues == {}


def test_greedy_span_one():
    survivors, _ = pl.greedy_survivors(1, 3, 1)
    assert survivors in ([], [1]) and len(survivors) <= 1


@settings(deadline=None, max_examples=40)
@given(span=st.integers(1, 3000), y=st.integers(2, 60), q=st.integers(1, 30))
def test_greedy_bound_property(span, y, q):
    survivors, residues = pl.greedy_survivors(span, y, q)  # asserts internally
    bound = Fraction(span)
    for p in residues:
        bound *= Fraction(p - 1, p)
    from primelab.arith import primes_upto

    assert Fraction(len(survivors)) >= bound - len(primes_upto(y))


def test_admissibility_examples():
    assert pl.is_admissible((1, 3)) == (True, None)
    ok, p = pl.is_admissible((0, 2, 4))
    assert not ok and p == 3
    assert pl.is_admissible((7,)) == (True, None)  # k = 1 is always admissible


def test_build_tuple():
    survivors, residues = pl.greedy_survivors(60, 10, 1)
    tup = pl.build_tuple(survivors, 4, 1, 0, residues, 10)
    assert len(tup.shifts) == 4
    assert tup.shifts == tuple(sorted(tup.shifts))
    assert pl.is_admissible(tup.shifts)[0]

    with pytest.raises(InputError, match="only 2"):
        pl.build_tuple([1, 5], 3, 1, 0)


def test_build_tuple_scaled_by_q():
    survivors, residues = pl.greedy_survivors(50, 8, 3)
    tup = pl.build_tuple(survivors, 4, 3, 2, residues, 8)
    assert all(h % 3 == 0 for h in tup.shifts)
    assert tup.span_L == max(tup.shifts)


def test_tuple_from_shifts_rejects_covering():
    with pytest.raises(InputError, match="mod 3"):
        pl.tuple_from_shifts([0, 2, 4])
    tup = pl.tuple_from_shifts([0, 2, 6])
    assert tup.shifts == (0, 2, 6)


# ---------------------------------------------------------------------------
# CRT residue


def test_crt_residue_example():
    tup = pl.tuple_from_shifts([6, 12], q=3, a=2)
    mod = pl.build_modulus(2.0, extra_factor=3)  # W = 3 * 2 = 6
    nu = pl.crt_residue(tup, mod)
    assert nu == 5
    assert nu % 3 == 2
    assert math.gcd(nu + 6, 6) == 1 and math.gcd(nu + 12, 6) == 1


def test_crt_residue_trivial():
    tup = pl.tuple_from_shifts([0], q=1, a=0)
    mod = pl.build_modulus(2.0)
    assert pl.crt_residue(tup, mod) == 1


def test_crt_residue_contract_error():
    bad = AdmissibleTuple(q=1, a=0, span_L=2, k=3, shifts=(0, 1, 2),
                          greedy_residues={})
    mod = pl.build_modulus(3.0)  # W = 6; shifts cover all classes mod 3
    with pytest.raises(InvariantError):
        pl.crt_residue(bad, mod)


def test_crt_residue_exhaustive_scan():
    tup = pl.tuple_from_shifts([5, 10, 25], q=5, a=2)
    mod = pl.build_modulus(3.0, extra_factor=5)  # W = 30
    nu = pl.crt_residue(tup, mod)
    candidates = [c for c in range(30)
                  if c % 5 == 2 and all(math.gcd(c + h, 30) == 1 for h in tup.shifts)]
    assert nu in candidates


# ---------------------------------------------------------------------------
# weights


def test_maynard_lambda_examples():
    F = pl.SieveF.one_minus_sum(2)
    assert pl.maynard_lambda([1, 1], F, 10.0) == pytest.approx(F.evaluate([0, 0]))
    assert pl.maynard_lambda([4, 3], F, 10.0) == 0.0  # 4 is not squarefree
    got = pl.maynard_lambda([2, 3], F, 10.0)
    want = (1 - math.log(6) / math.log(10))  # mu(2) mu(3) = (+1)
    assert got == pytest.approx(want, rel=1e-12)
    # support: pairwise coprimality and the product cap
    assert pl.maynard_lambda([2, 6], F, 10.0) == 0.0
    assert pl.maynard_lambda([7, 5], F, 10.0) == 0.0  # 35 > 10
    assert pl.maynard_lambda([2, 3], F, 10.0, W=6) == 0.0  # shares factors with W


def test_omega_examples():
    F = pl.SieveF.one_minus_sum(1)
    tup = pl.tuple_from_shifts([0])
    got = pl.omega_weight(6, tup, F, 5.0)
    assert got == pytest.approx((math.log(6 / 5) / math.log(5)) ** 2, rel=1e-9)

    zero = pl.SieveF(1, {})
    assert pl.omega_weight(6, tup, zero, 5.0) == 0.0

    # all entries prime and above R: only d = 1 contributes
    F3 = pl.SieveF.one_minus_sum(3)
    tup3 = pl.tuple_from_shifts([0, 2, 6])
    w = pl.omega_weight(11, tup3, F3, 7.0)
    assert w == pytest.approx(F3.evaluate([0, 0, 0]) ** 2, rel=1e-12)


def test_omega_matches_brute_force():
    F = pl.SieveF.one_minus_sum(2)
    tup = pl.tuple_from_shifts([0, 4])
    for n in range(3, 120):
        got = pl.omega_weight(n, tup, F, 12.0)
        want = omega_brute(n, tup.shifts, F, 12.0)
        assert got == pytest.approx(want, abs=1e-12)


def test_omega_consistency_with_divisor_table():
    pw = pl.sieve_window(0, 400)
    mod = pl.build_modulus(0.0)
    block = pl.align_block(pw, mod, 0)
    table = pl.divisor_sum_table(block, R=5.0)
    tup = pl.tuple_from_shifts([0])
    F = pl.SieveF.one_minus_sum(1)
    log_r = math.log(5.0)
    for n in range(1, 401):
        w = pl.omega_weight(n, tup, F, 5.0)
        assert abs(w - (table.lambdaR[n - 1] / log_r) ** 2) < 1e-9


# ---------------------------------------------------------------------------
# sums and cluster search


def test_sieve_sums_zero_profile():
    tup = pl.tuple_from_shifts([0, 2])
    mod = pl.build_modulus(2.0)
    nu = pl.crt_residue(tup, mod)
    zero = pl.SieveF(2, {})
    sums = pl.sieve_sums(100, 400, mod, nu, tup, zero, 5.0)
    assert (sums.S1, sums.S2, sums.S2prime) == (0.0, 0.0, 0.0)
    assert math.isnan(sums.ratio)


def test_sieve_sums_direct_oracle():
    tup = pl.tuple_from_shifts([0])
    mod = pl.build_modulus(1.0)  # W = 1
    F = pl.SieveF.one_minus_sum(1)
    R = 6.0
    sums = pl.sieve_sums(50, 900, mod, 0, tup, F, R)
    s1 = s2 = s2p = 0.0
    for n in range(51, 901):
        w = omega_brute(n, [0], F, R)
        s1 += w
        if is_prime_trial(n):
            s2 += w * math.log(n)
            s2p += w * math.log(n)
        else:
            e = 2
            while 2**e <= n:
                r = round(n ** (1 / e))
                if r**e == n and is_prime_trial(r):
                    s2 += w * math.log(r)
                e += 1
    assert sums.S1 == pytest.approx(s1, rel=1e-9)
    assert sums.S2 == pytest.approx(s2, rel=1e-9)
    assert sums.S2prime == pytest.approx(s2p, rel=1e-9)
    # the prime-only log sum never exceeds k log(max entry) per unit weight
    assert sums.S2prime <= sums.S1 * math.log(901)
    assert sums.ratio * sums.log_R <= math.log(901) * (1 + 1e-12)


def test_sieve_sums_progression_restriction():
    tup = pl.tuple_from_shifts([0, 6], q=3, a=1)
    mod = pl.build_modulus(2.0, extra_factor=3)
    nu = pl.crt_residue(tup, mod)
    F = pl.SieveF.one_minus_sum(2)
    sums = pl.sieve_sums(100, 2000, mod, nu, tup, F, 8.0)
    assert sums.n_terms == len([n for n in range(101, 2001) if n % mod.W == nu])
    assert sums.S1 > 0
    with pytest.raises(InputError):
        pl.sieve_sums(100, 100, mod, nu, tup, F, 8.0)


def test_cluster_search_triple():
    tup = pl.tuple_from_shifts([0, 2, 6])
    mod = pl.build_modulus(5.0)  # W = 30
    nu = pl.crt_residue(tup, mod)
    F = pl.SieveF.one_minus_sum(3)
    rep = pl.cluster_search(10**4, 2 * 10**4, tup, mod, nu, F, 10.0)
    assert rep.best_hits == 3
    assert all(is_prime_trial(rep.best_n + h) for h in tup.shifts)
    assert rep.congruence_verified and rep.interval_verified
    assert rep.weighted_avg_hits is not None


def test_cluster_negative_control():
    # three consecutive integers can never all be prime beyond (2, 3, 4)
    bad = AdmissibleTuple(q=1, a=0, span_L=2, k=3, shifts=(0, 1, 2),
                          greedy_residues={})
    mod = pl.build_modulus(1.0)
    F = pl.SieveF.one_minus_sum(3)
    rep = pl.cluster_search(10**3, 5 * 10**3, bad, mod, 0, F, 5.0)
    assert rep.best_hits <= 2


# ---------------------------------------------------------------------------
# exact integrals


def test_integrals_k1():
    I, J, M = pl.sieve_integrals(pl.SieveF.constant(1))
    assert (I, J, M) == (Fraction(1), [Fraction(1)], Fraction(1))


def test_integrals_k2_exact():
    I, J, M = pl.sieve_integrals(pl.SieveF.one_minus_sum(2))
    assert I == Fraction(1, 12)
    assert J == [Fraction(1, 20), Fraction(1, 20)]
    assert M == Fraction(6, 5)


def test_integrals_degenerate():
    with pytest.raises(InputError):
        pl.sieve_integrals(pl.SieveF(2, {}))


def test_integrals_scale_invariance_exact():
    F = pl.SieveF.one_minus_sum(4)
    _, _, M = pl.sieve_integrals(F)
    for c in (Fraction(2), Fraction(-3, 7), Fraction(10**6)):
        _, _, Mc = pl.sieve_integrals(F.scale_by(c))
        assert Mc == M


def test_integrals_against_sympy():
    sympy = pytest.importorskip("sympy")
    t1, t2 = sympy.symbols("t1 t2")
    # F = 1 - t1 - t2 + 3 t1 t2 (symmetric, degree 2)
    F = pl.SieveF(2, {(0, 0): Fraction(1), (1, 0): Fraction(-1),
                      (0, 1): Fraction(-1), (1, 1): Fraction(3)})
    expr = 1 - t1 - t2 + 3 * t1 * t2
    I_sym = sympy.integrate(sympy.integrate(expr**2, (t2, 0, 1 - t1)), (t1, 0, 1))
    inner = sympy.integrate(expr, (t2, 0, 1 - t1))
    J_sym = sympy.integrate(inner**2, (t1, 0, 1))
    I, J, M = pl.sieve_integrals(F)
    assert I == Fraction(int(sympy.fraction(I_sym)[0]), int(sympy.fraction(I_sym)[1]))
    assert J[1] == Fraction(int(sympy.fraction(J_sym)[0]), int(sympy.fraction(J_sym)[1]))


def test_integrals_asymmetric_profile():
    sympy = pytest.importorskip("sympy")
    t1, t2 = sympy.symbols("t1 t2")
    F = pl.SieveF(2, {(1, 0): Fraction(1), (0, 2): Fraction(1, 2)})
    expr = t1 + t2**2 / 2
    I, J, M = pl.sieve_integrals(F)
    I_sym = sympy.integrate(sympy.integrate(expr**2, (t2, 0, 1 - t1)), (t1, 0, 1))
    assert I == Fraction(*[int(v) for v in sympy.fraction(I_sym)])
    inner1 = sympy.integrate(expr, (t1, 0, 1 - t2))
    J1_sym = sympy.integrate(inner1**2, (t2, 0, 1))
    assert J[0] == Fraction(*[int(v) for v in sympy.fraction(J1_sym)])


# ---------------------------------------------------------------------------
# optimizer


def test_optimizer_k2_dominates_linear_profile():
    F, M = pl.optimize_F(2, 3)
    assert M >= Fraction(6, 5)
    _, _, M_re = pl.sieve_integrals(F)
    assert M_re == M


def test_optimizer_k1_is_one():
    _, M = pl.optimize_F(1, 3)
    assert M == 1


def test_optimizer_single_element_basis():
    # degree-0 basis holds only the constant: M equals its own ratio
    F, M = pl.optimize_F(3, 0)
    _, _, M_const = pl.sieve_integrals(pl.SieveF.constant(3))
    assert M == M_const


def test_optimizer_dominance_over_basis():
    for k in (2, 3, 4):
        _, M = pl.optimize_F(k, 3)
        for _label, terms in symmetric_basis(k, 3):
            F = pl.SieveF.from_int_terms(k, terms)
            _, _, M_b = pl.sieve_integrals(F)
            assert M >= M_b


def test_optimizer_nondecreasing_small():
    prev = None
    for k in range(2, 7):
        _, M = pl.optimize_F(k, 3)
        if prev is not None:
            assert M >= prev
        prev = M
