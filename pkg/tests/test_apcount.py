import math

import numpy as np
import pytest

import primelab as pl
from primelab.apcount import (
    cap_factor,
    count_prime_power_tuples,
    prime_indicator,
    prime_power_indicators,
)
from primelab.errors import InputError

from oracles import exclusion_brute, indicator_ap_brute, weighted_ap_brute


def _toy_block(x, H):
    pw = pl.sieve_window(x, H)
    mod = pl.build_modulus(0.0)
    block = pl.align_block(pw, mod, 0)
    return pw, block


def test_weighted_sum_counting_formula():
    f = np.ones(12)
    assert pl.weighted_ap_sum(f, 3) == 10.0  # r = 1 only, n = 1..10
    assert pl.weighted_ap_sum(np.zeros(12), 3) == 0.0
    assert pl.weighted_ap_sum(np.ones(2), 3) == 0.0  # degenerate N < k


def test_weighted_sum_toy_block_vs_brute():
    pw, block = _toy_block(0, 15)
    f = pl.prime_weights(block, pw, R=4.0)
    for k in (2, 3):
        r_box = block.N // (3 * k)
        assert pl.weighted_ap_sum(f, k) == pytest.approx(
            weighted_ap_brute(f, k, r_box), rel=1e-12)
        assert pl.weighted_ap_sum(f, k, r_max=block.N) == pytest.approx(
            weighted_ap_brute(f, k, block.N), rel=1e-12)


def test_weighted_sum_prime_only_equals_ap_products():
    # with prime-only weights and unrestricted r, the sum collapses onto the
    # two prime 3-APs of (0, 15]: {3,5,7} and {3,7,11}
    pw, block = _toy_block(1, 15)  # x = 1 so the cap factor is defined
    f = pl.prime_weights(block, pw, R=4.0, prime_only=True)
    got = pl.weighted_ap_sum(f, 3, r_max=block.N)
    idx = {v: t for t, v in enumerate(block.entries().tolist(), start=1)}
    want = (f[idx[3] - 1] * f[idx[5] - 1] * f[idx[7] - 1]
            + f[idx[3] - 1] * f[idx[7] - 1] * f[idx[11] - 1])
    assert got == pytest.approx(want, rel=1e-12)


def test_count_examples():
    pw, block = _toy_block(0, 15)
    assert pl.count_prime_aps(pw, block, 3, "all") == 2
    pw2, block2 = _toy_block(0, 10)
    assert pl.count_prime_aps(pw2, block2, 2, "all") == 6
    pw3, block3 = _toy_block(20, 2)
    assert pl.count_prime_aps(pw3, block3, 2, "all") == 0
    with pytest.raises(InputError):
        pl.count_prime_aps(pw, block, 3, "everything")


def test_count_matches_brute_force():
    rng = np.random.default_rng(13)
    for _ in range(10):
        x = int(rng.integers(0, 10**5 - 2500))
        H = int(rng.integers(30, 1500))
        pw, block = _toy_block(x, H)
        mask = prime_indicator(pw, block).tolist()
        for k in (2, 3):
            box = pl.count_prime_aps(pw, block, k, "paper_box")
            assert box == indicator_ap_brute(mask, k, block.N // (3 * k))
            alln = pl.count_prime_aps(pw, block, k, "all")
            assert alln == indicator_ap_brute(mask, k)
            assert box <= alln


def test_count_on_progression_block():
    pw = pl.sieve_window(100, 1200)
    mod = pl.build_modulus(3)
    b, _ = pl.select_residue(pw, mod)
    block = pl.align_block(pw, mod, b)
    mask = prime_indicator(pw, block).tolist()
    assert pl.count_prime_aps(pw, block, 3, "all") == indicator_ap_brute(mask, 3)


def test_exclusions_toy():
    pw, block = _toy_block(5, 25)  # window (5, 30]
    count, witnesses = pl.prime_power_exclusions(pw, block, 2)
    pp, high = (m.tolist() for m in prime_power_indicators(pw, block))
    want = exclusion_brute(pp, high, 2, block.N // 6)
    assert witnesses == want
    assert count == len(want)
    # the 2-AP (7, 9) = indices (2, r=2) is in the box and must be present
    assert (2, 2) in witnesses
    # containment bound: one higher power pins (n, r) given its position
    n_high = sum(high)
    assert count <= 2 * block.N * n_high


def test_exclusions_empty_when_no_higher_powers():
    pw, block = _toy_block(113, 4)
    assert pl.prime_power_exclusions(pw, block, 2) == (0, [])


def test_disjoint_union_and_cap():
    pw, block = _toy_block(0, 15)
    k = 3
    R = 4.0
    f = pl.prime_weights(block, pw, R)
    rep = pl.ap_report(pw, block, f, R, k)
    led = rep.lower_bound_ledger
    t_direct = count_prime_power_tuples(pw, block, k)
    assert t_direct == rep.count_prime_aps + rep.count_prime_power_pairs
    assert led["weight_cap_holds"]
    assert led["unweighted_lower_holds"]
    # per-pair cap: every all-prime-power pair's product is below cap_factor
    pp, _ = prime_power_indicators(pw, block)
    cap = rep.cap_factor
    r_box = block.N // (3 * k)
    for r in range(1, r_box + 1):
        for n in range(1, block.N - (k - 1) * r + 1):
            idx = [n - 1 + j * r for j in range(k)]
            if all(pp[i] for i in idx):
                prod = 1.0
                for i in idx:
                    prod *= f[i]
                assert prod <= cap * (1 + 1e-12)


def test_ledger_with_exclusions_zero():
    led = pl.lower_bound_ledger(S=2.0, cap=4.0, m_count=3, e_count=0)
    assert led["count_all_prime_power"] == 3
    assert led["weight_cap_holds"]
    assert led["unweighted_lower_bound"] == pytest.approx(0.5)
    assert led["unweighted_lower_holds"]


def test_report_on_real_window():
    pw = pl.sieve_window(10**4, 4000)
    mod = pl.build_modulus(3)
    b, _ = pl.select_residue(pw, mod)
    block = pl.align_block(pw, mod, b)
    R = float(block.N) ** 0.2
    f = pl.prime_weights(block, pw, R)
    rep = pl.ap_report(pw, block, f, R, 3)
    assert rep.lower_bound_ledger["weight_cap_holds"]
    assert rep.lower_bound_ledger["unweighted_lower_holds"]
    assert rep.lower_bound_ledger["benchmark_ratio"] is not None
    assert not rep.degenerate


def test_cap_factor_guard_on_toy_windows():
    pw, block = _toy_block(0, 15)
    # 3x = 0 would be useless; the cap must dominate log of the largest entry
    c = cap_factor(block, R=4.0, k=3)
    assert c >= (1.0 / math.log(4.0) * math.log(15)) ** 3 * (1 - 1e-12)
