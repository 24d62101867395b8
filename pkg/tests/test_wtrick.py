import math

import numpy as np
import pytest

import primelab as pl
from primelab.errors import DegenerateBlockError, InputError
from primelab.wtrick import pigeonhole_total


def test_build_modulus_examples():
    assert (pl.build_modulus(3, 1).W, pl.build_modulus(3, 1).phi_W) == (6, 2)
    assert (pl.build_modulus(1, 1).W, pl.build_modulus(1, 1).phi_W) == (1, 1)
    m = pl.build_modulus(5, 3)
    assert (m.W, m.phi_W) == (90, 24)


def test_build_modulus_overflow_reports_cutoff():
    with pytest.raises(InputError, match="largest admissible"):
        pl.build_modulus(53, 1)
    # the largest primorial fitting 64 bits is over the primes up to 47
    m = pl.build_modulus(47, 1)
    assert m.W == 614889782588491410


def test_select_residue_w6():
    pw = pl.sieve_window(100, 30)
    mod = pl.build_modulus(3)
    b, score = pl.select_residue(pw, mod)
    assert b == 1
    want = math.fsum(math.log(v) for v in [103, 109, 127, 11])
    assert score == pytest.approx(want, rel=1e-12)


def test_select_residue_w1():
    pw = pl.sieve_window(100, 30)
    mod = pl.build_modulus(1)
    b, score = pl.select_residue(pw, mod)
    assert b == 0
    assert score == pytest.approx(pl.psi_delta(pw), rel=1e-15)


def test_select_residue_no_coprime_mass():
    pw = pl.sieve_window(113, 4)  # (113, 117] holds no prime or higher power
    assert pw.n_primes == 0 and pw.prime_powers == ()
    b, score = pl.select_residue(pw, pl.build_modulus(3))
    assert (b, score) == (1, 0.0)


def test_pigeonhole_inequality():
    rng = np.random.default_rng(11)
    mod = pl.build_modulus(7)
    for _ in range(8):
        x = int(rng.integers(10**4, 10**5))
        H = int(rng.integers(600, 4000))
        pw = pl.sieve_window(x, H)
        b, score = pl.select_residue(pw, mod)
        assert score * mod.phi_W >= pigeonhole_total(pw, mod) * (1 - 1e-12) - 1e-12


def test_align_block_examples():
    pw = pl.sieve_window(100, 40)
    mod = pl.build_modulus(3)
    block = pl.align_block(pw, mod, 5)
    assert (block.m0, block.N) == (16, 6)
    assert block.entry(1) == 101 and block.entry(6) == 131

    pw1 = pl.sieve_window(100, 40)
    mod1 = pl.build_modulus(1)
    block1 = pl.align_block(pw1, mod1, 0)
    assert (block1.m0, block1.N) == (101, 40)
    assert block1.entry(1) == 101 and block1.entry(40) == 140

    with pytest.raises(DegenerateBlockError):
        pl.align_block(pl.sieve_window(100, 5), mod, 5)


def test_alignment_containment():
    pw = pl.sieve_window(3000, 777)
    mod = pl.build_modulus(5)
    b, _ = pl.select_residue(pw, mod)
    block = pl.align_block(pw, mod, b)
    for t in range(1, block.N + 1):
        assert 3000 < block.entry(t) <= 3777


def test_prime_weights_variants():
    pw = pl.sieve_window(100, 40)
    mod = pl.build_modulus(3)
    b, _ = pl.select_residue(pw, mod)
    block = pl.align_block(pw, mod, b)
    R = 10.0
    f4 = pl.prime_weights(block, pw, R)
    ratio = mod.phi_W / mod.W
    # b = 1: entries 103, 109, ..., 121 = 11**2 included with Lambda = log 11
    for t in range(1, block.N + 1):
        v = block.entry(t)
        if v in (103, 109, 127):
            assert f4[t - 1] == pytest.approx(ratio * math.log(v) / math.log(R))
        elif v == 121:
            assert f4[t - 1] == pytest.approx(ratio * math.log(11) / math.log(R))
        else:
            assert f4[t - 1] == 0.0

    f5 = pl.prime_weights(block, pw, R, prime_only=True)
    cap = math.log(R) / (2 * math.log(3 * 100))
    for t in range(1, block.N + 1):
        v = block.entry(t)
        if v in (103, 109, 127):
            assert f5[t - 1] == pytest.approx(cap * ratio * math.log(v))
        else:
            assert f5[t - 1] == 0.0  # the square 121 is excised

    with pytest.raises(InputError):
        pl.prime_weights(block, pw, 1.0)


def test_weight_support_matches_window():
    pw = pl.sieve_window(200, 600)
    mod = pl.build_modulus(5)
    b, _ = pl.select_residue(pw, mod)
    block = pl.align_block(pw, mod, b)
    f = pl.prime_weights(block, pw, 8.0)
    window_vals = set((200 + pw.prime_offsets).tolist())
    window_vals.update(200 + off for off, _, _ in pw.prime_powers)
    for t in range(1, block.N + 1):
        if f[t - 1] > 0:
            assert block.entry(t) in window_vals


def test_density():
    assert pl.density(np.zeros(5)) == 0.0
    assert pl.density(np.ones(7)) == 1.0
    with pytest.raises(InputError):
        pl.density(np.zeros(0))


def test_density_band_desk_scale():
    x = 10**9
    pw = pl.sieve_theta_window(x, 0.6)
    mod = pl.build_modulus(0.5 * math.log(math.log(x)))
    assert mod.W == 1  # the scaled cutoff keeps the modulus trivial here
    b, _ = pl.select_residue(pw, mod)
    block = pl.align_block(pw, mod, b)
    R = float(block.N) ** 0.05
    f = pl.prime_weights(block, pw, R)
    assert 0.5 <= pl.density(f) * math.log(R) <= 1.5
