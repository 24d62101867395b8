"""Primorial moduli, residue selection, block alignment, and prime weights.

The window (x, x+H] is restricted to one reduced residue class b modulo
W = extra_factor * (product of primes <= w_cut) and reindexed onto [1, N]
via t -> W*(m0 + t - 1) + b.  Weights on the block are either the raw
normalized von Mangoldt weight (von Mangoldt / log R, prime powers kept) or
the truncated prime-only variant with the log R / (2 log 3X) cap factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import euler_phi, primes_upto, tree_sum, U64_MAX
from .errors import DegenerateBlockError, InputError
from .windows import PrimeWindow, Window

DEFAULT_W_CUT = 7.0


@dataclass(frozen=True)
class WModulus:
    """W = extra_factor * primorial(w_cut), with its totient."""

    w_cut: float
    extra_factor: int
    W: int
    phi_W: int


@dataclass(frozen=True)
class Block:
    """Reindexing of a window onto [1, N] along the progression W*m + b."""

    window: Window
    modulus: WModulus
    b: int
    m0: int
    N: int

    def entry(self, t: int) -> int:
        """The integer W*(m0 + t - 1) + b represented by index t."""
        return self.modulus.W * (self.m0 + t - 1) + self.b

    def entries(self) -> np.ndarray:
        """All block entries as an int64 array (t = 1..N)."""
        W = self.modulus.W
        return W * self.m0 + self.b + W * np.arange(self.N, dtype=np.int64)

    def offset_to_index(self, offset: int) -> int | None:
        """Block index t for a window offset, or None if off-progression."""
        o1 = self.modulus.W * self.m0 + self.b - self.window.x
        d = offset - o1
        if d < 0 or d % self.modulus.W != 0:
            return None
        t = d // self.modulus.W + 1
        return int(t) if 1 <= t <= self.N else None

    def offsets_to_indices(self, offsets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized offset -> index map: (selector mask, 0-based indices)."""
        W = self.modulus.W
        o1 = W * self.m0 + self.b - self.window.x
        d = offsets - o1
        ok = (d >= 0) & (d % W == 0)
        t0 = np.where(ok, d // W, 0)
        ok &= t0 < self.N
        return ok, t0[ok]


def build_modulus(w_cut: float, extra_factor: int = 1) -> WModulus:
    """Exact primorial modulus times extra_factor, with phi(W)."""
    if w_cut < 0:
        raise InputError("w_cut must be nonnegative")
    if extra_factor < 1:
        raise InputError("extra_factor must be >= 1")
    W = extra_factor
    largest_ok = 0.0
    for p in primes_upto(int(math.floor(w_cut))):
        if W * int(p) > U64_MAX:
            raise InputError(
                f"W overflows 64 bits at prime {int(p)}; "
                f"largest admissible w_cut for extra_factor={extra_factor} "
                f"is {largest_ok}"
            )
        W *= int(p)
        largest_ok = float(p)
    if W > U64_MAX:
        raise InputError("W overflows 64 bits")
    return WModulus(w_cut=w_cut, extra_factor=extra_factor, W=W, phi_W=euler_phi(W))


def select_residue(pw: PrimeWindow, mod: WModulus) -> tuple[int, float]:
    """Reduced residue b maximizing the per-class von Mangoldt mass.

    Returns (b, score) where score = psi(x+H; W, b) - psi(x; W, b).  Ties are
    broken toward the smallest b.  The score satisfies the pigeonhole bound
    score * phi(W) >= sum of all reduced-class scores.
    """
    W = mod.W
    if W == 1:
        from .windows import psi_delta

        return 0, psi_delta(pw)
    scores: dict[int, list[float]] = {}
    values = pw.prime_values
    residues = values % W
    logs = pw.prime_logs
    for r, lg in zip(residues.tolist(), logs.tolist()):
        scores.setdefault(int(r), []).append(lg)
    for (off, base, _e) in pw.prime_powers:
        r = int((pw.window.x + off) % W)
        scores.setdefault(r, []).append(math.log(base))
    best_b, best_score = None, -1.0
    for r in sorted(scores):
        if math.gcd(r, W) != 1:
            continue
        s = tree_sum(scores[r])
        if s > best_score:
            best_b, best_score = r, s
    if best_b is None:
        return 1, 0.0
    return best_b, best_score


def align_block(pw: PrimeWindow, mod: WModulus, b: int) -> Block:
    """Block with m0 = floor((x-b)/W) + 1 and N = floor(H/W).

    Raises DegenerateBlockError when the window is shorter than W, and
    verifies containment of the first and last block entries in the window.
    """
    W = mod.W
    if W > 1 and math.gcd(b, W) != 1:
        raise InputError(f"residue b={b} is not coprime to W={W}")
    if not 0 <= b < max(W, 1):
        raise InputError(f"residue b={b} out of range for W={W}")
    x, H = pw.window.x, pw.window.H
    N = H // W
    if N == 0:
        raise DegenerateBlockError(f"window of length {H} is shorter than W={W}")
    m0 = (x - b) // W + 1
    block = Block(window=pw.window, modulus=mod, b=b, m0=m0, N=N)
    for t in (1, N):
        v = block.entry(t)
        if not x < v <= x + H:
            raise InputError(f"alignment violated at t={t}: {v} outside ({x}, {x + H}]")
    return block


def prime_weights(block: Block, pw: PrimeWindow, R: float,
                  prime_only: bool = False) -> np.ndarray:
    """Weight vector f[1..N] on the block (returned 0-indexed).

    prime_only=False: f(t) = (phi(W)/W) * Lambda(entry) / log R, prime powers
    included.  prime_only=True: the truncated prime weight
    f(t) = (log R / (2 log 3x)) * (phi(W)/W) * log(entry) at primes only.
    """
    if R <= 1:
        raise InputError(f"sieve level R must exceed 1, got {R}")
    if block.window != pw.window:
        raise InputError("block and prime window describe different intervals")
    mod = block.modulus
    ratio = mod.phi_W / mod.W
    f = np.zeros(block.N, dtype=np.float64)
    ok, idx = block.offsets_to_indices(pw.prime_offsets)
    if prime_only:
        x = block.window.x
        if x < 1:
            raise InputError("prime-only weights need x >= 1 for the cap factor")
        cap = math.log(R) / (2.0 * math.log(3.0 * x))
        f[idx] = cap * ratio * pw.prime_logs[ok]
    else:
        log_r = math.log(R)
        f[idx] = ratio * pw.prime_logs[ok] / log_r
        for (off, base, _e) in pw.prime_powers:
            t = block.offset_to_index(int(off))
            if t is not None:
                f[t - 1] = ratio * math.log(base) / log_r
    return f


def density(f: np.ndarray) -> float:
    """Arithmetic mean of a weight vector."""
    if len(f) == 0:
        raise InputError("density of an empty weight vector")
    return tree_sum(f) / len(f)


def pigeonhole_total(pw: PrimeWindow, mod: WModulus) -> float:
    """Sum of per-class psi deltas over all reduced residues mod W."""
    W = mod.W
    if W == 1:
        from .windows import psi_delta

        return psi_delta(pw)
    parts = []
    values = pw.prime_values
    residues = values % W
    keep = np.gcd(residues, W) == 1
    parts.extend(pw.prime_logs[keep].tolist())
    for (off, base, _e) in pw.prime_powers:
        if math.gcd(int((pw.window.x + off) % W), W) == 1:
            parts.append(math.log(base))
    return tree_sum(parts)
