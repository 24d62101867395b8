"""Segmented sieving of short windows (x, x+H] and Chebyshev-type window sums.

A window is sieved once into an immutable `PrimeWindow` carrying the prime
offsets and every higher prime power p^m (m >= 2) inside the interval.  All
primality is established by the sieve itself (base primes up to sqrt(x+H));
no probabilistic tests are involved, so repeated runs are bitwise identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arith import floor_power, iroot, primes_upto, tree_sum, U64_MAX
from .errors import InputError

DEFAULT_SEGMENT = 1 << 20


@dataclass(frozen=True)
class Window:
    """Half-open interval (x, x+H] with an optional defining exponent."""

    x: int
    H: int
    theta_exponent: float | None = None

    def __post_init__(self):
        if self.x < 0 or self.H < 0:
            raise InputError(f"window requires x >= 0 and H >= 0, got ({self.x}, {self.H})")
        if self.x + self.H > U64_MAX:
            raise InputError(f"window end {self.x + self.H} overflows the 64-bit range")

    @classmethod
    def from_theta(cls, x: int, theta: float) -> "Window":
        """Window of length floor(x**theta), computed exactly."""
        return cls(x, floor_power(x, theta), theta)

    @property
    def end(self) -> int:
        return self.x + self.H


@dataclass(frozen=True)
class PrimeWindow:
    """Sieved contents of a window: prime offsets and higher prime powers.

    `prime_offsets[i] = o` means x + o is prime, 1 <= o <= H.
    `prime_powers` lists (offset, base_prime, exponent >= 2), sorted by offset.
    """

    window: Window
    prime_offsets: np.ndarray
    prime_powers: tuple[tuple[int, int, int], ...]
    _prime_logs: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        self.prime_offsets.setflags(write=False)
        if self._prime_logs is None:
            logs = np.log(self.prime_values.astype(np.float64))
            logs.setflags(write=False)
            object.__setattr__(self, "_prime_logs", logs)

    @property
    def prime_values(self) -> np.ndarray:
        return self.window.x + self.prime_offsets

    @property
    def prime_logs(self) -> np.ndarray:
        return self._prime_logs

    @property
    def n_primes(self) -> int:
        return int(self.prime_offsets.size)

    def prime_power_values(self) -> list[int]:
        return [self.window.x + off for off, _, _ in self.prime_powers]

    def prime_power_logs(self) -> list[float]:
        return [math.log(p) for _, p, _ in self.prime_powers]


def sieve_window(x: int, H: int, theta: float | None = None,
                 segment_size: int = DEFAULT_SEGMENT) -> PrimeWindow:
    """Sieve the interval (x, x+H] into a PrimeWindow.

    Segmented, odd-only masks; memory is O(segment_size) plus the base primes
    up to sqrt(x+H).  H = 0 yields an empty PrimeWindow.
    """
    win = Window(x, H, theta)
    if H == 0:
        return PrimeWindow(win, np.zeros(0, dtype=np.int64), ())
    lo, hi = x + 1, x + H
    base = primes_upto(math.isqrt(hi))
    odd_base = [int(p) for p in base if p > 2]

    offsets: list[np.ndarray] = []
    if lo <= 2 <= hi:
        offsets.append(np.array([2 - x], dtype=np.int64))

    seg_lo = lo if lo % 2 == 1 else lo + 1
    while seg_lo <= hi:
        seg_hi = min(seg_lo + 2 * (segment_size - 1), hi)
        if seg_hi % 2 == 0:
            seg_hi -= 1
        count = (seg_hi - seg_lo) // 2 + 1
        mask = np.ones(count, dtype=bool)
        if seg_lo == 1:
            mask[0] = False
        for p in odd_base:
            start = max(p * p, ((seg_lo + p - 1) // p) * p)
            if start % 2 == 0:
                start += p
            if start > seg_hi:
                continue
            mask[(start - seg_lo) // 2 :: p] = False
        vals = seg_lo + 2 * np.nonzero(mask)[0].astype(np.int64)
        offsets.append(vals - x)
        seg_lo = seg_hi + 2

    prime_offsets = (
        np.concatenate(offsets) if offsets else np.zeros(0, dtype=np.int64)
    )

    powers: list[tuple[int, int, int]] = []
    e = 2
    while True:
        r_hi = iroot(hi, e)
        if r_hi < 2:
            break
        r_lo = iroot(x, e)
        for p in base[(base > r_lo) & (base <= r_hi)]:
            v = int(p) ** e
            powers.append((v - x, int(p), e))
        e += 1
    powers.sort()

    return PrimeWindow(win, prime_offsets, tuple(powers))


def sieve_theta_window(x: int, theta: float,
                       segment_size: int = DEFAULT_SEGMENT) -> PrimeWindow:
    """Sieve (x, x + floor(x**theta)]."""
    return sieve_window(x, floor_power(x, theta), theta, segment_size)


def psi_delta(pw: PrimeWindow) -> float:
    """psi(x+H) - psi(x): sum of log p over primes and higher prime powers."""
    return tree_sum(pw.prime_logs) + tree_sum(pw.prime_power_logs())


def theta_delta(pw: PrimeWindow) -> float:
    """theta(x+H) - theta(x): sum of log p over primes in the window."""
    return tree_sum(pw.prime_logs)


def theta_delta_progression(pw: PrimeWindow, q: int, a: int) -> float:
    """Sum of log p over window primes p = a (mod q)."""
    _check_progression(q, a)
    values = pw.prime_values
    mask = values % q == a
    return tree_sum(pw.prime_logs[mask])


def count_primes_progression(pw: PrimeWindow, q: int, a: int) -> int:
    """Number of window primes p = a (mod q)."""
    _check_progression(q, a)
    return int(np.count_nonzero(pw.prime_values % q == a))


def _check_progression(q: int, a: int) -> None:
    if q < 1:
        raise InputError(f"modulus must be >= 1, got {q}")
    if not 0 <= a < q:
        raise InputError(f"residue {a} out of range for modulus {q}")
