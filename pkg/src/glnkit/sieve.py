"""Primes, the divisor-ratio function eta, and prime-density scans.

Density scans work over the window ``[N, 2N]``. Prime lists come from a
segmented sieve of Eratosthenes and each window prime is confirmed by a
deterministic Miller–Rabin test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class PreconditionViolation(ValueError):
    """Raised when a scan is requested outside the range where its density bound applies."""


# ---------------------------------------------------------------------------
# Primes


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller–Rabin, exact for ``n < 3.3e24``."""
    n = int(n)
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=8)
def _small_primes(limit: int) -> np.ndarray:
    mark = np.ones(limit + 1, dtype=bool)
    mark[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mark[p]:
            mark[p * p::p] = False
    return np.flatnonzero(mark)


def primes_up_to(limit: int) -> np.ndarray:
    """All primes ``<= limit`` (sieve of Eratosthenes)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    return _small_primes(int(limit)).astype(np.int64)


def primes_in_range(lo: int, hi: int, segment: int = 1 << 18) -> np.ndarray:
    """Primes in ``[lo, hi]`` by a segmented sieve."""
    lo = max(int(lo), 2)
    hi = int(hi)
    if hi < lo:
        return np.zeros(0, dtype=np.int64)
    base = primes_up_to(math.isqrt(hi))
    out = []
    for start in range(lo, hi + 1, segment):
        stop = min(start + segment - 1, hi)
        mark = np.ones(stop - start + 1, dtype=bool)
        for p in base:
            p = int(p)
            first = max(p * p, (start + p - 1) // p * p)
            if first > stop:
                continue
            mark[first - start::p] = False
        out.append(np.flatnonzero(mark) + start)
    return np.concatenate(out).astype(np.int64)


@dataclass(frozen=True)
class PrimeWindow:
    """The primes in ``[N, 2N]``."""

    N: int
    primes: np.ndarray

    @classmethod
    def build(cls, N: int, confirm: bool = True) -> "PrimeWindow":
        if N < 2:
            raise ValueError("window start must be at least 2")
        primes = primes_in_range(N, 2 * N)
        if confirm and not all(is_prime(int(p)) for p in primes):
            raise AssertionError("segmented sieve produced a composite")
        return cls(int(N), primes)

    @property
    def count(self) -> int:
        return int(self.primes.size)


# ---------------------------------------------------------------------------
# eta


def factorize(m: int) -> dict[int, int]:
    """Prime factorisation by trial division."""
    m = int(m)
    if m < 1:
        raise ValueError("m must be a positive integer")
    out: dict[int, int] = {}
    d = 2
    while d * d <= m:
        while m % d == 0:
            out[d] = out.get(d, 0) + 1
            m //= d
        d += 1 if d == 2 else 2
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


def divisors(m: int) -> list[int]:
    divs = [1]
    for p, e in factorize(m).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def eta(s: complex, m: int):
    """``eta_s(m) = sum_{ab = m} (a / b)^s``.

    Returns the integer divisor count when ``s == 0``.
    """
    divs = divisors(m)
    if s == 0:
        return len(divs)
    s = complex(s)
    return complex(sum((d / (m // d)) ** s for d in divs))


def eta_at_primes(s: complex, primes) -> np.ndarray:
    """``eta_s(p) = p^s + p^-s`` for an array of primes."""
    p = np.asarray(primes, dtype=float)
    return p ** complex(s) + p ** (-complex(s))


# ---------------------------------------------------------------------------
# Density scans


@dataclass(frozen=True)
class DensityReport:
    """Outcome of a prime-density scan over ``[N, 2N]``.

    ``fraction`` is ``count / total`` unless the report says otherwise in
    ``normalisation``.
    """

    N: int
    count: int
    total: int
    fraction: float
    threshold: float
    normalisation: str = "count / primes in window"

    @property
    def passed(self) -> bool:
        return self.fraction >= self.threshold

    def as_row(self) -> dict:
        return {"N": self.N, "count": self.count, "fraction": self.fraction,
                "threshold": self.threshold, "pass": self.passed}


def eta_threshold(n: int) -> float:
    """The lower bound ``1 / (2000^2 n^4)`` for ``|eta_{nit}(p)|``."""
    return 1.0 / (2000.0**2 * n**4)


def _eta_mask(t: float, n: int, primes: np.ndarray, delta: float) -> np.ndarray:
    # |eta_{nit}(p)| = 2 |cos(n t log p)|
    return 2 * np.abs(np.cos(n * t * np.log(primes.astype(float)))) >= delta


def _check_window(t: float, N: int):
    if t != 0 and not N >= t * t >= 1:
        raise PreconditionViolation("eta density scan requires N >= t^2 >= 1")


def hecke_at_primes(fd, primes: np.ndarray) -> np.ndarray:
    """``lambda(p) = sum_i alpha_{p,i}`` from the form's Satake data."""
    return np.sum(fd.satake_at(primes), axis=1)


def good_prime_density(fd, N: int, window: PrimeWindow | None = None) -> DensityReport:
    """Primes in ``[N, 2N]`` with ``|lambda(p)| >= 1/100``, reported as ``count log N / N``.

    The threshold is ``1 / (10 n^2)``. Raises ``ValueError`` when some
    ``|lambda(p)| > n`` (the Ramanujan bound fails, so the data are not
    tempered).
    """
    window = window or PrimeWindow.build(N)
    lam = hecke_at_primes(fd, window.primes)
    if np.any(np.abs(lam) > fd.n * (1 + 1e-12)):
        raise ValueError("Hecke data violate the Ramanujan bound |lambda(p)| <= n")
    count = int(np.sum(np.abs(lam) >= 0.01))
    return DensityReport(N, count, window.count, count * math.log(N) / N, 1 / (10 * fd.n**2),
                         "count * log N / N")


def eta_lower_density(t: float, n: int, N: int, window: PrimeWindow | None = None,
                      delta: float | None = None) -> DensityReport:
    """Fraction of primes in ``[N, 2N]`` with ``|eta_{nit}(p)| >= delta``.

    ``delta`` defaults to ``1 / (2000^2 n^4)``; the threshold is ``1 - 1 / (20 n^2)``.
    ``t = 0`` is allowed (every prime passes since ``eta_0(p) = 2``).
    """
    _check_window(t, N)
    window = window or PrimeWindow.build(N)
    delta = eta_threshold(n) if delta is None else delta
    count = int(np.sum(_eta_mask(t, n, window.primes, delta)))
    return DensityReport(N, count, window.count, count / window.count, 1 - 1 / (20 * n**2))


def eta_failures(t: float, n: int, N: int, delta: float, window: PrimeWindow | None = None):
    """Primes failing the eta bound and the distance of ``log p`` to the nearest ``(2m+1) pi / (2nt)``."""
    if t == 0:
        raise ValueError("eta_0(p) = 2 never fails")
    window = window or PrimeWindow.build(N)
    bad = window.primes[~_eta_mask(t, n, window.primes, delta)]
    spacing = math.pi / (n * abs(t))
    logs = np.log(bad.astype(float))
    centres = (np.round(logs / spacing - 0.5) + 0.5) * spacing
    return bad, np.abs(logs - centres)


def overlap_density(fd, t: float, n: int, N: int, window: PrimeWindow | None = None) -> DensityReport:
    """Fraction of primes in ``[N, 2N]`` passing both ``|lambda(p)| >= 1/100`` and the eta bound.

    The threshold is ``1 / (20 n^2)``.
    """
    _check_window(t, N)
    window = window or PrimeWindow.build(N)
    lam = hecke_at_primes(fd, window.primes)
    both = (np.abs(lam) >= 0.01) & _eta_mask(t, n, window.primes, eta_threshold(n))
    count = int(np.sum(both))
    return DensityReport(N, count, window.count, count / window.count, 1 / (20 * n**2))
