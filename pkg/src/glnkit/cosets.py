"""Coset machinery for parabolic quotients of SL(n, Z).

Two quotients appear:

* ``P~_{n,m}(Z) \\ SL(n, Z)``, where ``P~_{n,m}`` has an ``SL(n-m, Z)`` block
  in the top-left corner, arbitrary entries to its right and a unipotent
  upper-triangular ``m x m`` block in the bottom-right corner. A coset is
  identified by the minors of the bottom ``k`` rows for ``k = 1..m``.
* ``(P_{n-m,m}(Z) cap SL(n, Z)) \\ SL(n, Z)``, the block parabolic. A coset
  is identified by the ``m x m`` minors of the bottom ``m`` rows up to sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Sequence

import numpy as np

from .matrix_core import (
    IwasawaCoords,
    bottom_row_minors,
    compound_matrix,
    exact_det,
    height_exponents,
    iwasawa_decompose,
    wedge_norm_sq,
)

DEFAULT_CAP = 10**7


class NotUnimodularError(ValueError):
    """Raised when a matrix is not in SL(n, Z)."""


class EnumerationTooLargeError(RuntimeError):
    """Raised when an enumeration would exceed the candidate cap."""


class PreconditionError(ValueError):
    """Raised when an input violates the hypothesis a check relies on."""


def _as_int_rows(a) -> list[list[int]]:
    arr = np.asarray(a)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("matrix must be square")
    rows = arr.tolist()
    if not all(float(v).is_integer() for r in rows for v in r):
        raise NotUnimodularError("matrix has non-integer entries")
    return [[int(v) for v in r] for r in rows]


def check_unimodular(a) -> list[list[int]]:
    """Return ``a`` as nested int lists after confirming ``det a = 1`` exactly."""
    rows = _as_int_rows(a)
    det = exact_det(rows)
    if det != 1:
        raise NotUnimodularError(f"determinant is {det}, expected 1")
    return rows


# ---------------------------------------------------------------------------
# Keys and membership


@dataclass(frozen=True)
class CosetKey:
    """Minor signature: for ``k = 1..m`` the ``k x k`` minors of the bottom ``k`` rows."""

    m: int
    minors: tuple

    def level(self, k: int) -> tuple:
        return self.minors[k - 1]


def coset_key(a, m: int) -> CosetKey:
    """Minor signature of ``a`` in ``SL(n, Z)`` identifying its ``P~_{n,m}`` coset."""
    rows = check_unimodular(a)
    n = len(rows)
    if not 1 <= m < n:
        raise ValueError(f"depth m must satisfy 1 <= m < {n}")
    levels = tuple(tuple(int(v) for v in bottom_row_minors(np.array(rows, dtype=object), k)) for k in range(1, m + 1))
    return CosetKey(m, levels)


def same_coset(a, a2, m: int) -> bool:
    """True when ``a = X a2`` for some ``X`` in ``P~_{n,m}(Z)``, decided by minor signatures."""
    return coset_key(a, m) == coset_key(a2, m)


def integer_inverse(a) -> list[list[int]]:
    """Exact inverse of a unimodular integer matrix via its adjugate."""
    rows = check_unimodular(a)
    n = len(rows)
    inv = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            sub = [r[:j] + r[j + 1:] for k, r in enumerate(rows) if k != i]
            inv[j][i] = (-1) ** (i + j) * exact_det(sub)
    return inv


def in_mirabolic_parabolic(x, m: int) -> bool:
    """Exact membership test for ``P~_{n,m}(Z)``.

    The bottom ``m`` rows must vanish left of the last ``m`` columns and the
    bottom-right ``m x m`` block must be unipotent upper triangular. The
    determinant must be 1, which then forces the top-left block into SL.
    """
    rows = _as_int_rows(x)
    n = len(rows)
    if exact_det(rows) != 1:
        return False
    for i in range(n - m, n):
        for j in range(n):
            v = rows[i][j]
            if j < i and v != 0:
                return False
            if j == i and v != 1:
                return False
    return True


def membership_oracle(a, a2, m: int) -> bool:
    """Decide ``a a2^{-1}`` in ``P~_{n,m}(Z)`` by exact matrix arithmetic."""
    prod_ = np.array(_as_int_rows(a), dtype=object) @ np.array(integer_inverse(a2), dtype=object)
    return in_mirabolic_parabolic(prod_, m)


# ---------------------------------------------------------------------------
# Random pools


def _elementary(n: int, i: int, j: int, c: int) -> np.ndarray:
    e = np.eye(n, dtype=np.int64)
    e[i, j] = c
    return e


def random_sl(rng: np.random.Generator, n: int, entry_bound: int = 3, word_length: int = 12) -> np.ndarray:
    """Random ``SL(n, Z)`` matrix as a product of elementary matrices, entries bounded."""
    while True:
        g = np.eye(n, dtype=np.int64)
        for _ in range(word_length):
            i, j = rng.choice(n, size=2, replace=False)
            c = int(rng.choice([-1, 1]))
            h = _elementary(n, i, j, c) @ g if rng.random() < 0.5 else g @ _elementary(n, i, j, c)
            if np.max(np.abs(h)) > entry_bound:
                continue
            g = h
        if not np.array_equal(g, np.eye(n, dtype=np.int64)):
            return g


def sl_pool(rng: np.random.Generator, n: int, size: int, entry_bound: int = 3) -> list[np.ndarray]:
    """Deduplicated pool of random ``SL(n, Z)`` matrices."""
    seen, pool = set(), []
    while len(pool) < size:
        g = random_sl(rng, n, entry_bound)
        key = g.tobytes()
        if key not in seen:
            seen.add(key)
            pool.append(g)
    return pool


def random_mirabolic_parabolic(rng: np.random.Generator, n: int, m: int, entry_bound: int = 5) -> np.ndarray:
    """Random element of ``P~_{n,m}(Z)`` with entries of the free part bounded."""
    x = np.zeros((n, n), dtype=np.int64)
    if n - m > 1:
        x[: n - m, : n - m] = random_sl(rng, n - m, entry_bound, word_length=8)
    else:
        x[0, 0] = 1
    x[: n - m, n - m:] = rng.integers(-entry_bound, entry_bound + 1, size=(n - m, m))
    for i in range(n - m, n):
        x[i, i] = 1
        x[i, i + 1:] = rng.integers(-entry_bound, entry_bound + 1, size=n - i - 1)
    return x


# ---------------------------------------------------------------------------
# Completion of primitive blocks


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def complete_to_sl(block) -> np.ndarray:
    """Extend a primitive ``m x n`` integer block to a matrix in ``SL(n, Z)``.

    The block becomes the bottom ``m`` rows. Raises ``ValueError`` if the
    ``m x m`` minors of the block are not coprime.
    """
    b = [[int(v) for v in r] for r in np.asarray(block).tolist()]
    m, n = len(b), len(b[0])
    if m >= n:
        raise ValueError("block must have fewer rows than columns")
    minors = {cols: exact_det([[r[c] for c in cols] for r in b]) for cols in combinations(range(n), m)}
    if math.gcd(*minors.values()) != 1:
        raise ValueError("block is not primitive; it cannot be completed to SL(n, Z)")

    unit = next((cols for cols, v in minors.items() if abs(v) == 1), None)
    if unit is not None:
        top = [[1 if j == c else 0 for j in range(n)] for c in range(n) if c not in unit]
    else:
        top = _complete_by_column_reduction(b)
    full = top + b
    if exact_det(full) == -1:
        full[0] = [-v for v in full[0]]
    return np.array(full, dtype=np.int64)


def _complete_by_column_reduction(b: list[list[int]]) -> list[list[int]]:
    m, n = len(b), len(b[0])
    work = [r[:] for r in b]
    u = [[int(i == j) for j in range(n)] for i in range(n)]  # work = b @ u

    def col_op(j: int, k: int, p: int, q: int, r: int, s: int):
        # columns (j, k) <- (p*col_j + r*col_k, q*col_j + s*col_k)
        for mat in (work, u):
            for row in mat:
                cj, ck = row[j], row[k]
                row[j], row[k] = p * cj + r * ck, q * cj + s * ck

    for i in range(m - 1, -1, -1):
        target = n - m + i
        for j in range(target):
            a, c = work[i][target], work[i][j]
            if c == 0:
                continue
            g, x, y = _ext_gcd(a, c)
            # new target = x*a + y*c = g ; new j = -(c/g)*a + (a/g)*c = 0
            col_op(target, j, x, -c // g, y, a // g)
    # b @ u = [0 | T], so b = T @ (bottom rows of u^{-1}); every column step has det 1
    return integer_inverse(u)[: n - m]


# ---------------------------------------------------------------------------
# Enumeration


@dataclass(frozen=True)
class LatticeEnumSpec:
    """Parameters for enumerating coset representatives.

    Parameters
    ----------
    n : int
        Matrix dimension.
    m : int
        Depth: number of bottom rows that determine the coset.
    entry_bound : int
        Maximum absolute value of the entries of those bottom rows.
    height_bound : float, optional
        Keep only cosets whose top-level minor vector has squared norm at
        most this value (equivalently ``1 / h(gamma) <= height_bound`` at
        the identity point).
    block : bool
        Key on the ``m x m`` minors only (block parabolic quotient) instead
        of the full minor flag of ``P~_{n,m}``.
    identify_sign : bool
        Normalise each minor level so its first nonzero entry is positive.
    cap : int
        Maximum number of candidate blocks to scan.
    """

    n: int
    m: int
    entry_bound: int
    height_bound: float | None = None
    block: bool = False
    identify_sign: bool = True
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.entry_bound < 1:
            raise ValueError("entry_bound must be at least 1")
        if not 1 <= self.m < self.n:
            raise ValueError("need 1 <= m < n")

    @property
    def candidate_count(self) -> int:
        return (2 * self.entry_bound + 1) ** (self.n * self.m)


def _level_minors(blocks: np.ndarray, k: int) -> np.ndarray:
    """``k x k`` minors of the bottom ``k`` rows for a stack of integer blocks."""
    rows = blocks[:, -k:, :]
    cols = list(combinations(range(blocks.shape[2]), k))
    if k == 1:
        return rows[:, 0, :].astype(np.int64)
    if k == 2:
        return np.stack([rows[:, 0, a] * rows[:, 1, b] - rows[:, 0, b] * rows[:, 1, a] for a, b in cols], axis=1).astype(np.int64)
    subs = np.stack([rows[:, :, list(c)] for c in cols], axis=1).astype(float)
    return np.rint(np.linalg.det(subs)).astype(np.int64)


def _first_nonzero_sign(v: np.ndarray) -> np.ndarray:
    nz = v != 0
    first = np.argmax(nz, axis=1)
    return np.sign(v[np.arange(v.shape[0]), first])


def enumerate_coset_keys(spec: LatticeEnumSpec) -> tuple[np.ndarray, np.ndarray]:
    """Distinct coset keys and one bottom block per key, sorted by key.

    Returns
    -------
    keys : ndarray of int64, shape (K, key_length)
    blocks : ndarray of int64, shape (K, m, n)
    """
    if spec.candidate_count > spec.cap:
        raise EnumerationTooLargeError(
            f"{spec.candidate_count} candidate blocks exceed the cap of {spec.cap}"
        )
    b = spec.entry_bound
    rows = np.array(list(product(range(-b, b + 1), repeat=spec.n)), dtype=np.int64)
    idx = np.indices((rows.shape[0],) * spec.m).reshape(spec.m, -1).T
    blocks = rows[idx]  # (C, m, n), top row of the block first

    top = _level_minors(blocks, spec.m)
    primitive = np.gcd.reduce(np.abs(top), axis=1) == 1
    blocks = blocks[primitive]

    levels = [spec.m] if spec.block else list(range(1, spec.m + 1))
    minors = [_level_minors(blocks, k) for k in levels]
    if spec.identify_sign:
        if spec.block:
            s = _first_nonzero_sign(minors[0])
            blocks = blocks.copy()
            blocks[:, 0, :] *= s[:, None]
            minors[0] = minors[0] * s[:, None]
        else:
            blocks = blocks.copy()
            for k in range(1, spec.m + 1):
                s = _first_nonzero_sign(minors[k - 1])
                blocks[:, spec.m - k, :] *= s[:, None]
                for kk in range(k, spec.m + 1):
                    minors[kk - 1] = minors[kk - 1] * s[:, None]
    keys = np.concatenate(minors, axis=1)

    if spec.height_bound is not None:
        keep = np.sum(minors[-1].astype(float) ** 2, axis=1) <= spec.height_bound
        keys, blocks = keys[keep], blocks[keep]

    # prefer the block with the smallest entries so unit blocks represent their own key
    priority = np.abs(blocks).sum(axis=(1, 2))
    first = _best_of_each_row(keys, priority)
    return keys[first], blocks[first]


def _best_of_each_row(keys: np.ndarray, priority: np.ndarray) -> np.ndarray:
    """For each distinct row, the index with the lowest priority (earliest on ties), ordered by row."""
    if keys.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    lo = int(keys.min())
    base = int(keys.max()) - lo + 1
    if base ** keys.shape[1] < 2**62:
        code = np.zeros(keys.shape[0], dtype=np.int64)
        for col in range(keys.shape[1]):
            code = code * base + (keys[:, col] - lo)
        order = np.lexsort((priority, code))
        code = code[order]
    else:
        order = np.lexsort((priority,) + tuple(keys[:, c] for c in range(keys.shape[1] - 1, -1, -1)))
        code = keys[order]
    new = np.ones(len(order), dtype=bool)
    new[1:] = np.any((code[1:] != code[:-1]).reshape(len(order) - 1, -1), axis=1)
    return order[new]


def enumerate_coset_reps(spec: LatticeEnumSpec) -> list[np.ndarray]:
    """One ``SL(n, Z)`` representative per coset key, sorted by key.

    Cosets are those containing a matrix whose bottom ``m`` rows have
    entries bounded by ``spec.entry_bound``; the remaining rows of each
    representative come from :func:`complete_to_sl`.
    """
    _, blocks = enumerate_coset_keys(spec)
    return [complete_to_sl(blk) for blk in blocks]


# ---------------------------------------------------------------------------
# Height contraction


@dataclass(frozen=True)
class HeightReport:
    """Outcome of a height-contraction scan over coset representatives."""

    count: int
    max_ratio: float
    worst_index: int
    violations: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


def plucker_vectors(reps, n: int) -> np.ndarray:
    """``n x n`` minors of the bottom ``n`` rows of each ``2n x 2n`` representative."""
    arr = np.asarray(reps, dtype=np.int64)
    if arr.ndim == 2:
        arr = arr[None]
    return _level_minors(arr[:, -n:, :], n)


def verify_height_contraction(z: IwasawaCoords, reps, tolerance: float = 1e-10) -> HeightReport:
    """Scan ``h(gamma z) / h(z)`` over representatives ``gamma`` of the block parabolic quotient.

    ``reps`` is a stack of ``SL(2n, Z)`` matrices or a precomputed array of
    Plücker vectors (shape ``(K, C(2n, n))``). The ratio equals the squared
    wedge norm of the bottom ``n`` rows of ``z`` over that of ``gamma z``;
    the second is evaluated through the ``n``-th compound of ``z``.
    """
    if z.k % 2:
        raise ValueError("height contraction is stated on GL(2n)")
    if np.any(z.y < 1):
        raise PreconditionError("requires y_i >= 1 for all i (height contraction hypothesis)")
    n = z.k // 2
    arr = np.asarray(reps)
    if arr.ndim == 2 and arr.shape[1] == math.comb(2 * n, n) and arr.shape[1] != 2 * n:
        pl = arr.astype(float)
    else:
        pl = plucker_vectors(arr, n).astype(float)
    zm = z.matrix()
    cz = compound_matrix(zm, n)
    base = wedge_norm_sq(zm, n - 1)
    moved = np.sum((pl @ cz) ** 2, axis=1)
    ratios = base / moved
    worst = int(np.argmax(ratios))
    violations = int(np.sum(ratios > 1 + tolerance))
    return HeightReport(len(ratios), float(ratios[worst]), worst, violations, tolerance)


def height_ratio_direct(z: IwasawaCoords, gamma) -> float:
    """``h(gamma z) / h(z)`` by re-decomposing ``gamma z``; slow reference route."""
    moved = iwasawa_decompose(np.asarray(gamma, dtype=float) @ z.matrix())
    e = height_exponents(z.k)
    return float(np.exp(np.sum(e * (np.log(moved.y) - np.log(z.y)))))


def embedded_max_y(gamma, z: IwasawaCoords) -> tuple[float, float]:
    """For ``gamma' = diag(gamma, 1)`` return ``max y(gamma' z)`` and ``(max y(z))^{2/((k-1)k)}``.

    When ``min y(z) >= 1`` the first value dominates the second.
    """
    g = np.asarray(gamma, dtype=float)
    k = z.k
    if g.shape != (k - 1, k - 1):
        raise ValueError(f"gamma must be {(k - 1)}x{(k - 1)}")
    emb = np.eye(k)
    emb[: k - 1, : k - 1] = g
    moved = iwasawa_decompose(emb @ z.matrix())
    return float(np.max(moved.y)), float(np.max(z.y) ** (2.0 / ((k - 1) * k)))


def sl_matrices_bounded(n: int, bound: int) -> list[np.ndarray]:
    """Every ``SL(n, Z)`` matrix with entries in ``[-bound, bound]`` (brute force, small n)."""
    vals = range(-bound, bound + 1)
    count = (2 * bound + 1) ** (n * n)
    if count > DEFAULT_CAP:
        raise EnumerationTooLargeError(f"{count} matrices exceed the cap")
    grid = np.array(list(product(vals, repeat=n * n)), dtype=np.int64).reshape(-1, n, n)
    dets = np.rint(np.linalg.det(grid.astype(float))).astype(np.int64)
    return list(grid[dets == 1])

