"""Linear algebra on GL(k): Iwasawa coordinates, minors, wedge norms, I_nu and heights.

Matrices act on row vectors, so ``z = x @ y`` with ``x`` unipotent upper
triangular and ``y`` the positive diagonal

    diag(y_1 ... y_{k-1}, y_1 ... y_{k-2}, ..., y_1, 1).

Integer and :class:`fractions.Fraction` inputs are handled exactly; float
inputs go through LAPACK.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from numbers import Integral, Rational
from typing import Sequence

import numpy as np


class SingularMatrixError(ValueError):
    """Raised when a matrix is too close to singular to decompose."""


# ---------------------------------------------------------------------------
# Iwasawa coordinates


@dataclass(frozen=True)
class IwasawaCoords:
    """Point of GL(k, R) / (O(k) R^x) in Iwasawa form.

    Parameters
    ----------
    k : int
        Matrix dimension, at least 2.
    x : ndarray, shape (k, k)
        Unipotent upper-triangular factor. Only the strict upper triangle
        carries information.
    y : ndarray, shape (k - 1,)
        Positive Iwasawa coordinates ``y_1, ..., y_{k-1}``.
    """

    k: int
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("dimension must be at least 2")
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float).reshape(-1)
        if x.shape != (self.k, self.k):
            raise ValueError(f"x must be {self.k}x{self.k}")
        if y.shape != (self.k - 1,):
            raise ValueError(f"y must have length {self.k - 1}")
        if np.any(y <= 0):
            raise ValueError("all y_i must be positive")
        x = np.triu(x, 1) + np.eye(self.k)
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_y(cls, y: Sequence[float], x_entries: dict | None = None) -> "IwasawaCoords":
        """Build coordinates from ``y`` and optional ``{(i, j): x_ij}`` (0-based, i < j)."""
        y = np.asarray(y, dtype=float)
        k = y.size + 1
        x = np.eye(k)
        for (i, j), v in (x_entries or {}).items():
            if not 0 <= i < j < k:
                raise ValueError(f"x entry {(i, j)} is not strictly upper triangular")
            x[i, j] = v
        return cls(k, x, y)

    def diagonal(self) -> np.ndarray:
        """Diagonal of the ``y`` factor, ``(y_1...y_{k-1}, ..., y_1, 1)``."""
        return diagonal_from_y(self.y)

    def matrix(self) -> np.ndarray:
        """The matrix ``z = x @ y``."""
        return self.x * self.diagonal()[None, :]


def diagonal_from_y(y) -> np.ndarray:
    """Turn Iwasawa ``y`` into the diagonal of the ``y`` matrix.

    Works for floats and for object arrays of exact rationals.
    """
    y = list(y)
    exact = all(isinstance(v, Rational) for v in y)
    k = len(y) + 1
    diag = [1] * k
    for i in range(1, k):
        diag[k - 1 - i] = diag[k - i] * y[i - 1]
    return np.array(diag, dtype=object if exact else float)


def compose_iwasawa(x, y) -> np.ndarray:
    """Form ``x @ diag(...)`` from a unipotent ``x`` and Iwasawa ``y``.

    Exact when ``x`` and ``y`` hold integers or Fractions.
    """
    diag = diagonal_from_y(y)
    x = np.array(x, dtype=object if diag.dtype == object else float)
    k = diag.size
    if x.shape != (k, k):
        raise ValueError("x and y have inconsistent sizes")
    out = x.copy()
    for j in range(k):
        out[:, j] = out[:, j] * diag[j]
    return out


def iwasawa_decompose(g, k: int | None = None, rel_threshold: float = 1e-10) -> IwasawaCoords:
    """Iwasawa coordinates of ``g`` modulo ``O(k)`` on the right and scalars.

    Rows of ``g`` are orthogonalised from the bottom up, which is a QR
    factorisation of the row-reversed transpose.

    Parameters
    ----------
    g : array_like, shape (k, k)
        Invertible real matrix.
    k : int, optional
        Expected dimension; checked against ``g`` when given.
    rel_threshold : float
        ``g`` is rejected when ``|det g|`` falls below this fraction of the
        product of its row norms (Hadamard's bound).

    Returns
    -------
    IwasawaCoords
        ``g = x y kappa r`` with ``kappa`` orthogonal and ``r > 0``.
    """
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError("g must be square")
    if k is not None and g.shape[0] != k:
        raise ValueError(f"expected a {k}x{k} matrix, got {g.shape}")
    k = g.shape[0]
    scale = np.prod(np.linalg.norm(g, axis=1))
    if scale == 0 or abs(np.linalg.det(g)) <= rel_threshold * scale:
        raise SingularMatrixError("matrix is singular to working precision")

    flipped = g[::-1, :].T
    _, r = np.linalg.qr(flipped)
    tri = r.T[::-1, ::-1]  # upper triangular with g = tri @ orthogonal
    signs = np.sign(np.diag(tri))
    tri = tri * signs[None, :]
    diag = np.diag(tri).copy()
    x = tri / diag[None, :]
    d = diag / diag[-1]
    y = d[-2::-1] / d[:0:-1]
    return IwasawaCoords(k, x, y)


def y_from_wedges(g) -> np.ndarray:
    """Iwasawa ``y`` of ``g`` computed from wedge norms of its bottom rows.

    With ``w_j`` the norm of the wedge of the bottom ``j`` rows (``w_0 = 1``),
    ``y_j = w_{j+1} w_{j-1} / w_j^2``. Independent of the QR route.
    """
    g = np.asarray(g, dtype=float)
    k = g.shape[0]
    w = [1.0] + [np.sqrt(wedge_norm_sq(g, j - 1)) for j in range(1, k + 1)]
    return np.array([w[j + 1] * w[j - 1] / w[j] ** 2 for j in range(1, k)])


# ---------------------------------------------------------------------------
# I_nu and Langlands parameters


def b_matrix(n: int) -> np.ndarray:
    """Integer matrix ``b_{ij}`` (1-based) of the I_nu exponents, shape (n-1, n-1)."""
    b = np.zeros((n - 1, n - 1), dtype=int)
    for i in range(1, n):
        for j in range(1, n):
            low = i * j
            high = (n - i) * (n - j)
            if i + j == n:
                assert low == high
            b[i - 1, j - 1] = low if i + j <= n else high
    return b


def langlands_params(n: int, nu) -> np.ndarray:
    """Langlands parameters ``alpha_1..alpha_n`` attached to spectral ``nu``."""
    nu = np.asarray(nu, dtype=complex).reshape(-1)
    if nu.size != n - 1:
        raise ValueError(f"nu must have length {n - 1}")
    big_b = b_matrix(n) @ nu  # big_b[i-1] = B_i(nu)
    alpha = np.empty(n, dtype=complex)
    alpha[0] = big_b[n - 2] + (1 - n) / 2
    for i in range(2, n):
        alpha[i - 1] = big_b[n - i - 1] - big_b[n - i] + (2 * i - n - 1) / 2
    alpha[n - 1] = -big_b[0] + (n - 1) / 2
    return alpha


def nu_from_langlands(alpha) -> np.ndarray:
    """Invert :func:`langlands_params` for a parameter vector summing to zero."""
    alpha = np.asarray(alpha, dtype=complex)
    n = alpha.size
    shift = langlands_params(n, np.zeros(n - 1))
    basis = np.array([langlands_params(n, e) - shift for e in np.eye(n - 1)]).T
    nu, *_ = np.linalg.lstsq(basis, alpha - shift, rcond=None)
    if np.max(np.abs(basis @ nu + shift - alpha)) > 1e-9 * (1 + np.max(np.abs(alpha))):
        raise ValueError("Langlands parameters must sum to zero")
    return nu


@dataclass(frozen=True)
class SpectralParams:
    """Spectral parameters ``nu`` of degree ``n`` and their derived data."""

    n: int
    nu: np.ndarray
    alpha: np.ndarray = field(init=False)
    b: np.ndarray = field(init=False)

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=complex).reshape(-1)
        if nu.size != self.n - 1:
            raise ValueError(f"nu must have length {self.n - 1}")
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "alpha", langlands_params(self.n, nu))
        object.__setattr__(self, "b", b_matrix(self.n))

    @classmethod
    def from_langlands(cls, alpha) -> "SpectralParams":
        alpha = np.asarray(alpha, dtype=complex)
        return cls(alpha.size, nu_from_langlands(alpha))


def i_nu(coords: IwasawaCoords, params) -> complex:
    """Evaluate ``I_nu(z) = prod_{i,j} y_i^{b_ij nu_j}``.

    ``params`` is a :class:`SpectralParams` or a plain ``nu`` vector.
    """
    if not isinstance(params, SpectralParams):
        params = SpectralParams(coords.k, params)
    if coords.k != params.n:
        raise ValueError(f"dimension mismatch: coords on GL({coords.k}), nu for GL({params.n})")
    exponents = params.b @ params.nu
    return complex(np.exp(np.sum(exponents * np.log(coords.y))))


# ---------------------------------------------------------------------------
# Minors and wedge norms


@dataclass(frozen=True)
class MinorIndex:
    """Row and column index tuples of a square submatrix (0-based, increasing)."""

    rows: tuple
    cols: tuple

    def __post_init__(self):
        rows = tuple(int(i) for i in self.rows)
        cols = tuple(int(j) for j in self.cols)
        if len(rows) != len(cols) or not rows:
            raise ValueError("row and column tuples must be non-empty and of equal length")
        for seq in (rows, cols):
            if any(a >= b for a, b in zip(seq, seq[1:])) or seq[0] < 0:
                raise ValueError(f"indices {seq} must be strictly increasing and non-negative")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)


def _is_exact(a: np.ndarray) -> bool:
    if a.dtype.kind in "iu":
        return True
    if a.dtype == object:
        return all(isinstance(v, (Integral, Rational)) for v in a.flat)
    return False


def exact_det(rows) -> Fraction | int:
    """Determinant of an integer or rational square matrix in exact arithmetic.

    Integers use fraction-free Bareiss elimination; anything else falls back
    to Gaussian elimination over :class:`fractions.Fraction`.
    """
    m = [list(r) for r in rows]
    k = len(m)
    if k == 0:
        return 1
    if all(isinstance(v, Integral) for r in m for v in r):
        m = [[int(v) for v in r] for r in m]
        sign, prev = 1, 1
        for p in range(k - 1):
            if m[p][p] == 0:
                swap = next((r for r in range(p + 1, k) if m[r][p] != 0), None)
                if swap is None:
                    return 0
                m[p], m[swap] = m[swap], m[p]
                sign = -sign
            for i in range(p + 1, k):
                for j in range(p + 1, k):
                    m[i][j] = (m[i][j] * m[p][p] - m[i][p] * m[p][j]) // prev
            prev = m[p][p]
        return sign * m[k - 1][k - 1]
    m = [[Fraction(v) for v in r] for r in m]
    det = Fraction(1)
    for p in range(k):
        piv = next((r for r in range(p, k) if m[r][p] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != p:
            m[p], m[piv] = m[piv], m[p]
            det = -det
        det *= m[p][p]
        for i in range(p + 1, k):
            f = m[i][p] / m[p][p]
            if f:
                for j in range(p, k):
                    m[i][j] -= f * m[p][j]
    return det


def minor(m, idx: MinorIndex):
    """Determinant of the submatrix of ``m`` selected by ``idx``.

    Exact (Python integers or Fractions) for integral or rational input,
    floating point otherwise.
    """
    a = np.asarray(m)
    if a.ndim != 2:
        raise ValueError("matrix must be two-dimensional")
    if max(idx.rows) >= a.shape[0] or max(idx.cols) >= a.shape[1]:
        raise IndexError(f"minor index {idx} out of range for shape {a.shape}")
    sub = a[np.ix_(idx.rows, idx.cols)]
    if _is_exact(sub):
        return exact_det(sub.tolist())
    return float(np.linalg.det(sub.astype(float)))


def bottom_row_minors(m, count: int) -> list:
    """All ``count x count`` minors of the bottom ``count`` rows, columns in lexicographic order."""
    a = np.asarray(m)
    k = a.shape[0]
    rows = tuple(range(k - count, k))
    return [minor(a, MinorIndex(rows, cols)) for cols in combinations(range(a.shape[1]), count)]


def wedge_norm_sq(m, i: int):
    """Squared norm of the wedge of the bottom ``i + 1`` rows of ``m``.

    Equals the sum of squares of all ``(i+1) x (i+1)`` minors taken from
    those rows. Exact for integral or rational input.
    """
    a = np.asarray(m)
    if isinstance(m, IwasawaCoords):
        a = m.matrix()
    k = a.shape[0]
    if not 0 <= i <= k - 1:
        raise ValueError(f"i must lie in [0, {k - 1}]")
    if _is_exact(a):
        return sum(v * v for v in bottom_row_minors(a, i + 1))
    a = a.astype(float)
    rows = a[k - i - 1:, :]
    subs = np.array([rows[:, cols] for cols in combinations(range(a.shape[1]), i + 1)])
    return float(np.sum(np.linalg.det(subs) ** 2))


def compound_matrix(m, r: int) -> np.ndarray:
    """The ``r``-th compound matrix: all ``r x r`` minors, rows and columns in lexicographic order.

    Exact (object dtype) for integral or rational input.
    """
    a = np.asarray(m)
    rsets = list(combinations(range(a.shape[0]), r))
    csets = list(combinations(range(a.shape[1]), r))
    if _is_exact(a):
        out = np.empty((len(rsets), len(csets)), dtype=object)
        for p, rs in enumerate(rsets):
            for q, cs in enumerate(csets):
                out[p, q] = minor(a, MinorIndex(rs, cs))
        return out
    a = a.astype(float)
    subs = np.array([[a[np.ix_(rs, cs)] for cs in csets] for rs in rsets])
    return np.linalg.det(subs)


# ---------------------------------------------------------------------------
# Height on GL(2n)


def height_exponents(k: int) -> np.ndarray:
    """Exponents of ``y_1..y_{k-1}`` in the height on GL(k), k even."""
    if k % 2:
        raise ValueError("the height is defined on GL(2n) only (even dimension)")
    j = np.arange(1, k)
    return np.minimum(j, k - j)


def height(coords: IwasawaCoords) -> float:
    """Height ``y_1 y_2^2 ... y_n^n y_{n+1}^{n-1} ... y_{2n-1}`` of a point of GL(2n)."""
    return float(np.exp(np.sum(height_exponents(coords.k) * np.log(coords.y))))


def height_of_matrix(g) -> float:
    """Height of an arbitrary invertible ``2n x 2n`` matrix.

    Uses ``|det g|`` over the squared wedge norm of the bottom ``n`` rows,
    which is invariant under scalars and right orthogonal factors.
    """
    g = np.asarray(g, dtype=float)
    k = g.shape[0]
    if k % 2:
        raise ValueError("the height is defined on GL(2n) only (even dimension)")
    return abs(float(np.linalg.det(g))) / wedge_norm_sq(g, k // 2 - 1)
