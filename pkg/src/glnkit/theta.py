"""Theta functions of unimodular lattices and the maximal parabolic Eisenstein series of GL(2n).

A point ``z = x y`` of GL(2n) in Iwasawa form gives the determinant-one
lattice spanned by the rows of ``x diag(Y_1, ..., Y_{2n})``, where ``Y_k``
is the ``k``-th diagonal entry of ``y`` rescaled to determinant one. The
theta function sums ``exp(-pi u |v|^2)`` over that lattice, and the
completed Eisenstein series is assembled from two incomplete Mellin
transforms of ``theta - 1`` plus its polar part.

Normalisation: the theta integral sums over all nonzero lattice vectors,
so it equals ``2 pi^(-ns) Gamma(ns) zeta(2ns) E(z, s)`` where ``E`` sums
over cosets of the parabolic subgroup in ``SL(2n, Z)`` (``c`` and ``-c``
are one coset). :func:`eisenstein_coset_sum` returns the coset sum
without the 2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .cosets import LatticeEnumSpec, PreconditionError, enumerate_coset_keys
from .matrix_core import IwasawaCoords, iwasawa_decompose
from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate_adaptive, integrate_panels
from .special import PoleError, log_gamma


class TruncationWarning(UserWarning):
    """The lattice cut-off leaves a tail above the requested tolerance."""


THETA_TAIL_TARGET = 1e-16
_NODE_CHUNK = 2_000_000


# ---------------------------------------------------------------------------
# Lattice geometry


def y_scales(coords: IwasawaCoords) -> np.ndarray:
    """``Y_1 >= ... >= Y_{2n}``: the Iwasawa diagonal rescaled to determinant one."""
    diag = coords.diagonal()
    return diag * math.exp(-np.sum(np.log(diag)) / coords.k)


def lattice_basis(coords: IwasawaCoords) -> np.ndarray:
    """Upper-triangular basis (rows) of the unimodular lattice attached to ``coords``."""
    return coords.x * y_scales(coords)[None, :]


def short_vectors(basis: np.ndarray, bound: float) -> tuple[np.ndarray, np.ndarray]:
    """All nonzero ``a`` with ``|a @ basis| <= bound`` for an upper-triangular ``basis``.

    Breadth-first Fincke–Pohst: coordinate ``k`` of ``a @ basis`` only
    involves ``a_1..a_k``, so each level fixes one more coefficient inside
    the remaining radius.

    Returns
    -------
    coeffs : ndarray of int64, shape (K, d)
    norms : ndarray, shape (K,)
        Squared lengths.
    """
    basis = np.asarray(basis, dtype=float)
    d = basis.shape[0]
    r2 = bound * bound * (1 + 1e-12)
    coeffs = np.zeros((1, 0), dtype=np.int64)
    acc = np.zeros((1, d))
    rem = np.array([r2])
    for k in range(d):
        diag = basis[k, k]
        r = np.sqrt(np.maximum(rem, 0.0))
        lo = np.ceil((-acc[:, k] - r) / diag).astype(np.int64)
        hi = np.floor((-acc[:, k] + r) / diag).astype(np.int64)
        counts = np.maximum(hi - lo + 1, 0)
        parent = np.repeat(np.arange(counts.size), counts)
        offsets = np.cumsum(counts) - counts
        a = lo[parent] + (np.arange(parent.size) - offsets[parent])
        acc = acc[parent] + a[:, None] * basis[k][None, :]
        rem = rem[parent] - acc[:, k] ** 2
        keep = rem >= 0
        coeffs = np.concatenate([coeffs[parent], a[:, None]], axis=1)[keep]
        acc, rem = acc[keep], rem[keep]
    nonzero = np.any(coeffs != 0, axis=1)
    return coeffs[nonzero], np.sum(acc[nonzero] ** 2, axis=1)


def _count_bound_radius(basis: np.ndarray) -> float:
    # translates of the centred fundamental parallelepiped are disjoint and lie within this distance
    return 0.5 * float(np.sum(np.linalg.norm(basis, axis=1)))


def theta_tail_bound(d: int, slack: float, bound: float, u: float) -> float:
    """Upper bound for ``sum_{|v| > bound} exp(-pi u |v|^2)`` over a unimodular lattice.

    Uses ``#{|v| <= rho} <= V_d (rho + slack)^d`` and integrates by parts.
    """
    vol = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    width = 10 / math.sqrt(u) + 1

    def f(rho):
        return 2 * math.pi * u * rho * np.exp(-math.pi * u * rho * rho) * vol * (rho + slack) ** d

    return float(integrate_panels(f, np.linspace(bound, bound + width, 17), 20))


def choose_lattice_bound(d: int, slack: float, target: float = 1e-18, min_pi_b2: float = 0.0) -> float:
    """Smallest cut-off (on a 0.05 grid) whose tail bound at ``u = 1`` is below ``target``."""
    b = max(1.0, math.sqrt(max(min_pi_b2, 0.0) / math.pi))
    while theta_tail_bound(d, slack, b, 1.0) > target:
        b += 0.05
    return b


@dataclass(frozen=True)
class ThetaContext:
    """Lattice data for theta sums at a point of GL(2n).

    Parameters
    ----------
    coords : IwasawaCoords
        Point of GL(2n) (any even dimension ``k = 2n``).
    lattice_bound : float
        Radius of the lattice ball that is summed.

    Attributes
    ----------
    Yk : ndarray
        The rescaled diagonal, decreasing with product one.
    norms, multiplicity : ndarray
        Distinct squared lengths of nonzero lattice vectors within the ball
        and how often each occurs.
    """

    coords: IwasawaCoords
    lattice_bound: float
    Yk: np.ndarray = field(init=False, repr=False)
    norms: np.ndarray = field(init=False, repr=False)
    multiplicity: np.ndarray = field(init=False, repr=False)
    slack: float = field(init=False, repr=False)

    def __post_init__(self):
        if self.coords.k % 2:
            raise ValueError("theta functions are defined on GL(2n)")
        if self.lattice_bound <= 0:
            raise ValueError("lattice_bound must be positive")
        basis = lattice_basis(self.coords)
        _, sq = short_vectors(basis, self.lattice_bound)
        norms, mult = np.unique(sq, return_counts=True)
        object.__setattr__(self, "Yk", y_scales(self.coords))
        object.__setattr__(self, "norms", norms)
        object.__setattr__(self, "multiplicity", mult.astype(float))
        object.__setattr__(self, "slack", _count_bound_radius(basis))

    @property
    def n(self) -> int:
        return self.coords.k // 2

    @classmethod
    def build(cls, z, lattice_bound: float | None = None, min_pi_b2: float = 0.0) -> "ThetaContext":
        """Context for a matrix or coordinates, picking the cut-off from the tail bound when not given."""
        coords = z if isinstance(z, IwasawaCoords) else iwasawa_decompose(z)
        if lattice_bound is None:
            slack = _count_bound_radius(lattice_basis(coords))
            lattice_bound = choose_lattice_bound(coords.k, slack, min_pi_b2=min_pi_b2)
        return cls(coords, lattice_bound)

    def tail_estimate(self, u: float) -> float:
        return theta_tail_bound(self.coords.k, self.slack, self.lattice_bound, u)

    def theta_minus_one(self, u) -> np.ndarray:
        """``theta(u) - 1`` for an array of ``u`` (the truncated lattice sum without ``a = 0``)."""
        u = np.asarray(u, dtype=float)
        flat = u.reshape(-1)
        out = np.empty(flat.size)
        step = max(1, _NODE_CHUNK // max(self.norms.size, 1))
        for i in range(0, flat.size, step):
            e = np.exp(-math.pi * flat[i:i + step, None] * self.norms[None, :])
            out[i:i + step] = e @ self.multiplicity
        return out.reshape(u.shape)


def theta(ctx: ThetaContext, u: float) -> float:
    """``theta_z(u)``: sum of ``exp(-pi u |v|^2)`` over the lattice, including ``v = 0``.

    Warns with :class:`TruncationWarning` when the tail bound at ``u``
    exceeds ``1e-16``.
    """
    if u <= 0:
        raise ValueError("u must be positive")
    tail = ctx.tail_estimate(u)
    if tail > THETA_TAIL_TARGET:
        warnings.warn(f"lattice cut-off {ctx.lattice_bound:.3f} leaves tail up to {tail:.3e} at u = {u}",
                      TruncationWarning, stacklevel=2)
    return 1.0 + float(ctx.theta_minus_one(np.array([u]))[0])


# ---------------------------------------------------------------------------
# Eisenstein series


def _incomplete_mellin(ctx: ThetaContext, exponents: np.ndarray, q: QuadratureSpec) -> np.ndarray:
    """``int_1^inf (theta(u) - 1) u^e du/u`` for each ``e``, by quadrature in ``v = log u``."""
    exponents = np.atleast_1d(np.asarray(exponents, dtype=complex))
    if ctx.norms.size == 0:
        return np.zeros(exponents.size, dtype=complex)
    sigma = max(float(np.max(exponents.real)), 0.0)
    n_min = float(ctx.norms[0])
    log_count = math.log(float(np.sum(ctx.multiplicity)))
    top = 0.0
    while math.pi * math.exp(top) * n_min - sigma * top - log_count < 60:
        top += 0.25

    def integrand(v):
        vals = ctx.theta_minus_one(np.exp(v))
        return vals[..., None] * np.exp(v[..., None] * exponents)

    panels = max(8, int(4 * top))
    return integrate_adaptive(integrand, 0.0, top, q, initial_panels=panels, atol=1e-20)


def _as_coords(z) -> IwasawaCoords:
    return z if isinstance(z, IwasawaCoords) else iwasawa_decompose(z)


def dual_point(z) -> IwasawaCoords:
    """Iwasawa coordinates of ``w (z^T)^-1 w`` with ``w`` the long Weyl element."""
    g = _as_coords(z).matrix()
    k = g.shape[0]
    flip = np.eye(k)[::-1]
    return iwasawa_decompose(flip @ np.linalg.inv(g).T @ flip)


def _check_s(s: complex):
    if abs(s) < 1e-12 or abs(s - 1) < 1e-12:
        raise PoleError(f"the completed Eisenstein series has a pole at s = {s}")


def eisenstein_completed(z, s: complex, q: QuadratureSpec = DEFAULT_SPEC,
                         ctx: ThetaContext | None = None, dual_ctx: ThetaContext | None = None) -> complex:
    """Completed maximal parabolic Eisenstein series on GL(2n) from the theta integral.

    ``int_1^inf (theta_z - 1) u^(ns) du/u + int_1^inf (theta_z' - 1) u^(n(1-s)) du/u
    - (1/n)(1/(1-s) + 1/s)`` with ``z' = w (z^T)^-1 w``. Entire in ``s`` apart
    from simple poles at 0 and 1.

    Parameters
    ----------
    z : IwasawaCoords or array_like
        Point of GL(2n).
    s : complex
    q : QuadratureSpec
    ctx, dual_ctx : ThetaContext, optional
        Precomputed lattice data for ``z`` and its dual point; the default
        cut-off makes the tail negligible for the given ``s``.
    """
    s = complex(s)
    _check_s(s)
    coords = _as_coords(z)
    n = coords.k // 2
    need = 2 * n * max(abs(s.real), abs(1 - s.real)) + 10
    if ctx is None:
        ctx = ThetaContext.build(coords, min_pi_b2=need)
    if dual_ctx is None:
        dual_ctx = ThetaContext.build(dual_point(coords), min_pi_b2=need)
    first = _incomplete_mellin(ctx, np.array([n * s]), q)[0]
    second = _incomplete_mellin(dual_ctx, np.array([n * (1 - s)]), q)[0]
    return complex(first + second - (1 / (1 - s) + 1 / s) / n)


@dataclass(frozen=True)
class FunctionalEquationRow:
    """``E*(z, s)``, ``E*(z^T^-1, 1-s)`` and their relative difference."""

    y: tuple
    s: complex
    value: complex
    reflected: complex

    @property
    def residual(self) -> float:
        return abs(self.value - self.reflected) / abs(self.value)


def functional_equation_check(z, s: complex, q: QuadratureSpec = DEFAULT_SPEC) -> FunctionalEquationRow:
    """Evaluate both sides of ``E*(z, s) = E*(z^T^-1, 1 - s)``.

    The right side re-runs the Iwasawa decomposition on the transpose
    inverse and computes its own lattices; nothing is shared between sides.
    """
    coords = _as_coords(z)
    other = iwasawa_decompose(np.linalg.inv(coords.matrix()).T)
    left = eisenstein_completed(coords, s, q)
    right = eisenstein_completed(other, 1 - s, q)
    return FunctionalEquationRow(tuple(float(v) for v in coords.y), complex(s), left, right)


def completion_gamma_zeta(n: int, s: complex) -> complex:
    """``pi^(-ns) Gamma(ns) zeta(2ns)``."""
    s = complex(s)
    log_part = -n * s * math.log(math.pi) + log_gamma(n * s)
    return complex(np.exp(log_part) * complex(mpmath.zeta(2 * n * s)))


def eisenstein_coset_sum(z, s: complex, entry_bound: int = 4) -> complex:
    """Completed series from its coset definition, truncated to bottom rows with entries ``<= entry_bound``.

    ``pi^(-ns) Gamma(ns) zeta(2ns) sum_gamma Det(gamma z)^s``, one term per
    primitive bottom row up to sign. Only sensible where the sum converges
    quickly (``Re s`` well above 1).
    """
    coords = _as_coords(z)
    k = coords.k
    n = k // 2
    _, blocks = enumerate_coset_keys(LatticeEnumSpec(k, 1, entry_bound))
    rows = blocks[:, 0, :].astype(float)
    norms_sq = np.sum((rows @ lattice_basis(coords)) ** 2, axis=1)
    total = np.sum(norms_sq ** (-n * complex(s)))
    return completion_gamma_zeta(n, s) * complex(total)


def residue_check(z, exponents=(2, 3, 4, 5), q: QuadratureSpec = DEFAULT_SPEC) -> list[tuple[complex, complex]]:
    """``n (s - 1) E*(z, s)`` at ``s = 1 + 10^-k``; these tend to 1."""
    coords = _as_coords(z)
    n = coords.k // 2
    ctx = ThetaContext.build(coords, min_pi_b2=4 * n + 10)
    dual_ctx = ThetaContext.build(dual_point(coords), min_pi_b2=4 * n + 10)
    out = []
    for e in exponents:
        s = 1 + 10.0 ** (-e)
        out.append((s, n * (s - 1) * eisenstein_completed(coords, s, q, ctx, dual_ctx)))
    return out


# ---------------------------------------------------------------------------
# Growth bound on the critical line


def y_scale_exponents(n: int, k: int) -> list[Fraction]:
    """Exponent vector of ``Y_k`` in ``y_1, ..., y_{2n-1}`` (exact rationals)."""
    big = 2 * n
    if not 1 <= k <= big:
        raise ValueError("k must lie in 1..2n")
    return [Fraction(int(i <= big - k)) - Fraction(big - i, big) for i in range(1, big)]


def _lower_upper_blocks(n: int, k: int) -> tuple[list[Fraction], list[Fraction]]:
    # exponents of y_1 y_2^2 ... y_{2n-k}^{2n-k} and of y_{2n-k+1}^{k-1} ... y_{2n-1}
    big = 2 * n
    low = [Fraction(i) if i <= big - k else Fraction(0) for i in range(1, big)]
    high = [Fraction(big - i) if i > big - k else Fraction(0) for i in range(1, big)]
    return low, high


def _tail_product(n: int, k: int, power_k: int) -> list[Fraction]:
    # exponents of Y_{k+1}^-1 ... Y_{2n}^-1 Y_k^power_k
    vec = [power_k * e for e in y_scale_exponents(n, k)]
    for j in range(k + 1, 2 * n + 1):
        vec = [a - b for a, b in zip(vec, y_scale_exponents(n, j))]
    return vec


def majorant_identity_first(n: int, k: int) -> tuple[list[Fraction], list[Fraction]]:
    """Both sides of ``Y_{k+1}^-1 ... Y_{2n}^-1 Y_k^(n-k) = (low)^(1/2) (high)^(1/2)`` as exponent vectors."""
    low, high = _lower_upper_blocks(n, k)
    return _tail_product(n, k, n - k), [a / 2 + b / 2 for a, b in zip(low, high)]


def majorant_identity_second(n: int, k: int) -> tuple[list[Fraction], list[Fraction]]:
    """Both sides of ``Y_{k+1}^-1 ... Y_{2n}^-1 Y_k^-1 = (low)^((k-1)/2n) (high)^((2n-k+1)/2n)``."""
    low, high = _lower_upper_blocks(n, k)
    big = 2 * n
    rhs = [a * Fraction(k - 1, big) + b * Fraction(big - k + 1, big) for a, b in zip(low, high)]
    return _tail_product(n, k, -1), rhs


def growth_majorant(coords: IwasawaCoords, w: complex) -> float:
    """Critical-line majorant for ``|E(z, w)|``, with ``max(log(y_1...y_{2n-1}), 0)`` replaced by ``1 + log``.

    ``e^(pi n |w| / 2) |w|^(-(n-1)/2) sum_k [low^(1/2) high^(1/2) + low^((k-1)/2n) high^((2n-k+1)/2n)]``
    times ``1 + log(y_1 ... y_{2n-1})``.
    """
    n = coords.k // 2
    logs = np.log(coords.y)
    total = 0.0
    for k in range(1, 2 * n + 1):
        for _, rhs in (majorant_identity_first(n, k), majorant_identity_second(n, k)):
            total += math.exp(float(np.dot([float(e) for e in rhs], logs)))
    w = complex(w)
    pref = math.exp(math.pi * n * abs(w) / 2) / abs(w) ** ((n - 1) / 2)
    return pref * total * (1 + float(np.sum(logs)))


@dataclass(frozen=True)
class GrowthReport:
    """``|E(z, w)|`` against the critical-line majorant."""

    y: tuple
    w: complex
    value: float
    majorant: float

    @property
    def ratio(self) -> float:
        return self.value / self.majorant


def check_prop34_bound(z, w: complex, q: QuadratureSpec = DEFAULT_SPEC) -> GrowthReport:
    """Compare ``|E(z, w)|`` on ``Re w = 1/2`` with its majorant.

    ``E`` is the coset-sum normalisation: the theta integral divided by
    ``2 pi^(-nw) Gamma(nw) zeta(2nw)``.

    Raises
    ------
    PreconditionError
        If some ``y_i < 1`` or ``Re w != 1/2``.
    """
    coords = _as_coords(z)
    if np.any(coords.y < 1 - 1e-12):
        raise PreconditionError("the growth bound requires y_i >= 1 for all i")
    w = complex(w)
    if abs(w.real - 0.5) > 1e-12:
        raise PreconditionError("the growth bound is stated on Re w = 1/2")
    n = coords.k // 2
    completed = eisenstein_completed(coords, w, q)
    value = abs(completed / (2 * completion_gamma_zeta(n, w)))
    return GrowthReport(tuple(float(v) for v in coords.y), w, value, growth_majorant(coords, w))
