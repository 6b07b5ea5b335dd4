"""The Mellin test function psi-tilde, its inverse Mellin transform, and the Mellin cutoff integral.

``psi_tilde`` is a normalised gamma factor times a product of
``(exp(pi w / d) + 1)^order`` over the nonzero Langlands differences ``d``.
Every factor ``exp(pi w / d)`` is a dilation in the Mellin picture, so the
inverse transform expands exactly into nonnegative dilates of
``y^R exp(-y^(1/2n))``; that expansion is the oracle for the numerical
inversion.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import product
from math import comb

import numpy as np
from scipy import special as sp
from scipy.optimize import brentq

from .quadrature import QuadratureSpec, integrate_adaptive, panel_nodes
from .special import PoleError


class SlowConvergenceWarning(RuntimeWarning):
    """The truncated contour integral may not reach the requested accuracy."""


@dataclass(frozen=True)
class PsiSpec:
    """Parameters of the test function ``psi_tilde``.

    Parameters
    ----------
    R : float
        Shift in the gamma factor ``Gamma(2n(R + w))``; positive.
    n : int
        Degree.
    alpha : tuple of float
        Real Langlands parameters (the form has parameters ``i alpha``).
    order : int
        Power of each ``exp(pi w / d) + 1`` factor.
    strip : float
        Half-width ``a`` of the strip ``|Re w| <= a`` where bounds are checked;
        must be below ``R`` so the gamma factor has no pole there.
    """

    R: float
    n: int
    alpha: tuple
    order: int = 4
    strip: float = 0.5
    diffs: tuple = field(init=False, repr=False)

    def __post_init__(self):
        alpha = tuple(float(a) for a in self.alpha)
        object.__setattr__(self, "alpha", alpha)
        if self.R <= 0:
            raise ValueError("R must be positive")
        if len(alpha) != self.n or self.n < 1:
            raise ValueError("alpha must have n entries")
        if self.order < 1:
            raise ValueError("vanishing order must be a positive integer")
        if not 0 <= self.strip < self.R:
            raise ValueError("strip half-width must lie in [0, R)")
        d = tuple(aj - ak for aj in alpha for ak in alpha if aj != ak)
        object.__setattr__(self, "diffs", d)

    @property
    def L(self) -> int:
        """Number of ordered pairs ``(j, k)`` with ``alpha_j == alpha_k``."""
        return self.n**2 - len(self.diffs)

    @property
    def log_norm(self) -> float:
        """``log(2^(order (n^2 - L)) Gamma(2nR))``."""
        return self.order * len(self.diffs) * math.log(2) + float(sp.gammaln(2 * self.n * self.R))

    def expected_zero_order(self, d: float) -> int:
        """Exact order of the zero at ``w = i d``.

        Factor ``d'`` vanishes at ``i d' (2m + 1)``, so ``i d`` is a zero of
        every factor with ``d / d'`` an odd integer.
        """
        count = 0
        for dp in self.diffs:
            q = d / dp
            k = round(q)
            if abs(q - k) < 1e-12 and k % 2 == 1:
                count += 1
        return count * self.order


def log_psi_tilde(spec: PsiSpec, w):
    """``log psi_tilde(w)`` (complex, any branch) for scalar or array ``w``."""
    w = np.asarray(w, dtype=complex)
    z = 2 * spec.n * (spec.R + w)
    bad = (np.abs(z.imag) < 1e-12) & (z.real <= 0) & (np.abs(z.real - np.round(z.real)) < 1e-12)
    if np.any(bad):
        raise PoleError("psi_tilde: Gamma(2n(R + w)) has a pole")
    out = sp.loggamma(z) - spec.log_norm
    for d in spec.diffs:
        out = out + spec.order * np.log(np.exp(np.pi * w / d) + 1)
    return out


def psi_tilde(spec: PsiSpec, w):
    """``Gamma(2n(R+w)) / (2^(order(n^2-L)) Gamma(2nR)) * prod (exp(pi w/d) + 1)^order``.

    The product runs over ordered pairs with ``alpha_j != alpha_k`` and
    ``d = alpha_j - alpha_k``.
    """
    w_arr = np.asarray(w, dtype=complex)
    z = 2 * spec.n * (spec.R + w_arr)
    bad = (np.abs(z.imag) < 1e-12) & (z.real <= 0) & (np.abs(z.real - np.round(z.real)) < 1e-12)
    if np.any(bad):
        raise PoleError("psi_tilde: Gamma(2n(R + w)) has a pole")
    out = np.exp(sp.loggamma(z) - spec.log_norm)
    for d in spec.diffs:
        out = out * (np.exp(np.pi * w_arr / d) + 1) ** spec.order
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Contract checks


@dataclass(frozen=True)
class ZeroCheck:
    """Measured vanishing at ``w = i d``."""

    d: float
    value: complex
    measured_order: float
    expected_order: int
    limit_ratio: complex  # psi(id + h1) / h1^k over psi(id + h2) / h2^k; tends to 1

    @property
    def passed(self) -> bool:
        return self.measured_order >= self.expected_order - 0.05 and abs(self.limit_ratio - 1) < 0.05


def zero_checks(spec: PsiSpec, steps=(1e-3, 1e-4)) -> list[ZeroCheck]:
    """Estimate the order of each zero from ``|psi(i d + h)|`` at two step sizes."""
    out = []
    h1, h2 = steps
    for d in sorted(set(spec.diffs)):
        k = spec.expected_zero_order(d)
        centre = 1j * d
        v0 = psi_tilde(spec, centre)
        f1, f2 = psi_tilde(spec, centre + h1), psi_tilde(spec, centre + h2)
        measured = math.log(abs(f1) / abs(f2)) / math.log(h1 / h2)
        out.append(ZeroCheck(d, v0, measured, k, (f1 / h1**k) / (f2 / h2**k)))
    return out


@dataclass(frozen=True)
class DecayFit:
    """Smallest ``C`` with ``|psi(x + iy)| <= C exp(-n |y|)`` on the sampled grid."""

    C: float
    worst_point: complex

    @property
    def finite(self) -> bool:
        return math.isfinite(self.C)


def decay_fit(spec: PsiSpec, y_max: float = 50.0, points: int = 2001, columns: int = 5) -> DecayFit:
    xs = np.linspace(-spec.strip, spec.strip, columns)
    ys = np.linspace(-y_max, y_max, points)
    w = xs[:, None] + 1j * ys[None, :]
    log_ratio = log_psi_tilde(spec, w).real + spec.n * np.abs(ys)[None, :]
    idx = np.unravel_index(np.argmax(log_ratio), log_ratio.shape)
    return DecayFit(float(np.exp(log_ratio[idx])), complex(w[idx]))


# ---------------------------------------------------------------------------
# Inverse Mellin transform


def _truncation(spec: PsiSpec, floor: float = 1e-16) -> float:
    """``V`` with ``|psi_tilde(iv)| < floor`` for ``|v| > V``.

    On the imaginary axis each product factor has modulus at most 2, so
    ``|Gamma(2n(R + iv)) / Gamma(2nR)|`` bounds the tail; it decreases in ``|v|``.
    """
    target = math.log(floor)

    def bound(v):
        return float((sp.loggamma(2 * spec.n * (spec.R + 1j * v)) - sp.gammaln(2 * spec.n * spec.R)).real) - target

    v = 1.0
    while bound(v) > 0:
        v *= 1.5
    return v


_Y_CHUNK = 32


def psi_inverse_mellin(spec: PsiSpec, y, q: QuadratureSpec = QuadratureSpec(rel_tol=1e-12)):
    """``psi(y) = (1 / 2 pi) int psi_tilde(iv) y^(-iv) dv`` by adaptive Gauss–Legendre panels.

    The line is truncated where ``|psi_tilde| < 1e-16``. Convergence is
    declared when successive panel doublings agree to ``rel_tol`` or to
    ``1e-15`` times the ``L1`` norm of ``psi_tilde`` on the line.

    Returns real values (``psi_tilde(conj w) = conj psi_tilde(w)``).
    """
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y_arr <= 0):
        raise ValueError("psi_inverse_mellin needs y > 0")
    logs = np.log(y_arr.reshape(-1))
    V = _truncation(spec)
    # conjugate symmetry: integrate over [0, V] and take twice the real part
    t, wts = panel_nodes(np.linspace(0, V, 65), 16)
    l1 = float(np.sum(np.abs(psi_tilde(spec, 1j * t)) * wts)) / math.pi

    def integrand(v, chunk):
        vals = psi_tilde(spec, 1j * v)
        return (vals[..., None] * np.exp(-1j * v[..., None] * chunk)).real

    def integrate(chunk):
        freq = float(np.max(np.abs(chunk))) + math.pi * spec.order * sum(1 / abs(d) for d in spec.diffs)
        panels = max(16, int(V * (1 + freq) / 4))
        return integrate_adaptive(lambda v: integrand(v, chunk), 0.0, V, q, initial_panels=panels,
                                  atol=1e-15 * l1 * math.pi, max_nodes=1 << 17)

    vals = np.concatenate([integrate(logs[i:i + _Y_CHUNK]) for i in range(0, logs.size, _Y_CHUNK)])
    vals = vals / math.pi
    vals = vals.reshape(y_arr.shape)
    return float(vals[0]) if np.ndim(y) == 0 else vals


def dilation_expansion(spec: PsiSpec) -> list[tuple[float, float]]:
    """``psi`` as ``sum_j c_j psi0(y / lambda_j)``: returns ``(log lambda_j, c_j)``.

    Uses ``(exp(pi w / d) + 1)^order = sum_k binom(order, k) exp(pi k w / d)``
    and that multiplying the Mellin transform by ``lambda^w`` dilates ``y`` by
    ``lambda``. Weights include the ``2^(-order(n^2 - L))`` normalisation.
    """
    terms: dict[float, float] = {}
    scale = 2.0 ** (-spec.order * len(spec.diffs))
    for ks in product(range(spec.order + 1), repeat=len(spec.diffs)):
        shift = round(sum(math.pi * k / d for k, d in zip(ks, spec.diffs)), 12)
        weight = scale * math.prod(comb(spec.order, k) for k in ks)
        terms[shift] = terms.get(shift, 0.0) + weight
    return sorted(terms.items())


def psi_exact(spec: PsiSpec, y):
    """Closed-form ``psi`` from :func:`dilation_expansion` with ``psi0(y) = y^R exp(-y^(1/2n)) / (2n Gamma(2nR))``."""
    u = np.log(np.asarray(y, dtype=float))
    n, R = spec.n, spec.R
    out = np.zeros_like(u)
    log_c0 = -math.log(2 * n) - float(sp.gammaln(2 * n * R))
    for shift, c in dilation_expansion(spec):
        us = u - shift
        out = out + c * np.exp(R * us - np.exp(us / (2 * n)) + log_c0)
    return out


def psi_support(spec: PsiSpec, shift_re: float = 0.0, eps: float = 1e-20) -> tuple[float, float]:
    """Range of ``log y`` outside which ``psi(y) y^shift_re`` is below ``eps`` times its peak scale."""
    n, R = spec.n, spec.R
    a = R + shift_re
    if a <= 0:
        raise ValueError("Mellin transform diverges at 0 for Re w <= -R")
    target = math.log(eps)
    peak = 2 * n * math.log(2 * n * a)

    def log_integrand(u):
        return a * u - math.exp(u / (2 * n)) - (a * peak - math.exp(peak / (2 * n)))

    def root(step):
        edge = peak + step
        while log_integrand(edge) > target:
            edge += step
            step *= 2
        return brentq(lambda u: log_integrand(u) - target, *sorted((peak, edge)))

    lo, hi = root(-1.0), root(1.0)
    shifts = [s for s, _ in dilation_expansion(spec)]
    return lo + min(shifts), hi + max(shifts)


def mellin_round_trip(spec: PsiSpec, ws, q: QuadratureSpec = QuadratureSpec(rel_tol=1e-8)):
    """Forward transform ``int psi(y) y^w dy / y`` of the numerically inverted ``psi``.

    Returns ``(numerical, direct)`` arrays for the sample points ``ws``.
    """
    ws = np.asarray(ws, dtype=complex)
    # cut where psi itself reaches the inversion's absolute noise floor; the
    # weight y^Re(w) would otherwise magnify that noise at the far ends
    lo, hi = psi_support(spec, 0.0, eps=1e-16)

    def integrand(u):
        psi_vals = psi_inverse_mellin(spec, np.exp(u))
        return psi_vals[..., None] * np.exp(u[..., None] * ws)

    # absolute floor: 1e-13 of the L1 mass of |psi(y) y^w| (psi >= 0, so psi_tilde(Re w) is that mass)
    mass = np.abs(psi_tilde(spec, ws.real.astype(complex)))
    numerical = integrate_adaptive(integrand, lo, hi, q, initial_panels=64, max_nodes=1 << 13,
                                   atol=1e-13 * float(mass.max()))
    return numerical, psi_tilde(spec, ws)


@dataclass(frozen=True)
class PositivityScan:
    ys: np.ndarray
    values: np.ndarray

    @property
    def minimum(self) -> float:
        return float(self.values.min())

    def passed(self, floor: float = -1e-9) -> bool:
        return self.minimum >= floor


def positivity_scan(spec: PsiSpec, lo: float = 1e-3, hi: float = 1e3, points: int = 121) -> PositivityScan:
    ys = np.logspace(math.log10(lo), math.log10(hi), points)
    return PositivityScan(ys, psi_inverse_mellin(spec, ys))


# ---------------------------------------------------------------------------
# Mellin cutoff


def mellin_cutoff_exact(x: float) -> float:
    """``1 - 1/x`` for ``x >= 1``, else 0."""
    return 1 - 1 / x if x >= 1 else 0.0


def _cos_over_square_tail(c: float, V: float) -> float:
    """``int_V^inf cos(c v) / v^2 dv`` in closed form."""
    c = abs(c)
    if c == 0:
        return 1 / V
    si, _ = sp.sici(c * V)
    return math.cos(c * V) / V - c * (math.pi / 2 - si)


def mellin_cutoff(x: float, V: float = 1e5, tol: float = 1e-4, line: float = 2.0) -> float:
    """``(1 / 2 pi i) int x^w / (w (w + 1)) dw`` along ``Re w = line``.

    The segment ``|Im w| <= V`` uses Gauss–Legendre panels of unit width.
    Past ``V`` the integrand is replaced by its leading term
    ``-x^line e^(iv log x) / v^2``, integrated with the sine integral. A
    :class:`SlowConvergenceWarning` is issued when the bound ``3 x^line / (pi V^2)``
    on what remains exceeds ``tol``.
    """
    if x <= 0:
        raise ValueError("mellin_cutoff needs x > 0")
    if line <= 0:
        raise ValueError("contour must lie right of the poles at 0 and -1")
    residual = 3 * x**line / (math.pi * V * V)
    if residual > tol:
        warnings.warn(f"contour truncated at |Im w| = {V:g} leaves up to {residual:.2e} "
                      "(integrand decays like |w|^-2)", SlowConvergenceWarning, stacklevel=2)
    lx = math.log(x)
    xc = x**line
    panels = int(math.ceil(V))
    total = 0.0
    chunk = 1 << 15
    # conjugate symmetry: (1/2pi) int_{-V}^{V} = (1/pi) Re int_0^V
    for start in range(0, panels, chunk):
        stop = min(start + chunk, panels)
        t, wts = panel_nodes(np.linspace(start, stop, stop - start + 1) * (V / panels), 20)
        w = line + 1j * t
        vals = xc * np.exp(1j * t * lx) / (w * (w + 1))
        total += float(np.sum(vals.real * wts))
    tail = -xc * _cos_over_square_tail(lx, V)
    return (total + tail) / math.pi
