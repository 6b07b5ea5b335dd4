"""Whittaker functions on GL(2) and GL(3).

Two independent routes are provided:

* :func:`whittaker_stade` evaluates the K-Bessel kernel integral
  (empty for ``n = 2``, one-dimensional for ``n = 3``);
* :func:`whittaker_direct` integrates ``I_nu(w_n u y)`` against the
  character over the unipotent group, reduced analytically by one
  variable and finished with oscillatory panel quadrature.

Coordinates follow :mod:`glnkit.matrix_core`: ``y = (y_1, ..., y_{n-1})``
and the point is ``diag(y_1 ... y_{n-1}, ..., y_1, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .matrix_core import SpectralParams
from .quadrature import (
    DEFAULT_SPEC,
    QuadratureSpec,
    averaged_partial_sums,
    integrate_adaptive,
    panel_nodes,
)
from .special import gamma_complex, k_bessel, log_gamma


def nu_jk(params: SpectralParams) -> dict:
    """The shifted parameters ``nu_{j,k}`` for ``1 <= j <= k <= n-1``.

    ``nu_{j,k} = sum_{i=0}^{j-1} (n nu_{n-k+i} - 1) / 2`` (1-based ``nu``).
    For ``n = 3`` these are half the differences of Langlands parameters.
    """
    n, nu = params.n, params.nu
    out = {}
    for j in range(1, n):
        for k in range(j, n):
            out[(j, k)] = sum((n * nu[n - k + i - 1] - 1) / 2 for i in range(j))
    return out


def completion_factor(params: SpectralParams) -> complex:
    """``prod_{j<=k} Gamma(1/2 + nu_{j,k}) / pi^(1/2 + nu_{j,k})``, relating ``W`` and ``W*``."""
    log_val = 0j
    for v in nu_jk(params).values():
        log_val += log_gamma(0.5 + v) - (0.5 + v) * math.log(math.pi)
    return complex(np.exp(log_val))


@dataclass(frozen=True)
class WhittakerEval:
    """A Whittaker value with its provenance.

    ``completed`` tells whether ``value`` includes :func:`completion_factor`.
    """

    n: int
    nu: SpectralParams
    y: tuple
    value: complex
    completed: bool

    def as_completed(self) -> "WhittakerEval":
        if self.completed:
            return self
        return WhittakerEval(self.n, self.nu, self.y, self.value * completion_factor(self.nu), True)

    def as_plain(self) -> "WhittakerEval":
        if not self.completed:
            return self
        return WhittakerEval(self.n, self.nu, self.y, self.value / completion_factor(self.nu), False)


def _params(n: int, params) -> SpectralParams:
    if not isinstance(params, SpectralParams):
        params = SpectralParams(n, params)
    if params.n != n:
        raise ValueError(f"spectral parameters are for GL({params.n}), not GL({n})")
    return params


# ---------------------------------------------------------------------------
# Kernel route


def whittaker_stade(n: int, params, y, q: QuadratureSpec = DEFAULT_SPEC) -> WhittakerEval:
    """Completed Whittaker function ``W*`` by the K-Bessel kernel formula.

    For ``n = 2`` this is ``2 y^(1/2) K_{nu - 1/2}(2 pi y)``. For ``n = 3``,
    with ``mu = nu_{2,2}`` and ``B = b @ nu``,

        W*(y1, y2) = y1^(B1 - mu) y2^(B2 - mu)
                     int_0^inf K*_mu(y2; 1 + u, 1) K*_mu(y1; 1, 1 + 1/u) u^(-nu_{1,1}) du/u

    with ``K*_mu(y; a, b) = 2 (a/b)^(mu/2) K_mu(2 pi y sqrt(ab))``. The
    kernel integral converges for every ``nu``.
    """
    params = _params(n, params)
    y = tuple(float(v) for v in np.atleast_1d(y))
    if len(y) != n - 1 or min(y) <= 0:
        raise ValueError(f"y must hold {n - 1} positive values")
    shifted = nu_jk(params)
    if n == 2:
        mu = shifted[(1, 1)]
        val = 2 * y[0] ** 0.5 * k_bessel(mu, y[0], q)
        return WhittakerEval(n, params, y, complex(val), True)
    if n != 3:
        raise NotImplementedError("kernel formula implemented for n = 2 and n = 3 only")

    mu = shifted[(2, 2)]
    e = shifted[(1, 1)]
    big_b = params.b @ params.nu
    y1, y2 = y
    # v = log u; the first kernel dies for v >> 0, the second for v << 0
    hi = 2 * math.log(max(60 / (2 * math.pi * y2), 1.0)) + 6
    lo = -2 * math.log(max(60 / (2 * math.pi * y1), 1.0)) - 6

    def integrand(v):
        u = np.exp(v)
        a = 2 * (1 + u) ** (mu / 2) * k_bessel(mu, y2 * np.sqrt(1 + u), q)
        b = 2 * (1 + 1 / u) ** (-mu / 2) * k_bessel(mu, y1 * np.sqrt(1 + 1 / u), q)
        return a * b * u ** (-e)

    integral = integrate_adaptive(integrand, lo, hi, q, initial_panels=16, atol=1e-300)
    val = y1 ** (big_b[0] - mu) * y2 ** (big_b[1] - mu) * integral
    return WhittakerEval(n, params, y, complex(val), True)


def whittaker(n: int, params, y, q: QuadratureSpec = DEFAULT_SPEC) -> WhittakerEval:
    """Plain ``W_{n,nu}(y)`` from the kernel route (``W*`` divided by the completion factor)."""
    return whittaker_stade(n, params, y, q).as_plain()


# ---------------------------------------------------------------------------
# Direct route


def _half_period_pieces(f, count: int, order: int = 24) -> np.ndarray:
    """Integrals of ``f(u) cos(2 pi u)`` over ``[k/2, (k+1)/2]`` for ``k < count``."""
    t, w = panel_nodes(np.arange(count + 1) * 0.5, order)
    return np.sum(f(t) * np.cos(2 * np.pi * t) * w, axis=1)


def whittaker_direct(n: int, params, y, half_periods: int = 80) -> WhittakerEval:
    """Plain ``W_{n,nu}(y)`` by integrating ``I_nu(w_n u y)`` over the unipotent variables.

    ``n = 2``: ``W = 2 y^nu int_0^inf (u^2 + y^2)^(-nu) cos(2 pi u) du``.

    ``n = 3``: the ``u_{2,3}`` integral is a shifted Fourier transform of
    ``(v^2 + c^2)^(-s)`` and is done in closed form; the remaining
    ``(u_{1,2}, u_{1,3})`` integral uses Gauss–Legendre panels aligned with
    the oscillation and repeated averaging of the half-period partial sums
    for the outer tail. Requires real ``nu`` with ``nu_i > 1/3`` so the
    unipotent integral converges absolutely.
    """
    params = _params(n, params)
    y = tuple(float(v) for v in np.atleast_1d(y))
    nu = params.nu
    if n == 2:
        nu1 = complex(nu[0])
        if nu1.real <= 0.5:
            raise ValueError("direct integral needs Re(nu) > 1/2")
        y1 = y[0]
        pieces = _half_period_pieces(lambda u: (u * u + y1 * y1) ** (-nu1), half_periods)
        val = 2 * y1**nu1 * averaged_partial_sums(pieces)
        return WhittakerEval(n, params, y, complex(val), False)
    if n != 3:
        raise NotImplementedError("direct integral implemented for n = 2 and n = 3 only")
    if np.any(np.abs(nu.imag) > 0) or np.any(nu.real <= 1 / 3):
        raise ValueError("direct GL(3) integral needs real nu_i > 1/3")
    nu1, nu2 = float(nu[0].real), float(nu[1].real)
    y1, y2 = y
    s = 1.5 * nu1
    pref = (y1 * y1 * y2) ** (2 * nu1 + nu2) * y1 ** (-3 * nu1) * 2 * math.pi**s / math.gamma(s)

    def inner(u12: float) -> float:
        a = y2 * y2 + u12 * u12
        omega = 2 * math.pi * u12 / a
        cut = 8 * a / y2 + 8 * y1 * math.sqrt(a)  # K_{s-1/2}(2 pi c) < e^-50 beyond
        geo = 0.02 * 2.0 ** np.arange(60)
        breaks = [np.array([0.0, cut]), geo[geo < cut]]
        if omega > 0:
            per = np.arange(1, int(cut * omega / math.pi) + 2) * math.pi / omega
            breaks.append(per[per < cut])
        t, w = panel_nodes(np.unique(np.concatenate(breaks)), 24)
        c = np.sqrt((y1 * y1 * y2 * y2 + t * t * y2 * y2 / a) / a)
        w1sq = (y1 * y2) ** 2 + (u12 * y1) ** 2 + t * t
        amp = w1sq ** (-1.5 * nu2) * a ** (-s) * c ** (0.5 - s) * sp.kv(s - 0.5, 2 * math.pi * c)
        return 2 * float(np.sum(amp * np.cos(omega * t) * w))

    outer = np.vectorize(inner)
    pieces = _half_period_pieces(outer, half_periods)
    val = pref * 2 * averaged_partial_sums(pieces)
    return WhittakerEval(n, params, y, complex(val), False)


# ---------------------------------------------------------------------------
# Decay


@dataclass(frozen=True)
class DecayReport:
    """``|W|`` along a doubling sequence of ``max y`` past the transition point."""

    start: float
    values: tuple
    ratios: tuple
    required_ratio: float

    @property
    def passed(self) -> bool:
        return all(r <= self.required_ratio for r in self.ratios)


def whittaker_decay(n: int, params, t: float, eps: float = 0.2, steps: int = 4, order_n: int = 6,
                    q: QuadratureSpec = DEFAULT_SPEC) -> DecayReport:
    """Check ``|W|`` drops by ``2^-N`` per doubling of ``max y`` beyond ``(|t|+1)^(1+eps)``.

    Only the last coordinate is moved; the others stay at 1.
    """
    params = _params(n, params)
    start = (abs(t) + 1) ** (1 + eps)
    vals = []
    for k in range(steps + 1):
        yy = [1.0] * (n - 1)
        yy[0] = start * 2**k
        vals.append(abs(whittaker(n, params, yy, q).value))
    ratios = tuple(b / a if a > 0 else 0.0 for a, b in zip(vals, vals[1:]))
    return DecayReport(start, tuple(vals), ratios, 2.0**-order_n)


def gamma_completion_check(params: SpectralParams) -> complex:
    """Completion factor recomputed with plain gamma values (guards against branch issues)."""
    out = 1 + 0j
    for v in nu_jk(params).values():
        out *= gamma_complex(0.5 + v) / math.pi ** (0.5 + v)
    return out


def mellin_norm_quadrature(params, w: complex, q: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """``int_0^inf |W_{2,nu}(y)|^2 y^w d*y`` on GL(2), with ``d*y = y^-2 dy``, by quadrature in ``log y``."""
    params = _params(2, params)
    mu = nu_jk(params)[(1, 1)]
    scale = abs(completion_factor(params)) ** 2
    w = complex(w)
    top = math.log(60 / (2 * math.pi)) + 1.0
    bottom = -40.0 / max(w.real, 0.05)

    def integrand(v):
        y = np.exp(v)
        kb = k_bessel(mu, y.reshape(-1), q).reshape(y.shape)
        return 4 * y * np.abs(kb) ** 2 * np.exp((w - 1) * v) / scale

    return complex(integrate_adaptive(integrand, bottom, top, q, initial_panels=64, atol=1e-300))
