"""Complex gamma, K-Bessel with complex order, Stirling pairs and the Whittaker Mellin norm."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate_adaptive, panel_nodes


class PoleError(ValueError):
    """Raised when a gamma factor is evaluated at one of its poles."""


def _check_poles(z, what: str = "gamma"):
    z = np.asarray(z, dtype=complex)
    re = z.real
    bad = (np.abs(z.imag) < 1e-12) & (re < 0.5) & (np.abs(re - np.round(re)) < 1e-12)
    if np.any(bad):
        raise PoleError(f"{what} has a pole at z = {complex(z[bad].flat[0])}")


def gamma_complex(z):
    """Gamma function for complex arguments.

    Raises :class:`PoleError` within ``1e-12`` of a nonpositive integer.
    """
    _check_poles(z)
    out = sp.gamma(np.asarray(z, dtype=complex))
    return complex(out) if np.ndim(out) == 0 else out


def log_gamma(z):
    """Principal branch of ``log Gamma(z)`` (continuous away from the negative axis)."""
    _check_poles(z, "log-gamma")
    out = sp.loggamma(np.asarray(z, dtype=complex))
    return complex(out) if np.ndim(out) == 0 else out


_BINET = (1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360, 1 / 156, -3617 / 122400)


def log_gamma_ratio(z, w):
    """``log Gamma(z + w) - log Gamma(z)`` without cancellation for large ``|z|``.

    Both arguments are shifted right until their real parts exceed 15; the
    shifted ratio uses Stirling's series in ``log1p`` form. The result agrees
    with the difference of principal log-gammas modulo ``2 pi i``.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    z, w = np.broadcast_arrays(z, w)
    _check_poles(z, "log-gamma")
    _check_poles(z + w, "log-gamma")
    shift = np.maximum(np.ceil(15 - np.minimum(z.real, (z + w).real)), 0).astype(np.int64)
    corr = np.zeros(z.shape, dtype=complex)
    for j in range(int(shift.max(initial=0))):
        active = shift > j
        zj = z[active] + j
        corr[active] -= np.log1p(w[active] / zj)
    zs = z + shift
    zw = zs + w
    out = (zs - 0.5) * np.log1p(w / zs) + w * np.log(zw) - w
    for k, b in enumerate(_BINET, start=1):
        out += b * (zw ** (1 - 2 * k) - zs ** (1 - 2 * k))
    out += corr
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# K-Bessel


def _bessel_cutoff(nu: complex, y_min: float, rel_tol: float) -> float:
    """Upper limit ``U`` beyond which ``exp(-2 pi y cosh u) |cosh(nu u)|`` is negligible."""
    a = abs(nu.real)
    floor = -2 * math.pi * y_min - math.pi * abs(nu.imag) / 2 + math.log(rel_tol) - 8
    u = 1.0
    while -2 * math.pi * y_min * math.cosh(u) + a * u > floor:
        u *= 1.25
    return u


_CHUNK = 256
_ROUNDOFF = 1e-14


def _k_bessel_chunk(nu: complex, ys: np.ndarray, q: QuadratureSpec) -> np.ndarray:
    upper = _bessel_cutoff(nu, float(ys.min()), q.rel_tol)

    def integrand(u):
        e = np.exp(-2 * np.pi * ys[None, None, :] * np.cosh(u)[..., None])
        return e * np.cosh(nu * u)[..., None]

    initial = max(8, int(upper * (1 + abs(nu.imag)) / 2))
    # L1 norm of the integrand: the roundoff floor when cos(Im(nu) u) cancels
    t, w = panel_nodes(np.linspace(0.0, upper, initial + 1), 16)
    envelope = np.sum(np.abs(integrand(t)) * w[..., None], axis=(0, 1))
    return integrate_adaptive(integrand, 0.0, upper, q, initial_panels=initial, atol=_ROUNDOFF * envelope + 1e-300,
                              max_nodes=max(2**22 // ys.size, 64 * initial))


def k_bessel(nu: complex, y, q: QuadratureSpec = DEFAULT_SPEC):
    """``K_nu(2 pi y)`` from its integral representation.

    Uses ``K_nu(2 pi y) = int_0^inf exp(-2 pi y cosh u) cosh(nu u) du``
    with composite Gauss–Legendre panels doubled until ``q.rel_tol`` is met,
    or until the change is below ``1e-14`` times the L1 norm of the
    integrand (the cancellation floor for large imaginary order).

    Parameters
    ----------
    nu : complex
        Order; any complex value.
    y : float or ndarray
        Positive argument(s); note the ``2 pi`` scaling.
    q : QuadratureSpec

    Raises
    ------
    QuadratureError
        If the tolerance is not reached; the exception carries the achieved
        estimate. Large imaginary order with small ``y`` loses digits to
        cancellation and may trigger this.
    """
    nu = complex(nu)
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y_arr <= 0):
        raise ValueError("k_bessel needs y > 0")
    flat = y_arr.reshape(-1)
    # sort so each chunk shares a similar cut-off; chunks bound the memory footprint
    order = np.argsort(flat)
    vals = np.empty(flat.size, dtype=complex)
    for start in range(0, flat.size, _CHUNK):
        idx = order[start:start + _CHUNK]
        vals[idx] = _k_bessel_chunk(nu, flat[idx], q)
    if np.all(vals.imag == 0):
        vals = vals.real
    vals = vals.reshape(y_arr.shape)
    return vals[0] if np.ndim(y) == 0 else vals


def k_star(nu: complex, y, a, b, q: QuadratureSpec = DEFAULT_SPEC):
    """Kernel ``2 (a/b)^(nu/2) K_nu(2 pi y sqrt(a b))``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    arg = y * np.sqrt(a * b)
    return 2 * (a / b) ** (nu / 2) * k_bessel(nu, arg, q)


# ---------------------------------------------------------------------------
# Stirling pairs


def _cauchy_derivative(f, x0: float, order: int, radius: float = 0.25, points: int = 64) -> complex:
    """``order``-th derivative at ``x0`` of an analytic ``f`` by the trapezoid rule on a circle."""
    theta = 2 * np.pi * np.arange(points) / points
    vals = f(x0 + radius * np.exp(1j * theta))
    coeff = np.mean(vals * np.exp(-1j * order * theta))
    return complex(math.factorial(order) * coeff / radius**order)


@dataclass(frozen=True)
class StirlingPair:
    """Exact and asymptotic ``x``-derivatives of ``Gamma((x+iy)/2) Gamma((x-iy)/2)``.

    ``log_form`` is the simplified main term ``log(|y|/2)^ell Gamma(iy/2) Gamma(-iy/2)``
    valid at ``x = 0``.
    """

    x: float
    y: float
    ell: int
    exact: complex
    asymptotic: complex
    log_form: complex

    @property
    def ratio(self) -> complex:
        return self.exact / self.asymptotic

    @property
    def log_ratio(self) -> complex:
        return self.exact / self.log_form


def stirling_pair(x: float, y: float, ell: int = 0) -> StirlingPair:
    """Compare the gamma pair and its Stirling main term, both differentiated ``ell`` times in ``x``.

    Derivatives come from Cauchy's integral formula on a circle of radius
    1/4, so the exact side needs only :func:`gamma_complex`.
    """
    if not -0.5 <= x <= 0.5:
        raise ValueError("x must lie in [-1/2, 1/2]")
    if ell < 0:
        raise ValueError("derivative order must be nonnegative")
    ay = abs(y)

    def exact(xs):
        return gamma_complex((xs + 1j * y) / 2) * gamma_complex((xs - 1j * y) / 2)

    def main_term(xs):
        # arctan(|y|/x) + (pi if x < 0) is the angle pi/2 - arctan(x/|y|), analytic in x
        angle = np.pi / 2 - np.arctan(xs / ay)
        return 2 * np.pi * np.exp(-xs) * np.exp((xs - 1) / 2 * np.log((xs * xs + y * y) / 4)) * np.exp(-ay * angle)

    if ell == 0:
        ex, asym = complex(exact(np.array([x]))[0]), complex(main_term(np.array([x]))[0])
    else:
        ex = _cauchy_derivative(exact, x, ell)
        asym = _cauchy_derivative(main_term, x, ell)
    log_form = math.log(ay / 2) ** ell * gamma_complex(1j * y / 2) * gamma_complex(-1j * y / 2)
    return StirlingPair(x, y, ell, ex, asym, complex(log_form))


# ---------------------------------------------------------------------------
# Mellin norm of Whittaker functions


def whittaker_mellin_norm(m: int, beta, w: complex) -> complex:
    """Closed gamma-product value of ``int |W_m|^2 (Det y)^w d*y``.

    Parameters
    ----------
    m : int
        Degree, at least 2.
    beta : sequence of complex
        Langlands parameters of the Whittaker function.
    w : complex
        Mellin variable, ``Re w > 0``.

    Notes
    -----
    Normalisation follows the closed formula; for ``m = 2`` it equals the
    integral of ``|2 W|^2`` where ``W`` is the unipotent-integral Whittaker
    function of :mod:`glnkit.whittaker`.
    """
    beta = np.asarray(beta, dtype=complex)
    if beta.size != m or m < 2:
        raise ValueError("beta must have length m >= 2")
    w = complex(w)
    args = np.array([(w + bj + np.conj(bk)) / 2 for bj in beta for bk in beta])
    _check_poles(args, "Mellin norm gamma product")
    log_val = -(m - 1) * m / 2 * w * math.log(math.pi)
    log_val += (m - 1) * m * (m + 1) / 6 * math.log(2)
    log_val -= log_gamma(m * w / 2)
    for j in range(1, m):
        for k in range(j, m):
            d = beta[m - k - 1] - beta[m - k + j - 1]
            term = (-0.5 - d / 2) * math.log(math.pi) + log_gamma((1 + d) / 2)
            log_val -= 2 * term.real
    log_val += np.sum(log_gamma(args))
    return complex(np.exp(log_val))
