"""Quadrature helpers shared by the special-function, theta and L-function code."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np


class QuadratureError(RuntimeError):
    """Raised when a quadrature cannot reach its tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved relative error estimate {achieved:.3e})")
        self.achieved = achieved


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerance and budget for adaptive quadrature.

    Parameters
    ----------
    rel_tol : float
        Target relative error, in ``(0, 1e-2]``.
    max_subdivisions : int
        Maximum number of panel doublings.
    truncation_radius : float
        Default cut-off for integrals over infinite ranges, used where a
        routine cannot derive one from a decay bound.
    """

    rel_tol: float = 1e-12
    max_subdivisions: int = 14
    truncation_radius: float = 40.0

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-2:
            raise ValueError("rel_tol must lie in (0, 1e-2]")
        if self.max_subdivisions < 8:
            raise ValueError("max_subdivisions must be at least 8")
        if self.truncation_radius <= 0:
            raise ValueError("truncation_radius must be positive")


DEFAULT_SPEC = QuadratureSpec()


@lru_cache(maxsize=16)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss–Legendre nodes and weights on ``[-1, 1]``."""
    return np.polynomial.legendre.leggauss(order)


def panel_nodes(breaks: np.ndarray, order: int = 20) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of composite Gauss–Legendre on consecutive break points.

    Returns arrays of shape ``(panels, order)``.
    """
    x, w = gauss_legendre(order)
    a, b = breaks[:-1], breaks[1:]
    mid, half = (a + b) / 2, (b - a) / 2
    return mid[:, None] + half[:, None] * x[None, :], half[:, None] * w[None, :]


def integrate_panels(f: Callable, breaks, order: int = 20):
    """Composite Gauss–Legendre integral of a vectorised ``f`` over the break points."""
    t, w = panel_nodes(np.asarray(breaks, dtype=float), order)
    return np.sum(f(t) * w)


def integrate_adaptive(
    f: Callable,
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    initial_panels: int = 8,
    order: int = 16,
    atol: float = 0.0,
    max_nodes: int = 2**20,
):
    """Integrate ``f`` over ``[a, b]`` by panel doubling until two levels agree.

    ``f`` must accept an ndarray of nodes and may return complex values or a
    trailing batch axis: the node array has shape ``(panels, order)`` and ``f``
    returns ``(panels, order)`` or ``(panels, order, ...)``.
    """
    panels = initial_panels
    prev = None
    err, cur = float("inf"), 0.0
    for _ in range(spec.max_subdivisions):
        if panels * order > max_nodes:
            break
        breaks = np.linspace(a, b, panels + 1)
        t, w = panel_nodes(breaks, order)
        vals = f(t)
        extra = vals.ndim - 2
        cur = np.sum(vals * w.reshape(w.shape + (1,) * extra), axis=(0, 1))
        if prev is not None:
            diff = np.abs(cur - prev)
            if np.all(diff <= spec.rel_tol * np.abs(cur) + atol):
                return cur
            err = float(np.max(diff / np.maximum(np.abs(cur), 1e-300)))
        prev = cur
        panels *= 2
    raise QuadratureError("panel doubling did not converge", err)


def averaged_partial_sums(pieces: np.ndarray, levels: int = 12) -> complex:
    """Limit of an oscillating series of half-period integrals by repeated averaging.

    Suited to tails of ``int f(u) cos(2 pi u) du`` with smooth, slowly
    decaying ``f``: the partial sums oscillate around the limit and each
    averaging pass suppresses the oscillation by one more order.
    """
    s = np.cumsum(pieces)
    if s.size <= levels:
        raise ValueError("need more pieces than averaging levels")
    for _ in range(levels):
        s = 0.5 * (s[1:] + s[:-1])
    return s[-1]


def line_trapezoid(f: Callable, center: complex, half_width: float, step: float):
    """Trapezoid rule for ``(1 / 2 pi i) int f(w) dw`` on a vertical segment.

    The segment is ``center + i v`` for ``|v| <= half_width``. Exponentially
    accurate for analytic integrands decaying at the ends.
    """
    v = np.arange(-half_width, half_width + step / 2, step)
    w = center + 1j * v
    return np.sum(f(w)) * step / (2 * np.pi)
