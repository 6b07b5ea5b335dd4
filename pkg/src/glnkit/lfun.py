"""Rankin–Selberg L-functions ``L(s, f x f~)`` built from Satake data.

Forms are synthetic. Three kinds are supported:

``isobaric``
    ``alpha_{p,j} = p^{i tau_j}`` with real ``tau`` summing to zero and archimedean
    Langlands parameters ``i tau``. Then ``L(s, f x f~) = prod_{i,j} zeta(s - i(tau_i - tau_j))``
    and the completed function satisfies ``Lambda(s) = Lambda(1 - s)``. Every
    evaluation that needs the functional equation (approximate functional
    equation, ``c_s``, Maass–Selberg) requires this kind.
``sato_tate``
    Satake parameters are eigenvalues of a Haar unitary matrix rotated to
    determinant one, drawn from a generator seeded by ``(seed, p)``.
``constant`` / ``table``
    A fixed Satake vector at every prime, or an explicit table (for example
    loaded from JSON).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import special as sp

from .matrix_core import SpectralParams
from .sieve import eta_at_primes, is_prime, primes_up_to
from .special import PoleError, log_gamma, log_gamma_ratio


class MissingPrimeError(KeyError):
    """Raised when Satake data are requested at a prime outside the stored table."""


class CutoffError(RuntimeError):
    """Raised when a Dirichlet-series cutoff leaves a tail above tolerance."""

    def __init__(self, message: str, tail_estimate: float):
        super().__init__(f"{message} (tail estimate {tail_estimate:.3e})")
        self.tail_estimate = tail_estimate


class DegenerateParameterError(ValueError):
    """Raised on the hyperplanes excluded from the Maass–Selberg relation."""


# ---------------------------------------------------------------------------
# Form data


@dataclass
class CuspFormData:
    """Satake and archimedean data of a degree-``n`` form.

    Parameters
    ----------
    n
        Degree.
    params
        Archimedean spectral parameters; tempered means purely imaginary
        Langlands parameters.
    kind
        ``"isobaric"``, ``"sato_tate"``, ``"constant"`` or ``"table"``.
    petersson_norm
        The inner product ``<f, f>``, an input.
    root_number
        Root number of ``L(s, f x f~)``.
    """

    n: int
    params: SpectralParams
    kind: str
    petersson_norm: float = 1.0
    root_number: complex = 1.0
    tau: np.ndarray | None = None
    seed: int | None = None
    constant: np.ndarray | None = None
    table: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.petersson_norm <= 0:
            raise ValueError("petersson_norm must be positive")
        if abs(abs(self.root_number) - 1) > 1e-12:
            raise ValueError("root number must have modulus 1")
        if self.kind not in ("isobaric", "sato_tate", "constant", "table"):
            raise ValueError(f"unknown form kind {self.kind!r}")

    # -- Satake parameters -------------------------------------------------------

    def satake_at(self, primes) -> np.ndarray:
        """Satake vectors as an array of shape ``(len(primes), n)``."""
        primes = np.asarray(primes, dtype=np.int64).reshape(-1)
        if self.kind == "isobaric":
            return np.exp(1j * np.outer(np.log(primes.astype(float)), self.tau))
        if self.kind == "constant":
            return np.broadcast_to(self.constant, (primes.size, self.n)).copy()
        if self.kind == "table":
            try:
                return np.array([self.table[int(p)] for p in primes]).reshape(-1, self.n)
            except KeyError as exc:
                raise MissingPrimeError(f"no Satake data stored for p = {exc.args[0]}") from None
        return self._sato_tate(primes)

    def _sato_tate(self, primes: np.ndarray) -> np.ndarray:
        store = self._cache.setdefault("sato_tate", {})
        missing = [int(p) for p in primes if int(p) not in store]
        if missing:
            n = self.n
            draws = np.empty((len(missing), n, n), dtype=complex)
            for k, p in enumerate(missing):
                rng = np.random.default_rng([self.seed, p])
                draws[k] = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            q, r = np.linalg.qr(draws)
            d = np.diagonal(r, axis1=1, axis2=2)
            q = q * (d / np.abs(d))[:, None, :]
            eig = np.linalg.eigvals(q)
            eig /= np.abs(eig)
            eig *= np.exp(-1j * np.angle(np.prod(eig, axis=1)) / n)[:, None]
            for p, e in zip(missing, eig):
                store[p] = np.sort_complex(e)
        return np.array([store[int(p)] for p in primes]).reshape(-1, self.n)

    def hecke(self, p: int) -> complex:
        """``lambda(p) = sum_i alpha_{p,i}``."""
        if not is_prime(p):
            raise MissingPrimeError(f"{p} is not prime")
        return complex(np.sum(self.satake_at([p])[0]))

    @property
    def langlands(self) -> np.ndarray:
        return self.params.alpha

    def validate(self, primes) -> None:
        """Check ``|alpha| = 1`` and ``prod alpha = 1`` at the given primes."""
        a = self.satake_at(primes)
        if np.max(np.abs(np.abs(a) - 1), initial=0) > 1e-9:
            raise ValueError("Satake parameters must have modulus 1 (tempered)")
        if np.max(np.abs(np.prod(a, axis=1) - 1), initial=0) > 1e-9:
            raise ValueError("Satake parameters must multiply to 1 (trivial central character)")

    # -- serialisation -----------------------------------------------------------

    def to_json(self, primes_to: int = 100) -> str:
        """Serialise with Satake and Hecke tables for the primes up to ``primes_to``."""
        primes = primes_up_to(primes_to)
        sat = self.satake_at(primes)
        doc = {
            "n": self.n,
            "nu": [[z.real, z.imag] for z in self.params.nu],
            "satake": {str(p): [[z.real, z.imag] for z in row] for p, row in zip(primes, sat)},
            "hecke": {str(p): [complex(np.sum(row)).real, complex(np.sum(row)).imag]
                      for p, row in zip(primes, sat)},
            "petersson_norm": self.petersson_norm,
            "root_number": [complex(self.root_number).real, complex(self.root_number).imag],
            "kind": self.kind,
        }
        if self.tau is not None:
            doc["tau"] = list(map(float, self.tau))
        if self.seed is not None:
            doc["seed"] = int(self.seed)
        if self.constant is not None:
            doc["constant"] = [[z.real, z.imag] for z in self.constant]
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CuspFormData":
        """Load and validate a serialised form.

        Generated kinds are rebuilt from their generator; the stored table is
        checked against it. Otherwise the table itself is the data.
        """
        doc = json.loads(text)
        n = int(doc["n"])
        params = SpectralParams(n, [complex(a, b) for a, b in doc["nu"]])
        table = {int(p): np.array([complex(a, b) for a, b in row]) for p, row in doc["satake"].items()}
        common = dict(petersson_norm=float(doc["petersson_norm"]),
                      root_number=complex(*doc.get("root_number", [1.0, 0.0])))
        kind = doc.get("kind", "table")
        if kind == "isobaric":
            fd = cls(n, params, "isobaric", tau=np.array(doc["tau"], dtype=float), **common)
        elif kind == "sato_tate":
            fd = cls(n, params, "sato_tate", seed=int(doc["seed"]), **common)
        elif kind == "constant":
            fd = cls(n, params, "constant",
                     constant=np.array([complex(a, b) for a, b in doc["constant"]]), **common)
        else:
            fd = cls(n, params, "table", table=table, **common)
        primes = np.array(sorted(table), dtype=np.int64)
        fd.validate(primes)
        if primes.size and np.max(np.abs(fd.satake_at(primes) - np.array([table[int(p)] for p in primes]))) > 1e-9:
            raise ValueError("stored Satake table disagrees with the form's generator")
        for p, (a, b) in doc.get("hecke", {}).items():
            if abs(complex(a, b) - np.sum(table[int(p)])) > 1e-9:
                raise ValueError(f"Hecke eigenvalue at p = {p} is not the sum of the Satake parameters")
        return fd


def isobaric_form(tau, petersson_norm: float = 1.0) -> CuspFormData:
    """Isobaric form with ``alpha_{p,j} = p^{i tau_j}``."""
    tau = np.asarray(tau, dtype=float)
    if abs(tau.sum()) > 1e-12:
        raise ValueError("tau must sum to zero")
    return CuspFormData(tau.size, SpectralParams.from_langlands(1j * tau), "isobaric",
                        petersson_norm=petersson_norm, tau=tau)


def sato_tate_form(n: int, seed: int, tau=None, petersson_norm: float = 1.0) -> CuspFormData:
    """Form with Sato–Tate distributed Satake parameters (seeded per prime)."""
    tau = np.zeros(n) if tau is None else np.asarray(tau, dtype=float)
    return CuspFormData(n, SpectralParams.from_langlands(1j * tau), "sato_tate",
                        petersson_norm=petersson_norm, seed=seed)


def constant_form(alpha_p, tau=None) -> CuspFormData:
    """Form whose Satake vector is ``alpha_p`` at every prime."""
    alpha_p = np.asarray(alpha_p, dtype=complex)
    n = alpha_p.size
    tau = np.zeros(n) if tau is None else np.asarray(tau, dtype=float)
    return CuspFormData(n, SpectralParams.from_langlands(1j * tau), "constant", constant=alpha_p)


def random_isobaric_forms(count: int, n: int = 2, seed: int = 0, spread: float = 2.0) -> list[CuspFormData]:
    """Deterministic list of isobaric forms with ``tau`` drawn from ``[-spread, spread]``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        tau = rng.uniform(-spread, spread, n)
        out.append(isobaric_form(tau - tau.mean()))
    return out


# ---------------------------------------------------------------------------
# Dirichlet coefficients


def _local_series(roots: np.ndarray, degree: int) -> np.ndarray:
    """Coefficients of ``prod_r (1 - r x)^-1`` to ``x^degree``, one row per prime."""
    c = np.zeros((roots.shape[0], degree + 1), dtype=complex)
    c[:, 0] = 1
    for j in range(roots.shape[1]):
        b = roots[:, j]
        for k in range(1, degree + 1):
            c[:, k] += b * c[:, k - 1]
    return c


def _factor_tables(M: int):
    """Smallest prime factor, its full power in ``m``, and the cofactor, for ``m <= M``."""
    m = np.arange(M + 1, dtype=np.int64)
    spf = np.zeros(M + 1, dtype=np.int64)
    for p in primes_up_to(math.isqrt(M)):
        block = spf[p * p::p]
        block[block == 0] = p
    spf[spf == 0] = m[spf == 0]
    spf[:2] = 1
    pe = spf.copy()
    rest = m // np.maximum(spf, 1)
    pending = np.flatnonzero((rest % spf == 0) & (m > 1))
    while pending.size:
        pe[pending] *= spf[pending]
        rest[pending] //= spf[pending]
        pending = pending[rest[pending] % spf[pending] == 0]
    rest[:2] = 1
    return spf, pe, rest


def _multiplicative_fill(M: int, roots_fn, n_roots: int, prime_bound: int | None = None) -> np.ndarray:
    """Multiplicative coefficients from local factors ``prod_r (1 - r p^-s)^-1``."""
    lam_pp = np.zeros(M + 1, dtype=complex)
    lam_pp[1] = 1
    primes = primes_up_to(M if prime_bound is None else min(M, prime_bound))
    if primes.size:
        roots = roots_fn(primes)
        small = primes[primes <= math.isqrt(M)]
        large = primes[primes > math.isqrt(M)]
        lam_pp[large] = np.sum(roots[small.size:], axis=1)
        if small.size:
            top = int(math.floor(math.log(M) / math.log(2))) + 1
            series = _local_series(roots[:small.size], top)
            for k in range(1, top + 1):
                pk = small.astype(float) ** k
                ok = pk <= M
                lam_pp[(small[ok] ** k)] = series[ok, k]
    _, pe, rest = _factor_tables(M)
    lam = np.zeros(M + 1, dtype=complex)
    lam[1] = 1
    idx = np.arange(2, M + 1)
    for _ in range(12):  # each pass fixes numbers with one more distinct prime
        new = lam_pp[pe[idx]] * lam[rest[idx]]
        if np.array_equal(new, lam[idx]):
            break
        lam[idx] = new
    return lam


def _rs_roots(fd: CuspFormData):
    def roots(primes):
        a = fd.satake_at(primes)
        return (a[:, :, None] * np.conj(a)[:, None, :]).reshape(len(primes), -1)
    return roots


def rs_coefficients(fd: CuspFormData, M: int, prime_bound: int | None = None) -> np.ndarray:
    """Dirichlet coefficients ``lambda_{f x f~}(m)`` for ``0 <= m <= M`` (index 0 unused).

    With ``prime_bound`` only primes up to that bound contribute, so the
    result is supported on ``prime_bound``-smooth integers.
    """
    key = ("rs", prime_bound)
    cached = fd._cache.get(key)
    if cached is not None and cached.size > M:
        return cached[: M + 1]
    lam = _multiplicative_fill(M, _rs_roots(fd), fd.n**2, prime_bound)
    if np.max(np.abs(lam.imag)) > 1e-9 * max(1.0, np.max(np.abs(lam.real))):
        raise ArithmeticError("Rankin–Selberg coefficients came out non-real")
    lam = lam.real.copy()
    fd._cache[key] = lam
    return lam


def hecke_coefficients(fd: CuspFormData, M: int) -> np.ndarray:
    """Hecke eigenvalues ``lambda(m)`` for ``m <= M`` (complete symmetric polynomials at prime powers)."""
    return _multiplicative_fill(M, fd.satake_at, fd.n)


@dataclass(frozen=True)
class LSeriesAccumulator:
    """Coefficients to ``M``, the running partial sums of ``lambda(m) m^-s`` and the target ``s``."""

    s: complex
    coefficients: np.ndarray
    partial_sums: np.ndarray

    @property
    def value(self) -> complex:
        return complex(self.partial_sums[-1])


def dirichlet_sum(fd: CuspFormData, s: complex, M: int, prime_bound: int | None = None) -> LSeriesAccumulator:
    """Partial sums of ``sum_{m <= M} lambda_{f x f~}(m) m^-s``."""
    lam = rs_coefficients(fd, M, prime_bound)[1:]
    m = np.arange(1, M + 1, dtype=float)
    terms = lam * np.exp(-complex(s) * np.log(m))
    return LSeriesAccumulator(complex(s), lam, np.cumsum(terms))


def euler_product(fd: CuspFormData, s: complex, P: int) -> complex:
    """``prod_{p <= P} prod_{i,j} (1 - alpha_i conj(alpha_j) p^-s)^-1``."""
    primes = primes_up_to(P)
    beta = _rs_roots(fd)(primes)
    x = beta * np.exp(-complex(s) * np.log(primes.astype(float)))[:, None]
    return complex(np.exp(-np.sum(np.log1p(-x))))


def euler_cutoff(n: int, sigma: float, tol: float = 1e-13) -> int:
    """Prime bound with tail ``n^2 sum_{p > P} p^-sigma`` below ``tol``."""
    if sigma <= 1.5:
        raise ValueError("Euler product evaluation needs Re(s) > 1.5")
    P = 100
    while n**2 * P ** (1 - sigma) / ((sigma - 1) * math.log(P)) > tol:
        P *= 2
    return P


# ---------------------------------------------------------------------------
# Gamma factor and exact isobaric values


def _gamma_shifts(fd: CuspFormData) -> np.ndarray:
    a = fd.langlands
    return (a[:, None] + np.conj(a)[None, :]).reshape(-1)


def log_gamma_factor_rs(fd: CuspFormData, s):
    """``log gamma(s, f x f~)``; ``s`` may be an array."""
    s = np.asarray(s, dtype=complex)
    shifts = _gamma_shifts(fd)
    args = (s[..., None] + shifts) / 2
    out = np.sum(log_gamma(args), axis=-1) - fd.n**2 * s / 2 * math.log(math.pi)
    return complex(out) if np.ndim(out) == 0 else out


def log_gamma_ratio_rs(fd: CuspFormData, s: complex, u):
    """``log gamma(s + u) - log gamma(s)`` computed without cancellation."""
    u = np.asarray(u, dtype=complex)
    z = (complex(s) + _gamma_shifts(fd)) / 2
    out = np.sum(log_gamma_ratio(z, u[..., None] / 2), axis=-1) - fd.n**2 * u / 2 * math.log(math.pi)
    return complex(out) if np.ndim(out) == 0 else out


def gamma_factor_rs(fd: CuspFormData, s):
    """``pi^(-n^2 s / 2) prod_{i,j} Gamma((s + alpha_i + conj(alpha_j)) / 2)``."""
    out = np.exp(log_gamma_factor_rs(fd, s))
    return complex(out) if np.ndim(out) == 0 else out


def _require_isobaric(fd: CuspFormData, what: str):
    if fd.kind != "isobaric":
        raise ValueError(f"{what} needs a functional equation, available for isobaric forms only")


def _differences(fd: CuspFormData) -> np.ndarray:
    return (fd.tau[:, None] - fd.tau[None, :]).reshape(-1)


def exact_rs_L(fd: CuspFormData, s: complex, dps: int = 30) -> complex:
    """``L(s, f x f~) = prod zeta(s - i(tau_i - tau_j))`` for isobaric forms."""
    _require_isobaric(fd, "exact evaluation")
    with mpmath.workdps(dps):
        s = mpmath.mpc(s)
        return complex(mpmath.fprod(mpmath.zeta(s - 1j * d) for d in _differences(fd)))


def exact_completed_mp(fd: CuspFormData, s: complex, dps: int = 30):
    """``Lambda(s) = prod pi^(-w/2) Gamma(w/2) zeta(w)``, ``w = s - i(tau_i - tau_j)``, as an mpmath number."""
    _require_isobaric(fd, "exact evaluation")
    with mpmath.workdps(dps):
        s = mpmath.mpc(s)
        val = mpmath.mpf(1)
        for d in _differences(fd):
            w = s - 1j * d
            val *= mpmath.pi ** (-w / 2) * mpmath.gamma(w / 2) * mpmath.zeta(w)
        return +val


def exact_completed(fd: CuspFormData, s: complex, dps: int = 30) -> complex:
    """:func:`exact_completed_mp` as a Python complex."""
    return complex(exact_completed_mp(fd, s, dps))


# ---------------------------------------------------------------------------
# Approximate functional equation


_BOUND_LINES = (3.0, 5.0, 8.0, 12.0, 18.0, 25.0, 35.0, 50.0, 70.0, 100.0)
_BAND = 1.0  # width in log y of the bands sharing one contour
_CHUNK = 1 << 15


def default_g_exponent(n: int) -> float:
    """Exponent ``E`` in ``G(u) = cos(pi u / 400)^-E``; see :func:`log_g`."""
    return 4.0 * n**3


def log_g(u, exponent: float):
    """``log G(u) = -E log cos(pi u / 400)``, computed as ``-E log1p(-2 sin^2(pi u / 800))``."""
    half = np.sin(np.pi * np.asarray(u, dtype=complex) / 800)
    return -exponent * np.log1p(-2 * half * half)


@dataclass(frozen=True)
class _LineRule:
    """Trapezoid nodes ``c + i (v0 + k h)`` with weights ``h/(2 pi) F(u_k)``."""

    c: float
    v0: float
    h: float
    coeff: np.ndarray  # includes the factor y_ref^-c
    log_y_ref: float

    def evaluate(self, log_y: np.ndarray) -> np.ndarray:
        """``sum_k coeff_k y^-u_k`` by Horner's rule in ``exp(-i h log y)``."""
        out = np.empty(log_y.shape, dtype=complex)
        for a in range(0, log_y.size, _CHUNK):
            ly = log_y[a:a + _CHUNK]
            z = np.exp(-1j * self.h * ly)
            acc = np.full(ly.shape, self.coeff[-1], dtype=complex)
            for ck in self.coeff[-2::-1]:
                acc = acc * z + ck
            out[a:a + _CHUNK] = acc * np.exp(-self.c * (ly - self.log_y_ref) - 1j * self.v0 * ly)
        return out


class ContourWeight:
    """``V(y) = (1/2 pi i) int_(c) K(u) G(u) y^-u du / u^power`` for a gamma-ratio kernel ``K``.

    The integral is independent of ``c`` as long as no singularity is crossed,
    except for the residue at ``u = 0``: ``K(0)`` when ``power = 1`` and
    ``K(0) ((log K)'(0) - log y)`` when ``power = 2`` (``G'(0) = 0``). Each band of ``log y`` uses
    the line ``Re u = c`` that minimises the integrand there, which keeps the
    cancellation in the trapezoid sum small. The kernel has no poles to the
    right of ``Re u = pole_re``.

    Parameters
    ----------
    log_kernel
        Vectorised ``log K(u)``.
    pole_re
        Right-most real part of a pole of ``K``.
    exponent
        The exponent ``E`` of ``G``.
    tol
        Target discretisation error relative to the integrand mass.
    power
        Order of the pole at ``u = 0``, 1 or 2.
    """

    def __init__(self, log_kernel, pole_re: float, exponent: float, tol: float = 1e-17, power: int = 1):
        if power not in (1, 2):
            raise ValueError("power must be 1 or 2")
        self.log_kernel = log_kernel
        self.pole_re = pole_re
        self.exponent = exponent
        self.tol = tol
        self.power = power
        self.residue0 = complex(np.exp(log_kernel(np.array([0j]))[0]))
        # (log K)'(0) by the trapezoid rule on a small circle
        ring = 0.05 * np.exp(2j * np.pi * np.arange(16) / 16)
        self.log_slope0 = complex(np.mean(log_kernel(ring) / ring))
        self._rules: dict[tuple, _LineRule] = {}
        self._c_grid = np.array(sorted({self._nearest_allowed()} | {c for c in np.arange(-40.0, 150.0, 1.0)
                                                                  if self._allowed(c)}))
        kappa = exponent * math.pi**2 / 320000
        v = np.linspace(-1.5, 1.5, 601) * max(20.0, math.sqrt(60 / kappa))
        # |integrand| on every candidate line and on the lines used for the tail bound
        bound_lines = np.array([c for c in _BOUND_LINES if c > pole_re + 0.5])
        self._peak_profile = self._log_f(self._c_grid[:, None] + 1j * v[None, :]).real.max(axis=1)
        wide = np.linspace(-5, 5, 2001) * max(20.0, math.sqrt(60 / kappa))
        self.log_sizes = {}
        for c, prof in zip(bound_lines, self._log_f(bound_lines[:, None] + 1j * wide[None, :]).real):
            top = prof.max()
            if max(prof[0], prof[-1]) > top - 60:
                self.log_sizes[c] = self._line_mass(c)
            else:
                self.log_sizes[c] = top + math.log(np.trapezoid(np.exp(prof - top), wide) / (2 * math.pi))

    def _allowed(self, c: float) -> bool:
        return c > self.pole_re + 0.6 and abs(c) >= 0.6 and c < 190

    def _log_f(self, u):
        return self.log_kernel(u) + log_g(u, self.exponent) - self.power * np.log(u)

    def _nearest_allowed(self) -> float:
        c = max(0.6, self.pole_re + 0.7)
        return c

    def _window(self, c: float, points: int = 1201):
        # |G(c + iv)| ~ exp(-kappa v^2) with kappa = E pi^2 / 320000
        kappa = self.exponent * math.pi**2 / 320000
        vmax = max(20.0, math.sqrt(60 / kappa))
        while True:
            v = np.linspace(-vmax, vmax, points)
            prof = self._log_f(c + 1j * v).real
            if max(prof[0], prof[-1]) < prof.max() - 60:
                return v, prof
            vmax *= 1.5

    def _line_mass(self, c: float) -> float:
        v, prof = self._window(c)
        top = prof.max()
        return top + math.log(np.trapezoid(np.exp(prof - top), v) / (2 * math.pi))

    def log_bound(self, log_y):
        """``log`` of the shifted-contour bound ``min_c y^-c S_c`` for ``y >= 1``."""
        log_y = np.asarray(log_y, dtype=float)
        best = np.full(log_y.shape, np.inf)
        for c, ls in self.log_sizes.items():
            best = np.minimum(best, ls - c * log_y)
        return best

    def best_line(self, log_y: float) -> float:
        """Line minimising the peak of ``|F(u) y^-u|``."""
        return float(self._c_grid[np.argmin(self._peak_profile - self._c_grid * log_y)])

    def rule(self, c: float, log_y_ref: float) -> _LineRule:
        key = (c, log_y_ref)
        if key in self._rules:
            return self._rules[key]
        v, prof = self._window(c)
        peak = prof.max()
        keep = v[prof >= peak - 60]
        lo, hi = keep[0] - 1.0, keep[-1] + 1.0
        d = min(0.8 * abs(c), 0.8 * (c - self.pole_re), 2.5)
        shifted = max(self._log_f(c + d + 1j * v).real.max(), self._log_f(c - d + 1j * v).real.max())
        growth = max(shifted - peak, 0.0) + d * _BAND
        h = 2 * math.pi * d / (math.log(1 / self.tol) + growth + math.log(hi - lo + 1))
        vk = lo + h * np.arange(int(math.ceil((hi - lo) / h)) + 1)
        coeff = h / (2 * math.pi) * np.exp(self._log_f(c + 1j * vk) - c * log_y_ref)
        self._rules[key] = _LineRule(c, lo, h, coeff, log_y_ref)
        return self._rules[key]

    def __call__(self, log_y) -> np.ndarray:
        log_y = np.asarray(log_y, dtype=float)
        flat = log_y.reshape(-1)
        out = np.empty(flat.shape, dtype=complex)
        band = np.floor(flat / _BAND).astype(np.int64)
        for b in np.unique(band):
            sel = band == b
            centre = (b + 0.5) * _BAND
            c = self.best_line(centre)
            vals = self.rule(c, centre).evaluate(flat[sel])
            if c < 0:
                vals = vals + (self.residue0 if self.power == 1
                               else self.residue0 * (self.log_slope0 - flat[sel]))
            out[sel] = vals
        return out.reshape(log_y.shape)


def _tail_estimate(rule: ContourWeight, log_x0: float, sigma: float, log_scale: float, k: int) -> float:
    """Estimate ``sum_{m > x0} |lambda(m)| m^-sigma |V(m scale)|``.

    Uses the mean divisor-function density ``(log x)^(k-1) / (k-1)!`` as a
    proxy for ``|lambda(m)| <= d_k(m)`` and the shifted-contour bound for ``V``.
    """
    ell = log_x0 + np.arange(0, 4000) * 0.02
    log_dens = (k - 1) * np.log(np.maximum(ell, 1e-300)) - sp.gammaln(k)
    integrand = ell * (1 - sigma) + log_dens + rule.log_bound(ell + log_scale)
    top = integrand.max()
    if not np.isfinite(top):
        return 0.0
    return float(np.exp(top) * np.trapezoid(np.exp(integrand - top), ell))


def _choose_cutoff(rule, sigma, log_scale, k, tol) -> int:
    lo = 0.0
    while _tail_estimate(rule, lo, sigma, log_scale, k) > tol:
        lo += 0.1
        if lo > 40:
            raise CutoffError("no cutoff below e^40 reaches the tolerance", _tail_estimate(rule, lo, sigma, log_scale, k))
    return max(int(math.ceil(math.exp(lo))), 1)


@dataclass(frozen=True)
class AFEResult:
    """``L(s, f x f~)`` from the approximate functional equation and its pieces.

    ``value = first + root_number * second - residue_term``.
    """

    s: complex
    X: float
    value: complex
    first: complex
    second: complex
    residue_term: complex
    cutoffs: tuple[int, int]
    tail_estimate: float

    log_gamma: complex = 0j

    @property
    def completed(self) -> complex:
        """``Lambda(s) = gamma(s) L(s)``."""
        return self.value * np.exp(self.log_gamma)


def _pole_groups(fd: CuspFormData, s: complex):
    """Distinct poles of ``Lambda`` with the radius of a safe Cauchy circle around each."""
    poles = sorted({complex(round(w.real, 12), round(w.imag, 12))
                    for d in _differences(fd) for w in (1 + 1j * d, 1j * d)},
                   key=lambda w: (w.real, w.imag))
    out = []
    for w0 in poles:
        others = [abs(w0 - w) for w in poles if w != w0]
        gap = min(others) if others else 1.0
        dist_s = abs(w0 - s)
        if dist_s < 1e-8:
            raise PoleError(f"Lambda has a pole at s = {s}")
        out.append((w0, min(0.4, 0.45 * gap, 0.45 * dist_s)))
    return out


_RESIDUE_NODES = 64


def _log_completed_on_circle(fd: CuspFormData, w0: complex, radius: float) -> np.ndarray:
    key = ("circle", w0, round(radius, 14))
    vals = fd._cache.get(key)
    if vals is None:
        w = w0 + radius * np.exp(2j * np.pi * np.arange(_RESIDUE_NODES) / _RESIDUE_NODES)
        vals = np.array([complex(mpmath.log(exact_completed_mp(fd, complex(x)))) for x in w])
        fd._cache[key] = vals
    return vals


def residue_term(fd: CuspFormData, s: complex, log_x: complex, exponent: float) -> complex:
    """Residues of ``Lambda(s + u) G(u) X^u / u`` at the poles of ``Lambda(s + u)``, divided by ``gamma(s)``.

    Poles of ``Lambda`` sit at ``1 + i d`` and ``i d`` for the differences ``d``
    of ``tau``. Each residue is a trapezoid rule on a circle in the ``w = s + u``
    plane; ``Lambda`` on the circle comes from the exact isobaric product, which
    is the polar data of the form. Everything is combined in logarithms since
    ``gamma(s)`` underflows for large ``|Im s|``.
    """
    _require_isobaric(fd, "the residue terms")
    total = 0j
    lg_s = log_gamma_factor_rs(fd, s)
    theta = np.exp(2j * np.pi * np.arange(_RESIDUE_NODES) / _RESIDUE_NODES)
    for w0, radius in _pole_groups(fd, s):
        w = w0 + radius * theta
        u = w - s
        log_weight = log_g(u, exponent) + u * log_x - np.log(u) - lg_s
        # |Lambda| on the circle is at most e^40 for the parameter ranges used here
        if np.max(log_weight.real) + 40 < -80:
            continue
        log_lam = _log_completed_on_circle(fd, w0, radius)
        total += complex(np.mean(np.exp(log_lam + log_weight) * (w - w0)))
    return total


def _x_phase(n: int, s: complex) -> float:
    """Argument given to ``X``; it cancels the growth ``e^{pi n^2 |Im u| / 4}`` of the gamma ratio."""
    return -math.pi * n * n / 4 * float(np.sign(s.imag))


def afe_L(fd: CuspFormData, s: complex, X: float = 1.0, M: int | None = None,
          tol: float = 1e-13, exponent: float | None = None) -> AFEResult:
    """``L(s, f x f~)`` by the approximate functional equation.

    ``L(s) = sum lambda(m) m^-s V_s(m / X) + eps sum conj(lambda(m)) m^(s-1) V~_s(m X) - R / gamma(s)``
    where ``V_s(y) = (1/2 pi i) int_(3) gamma(s+u)/gamma(s) G(u) y^-u du/u``,
    ``V~_s`` has ``gamma(1-s+u)/gamma(s)`` in its place, and ``R`` is
    :func:`residue_term`. The cutoffs are chosen so that the estimated tails
    stay below ``tol``; an explicit ``M`` that is too short raises
    :class:`CutoffError`.
    """
    _require_isobaric(fd, "the approximate functional equation")
    s = complex(s)
    n = fd.n
    exponent = default_g_exponent(n) if exponent is None else exponent
    lg_s = log_gamma_factor_rs(fd, s)
    k = n * n
    sigma = s.real

    phase = _x_phase(n, s)
    rule1 = ContourWeight(lambda u: log_gamma_factor_rs(fd, s + u) - lg_s + 1j * phase * u, -sigma, exponent)
    rule2 = ContourWeight(lambda u: log_gamma_factor_rs(fd, 1 - s + u) - lg_s - 1j * phase * u,
                          sigma - 1, exponent)
    m1 = _choose_cutoff(rule1, sigma, -math.log(X), k, tol)
    m2 = _choose_cutoff(rule2, 1 - sigma, math.log(X), k, tol)
    if M is not None:
        tail = (_tail_estimate(rule1, math.log(M), sigma, -math.log(X), k)
                + _tail_estimate(rule2, math.log(M), 1 - sigma, math.log(X), k))
        if tail > tol:
            raise CutoffError(f"cutoff M = {M} too small for s = {s}, X = {X}", tail)
        m1 = m2 = M
    top = max(m1, m2)
    lam = rs_coefficients(fd, top)
    m = np.arange(1, top + 1, dtype=float)
    logm = np.log(m)
    first = complex(np.sum(lam[1:m1 + 1] * np.exp(-s * logm[:m1]) * rule1(logm[:m1] - math.log(X))))
    second = complex(np.sum(np.conj(lam[1:m2 + 1]) * np.exp((s - 1) * logm[:m2])
                            * rule2(logm[:m2] + math.log(X))))
    residue = residue_term(fd, s, complex(math.log(X), phase), exponent)
    value = first + fd.root_number * second - residue
    tail = (_tail_estimate(rule1, math.log(m1), sigma, -math.log(X), k)
            + _tail_estimate(rule2, math.log(m2), 1 - sigma, math.log(X), k))
    return AFEResult(s, X, value, first, second, residue, (m1, m2), tail, lg_s)


def afe_value(fd: CuspFormData, t: float, X: float = 1.0, M: int | None = None, tol: float = 1e-13) -> AFEResult:
    """``L(1 + 2int, f x f~)`` by the approximate functional equation."""
    return afe_L(fd, 1 + 2j * fd.n * t, X, M, tol)


def completed_L(fd: CuspFormData, s: complex, method: str = "auto", tol: float = 1e-13) -> complex:
    """``Lambda(s, f x f~) = gamma(s) L(s)``.

    ``method`` is ``"euler"`` (``Re s >= 3``), ``"afe"``, ``"exact"`` or
    ``"auto"`` (Euler product when ``Re s >= 3``, otherwise the approximate
    functional equation).
    """
    s = complex(s)
    if method == "auto":
        method = "euler" if s.real >= 3 else "afe"
    if method == "euler":
        return gamma_factor_rs(fd, s) * euler_product(fd, s, euler_cutoff(fd.n, s.real))
    if method == "afe":
        return afe_L(fd, s, tol=tol).completed
    if method == "exact":
        return exact_completed(fd, s)
    raise ValueError(f"unknown method {method!r}")


def v_weight(fd: CuspFormData, s: complex, y, exponent: float | None = None) -> np.ndarray:
    """``V_s(y)`` on an array of ``y`` (the first-piece weight)."""
    s = complex(s)
    exponent = default_g_exponent(fd.n) if exponent is None else exponent
    lg_s = log_gamma_factor_rs(fd, s)
    logy = np.log(np.asarray(y, dtype=float))
    return ContourWeight(lambda u: log_gamma_factor_rs(fd, s + u) - lg_s, -s.real, exponent)(logy)


def v_star(fd: CuspFormData, s: complex, y, exponent: float | None = None) -> np.ndarray:
    """``V*_s(y) = (1/2 pi i) int_(3) y^-u G(u) gamma(s+u)/gamma(s) du / u^2`` on an array of ``y``."""
    s = complex(s)
    exponent = default_g_exponent(fd.n) if exponent is None else exponent
    lg_s = log_gamma_factor_rs(fd, s)
    logy = np.log(np.asarray(y, dtype=float))
    return ContourWeight(lambda u: log_gamma_factor_rs(fd, s + u) - lg_s, -s.real, exponent, power=2)(logy)


def v_star_cancellation(fd: CuspFormData, s: complex, y, exponent: float | None = None) -> np.ndarray:
    """Natural-log excess of the peak integrand over ``|V*_s(y)|`` on the chosen line.

    Values above about 25 mean the double-precision result has lost most of
    its digits; :func:`v_star_mp` then gives the reference value.
    """
    s = complex(s)
    exponent = default_g_exponent(fd.n) if exponent is None else exponent
    lg_s = log_gamma_factor_rs(fd, s)
    cw = ContourWeight(lambda u: log_gamma_factor_rs(fd, s + u) - lg_s, -s.real, exponent, power=2)
    logy = np.log(np.atleast_1d(np.asarray(y, dtype=float)))
    peaks = np.array([np.min(cw._peak_profile - cw._c_grid * ly) for ly in logy])
    vals = np.abs(cw(logy))
    with np.errstate(divide="ignore"):
        return peaks - np.log(vals)


def v_star_mp(fd: CuspFormData, s: complex, y: float, exponent: float | None = None,
              rel_tol: float = 1e-10) -> complex:
    """``V*_s(y)`` by mpmath quadrature at a precision sized to the cancellation.

    The first pass sizes the working precision from the double-precision
    value; later passes use the precision the previous result calls for plus
    40 digits, until two agree to ``rel_tol`` (else :class:`ArithmeticError`).
    """
    s = complex(s)
    exponent = default_g_exponent(fd.n) if exponent is None else exponent
    first, peak = _v_star_mp(fd, s, y, exponent, None)
    for _ in range(4):
        dps = int((peak - math.log(max(abs(first), 1e-300))) / math.log(10)) + 40
        second, _ = _v_star_mp(fd, s, y, exponent, dps)
        if abs(second - first) <= rel_tol * abs(second):
            return second
        first = second
    raise ArithmeticError(f"high-precision V* did not settle at s = {s}, y = {y}")


def _v_star_mp(fd: CuspFormData, s: complex, y: float, exponent: float, dps: int | None):
    _require_isobaric(fd, "the high-precision weight")
    lg_s = log_gamma_factor_rs(fd, s)
    cw = ContourWeight(lambda u: log_gamma_factor_rs(fd, s + u) - lg_s, -s.real, exponent, power=2)
    ly = math.log(y)
    c = cw.best_line(ly)
    v, prof = cw._window(c)
    prof = prof - c * ly
    peak = prof.max()
    if dps is None:
        # guess the result from the double-precision value, floored at e^-700
        guess = max(math.log(max(abs(cw(np.array([ly]))[0]), 1e-300)), peak - 700)
        dps = int((peak - guess) / math.log(10)) + 25
    keep = v[prof >= peak - (dps + 10) * math.log(10)]
    with mpmath.workdps(dps):
        shifts = [mpmath.mpc(complex(z)) for z in _gamma_shifts(fd)]
        sm = mpmath.mpc(s)
        k2 = fd.n**2

        def lgam(z):
            return -k2 * z / 2 * mpmath.log(mpmath.pi) + mpmath.fsum(mpmath.loggamma((z + d) / 2) for d in shifts)

        lgs = lgam(sm)
        logy = mpmath.log(mpmath.mpf(y))

        def f(vv):
            u = mpmath.mpc(c, vv)
            return mpmath.exp(lgam(sm + u) - lgs - exponent * mpmath.log(mpmath.cos(mpmath.pi * u / 400))
                              - u * logy) / u**2

        pts = list(np.linspace(keep[0] - 1, keep[-1] + 1, max(8, int(keep[-1] - keep[0]) + 2) + 1))
        val = mpmath.quad(f, pts) / (2 * mpmath.pi)
        if c < 0:
            val += cw.residue0 * (cw.log_slope0 - ly)
        return complex(val), peak


def v_star_claim(fd: CuspFormData, t: float, ratios=(1.0, 1.5, 2.0, 4.0, 10.0, 100.0)):
    """``|V*_s(y)|`` against ``2 (y / sqrt(q))^-100`` at ``s = 1 + 2int``, ``y = ratio * sqrt(q)``.

    ``q = (|t| + 1)^(n^2)``. Returns rows ``(ratio, |V*|, bound)``.
    """
    n = fd.n
    sqrt_q = (abs(t) + 1) ** (n * n / 2)
    ratios = np.asarray(ratios, dtype=float)
    vals = np.abs(v_star(fd, 1 + 2j * n * t, ratios * sqrt_q))
    return [(float(r), float(v), float(2 * r**-100)) for r, v in zip(ratios, vals)]


# ---------------------------------------------------------------------------
# c_s and the Maass–Selberg relation


def c_ratio(fd: CuspFormData, s: complex, method: str = "auto", tol: float = 1e-13) -> complex:
    """``c_s = Lambda(2ns - n) / Lambda(1 + 2ns - n)`` for ``L(s, f x f~)``."""
    n = fd.n
    s = complex(s)
    num, den = 2 * n * s - n, 1 + 2 * n * s - n
    return completed_L(fd, num, method, tol) / completed_L(fd, den, method, tol)


def c_ratio_derivative(fd: CuspFormData, s: complex, method: str = "auto", radius: float = 0.03,
                       nodes: int = 32) -> complex:
    """``d c_s / ds`` by the trapezoid rule on a circle of the given radius.

    The nearest poles of ``c_s`` lie ``1 / (4n)`` or more from ``Re s = 1/2``
    for isobaric forms, so the default circle converges like ``(0.24)^nodes``.
    """
    theta = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    vals = np.array([c_ratio(fd, s + radius * z, method) for z in theta])
    return complex(np.mean(vals / theta) / radius)


def maass_selberg(fd: CuspFormData, A: float, r: complex, s: complex, c_r: complex | None = None,
                  c_s: complex | None = None, method: str = "auto") -> complex:
    """Four-term value of ``<E_A(., f; r), E_A(., f; s)>`` for truncated Eisenstein series.

    With ``z = r + conj(s) - 1`` and ``d = r - conj(s)``::

        <f,f>^2 [A^{nz}/z + conj(c_s) A^{nd}/d - c_r A^{-nd}/d - c_r conj(c_s) A^{-nz}/z]
    """
    r, s = complex(r), complex(s)
    sb = s.conjugate()
    if abs(r - sb) < 1e-12:
        raise DegenerateParameterError("Maass–Selberg relation requires r != conj(s)")
    if abs(r + sb - 1) < 1e-12:
        raise DegenerateParameterError("Maass–Selberg relation requires r + conj(s) != 1")
    n = fd.n
    c_r = c_ratio(fd, r, method) if c_r is None else c_r
    c_s = c_ratio(fd, s, method) if c_s is None else c_s
    cbs = np.conj(c_s)
    z, d = r + sb - 1, r - sb
    la = math.log(A)
    terms = (np.exp(n * z * la) / z + cbs * np.exp(n * d * la) / d
             + c_r * np.exp(-n * d * la) / (-d) + c_r * cbs * np.exp(-n * z * la) / (-z))
    return complex(fd.petersson_norm**2 * terms)


def maass_selberg_limit(fd: CuspFormData, A: float, t: float, c_s: complex | None = None,
                        c_prime: complex | None = None, method: str = "auto") -> complex:
    """Closed form of ``<E_A(., f; s), E_A(., f; s)>`` at ``s = 1/2 + it``, ``t != 0``."""
    if t == 0:
        raise DegenerateParameterError("the diagonal limit needs t != 0")
    n = fd.n
    s = 0.5 + 1j * t
    c_s = c_ratio(fd, s, method) if c_s is None else c_s
    c_prime = c_ratio_derivative(fd, s, method) if c_prime is None else c_prime
    la = math.log(A)
    val = (np.conj(c_s) * np.exp(2j * n * t * la) / (2j * t) + c_s * np.exp(-2j * n * t * la) / (-2j * t)
           - c_prime / c_s + 2 * n * la)
    return complex(fd.petersson_norm**2 * val)


@dataclass(frozen=True)
class ConvergenceReport:
    """First-order convergence of the four-term value to the diagonal limit."""

    t: float
    A: float
    limit: complex
    errors: tuple[float, float]
    slope: float

    @property
    def passed(self) -> bool:
        real_ok = abs(self.limit.imag) < 1e-8 * abs(self.limit.real) and self.limit.real >= -1e-8
        return 0.9 <= self.slope <= 1.1 and real_ok


def maass_selberg_convergence(fd: CuspFormData, t: float, As, eps: float = 1e-4,
                              method: str = "auto") -> list[ConvergenceReport]:
    """Relative errors at ``r = s + eps`` and ``s + eps/2`` and the Richardson slope, per ``A``."""
    s = 0.5 + 1j * t
    c_s = c_ratio(fd, s, method)
    c_prime = c_ratio_derivative(fd, s, method)
    c_eps = [c_ratio(fd, s + e, method) for e in (eps, eps / 2)]
    out = []
    for A in As:
        limit = maass_selberg_limit(fd, A, t, c_s, c_prime)
        errs = tuple(abs(maass_selberg(fd, A, s + e, s, c_r, c_s) - limit) / abs(limit)
                     for e, c_r in zip((eps, eps / 2), c_eps))
        out.append(ConvergenceReport(t, A, limit, errs, math.log2(errs[0] / errs[1])))
    return out


def log_a_slope(fd: CuspFormData, t: float, As=(1e2, 1e3, 1e4), method: str = "auto") -> float:
    """Least-squares slope of the diagonal limit against ``log A``."""
    s = 0.5 + 1j * t
    c_s = c_ratio(fd, s, method)
    c_prime = c_ratio_derivative(fd, s, method)
    vals = [maass_selberg_limit(fd, A, t, c_s, c_prime).real for A in As]
    return float(np.polyfit(np.log(As), vals, 1)[0])


# ---------------------------------------------------------------------------
# Zero-free region, Fourier coefficient, growth bounds


@dataclass(frozen=True)
class ZeroFreeRegion:
    """``sigma > 1 - c / log(|t| + 2)^exponent``."""

    c: float
    width: float
    exponent: int


def zero_free_region(t: float, lower_const: float, deriv_const: float) -> ZeroFreeRegion:
    """Mean-value-theorem width from ``|L(1+it)| >= a / log^3`` and ``|L'| <= b log^2``.

    ``c = a / (2 b)``; the exponent is ``3 + 2``.
    """
    if lower_const <= 0 or deriv_const <= 0:
        raise ValueError("the constants must be positive")
    lower_exp, deriv_exp = 3, 2
    exponent = lower_exp + deriv_exp
    c = lower_const / (2 * deriv_const)
    return ZeroFreeRegion(c, c / math.log(abs(t) + 2) ** exponent, exponent)


def fourier_coeff_a1(fd: CuspFormData, p: int, t: float, L_value: complex, c_n: float = 1.0) -> complex:
    """Scalar factor ``c_n conj(lambda(p) eta_{nit}(p)) / (p^{(2n-1)/2} L)`` of the ``(1,...,1,p)`` coefficient."""
    lam = fd.hecke(p)
    eta_p = complex(eta_at_primes(1j * fd.n * t, [p])[0])
    return c_n * np.conj(lam * eta_p) / p ** ((2 * fd.n - 1) / 2) / L_value


def gamma_ratio_bound(fd: CuspFormData, s: complex, us) -> tuple[float, np.ndarray]:
    """Ratios ``|gamma(s+u)/gamma(s)| / (q^{Re u / 2} e^{(pi/2) n^2 |u|})`` and their maximum.

    ``q = (|Im s| / (2n) + 1)^{n^2}``, the conductor at ``s = 1 + 2int``.
    """
    us = np.asarray(us, dtype=complex)
    n = fd.n
    log_q = n * n * math.log(abs(complex(s).imag) / (2 * n) + 1)
    lr = (log_gamma_factor_rs(fd, s + us) - log_gamma_factor_rs(fd, s)).real
    ratios = np.exp(lr - us.real / 2 * log_q - math.pi / 2 * n * n * np.abs(us))
    return float(ratios.max()), ratios


@dataclass(frozen=True)
class GrowthFit:
    """Single constant ``C`` with ``|L(1 + 2int)| <= C log t`` on the sampled ``t``."""

    ts: tuple
    values: tuple
    C: float

    @property
    def ratios(self) -> tuple:
        return tuple(abs(v) / math.log(t) for v, t in zip(self.values, self.ts))


def growth_constant(fd: CuspFormData, ts=(10, 20, 40, 80), tol: float = 1e-8) -> GrowthFit:
    vals = tuple(afe_value(fd, t, tol=tol).value for t in ts)
    C = max(abs(v) / math.log(t) for v, t in zip(vals, ts))
    return GrowthFit(tuple(ts), vals, C)
