"""Command-line front end: ``glnkit <command> [options]``.

Every command prints a report (CSV by default, or JSON) and exits with 0
when all its checks pass, 1 when a check fails and 2 on a usage error.
Options may also come from a ``key = value`` config file; flags on the
command line win. Reports are deterministic: seeds are fixed and floats are
printed with ``repr``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from dataclasses import dataclass, field

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad input; reported with exit status 2."""


# ---------------------------------------------------------------------------
# Parsing helpers

_COMPLEX_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def parse_complex(text: str) -> complex:
    """Parse ``"a+bi"``, ``"a-bi"``, ``"bi"``, ``"a"`` (``j`` also accepted)."""
    raw = str(text).strip().replace(" ", "").replace("I", "i").replace("J", "j").replace("j", "i")
    if not raw:
        raise UsageError("empty complex number")
    if raw.endswith("i"):
        body = raw[:-1]
        # split at the last sign that is not part of an exponent
        cut = max((k for k, ch in enumerate(body) if ch in "+-" and k > 0 and body[k - 1] not in "eE"),
                  default=0)
        re_part, im_part = body[:cut], body[cut:]
        if im_part in ("", "+"):
            im_part = "1"
        elif im_part == "-":
            im_part = "-1"
        if re_part and not _COMPLEX_RE.match(re_part) or not _COMPLEX_RE.match(im_part):
            raise UsageError(f"cannot parse complex number {text!r}")
        return complex(float(re_part) if re_part else 0.0, float(im_part))
    if not _COMPLEX_RE.match(raw):
        raise UsageError(f"cannot parse complex number {text!r}")
    return complex(float(raw), 0.0)


def format_complex(z: complex) -> str:
    z = complex(z)
    sign = "-" if z.imag < 0 or (z.imag == 0 and math.copysign(1, z.imag) < 0) else "+"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def parse_list(text: str, kind=float) -> list:
    parts = [p for p in re.split(r"[,\s]+", str(text).strip()) if p]
    try:
        return [kind(p) for p in parts]
    except (ValueError, UsageError) as exc:
        raise UsageError(f"cannot parse list {text!r}: {exc}") from None


def parse_matrix(text: str) -> list[list[float]]:
    """Rows separated by ``;``, entries by ``,`` or spaces."""
    rows = [parse_list(r) for r in str(text).split(";") if r.strip()]
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise UsageError("matrix rows must have equal length")
    return rows


def read_config(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; keys use ``-`` or ``_``."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {num}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


# ---------------------------------------------------------------------------
# Reports


def _plain(v):
    """numpy scalars to Python scalars, so ``repr`` prints bare numbers."""
    return v.item() if hasattr(v, "item") and not isinstance(v, (list, tuple)) else v


def _cell(v):
    v = _plain(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, complex):
        return format_complex(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(_cell(x) for x in v)
    return str(v)


def _json_value(v):
    v = _plain(v)
    if isinstance(v, complex):
        return format_complex(v)
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


@dataclass
class Report:
    command: str
    rows: list = field(default_factory=list)
    passed: bool = True

    def add(self, ok: bool | None = None, **row):
        if ok is not None:
            row["pass"] = bool(ok)
            self.passed &= bool(ok)
        self.rows.append(row)

    def render(self, fmt: str) -> str:
        if fmt == "json":
            doc = {"command": self.command, "passed": self.passed,
                   "rows": [{k: _json_value(v) for k, v in r.items()} for r in self.rows]}
            return json.dumps(doc, indent=2) + "\n"
        buf = io.StringIO()
        keys: list = []
        for r in self.rows:
            keys += [k for k in r if k not in keys]
        writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\r\n")
        writer.writeheader()
        for r in self.rows:
            writer.writerow({k: _cell(r.get(k, "")) for k in keys})
        return buf.getvalue()


# ---------------------------------------------------------------------------
# Command handlers


def _rng(args):
    import numpy as np
    return np.random.default_rng(args.seed)


def _form(args):
    from .lfun import CuspFormData, isobaric_form, sato_tate_form

    if getattr(args, "form", None):
        try:
            with open(args.form, encoding="utf-8") as fh:
                return CuspFormData.from_json(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read form file: {exc}") from None
    if getattr(args, "tau", None):
        return isobaric_form(parse_list(args.tau), petersson_norm=args.petersson_norm)
    return sato_tate_form(args.n, args.seed, petersson_norm=args.petersson_norm)


def cmd_iwasawa(args) -> Report:
    import numpy as np
    from .matrix_core import iwasawa_decompose, y_from_wedges

    g = np.array(parse_matrix(args.matrix)) if args.matrix else _rng(args).normal(size=(args.n, args.n))
    coords = iwasawa_decompose(g)
    y_wedge = y_from_wedges(g)
    rep = Report("iwasawa")
    for i, yi in enumerate(coords.y, 1):
        rel = abs(yi - y_wedge[i - 1]) / yi
        rep.add(rel < 1e-10, coord=f"y{i}", value=float(yi), wedge_route=float(y_wedge[i - 1]),
                rel_diff=float(rel))
    for i in range(coords.k):
        for j in range(i + 1, coords.k):
            rep.add(coord=f"x{i + 1}{j + 1}", value=float(coords.x[i, j]))
    return rep


def cmd_coset(args) -> Report:
    from .cosets import membership_oracle, random_mirabolic_parabolic, same_coset, sl_pool

    rng = _rng(args)
    n, m = args.n, args.m
    if not 1 <= m < n:
        raise UsageError("coset depth must satisfy 1 <= m < n")
    pool = sl_pool(rng, n, args.pool)
    pool += [random_mirabolic_parabolic(rng, n, m, 2) @ pool[i] for i in range(args.pool // 2)]
    agree = same = 0
    for a in pool:
        for b in pool:
            k = same_coset(a, b, m)
            same += k
            agree += k == membership_oracle(a, b, m)
    rep = Report("coset")
    rep.add(agree == len(pool) ** 2, n=n, m=m, pairs=len(pool) ** 2, agreements=agree, same_coset_pairs=same)
    return rep


def _gl_point(args, k):
    from .matrix_core import IwasawaCoords

    if args.y:
        y = parse_list(args.y)
        if len(y) != k - 1:
            raise UsageError(f"need {k - 1} Iwasawa y coordinates for GL({k})")
        return IwasawaCoords.from_y(y)
    return IwasawaCoords.from_y(_rng(args).uniform(1, 2, k - 1))


def cmd_eisenstein(args) -> Report:
    from .theta import eisenstein_coset_sum, eisenstein_completed, functional_equation_check

    s = parse_complex(args.s)
    z = _gl_point(args, 2 * args.n)
    rep = Report("eisenstein")
    if args.check_fe:
        row = functional_equation_check(z, s)
        rep.add(row.residual < args.tol, n=args.n, s=s, y=list(row.y), value=row.value,
                reflected=row.reflected, residual=row.residual)
    elif args.coset_bound:
        theta_val = eisenstein_completed(z, s)
        coset = 2 * eisenstein_coset_sum(z, s, args.coset_bound)
        rel = abs(theta_val - coset) / abs(theta_val)
        rep.add(rel < args.tol, n=args.n, s=s, y=[float(v) for v in z.y], value=theta_val,
                coset_value=coset, residual=rel)
    else:
        rep.add(n=args.n, s=s, y=[float(v) for v in z.y], value=eisenstein_completed(z, s))
    return rep


def cmd_whittaker(args) -> Report:
    from .whittaker import whittaker_direct, whittaker_stade

    nu = [parse_complex(v) for v in re.split(r"[,\s]+", args.nu.strip()) if v]
    y = parse_list(args.y)
    kernel = whittaker_stade(args.n, nu, y)
    rep = Report("whittaker")
    if args.compare:
        kernel = kernel.as_completed()
        direct = whittaker_direct(args.n, nu, y).as_completed()
        rel = abs(kernel.value - direct.value) / abs(direct.value)
        rep.add(rel < args.tol, n=args.n, nu=nu, y=y, kernel=kernel.value, direct=direct.value, rel_err=rel)
    else:
        rep.add(n=args.n, nu=nu, y=y, completed=kernel.value, plain=kernel.as_plain().value)
    return rep


def cmd_lfun(args) -> Report:
    from .lfun import afe_L, afe_value, exact_rs_L

    fd = _form(args)
    rep = Report("lfun")
    if args.s is not None:
        s = parse_complex(args.s)
        results = [afe_L(fd, s, X) for X in (args.X, 2 * args.X)]
    else:
        results = [afe_value(fd, args.t, X) for X in (args.X, 2 * args.X)]
    a, b = results
    rel = abs(a.value - b.value) / abs(a.value)
    row = dict(s=a.s, X=a.X, value=a.value, value_2X=b.value, rel_diff=rel, cutoffs=list(a.cutoffs),
               residue_term=a.residue_term, tail_estimate=a.tail_estimate)
    if args.exact:
        row["exact"] = exact_rs_L(fd, a.s)
    rep.add(rel < args.tol, **row)
    return rep


def cmd_maass_selberg(args) -> Report:
    from .lfun import log_a_slope, maass_selberg_convergence

    fd = _form(args)
    As = parse_list(args.A)
    if any(A < 1 for A in As):
        raise UsageError("truncation height A must be at least 1")
    rep = Report("maass-selberg")
    for r in maass_selberg_convergence(fd, args.t, As, args.eps, args.method):
        rep.add(r.passed, t=r.t, A=r.A, limit=r.limit, err_eps=r.errors[0], err_half_eps=r.errors[1],
                slope=r.slope)
    if args.slope:
        slope = log_a_slope(fd, args.t, method=args.method)
        target = 2 * fd.n * fd.petersson_norm**2
        rep.add(abs(slope - target) < 0.05 * target, t=args.t, A="log-slope", limit=slope, slope=target)
    return rep


def cmd_sieve(args) -> Report:
    from .sieve import PreconditionViolation, PrimeWindow, eta_lower_density, good_prime_density, overlap_density

    if args.N < 2:
        raise UsageError("window start N must be at least 2")
    rep = Report("sieve")
    try:
        window = PrimeWindow.build(args.N)
        if args.scan == "good":
            r = good_prime_density(_form(args), args.N, window)
        elif args.scan == "eta-density":
            r = eta_lower_density(args.t, args.n, args.N, window)
        else:
            r = overlap_density(_form(args), args.t, args.n, args.N, window)
    except PreconditionViolation as exc:
        raise UsageError(str(exc)) from None
    row = r.as_row()
    ok = row.pop("pass")
    rep.add(ok, **row)
    return rep


def cmd_psi(args) -> Report:
    from .psi import PsiSpec, decay_fit, mellin_cutoff, mellin_cutoff_exact, positivity_scan, psi_tilde, zero_checks

    rep = Report("psi")
    if args.action == "cutoff":
        for x in parse_list(args.x):
            if x <= 0:
                raise UsageError("cutoff argument x must be positive")
            val = mellin_cutoff(x, V=args.V)
            err = abs(val - mellin_cutoff_exact(x))
            rep.add(err < 1e-4, check="cutoff", x=x, value=val, exact=mellin_cutoff_exact(x), error=err)
        return rep
    alpha = parse_list(args.alpha)
    try:
        spec = PsiSpec(args.R, len(alpha), tuple(alpha), args.order, args.strip)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    v0 = psi_tilde(spec, 0)
    rep.add(abs(v0 - 1) < 1e-10, check="value_at_0", value=v0)
    for z in zero_checks(spec):
        rep.add(z.passed, check="zero", at=complex(0, z.d), value=z.value, order=z.measured_order,
                expected=z.expected_order)
    fit = decay_fit(spec)
    rep.add(fit.finite, check="decay", value=fit.C, at=fit.worst_point)
    scan = positivity_scan(spec)
    rep.add(scan.passed(-1e-9), check="positivity", value=scan.minimum)
    return rep


def cmd_zfr(args) -> Report:
    from .lfun import zero_free_region

    if args.lower <= 0 or args.deriv <= 0:
        raise UsageError("the lower-bound and derivative constants must be positive")
    rep = Report("zfr")
    for t in parse_list(args.t):
        z = zero_free_region(t, args.lower, args.deriv)
        rep.add(t=t, c=z.c, width=z.width, exponent=z.exponent, sigma_min=1 - z.width)
    return rep


# -- verify ----------------------------------------------------------------------------


def _verify_matrix(rep):
    from fractions import Fraction
    from itertools import combinations

    import numpy as np
    from .matrix_core import MinorIndex, compose_iwasawa, iwasawa_decompose, minor, wedge_norm_sq, y_from_wedges

    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(20):
        g = rng.normal(size=(4, 4))
        worst = max(worst, float(np.max(np.abs(iwasawa_decompose(g).y / y_from_wedges(g) - 1))))
    rep.add(worst < 1e-10, suite="matrix", check="qr_vs_wedge_y", value=worst)
    bad = 0
    for _ in range(100):
        k = int(rng.integers(1, 5))
        a, b = rng.integers(-3, 4, (4, 4)), rng.integers(-3, 4, (4, 4))
        rows = tuple(sorted(rng.choice(4, k, replace=False)))
        cols = tuple(sorted(rng.choice(4, k, replace=False)))
        rhs = sum(minor(a, MinorIndex(rows, ks)) * minor(b, MinorIndex(ks, cols)) for ks in combinations(range(4), k))
        bad += minor(a @ b, MinorIndex(rows, cols)) != rhs
    rep.add(bad == 0, suite="matrix", check="cauchy_binet_exact", value=bad)
    bad = 0
    upper = np.triu(rng.integers(-5, 6, (5, 5)))
    for k in range(1, 6):
        for rows in combinations(range(5), k):
            for cols in combinations(range(5), k):
                if any(i > j for i, j in zip(rows, cols)):
                    bad += minor(upper, MinorIndex(rows, cols)) != 0
    rep.add(bad == 0, suite="matrix", check="upper_triangular_minors_vanish", value=bad)
    bad = 0
    for k in range(2, 5):
        y = [Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 9))) for _ in range(k - 1)]
        x = np.eye(k, dtype=object)
        for i in range(k):
            for j in range(i + 1, k):
                x[i, j] = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 5)))
        z = compose_iwasawa(x, y)
        for i in range(k):
            expect = Fraction(1)
            for ell in range(1, i + 1):
                expect *= y[ell - 1] ** (i + 1 - ell)
            bad += wedge_norm_sq(z, i) != expect**2
    rep.add(bad == 0, suite="matrix", check="wedge_norm_exact", value=bad)


def _verify_coset(rep):
    import numpy as np
    from .cosets import membership_oracle, random_mirabolic_parabolic, same_coset, sl_pool

    rng = np.random.default_rng(2)
    for n, m in ((2, 1), (3, 2)):
        pool = sl_pool(rng, n, 16)
        pool += [random_mirabolic_parabolic(rng, n, m, 2) @ pool[i] for i in range(8)]
        bad = sum(same_coset(a, b, m) != membership_oracle(a, b, m) for a in pool for b in pool)
        rep.add(bad == 0, suite="coset", check=f"signature_vs_membership_{n}_{m}", value=bad)


def _verify_theta(rep):
    from .matrix_core import IwasawaCoords
    from .theta import functional_equation_check, majorant_identity_first, majorant_identity_second

    row = functional_equation_check(IwasawaCoords.from_y([1.3, 1.1, 1.7]), 0.6 + 0.3j)
    rep.add(row.residual < 1e-8, suite="theta", check="functional_equation_gl4", value=row.residual)
    bad = sum(lhs != rhs for n in (1, 2, 3) for k in range(1, 2 * n + 1)
              for lhs, rhs in (majorant_identity_first(n, k), majorant_identity_second(n, k)))
    rep.add(bad == 0, suite="theta", check="exponent_identities", value=bad)


def _verify_whittaker(rep):
    from .whittaker import whittaker_direct, whittaker_stade

    k = whittaker_stade(2, [0.8 + 1.5j], [0.7]).as_completed().value
    d = whittaker_direct(2, [0.8 + 1.5j], [0.7]).as_completed().value
    rel = abs(k - d) / abs(d)
    rep.add(rel < 1e-6, suite="whittaker", check="kernel_vs_direct_gl2", value=rel)


def _verify_lfun(rep):
    import numpy as np
    from .lfun import (afe_value, c_ratio, dirichlet_sum, euler_product, exact_rs_L, isobaric_form,
                       rs_coefficients, sato_tate_form)

    fd = sato_tate_form(2, 4)
    rep.add(bool(np.min(rs_coefficients(fd, 10**4)) >= -1e-9), suite="lfun", check="coefficients_nonnegative",
            value=float(np.min(rs_coefficients(fd, 10**4))))
    diff = abs(euler_product(fd, 3.0, 100) - dirichlet_sum(fd, 3.0, 10**6, prime_bound=100).value)
    rep.add(diff < 1e-8, suite="lfun", check="euler_vs_dirichlet", value=diff)
    iso = isobaric_form([0.7, -0.7])
    res = afe_value(iso, 10)
    rel = abs(res.value - exact_rs_L(iso, res.s)) / abs(res.value)
    rep.add(rel < 1e-8, suite="lfun", check="afe_vs_zeta_product", value=rel)
    mod = abs(abs(c_ratio(iso, 0.5 + 3j)) - 1)
    rep.add(mod < 1e-6, suite="lfun", check="c_unimodular", value=mod)


def _verify_sieve(rep):
    from .lfun import sato_tate_form
    from .sieve import PrimeWindow, eta, eta_lower_density, overlap_density

    rep.add(eta(0, 12) == 6, suite="sieve", check="eta_0_12", value=eta(0, 12))
    w = PrimeWindow.build(10**5)
    r = eta_lower_density(10, 2, 10**5, w)
    rep.add(r.passed, suite="sieve", check="eta_density", value=r.fraction)
    r = overlap_density(sato_tate_form(2, 3), 10, 2, 10**5, w)
    rep.add(r.passed, suite="sieve", check="overlap_density", value=r.fraction)


def _verify_psi(rep):
    from .psi import PsiSpec, mellin_cutoff, mellin_cutoff_exact, positivity_scan, psi_tilde, zero_checks

    spec = PsiSpec(2.0, 2, (1.0, -1.0))
    rep.add(abs(psi_tilde(spec, 0) - 1) < 1e-10, suite="psi", check="value_at_0", value=psi_tilde(spec, 0))
    rep.add(all(z.passed for z in zero_checks(spec)), suite="psi", check="zero_orders",
            value=min(z.measured_order for z in zero_checks(spec)))
    rep.add(positivity_scan(spec).passed(), suite="psi", check="positivity", value=positivity_scan(spec).minimum)
    err = max(abs(mellin_cutoff(x) - mellin_cutoff_exact(x)) for x in (0.1, 0.5, 1, 2, 10, 100))
    rep.add(err < 1e-4, suite="psi", check="mellin_cutoff", value=err)


SUITES = {
    "matrix": _verify_matrix, "coset": _verify_coset, "theta": _verify_theta, "whittaker": _verify_whittaker,
    "lfun": _verify_lfun, "sieve": _verify_sieve, "psi": _verify_psi,
}


def cmd_verify(args) -> Report:
    rep = Report("verify")
    names = list(SUITES) if args.suite == "all" else [args.suite]
    for name in names:
        SUITES[name](rep)
    return rep


# ---------------------------------------------------------------------------
# Argument parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file supplying defaults for any option")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--threads", type=int, default=None, help="cap on worker threads for numeric libraries")
    common.add_argument("--seed", type=int, default=0)

    form = argparse.ArgumentParser(add_help=False)
    form.add_argument("--form", help="JSON file with cusp form data")
    form.add_argument("--tau", help="isobaric form with Satake parameters p^(i tau_j); comma list summing to 0")
    form.add_argument("--n", type=int, default=2, help="degree")
    form.add_argument("--petersson-norm", type=float, default=1.0)

    p = argparse.ArgumentParser(prog="glnkit", description="GL(n) automorphic form numerics")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("iwasawa", parents=[common], help="Iwasawa decomposition of a matrix")
    c.add_argument("--matrix", help='rows separated by ";", e.g. "2,1;0,3"')
    c.add_argument("--n", type=int, default=3, help="size of a random matrix when --matrix is absent")
    c.set_defaults(func=cmd_iwasawa)

    c = sub.add_parser("coset", parents=[common], help="minor-signature coset test against exact membership")
    c.add_argument("--n", type=int, default=3)
    c.add_argument("--m", type=int, default=1)
    c.add_argument("--pool", type=int, default=30)
    c.set_defaults(func=cmd_coset)

    c = sub.add_parser("eisenstein", parents=[common], help="completed maximal parabolic Eisenstein series")
    c.add_argument("--n", type=int, default=2, help="half the matrix size")
    c.add_argument("--s", default="0.6+0.3i")
    c.add_argument("--y", help="Iwasawa y coordinates (default: seeded uniform in [1, 2])")
    c.add_argument("--check-fe", action="store_true", help="compare with the reflected value at 1 - s")
    c.add_argument("--coset-bound", type=int, default=0, help="compare with the coset sum at this entry bound")
    c.add_argument("--tol", type=float, default=1e-8)
    c.set_defaults(func=cmd_eisenstein)

    c = sub.add_parser("whittaker", parents=[common], help="Whittaker function by the kernel formula")
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--nu", default="0.8+1.5i", help="spectral parameters, comma separated")
    c.add_argument("--y", default="0.7")
    c.add_argument("--compare", action="store_true", help="also evaluate the defining integral")
    c.add_argument("--tol", type=float, default=1e-6)
    c.set_defaults(func=cmd_whittaker)

    c = sub.add_parser("lfun", parents=[common, form], help="Rankin-Selberg L-value by the approximate functional equation")
    c.add_argument("--t", type=float, default=10.0, help="evaluate at s = 1 + 2int")
    c.add_argument("--s", default=None, help="evaluate at this s instead")
    c.add_argument("--X", type=float, default=1.0)
    c.add_argument("--exact", action="store_true", help="add the zeta-product value (isobaric forms)")
    c.add_argument("--tol", type=float, default=1e-6)
    c.set_defaults(func=cmd_lfun)

    c = sub.add_parser("maass-selberg", parents=[common, form], help="epsilon-limit of the Maass-Selberg relation")
    c.add_argument("--t", type=float, default=2.5)
    c.add_argument("--A", default="1,10,100")
    c.add_argument("--eps", type=float, default=1e-4)
    c.add_argument("--method", choices=("auto", "afe", "exact"), default="auto")
    c.add_argument("--slope", action="store_true", help="also fit the log A slope over A = 1e2, 1e3, 1e4")
    c.set_defaults(func=cmd_maass_selberg)

    c = sub.add_parser("sieve", parents=[common, form], help="prime-density scans over [N, 2N]")
    c.add_argument("scan", choices=("good", "eta-density", "overlap"))
    c.add_argument("--t", type=float, default=10.0)
    c.add_argument("--N", type=int, default=10**5)
    c.set_defaults(func=cmd_sieve)

    c = sub.add_parser("psi", parents=[common], help="Mellin test function checks and the Mellin cutoff integral")
    c.add_argument("action", nargs="?", choices=("contract", "cutoff"), default="contract")
    c.add_argument("--R", type=float, default=2.0)
    c.add_argument("--alpha", default="1,-1")
    c.add_argument("--order", type=int, default=4)
    c.add_argument("--strip", type=float, default=0.5)
    c.add_argument("--x", default="0.1,0.5,1,2,10,100")
    c.add_argument("--V", type=float, default=1e5, help="contour truncation for the cutoff integral")
    c.set_defaults(func=cmd_psi)

    c = sub.add_parser("zfr", parents=[common], help="zero-free region width from the two constants")
    c.add_argument("--t", default="10")
    c.add_argument("--lower", type=float, default=1.0)
    c.add_argument("--deriv", type=float, default=1.0)
    c.set_defaults(func=cmd_zfr)

    c = sub.add_parser("verify", parents=[common], help="run invariant suites")
    c.add_argument("suite", nargs="?", choices=("all",) + tuple(SUITES), default="all")
    c.set_defaults(func=cmd_verify)
    return p


def _apply_config(parser, argv, args):
    """Fill options not given on the command line from the config file."""
    cfg = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    given = set()
    for action in sub._actions:
        if any(opt in argv for opt in action.option_strings):
            given.add(action.dest)
    for key, value in cfg.items():
        action = next((a for a in sub._actions if a.dest == key), None)
        if action is None:
            raise UsageError(f"config key {key!r} is not an option of {args.command}")
        if key in given:
            continue
        if action.const is True:
            value = value.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            try:
                value = action.type(value)
            except ValueError:
                raise UsageError(f"config key {key!r}: bad value {value!r}") from None
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"config key {key!r}: {value!r} not in {sorted(action.choices)}")
        setattr(args, key, value)


def _cap_threads(count: int):
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ[var] = str(count)
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return
    threadpool_limits(count)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_PASS
    try:
        if args.config:
            _apply_config(parser, argv, args)
        if args.threads is not None:
            if args.threads < 1:
                raise UsageError("--threads must be at least 1")
            _cap_threads(args.threads)
        report = args.func(args)
    except UsageError as exc:
        print(f"glnkit {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, ArithmeticError) as exc:
        print(f"glnkit {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = report.render(args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
