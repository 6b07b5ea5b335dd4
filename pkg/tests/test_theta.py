import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glnkit.cosets import PreconditionError
from glnkit.matrix_core import IwasawaCoords
from glnkit.special import PoleError
from glnkit.theta import (
    ThetaContext,
    TruncationWarning,
    check_prop34_bound,
    dual_point,
    eisenstein_completed,
    eisenstein_coset_sum,
    functional_equation_check,
    majorant_identity_first,
    majorant_identity_second,
    residue_check,
    short_vectors,
    theta,
    y_scales,
)


def random_point(rng, k, lo=1.0, hi=2.0):
    y = rng.uniform(lo, hi, k - 1)
    x = {(i, j): rng.uniform(-0.5, 0.5) for i in range(k) for j in range(i + 1, k)}
    return IwasawaCoords.from_y(y, x)


def test_y_scales_decreasing_with_unit_product():
    rng = np.random.default_rng(0)
    for k in (2, 4, 6):
        Y = y_scales(random_point(rng, k, 0.5, 3.0))
        assert math.prod(Y) == pytest.approx(1, rel=1e-12)
        z = random_point(rng, k, 1.0, 3.0)
        assert np.all(np.diff(y_scales(z)) <= 0)


def test_short_vectors_brute_force():
    rng = np.random.default_rng(1)
    z = random_point(rng, 4)
    basis = z.x * y_scales(z)[None, :]
    coeffs, norms = short_vectors(basis, 1.6)
    grid = np.array(np.meshgrid(*[np.arange(-6, 7)] * 4, indexing="ij")).reshape(4, -1).T
    sq = np.sum((grid @ basis) ** 2, axis=1)
    expected = np.sort(sq[(sq <= 1.6**2) & (sq > 0)])
    assert np.allclose(np.sort(norms), expected)
    assert len({tuple(c) for c in coeffs}) == coeffs.shape[0]


def test_gl2_identity_theta_is_square_of_jacobi_theta():
    ctx = ThetaContext.build(IwasawaCoords.from_y([1.0]))
    one_dim = sum(math.exp(-math.pi * m * m) for m in range(-30, 31))
    assert theta(ctx, 1.0) == pytest.approx(one_dim**2, rel=1e-14)


def test_theta_tends_to_one_and_is_monotone():
    ctx = ThetaContext.build(IwasawaCoords.from_y([1.0, 1.0, 1.0]))
    us = [1.0, 2.0, 4.0, 8.0, 16.0]
    vals = [theta(ctx, u) for u in us]
    assert all(v >= 1 for v in vals)
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] - 1 == pytest.approx(8 * math.exp(-16 * math.pi), rel=1e-6)


def test_truncation_tail_estimate_is_honest():
    rng = np.random.default_rng(2)
    z = random_point(rng, 4)
    small = ThetaContext(z, 2.0)
    large = ThetaContext(z, 4.5)
    for u in (1.0, 2.0):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            diff = theta(large, u) - theta(small, u)
        assert 0 <= diff <= small.tail_estimate(u)


def test_truncation_warning():
    ctx = ThetaContext(IwasawaCoords.from_y([1.0, 1.0, 1.0]), 1.5)
    with pytest.warns(TruncationWarning):
        theta(ctx, 1.0)


@pytest.mark.parametrize("s", [0.6 + 0.3j, 0.3 + 1.1j, 0.5 + 5j, 2.0, -1.5 + 0.5j])
def test_gl2_identity_matches_epstein_zeta(s):
    value = eisenstein_completed(IwasawaCoords.from_y([1.0]), s)
    ref = complex(mpmath.pi ** (-s) * mpmath.gamma(s) * 4 * mpmath.zeta(s) * mpmath.dirichlet(s, [0, 1, 0, -1]))
    assert abs(value / ref - 1) < 1e-12


def test_gl2_general_point_matches_epstein_series():
    z = IwasawaCoords.from_y([1.7], {(0, 1): 0.31})
    basis = z.x * y_scales(z)[None, :]
    s = 2.5
    m = np.arange(-1200, 1201)  # box tail ~ 1e-10 relative
    a, b = np.meshgrid(m, m, indexing="ij")
    q = (a * basis[0, 0]) ** 2 + (a * basis[0, 1] + b * basis[1, 1]) ** 2
    brute = np.sum(q[q > 0] ** -s)
    ref = math.pi**-s * math.gamma(s) * brute
    assert eisenstein_completed(z, s) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("k", [4, 6])
def test_functional_equation(k):
    rng = np.random.default_rng(k)
    for _ in range(2):
        z = random_point(rng, k)
        for s in (0.6 + 0.3j, 0.3 + 1.1j):
            assert functional_equation_check(z, s).residual < 1e-8


def test_dual_point_is_involutive():
    z = random_point(np.random.default_rng(3), 4)
    back = dual_point(dual_point(z))
    assert np.allclose(back.y, z.y) and np.allclose(back.x, z.x)


def test_real_for_real_s():
    z = random_point(np.random.default_rng(4), 4)
    for s in (0.3, 0.75, 2.0):
        v = eisenstein_completed(z, s)
        assert abs(v.imag) < 1e-14 * abs(v)


def test_coset_sum_is_half_the_theta_integral():
    z = random_point(np.random.default_rng(5), 4)
    ratio = eisenstein_completed(z, 3.0) / eisenstein_coset_sum(z, 3.0, 4)
    assert abs(ratio - 2) < 1e-4


def test_poles():
    z = IwasawaCoords.from_y([1.0])
    for s in (0, 1):
        with pytest.raises(PoleError):
            eisenstein_completed(z, s)


def test_residue_at_one():
    z = random_point(np.random.default_rng(6), 4)
    vals = residue_check(z)
    errs = [abs(v - 1) for _, v in vals]
    assert errs[-1] < 1e-4
    assert all(b < a for a, b in zip(errs, errs[1:]))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_majorant_exponent_identities(n):
    for k in range(1, 2 * n + 1):
        lhs, rhs = majorant_identity_first(n, k)
        assert lhs == rhs
        lhs, rhs = majorant_identity_second(n, k)
        assert lhs == rhs


def test_growth_bound_identity_and_sweep():
    base = check_prop34_bound(IwasawaCoords.from_y([1.0, 1.0, 1.0]), 0.5 + 5j)
    assert base.ratio < 1
    ratios = []
    for y1 in (1.0, 2.0, 4.0, 8.0):
        r = check_prop34_bound(IwasawaCoords.from_y([y1, 1.0, 1.0]), 0.5 + 5j)
        ratios.append(r.ratio)
    assert max(ratios) < 1
    assert max(ratios) / min(ratios) < 50


def test_growth_bound_precondition():
    with pytest.raises(PreconditionError):
        check_prop34_bound(IwasawaCoords.from_y([0.5, 1.0, 1.0]), 0.5 + 1j)
    with pytest.raises(PreconditionError):
        check_prop34_bound(IwasawaCoords.from_y([1.0, 1.0, 1.0]), 0.7 + 1j)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.6, 2.5), st.floats(-0.5, 0.5), st.floats(-3, 3))
def test_gl2_functional_equation_hypothesis(y, x, t):
    z = IwasawaCoords.from_y([y], {(0, 1): x})
    assert functional_equation_check(z, 0.4 + 1j * t).residual < 1e-9
