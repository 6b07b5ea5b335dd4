from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glnkit.matrix_core import (
    IwasawaCoords,
    MinorIndex,
    SingularMatrixError,
    SpectralParams,
    b_matrix,
    compose_iwasawa,
    compound_matrix,
    exact_det,
    height,
    height_of_matrix,
    i_nu,
    iwasawa_decompose,
    langlands_params,
    minor,
    nu_from_langlands,
    wedge_norm_sq,
    y_from_wedges,
)


def random_coords(rng, k):
    x = np.triu(rng.uniform(-2, 2, (k, k)), 1) + np.eye(k)
    return IwasawaCoords(k, x, rng.uniform(0.3, 3.0, k - 1))


# --- Iwasawa decomposition ---------------------------------------------------


def test_identity_decomposes_trivially():
    c = iwasawa_decompose(np.eye(4))
    assert np.allclose(c.y, 1) and np.allclose(c.x, np.eye(4))


def test_diagonal_example():
    c = iwasawa_decompose(np.diag([4.0, 2.0, 1.0]), k=3)
    assert np.allclose(c.y, [2, 2])


def test_round_trip_hundred_cases():
    rng = np.random.default_rng(1)
    for trial in range(100):
        k = 2 + trial % 5
        c = random_coords(rng, k)
        back = iwasawa_decompose(c.matrix())
        assert np.max(np.abs(back.y / c.y - 1)) < 1e-12
        assert np.max(np.abs(back.x - c.x)) < 1e-12 * (1 + np.max(np.abs(c.x)))


def test_random_matrix_recomposes_up_to_orthogonal_and_scalar():
    rng = np.random.default_rng(2)
    for _ in range(30):
        g = rng.uniform(-2, 2, (4, 4))
        if abs(np.linalg.det(g)) < 0.05:
            continue
        c = iwasawa_decompose(g)
        z = c.matrix()
        # g = r z kappa  =>  g g^T = r^2 z z^T
        lhs, rhs = g @ g.T, z @ z.T
        r2 = lhs[-1, -1] / rhs[-1, -1]
        assert np.max(np.abs(lhs - r2 * rhs)) < 1e-10 * np.max(np.abs(lhs))


def test_qr_and_wedge_routes_agree():
    rng = np.random.default_rng(3)
    for _ in range(20):
        g = rng.normal(size=(5, 5))
        assert np.allclose(iwasawa_decompose(g).y, y_from_wedges(g), rtol=1e-10)


def test_singular_rejected():
    with pytest.raises(SingularMatrixError):
        iwasawa_decompose(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_coords_validation():
    with pytest.raises(ValueError):
        IwasawaCoords.from_y([1.0, -1.0])
    with pytest.raises(ValueError):
        IwasawaCoords.from_y([1.0], {(1, 0): 2.0})


# --- I_nu and Langlands parameters ---------------------------------------------


def test_b_matrix_small():
    assert b_matrix(3).tolist() == [[1, 2], [2, 1]]
    b4 = b_matrix(4)
    assert b4.tolist() == [[1, 2, 3], [2, 4, 2], [3, 2, 1]]


def test_i_nu_examples():
    nu = (0.3 + 0.2j, -0.7 + 1.1j)
    c = IwasawaCoords.from_y([2.0, 3.0])
    expected = 2 ** (nu[0] + 2 * nu[1]) * 3 ** (2 * nu[0] + nu[1])
    assert abs(i_nu(c, nu) - expected) < 1e-13 * abs(expected)
    assert i_nu(IwasawaCoords.from_y([1, 1, 1]), (1, 2j, 3)) == pytest.approx(1)
    assert i_nu(IwasawaCoords.from_y([5.0]), [0.25]) == pytest.approx(5**0.25)


def test_i_nu_dimension_mismatch():
    with pytest.raises(ValueError):
        i_nu(IwasawaCoords.from_y([1.0, 2.0]), SpectralParams(4, [0, 0, 0]))


def test_langlands_n2_examples():
    assert np.allclose(langlands_params(2, [0.5]), [0, 0])
    assert np.allclose(langlands_params(2, [0.5 + 3.0j]), [3j, -3j])


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6), st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=5, max_size=5))
def test_langlands_sum_zero(n, raw):
    alpha = langlands_params(n, raw[: n - 1])
    assert abs(alpha.sum()) < 1e-12 * (1 + np.abs(alpha).max())


def test_langlands_inverse_round_trip():
    rng = np.random.default_rng(4)
    for n in range(2, 7):
        nu = rng.normal(size=n - 1) + 1j * rng.normal(size=n - 1)
        sp = SpectralParams(n, nu)
        assert np.allclose(SpectralParams.from_langlands(sp.alpha).nu, nu)
    with pytest.raises(ValueError):
        nu_from_langlands([1.0, 1.0])


# --- minors ----------------------------------------------------------------------


def test_minor_index_validation():
    with pytest.raises(ValueError):
        MinorIndex((1, 0), (0, 1))
    with pytest.raises(IndexError):
        minor(np.eye(3, dtype=int), MinorIndex((2, 3), (0, 1)))


def test_identity_principal_minors():
    eye = np.eye(5, dtype=int)
    for k in range(1, 6):
        for rows in combinations(range(5), k):
            assert minor(eye, MinorIndex(rows, rows)) == 1


def test_exact_det_against_fraction_elimination():
    rng = np.random.default_rng(5)
    for _ in range(50):
        a = rng.integers(-9, 10, (5, 5)).tolist()
        assert exact_det(a) == exact_det([[Fraction(v) for v in r] for r in a])
        assert exact_det(a) == round(np.linalg.det(np.array(a, float)))


def test_upper_triangular_minors_vanish():
    rng = np.random.default_rng(6)
    for _ in range(5):
        m = np.triu(rng.integers(-5, 6, (6, 6)))
        for k in range(1, 7):
            for rows in combinations(range(6), k):
                for cols in combinations(range(6), k):
                    if any(i > j for i, j in zip(rows, cols)):
                        assert minor(m, MinorIndex(rows, cols)) == 0


def test_cauchy_binet_exact():
    rng = np.random.default_rng(7)
    for _ in range(200):
        k = int(rng.integers(1, 5))
        a = rng.integers(-3, 4, (4, 4))
        b = rng.integers(-3, 4, (4, 4))
        rows = tuple(sorted(rng.choice(4, k, replace=False)))
        cols = tuple(sorted(rng.choice(4, k, replace=False)))
        lhs = minor(a @ b, MinorIndex(rows, cols))
        rhs = sum(minor(a, MinorIndex(rows, ks)) * minor(b, MinorIndex(ks, cols)) for ks in combinations(range(4), k))
        assert lhs == rhs


def test_compound_matrix_is_multiplicative():
    rng = np.random.default_rng(8)
    a = rng.integers(-3, 4, (4, 4))
    b = rng.integers(-3, 4, (4, 4))
    assert (compound_matrix(a @ b, 2) == compound_matrix(a, 2).dot(compound_matrix(b, 2))).all()


# --- wedge norms and height --------------------------------------------------------


def test_wedge_identity_matrix():
    for i in range(4):
        assert wedge_norm_sq(np.eye(4, dtype=int), i) == 1


def test_wedge_norm_exact_rational_iwasawa():
    rng = np.random.default_rng(9)
    for k in range(2, 6):
        y = [Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 9))) for _ in range(k - 1)]
        x = np.eye(k, dtype=object)
        for i in range(k):
            for j in range(i + 1, k):
                x[i, j] = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 5)))
        z = compose_iwasawa(x, y)
        for i in range(k):
            expected = Fraction(1)
            for ell in range(1, i + 1):
                expected *= y[ell - 1] ** (i + 1 - ell)
            assert wedge_norm_sq(z, i) == expected**2


def test_wedge_of_translated_point_matches_minor_sum():
    rng = np.random.default_rng(10)
    c = random_coords(rng, 4)
    gamma = np.array([[1, 2, 0, 1], [0, 1, 1, 0], [1, 3, 1, 1], [0, 0, 1, 1]])
    g = gamma @ c.matrix()
    for i in range(4):
        rows = tuple(range(3 - i, 4))
        direct = sum(np.linalg.det(g[np.ix_(rows, cols)]) ** 2 for cols in combinations(range(4), i + 1))
        assert wedge_norm_sq(g, i) == pytest.approx(direct, rel=1e-12)


def test_height_examples():
    assert height(IwasawaCoords.from_y([1, 1, 1])) == 1
    assert height(IwasawaCoords.from_y([2, 2, 2])) == pytest.approx(16)
    with pytest.raises(ValueError):
        height(IwasawaCoords.from_y([2, 2]))


def test_height_of_matrix_matches_coordinates():
    rng = np.random.default_rng(11)
    for k in (2, 4, 6):
        c = random_coords(rng, k)
        g = 3.0 * c.matrix() @ np.linalg.qr(rng.normal(size=(k, k)))[0]
        assert height_of_matrix(g) == pytest.approx(height(c), rel=1e-10)
