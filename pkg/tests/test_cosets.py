from itertools import product
from math import gcd

import numpy as np
import pytest

from glnkit.cosets import (
    EnumerationTooLargeError,
    LatticeEnumSpec,
    NotUnimodularError,
    PreconditionError,
    complete_to_sl,
    coset_key,
    embedded_max_y,
    enumerate_coset_keys,
    enumerate_coset_reps,
    height_ratio_direct,
    in_mirabolic_parabolic,
    integer_inverse,
    membership_oracle,
    random_mirabolic_parabolic,
    same_coset,
    sl_matrices_bounded,
    sl_pool,
    verify_height_contraction,
)
from glnkit.matrix_core import IwasawaCoords, exact_det


def test_identity_key():
    key = coset_key(np.eye(4, dtype=int), 1)
    assert key.level(1) == (0, 0, 0, 1)


def test_sl2_key_is_bottom_row():
    assert coset_key([[2, 1], [5, 3]], 1).minors == ((5, 3),)


def test_non_unimodular_rejected():
    with pytest.raises(NotUnimodularError):
        coset_key([[2, 0], [0, 1]], 1)
    with pytest.raises(NotUnimodularError):
        coset_key([[0, 1], [1, 0]], 1)


def test_integer_inverse():
    rng = np.random.default_rng(0)
    for g in sl_pool(rng, 4, 10):
        assert (np.array(integer_inverse(g)) @ g == np.eye(4, dtype=int)).all()


def test_key_stable_under_parabolic():
    rng = np.random.default_rng(1)
    for n, m in [(2, 1), (3, 1), (3, 2), (4, 1), (4, 2), (4, 3)]:
        pool = sl_pool(rng, n, 20)
        for trial in range(100):
            x = random_mirabolic_parabolic(rng, n, m)
            assert in_mirabolic_parabolic(x, m)
            a = pool[trial % len(pool)]
            assert coset_key(x @ a, m) == coset_key(a, m)
            assert same_coset(x @ a, a, m)


@pytest.mark.parametrize("n,m", [(2, 1), (3, 1), (3, 2), (4, 1)])
def test_minor_signature_matches_exact_membership(n, m):
    rng = np.random.default_rng(10 * n + m)
    pool = sl_pool(rng, n, 40)
    # half the pool are parabolic translates so both outcomes occur
    pool += [random_mirabolic_parabolic(rng, n, m, 2) @ pool[i] for i in range(20)]
    agree = positives = 0
    for a in pool:
        for b in pool:
            by_key = same_coset(a, b, m)
            positives += by_key
            agree += by_key == membership_oracle(a, b, m)
    assert agree == len(pool) ** 2
    assert positives > len(pool)


def test_complete_to_sl_fast_and_general_paths():
    rng = np.random.default_rng(2)
    for block in ([[2, 3, 5]], [[6, 10, 15]], [[2, 0, 3, 0], [0, 5, 0, 7]], [[4, 6, 9, 0]]):
        g = complete_to_sl(block)
        assert exact_det(g.tolist()) == 1
        assert (g[-len(block):] == np.array(block)).all()
    for _ in range(50):
        g0 = sl_pool(rng, 4, 1)[0]
        g = complete_to_sl(g0[2:])
        assert exact_det(g.tolist()) == 1 and (g[2:] == g0[2:]).all()
    with pytest.raises(ValueError):
        complete_to_sl([[2, 4, 6]])


def test_sl2_enumeration_is_coprime_pairs():
    reps = enumerate_coset_reps(LatticeEnumSpec(2, 1, 2))
    pairs = {(c, d) for c, d in product(range(-2, 3), repeat=2) if gcd(c, d) == 1}
    # identify (c, d) with (-c, -d)
    classes = {max(p, (-p[0], -p[1])) for p in pairs}
    assert len(reps) == len(classes)
    assert {tuple(int(v) for v in max(tuple(r[1]), tuple(-r[1]))) for r in reps} == classes


def test_exhaustive_dedupe_matches_enumeration():
    brute = sl_matrices_bounded(3, 1)
    keys = set()
    for g in brute:
        row = tuple(int(v) for v in g[-1])
        first = next(v for v in row if v)
        keys.add(tuple(v * (1 if first > 0 else -1) for v in row))
    enum_keys, _ = enumerate_coset_keys(LatticeEnumSpec(3, 1, 1))
    assert {tuple(int(v) for v in k) for k in enum_keys} == keys


def test_exact_keys_without_sign_identification():
    keys, blocks = enumerate_coset_keys(LatticeEnumSpec(3, 2, 1, identify_sign=False))
    brute = sl_matrices_bounded(3, 1)
    seen = {coset_key(g, 2).minors for g in brute}
    flat = {(tuple(k[:3]), tuple(k[3:])) for k in keys.tolist()}
    assert seen <= flat


def test_identity_represents_its_key():
    for n, m in [(2, 1), (3, 1), (3, 2), (4, 2)]:
        reps = enumerate_coset_reps(LatticeEnumSpec(n, m, 1))
        assert any((r == np.eye(n, dtype=int)).all() for r in reps)


def test_enumeration_is_deterministic_and_sorted():
    spec = LatticeEnumSpec(3, 2, 2)
    k1, b1 = enumerate_coset_keys(spec)
    k2, b2 = enumerate_coset_keys(spec)
    assert (k1 == k2).all() and (b1 == b2).all()
    assert [tuple(r) for r in k1.tolist()] == sorted(tuple(r) for r in k1.tolist())


def test_enumeration_cap():
    with pytest.raises(EnumerationTooLargeError):
        enumerate_coset_keys(LatticeEnumSpec(4, 3, 4, cap=10**6))


def test_height_bound_filters():
    full, _ = enumerate_coset_keys(LatticeEnumSpec(4, 2, 1, block=True))
    cut, _ = enumerate_coset_keys(LatticeEnumSpec(4, 2, 1, block=True, height_bound=2))
    assert 0 < len(cut) < len(full)
    assert np.all(np.sum(cut.astype(float) ** 2, axis=1) <= 2)


def test_height_contraction_examples():
    reps = enumerate_coset_reps(LatticeEnumSpec(4, 2, 2, block=True))
    report = verify_height_contraction(IwasawaCoords.from_y([2, 3, 2]), reps)
    assert report.passed and report.max_ratio <= 1 + 1e-10
    ident = verify_height_contraction(IwasawaCoords.from_y([1, 1, 1]), reps)
    assert ident.passed
    one = verify_height_contraction(IwasawaCoords.from_y([2, 3, 2]), [np.eye(4, dtype=int)])
    assert one.max_ratio == pytest.approx(1, abs=1e-15)


def test_height_ratio_routes_agree():
    rng = np.random.default_rng(3)
    reps = enumerate_coset_reps(LatticeEnumSpec(4, 2, 1, block=True))
    z = IwasawaCoords(4, np.triu(rng.uniform(-1, 1, (4, 4)), 1) + np.eye(4), [1.5, 1.2, 2.5])
    fast = verify_height_contraction(z, reps)
    direct = max(height_ratio_direct(z, g) for g in reps)
    assert fast.max_ratio == pytest.approx(direct, rel=1e-10)


def test_height_precondition():
    with pytest.raises(PreconditionError, match="y_i >= 1"):
        verify_height_contraction(IwasawaCoords.from_y([0.5, 2, 2]), [np.eye(4, dtype=int)])


def test_embedded_max_y_bound():
    rng = np.random.default_rng(4)
    for _ in range(30):
        z = IwasawaCoords(4, np.triu(rng.uniform(-1, 1, (4, 4)), 1) + np.eye(4), rng.uniform(1, 4, 3))
        gamma = sl_pool(rng, 3, 1)[0]
        moved, bound = embedded_max_y(gamma, z)
        assert moved >= bound * (1 - 1e-12)
