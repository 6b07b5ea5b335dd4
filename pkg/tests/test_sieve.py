import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glnkit.lfun import constant_form, isobaric_form, sato_tate_form
from glnkit.sieve import (
    PreconditionViolation, PrimeWindow, divisors, eta, eta_at_primes, eta_failures,
    eta_lower_density, eta_threshold, factorize, good_prime_density, is_prime, overlap_density,
    primes_in_range, primes_up_to,
)


def brute_primes(lo, hi):
    return [m for m in range(max(lo, 2), hi + 1) if all(m % d for d in range(2, math.isqrt(m) + 1))]


def test_primes_up_to_small():
    assert list(primes_up_to(50)) == brute_primes(2, 50)
    assert primes_up_to(1).size == 0


@pytest.mark.parametrize("lo,hi,segment", [(2, 1000, 64), (990, 2100, 100), (10**5, 10**5 + 500, 37)])
def test_segmented_sieve_matches_brute_force(lo, hi, segment):
    assert list(primes_in_range(lo, hi, segment)) == brute_primes(lo, hi)


def test_prime_window_counts_and_confirms():
    w = PrimeWindow.build(10**5)
    assert w.count == len(primes_in_range(10**5, 2 * 10**5))
    assert w.primes[0] >= 10**5 and w.primes[-1] <= 2 * 10**5
    assert all(is_prime(int(p)) for p in w.primes[::97])


def test_miller_rabin_known_values():
    assert is_prime(2) and is_prime(97) and is_prime(2**61 - 1)
    assert not is_prime(1) and not is_prime(561) and not is_prime(3215031751)


def test_eta_small_values():
    assert eta(0, 12) == 6
    assert eta(0, 1) == 1
    assert isinstance(eta(0, 30), int)
    p = 13
    s = 0.3 + 1.7j
    assert eta(s, p) == pytest.approx(p**s + p**-s, rel=1e-14)


def test_eta_zero_is_divisor_count():
    for m in range(1, 200):
        assert eta(0, m) == len(divisors(m))


@given(st.floats(-50, 50), st.sampled_from([2, 3, 5, 101, 7919, 104729]))
def test_eta_modulus_on_imaginary_axis(t, p):
    assert abs(eta(1j * t, p)) == pytest.approx(2 * abs(math.cos(t * math.log(p))), abs=1e-12)


def test_eta_multiplicative_exact_at_zero():
    rng = np.random.default_rng(7)
    pairs = 0
    while pairs < 100:
        a, b = (int(x) for x in rng.integers(1, 2000, 2))
        if math.gcd(a, b) != 1:
            continue
        assert eta(0, a * b) == eta(0, a) * eta(0, b)
        pairs += 1


def test_eta_multiplicative_complex():
    rng = np.random.default_rng(8)
    s = 0.25 + 3.1j
    for _ in range(30):
        a, b = (int(x) for x in rng.integers(1, 500, 2))
        if math.gcd(a, b) == 1:
            assert eta(s, a * b) == pytest.approx(eta(s, a) * eta(s, b), rel=1e-12)


def test_eta_at_primes_vectorised():
    ps = primes_up_to(100)
    vals = eta_at_primes(0.5j, ps)
    assert np.allclose(vals, [eta(0.5j, int(p)) for p in ps])


def test_factorize_roundtrip():
    for m in (1, 2, 360, 9973, 2**10 * 3**5):
        assert math.prod(p**e for p, e in factorize(m).items()) == m


@pytest.mark.parametrize("t,n,N", [(10, 2, 10**5), (5, 3, 10**5), (30, 2, 10**6)])
def test_eta_density_above_threshold(t, n, N):
    rep = eta_lower_density(t, n, N)
    assert rep.threshold == pytest.approx(1 - 1 / (20 * n * n))
    assert rep.passed, rep


def test_eta_density_t_zero_is_one():
    rep = eta_lower_density(0, 2, 1000)
    assert rep.fraction == 1.0


def test_eta_density_precondition():
    with pytest.raises(PreconditionViolation):
        eta_lower_density(10, 2, 50)
    with pytest.raises(PreconditionViolation):
        eta_lower_density(0.5, 2, 1000)


def test_eta_threshold_value():
    assert eta_threshold(2) == pytest.approx(1 / (4e6 * 16))


def test_eta_failures_cluster_near_odd_half_periods():
    # a generous bound produces failures; they must sit where cos(n t log p) vanishes
    t, n, N, delta = 10, 2, 10**5, 0.05
    bad, dist = eta_failures(t, n, N, delta)
    assert bad.size > 0
    band = math.asin(delta / 2) / (n * t)
    assert np.all(dist <= band + 1e-12)
    spacing = math.pi / (n * t)
    # the band is a small part of each period, so the clustering is not an accident
    assert 2 * band / spacing < 0.05


def test_good_prime_density_sato_tate():
    fd = sato_tate_form(2, seed=3)
    rep = good_prime_density(fd, 10**5)
    assert rep.passed
    assert rep.fraction > 10 * rep.threshold


def test_good_prime_density_all_zero_fails():
    w = np.exp(2j * np.pi / 3)
    fd = constant_form([1, w, w * w])
    rep = good_prime_density(fd, 10**4)
    assert rep.count == 0 and rep.fraction == 0 and not rep.passed


def test_ramanujan_violation_raises():
    fd = constant_form([2.0, 0.5])
    with pytest.raises(ValueError, match="Ramanujan"):
        good_prime_density(fd, 1000)


def test_overlap_density_and_inclusion_exclusion():
    fd = sato_tate_form(2, seed=3)
    window = PrimeWindow.build(10**5)
    ov = overlap_density(fd, 10, 2, 10**5, window)
    good = good_prime_density(fd, 10**5, window)
    et = eta_lower_density(10, 2, 10**5, window)
    assert ov.passed
    assert ov.count >= good.count + et.count - window.count
    assert ov.count <= min(good.count, et.count)


def test_overlap_at_t_zero_matches_good_primes():
    fd = isobaric_form([0.4, -0.4])
    window = PrimeWindow.build(10**4)
    assert overlap_density(fd, 0, 2, 10**4, window).count == good_prime_density(fd, 10**4, window).count


def test_report_row_fields():
    row = eta_lower_density(10, 2, 10**4).as_row()
    assert set(row) == {"N", "count", "fraction", "threshold", "pass"}
