"""Bessel evaluation and root finding against independently frozen values."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectralgauss.specfun import (
    RootList,
    bessel_j,
    bessel_j_prime,
    bessel_zeros,
    beta_fn,
    find_roots,
    gamma_fn,
)

# 30-digit reference values computed once with an arbitrary-precision
# library and frozen here; independent of the runtime Bessel backend.
J_TABLE = [
    (-0.75, 2.6, -0.4976941043665148728725),
    (-0.3, 0.9, 0.7121759850962025121045),
    (-0.25, 7.3, 0.241608204549478400082),
    (0.25, 1.1, 0.7351611762002555270542),
    (0.3, 12.0, -0.05894205710897680335794),
    (0.5, 3.9, -0.2778744147279186860957),
    (0.7, 0.45, 0.3759511222910134478304),
    (0.75, 5.2, -0.3481493707201458722245),
    (1.25, 2.2, 0.5501939723151962918814),
    (1.7, 9.8, 0.2517471728075711885897),
]


def test_bessel_j_frozen_table():
    worst = max(abs(bessel_j(nu, x) - ref) for nu, x, ref in J_TABLE)
    assert worst <= 1e-12


def test_bessel_j_vectorized_matches_scalar():
    xs = np.linspace(0.1, 14.0, 37)
    vec = bessel_j(0.35, xs)
    assert np.allclose(vec, [bessel_j(0.35, x) for x in xs], rtol=0, atol=1e-15)


def test_bessel_j_prime_is_derivative():
    h = 1e-6
    for nu, x, _ in J_TABLE:
        fd = (bessel_j(nu, x + h) - bessel_j(nu, x - h)) / (2.0 * h)
        assert bessel_j_prime(nu, x) == pytest.approx(fd, abs=5e-9)


def test_half_order_closed_form():
    xs = np.linspace(0.2, 20.0, 50)
    ref = np.sqrt(2.0 / (np.pi * xs)) * np.sin(xs)
    assert np.allclose(bessel_j(0.5, xs), ref, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(
    nu=st.floats(-0.95, 1.5),
    r=st.floats(0.3, 3.0),
)
def test_bessel_zeros_properties(nu, r):
    zl = bessel_zeros(nu, r, 12)
    assert zl.roots.size == 12
    assert np.all(np.diff(zl.roots) > 0.0)
    assert np.max(np.abs(bessel_j(nu, r * zl.roots))) <= 1e-10


def test_bessel_zeros_spacing_approaches_pi_over_r():
    for H in (0.25, 0.5, 0.75):
        r = 1.0
        zl = bessel_zeros(1.0 - H, r, 50)
        gaps = np.diff(zl.roots)
        assert abs(gaps[-1] - np.pi / r) <= 1e-3


def test_bessel_zeros_half_order_exact():
    # J_{1/2}(r z) vanishes exactly at z = n pi / r
    zl = bessel_zeros(0.5, 2.0, 30)
    assert np.allclose(zl.roots, np.arange(1, 31) * np.pi / 2.0, rtol=0, atol=1e-12)


def test_find_roots_cosine():
    rl = find_roots(np.cos, 0.0, 20.0, 0.3)
    expect = (np.arange(6) + 0.5) * np.pi
    assert np.allclose(rl.roots[:6], expect, atol=1e-12)


def test_find_roots_count_request():
    rl = find_roots(np.sin, 0.1, 50.0, 0.25, count=10)
    assert rl.roots.size >= 10
    assert np.allclose(rl.roots[:10], np.arange(1, 11) * np.pi, atol=1e-12)


def test_find_roots_rejects_bad_window():
    with pytest.raises(ValueError):
        find_roots(np.cos, 2.0, 1.0, 0.1)
    with pytest.raises(ValueError):
        find_roots(np.cos, 0.0, 1.0, -0.5)


def test_find_roots_nonfinite_raises():
    with pytest.raises(ValueError):
        find_roots(lambda x: 1.0 / (x - 0.5) if x != 0.5 else np.nan, 0.0, 1.0, 0.01)


def test_rootlist_validation():
    with pytest.raises(ValueError):
        RootList(np.array([2.0, 1.0]), np.zeros(2))
    with pytest.raises(ValueError):
        RootList(np.array([-1.0]), np.zeros(1))
    with pytest.raises(ValueError):
        RootList(np.array([1.0, 2.0]), np.zeros(3))


def test_gamma_beta_consistency():
    assert gamma_fn(0.5) == pytest.approx(np.sqrt(np.pi), rel=1e-15)
    for a, b in [(0.3, 0.9), (1.25, 0.75), (2.0, 3.0)]:
        assert beta_fn(a, b) == pytest.approx(
            gamma_fn(a) * gamma_fn(b) / gamma_fn(a + b), rel=1e-13
        )
