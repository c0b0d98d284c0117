import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracext.errors import BesselUnderflowWarning, DomainError
from fracext.specialfn import bessel_k, bessel_k_scaled, gamma


def k_half(z):
    return math.sqrt(math.pi / (2 * z)) * math.exp(-z)


def k_three_halves(z):
    return k_half(z) * (1 + 1 / z)


def k_five_halves(z):
    return k_half(z) * (1 + 3 / z + 3 / z**2)


# gamma


@pytest.mark.parametrize("x, expected", [(1.0, 1.0), (0.5, math.sqrt(math.pi)), (1.5, math.sqrt(math.pi) / 2)])
def test_gamma_examples(x, expected):
    assert gamma(x) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5, math.inf, math.nan])
def test_gamma_domain(x):
    with pytest.raises(DomainError):
        gamma(x)


def test_gamma_against_mpmath():
    xs = np.concatenate([np.linspace(0.01, 10.0, 200), [1e-3, 0.25, 0.75, 1.25]])
    err = max(abs(gamma(x) / float(mpmath.gamma(x)) - 1) for x in xs)
    assert err <= 1e-13


# bessel_k


@pytest.mark.parametrize(
    "nu, z, expected",
    [(0.5, 1.0, 0.4610685044478946), (1.5, 1.0, 0.9221370088957891), (1.5, 2.0, 0.1799066579520922)],
)
def test_bessel_examples(nu, z, expected):
    assert bessel_k(nu, z) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize(
    "nu, z, expected",
    [(0.5, 1.0, math.sqrt(math.pi / 2)), (0.5, 4.0, math.sqrt(math.pi / 8)), (1.5, 1.0, 2 * math.sqrt(math.pi / 2))],
)
def test_bessel_scaled_examples(nu, z, expected):
    assert bessel_k_scaled(nu, z) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("z", [1e-6, 0.01, 0.3, 1.0, 1.99, 2.0, 2.01, 5.0, 30.0, 200.0, 700.0])
def test_half_integer_closed_forms(z):
    assert bessel_k(0.5, z) == pytest.approx(k_half(z), rel=1e-12)
    assert bessel_k(1.5, z) == pytest.approx(k_three_halves(z), rel=1e-12)
    assert bessel_k(2.5, z) == pytest.approx(k_five_halves(z), rel=1e-12)


def test_bessel_against_mpmath():
    nus = [0.01, 0.25, 0.5, 0.999, 1.0, 1.001, 1.3, 1.75, 2.0, 2.25, 2.99]
    zs = [1e-5, 1e-2, 0.5, 1.9, 2.1, 7.0, 40.0, 300.0, 700.0]
    worst = 0.0
    for nu in nus:
        for z in zs:
            ref = float(mpmath.besselk(nu, z))
            worst = max(worst, abs(bessel_k(nu, z) / ref - 1))
    assert worst <= 1e-10


def test_bessel_vectorized_matches_scalar():
    z = np.array([0.1, 1.0, 3.0, 10.0])
    v = bessel_k(1.3, z)
    assert v.shape == z.shape
    assert np.array_equal(v, [bessel_k(1.3, zz) for zz in z])


def test_scaled_composition():
    for nu in (0.3, 1.5, 2.7):
        for z in (0.2, 3.0, 50.0):
            assert bessel_k(nu, z) == pytest.approx(bessel_k_scaled(nu, z) * math.exp(-z), rel=4e-16)


def test_scaled_no_underflow_far_out():
    v = bessel_k_scaled(1.5, 1e6)
    assert v == pytest.approx(math.sqrt(math.pi / 2e6) * (1 + 1e-6), rel=1e-12)


def test_underflow_flag():
    with pytest.warns(BesselUnderflowWarning):
        assert bessel_k(1.5, 800.0) == 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert bessel_k(1.5, 700.0) > 0.0


@pytest.mark.parametrize("nu, z", [(1.0, 0.0), (1.0, -1.0), (0.0, 1.0), (3.0, 1.0), (-0.5, 1.0), (1.0, math.nan)])
def test_bessel_domain(nu, z):
    with pytest.raises(DomainError):
        bessel_k(nu, z)
    with pytest.raises(DomainError):
        bessel_k_scaled(nu, z)


@settings(max_examples=200, deadline=None)
@given(nu=st.floats(1.001, 1.999), z=st.floats(1e-3, 100.0))
def test_recurrence(nu, z):
    # K_{nu+1} = K_{nu-1} + (2 nu / z) K_nu, all orders inside (0, 3)
    lhs = bessel_k_scaled(nu + 1, z)
    rhs = bessel_k_scaled(nu - 1, z) + 2 * nu / z * bessel_k_scaled(nu, z)
    assert lhs == pytest.approx(rhs, rel=1e-9)


@settings(max_examples=200, deadline=None)
@given(nu=st.floats(0.01, 2.99), z1=st.floats(1e-4, 600.0), dz=st.floats(1e-3, 50.0))
def test_monotone_decay(nu, z1, dz):
    assert bessel_k(nu, z1 + dz) < bessel_k(nu, z1)


@pytest.mark.parametrize("nu", [0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 2.9])
def test_small_argument_asymptotics(nu):
    z = 1e-6
    assert z**nu * bessel_k(nu, z) == pytest.approx(2 ** (nu - 1) * math.gamma(nu), rel=1e-5)
