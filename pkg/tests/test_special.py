import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special as sp

from smallfactors.primes import DomainError
from smallfactors.sieve import mertens_sum
from smallfactors.special import (
    EULER_GAMMA,
    GammaPole,
    GridFunction,
    buchstab_residual,
    buchstab_w,
    complex_gamma,
    de_residual,
    ell,
    ell_error,
    m_r_convolution,
    m_z,
    m_z_closed,
    m_z_derivative,
    m_z_grid,
    m_z_seed_series,
    mertens_constant,
    reciprocal_gamma,
    rho_r,
    rho_r_integral,
    rho_residual,
    selberg_g,
)

complexes = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


# --- Gamma -------------------------------------------------------------------


def test_gamma_values():
    assert complex_gamma(1) == pytest.approx(1, rel=1e-14)
    assert complex_gamma(5) == pytest.approx(24, rel=1e-13)
    assert complex_gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


@given(complexes)
def test_gamma_matches_scipy(z):
    if abs(z - round(z.real)) < 1e-3 and z.real < 0.5:
        return  # too close to a pole for a relative comparison
    ref = sp.gamma(z)
    assert abs(complex_gamma(z) - ref) <= 1e-12 * abs(ref)


@given(complexes)
def test_gamma_functional_equation(z):
    if abs(z) < 1e-3 or (abs(z - round(z.real)) < 1e-3 and z.real < 0.5):
        return
    assert abs(complex_gamma(z + 1) / complex_gamma(z) - z) <= 1e-11 * max(1, abs(z))


@pytest.mark.parametrize("n", [0, -1, -2, -7])
def test_gamma_poles(n):
    with pytest.raises(GammaPole):
        complex_gamma(n)
    assert reciprocal_gamma(n) == 0


# --- Euler products and constants --------------------------------------------


def test_selberg_g_trivial_points():
    assert selberg_g(1) == 1
    assert selberg_g(0) == 1


def test_selberg_g_at_two_is_six_over_pi_squared():
    # factors collapse to 1 - 1/p^2
    assert selberg_g(2).real == pytest.approx(6 / math.pi**2, rel=1e-10)


def test_ell_values():
    assert ell(1) == 1
    assert ell(0).real == pytest.approx(math.exp(-EULER_GAMMA), rel=1e-14)
    assert ell(-1) == 0
    assert ell(-2) == 0
    assert ell_error(0.5) < 1e-9


@given(st.complex_numbers(max_magnitude=4))
def test_ell_is_g_times_exponential(z):
    # the two Euler products agree factor by factor
    assert abs(ell(z) - selberg_g(z) * cmath.exp((z - 1) * EULER_GAMMA)) <= 1e-10 * max(1, abs(ell(z)))


def test_truncation_tail_correction_is_consistent():
    # a product truncated at 10^5 with its tail term should land on the 10^6 value
    assert abs(selberg_g(0.7, 10**5) - selberg_g(0.7)) < 1e-9


def test_mertens_constant():
    c1 = mertens_constant()
    assert 0.2614 < c1 < 0.2616
    assert c1 == pytest.approx(0.2614972128476428, abs=1e-11)
    assert abs(mertens_sum(10**6) - math.log(math.log(10**6)) - c1) < 0.01
    assert mertens_constant(with_error=True)[1] < 1e-8


# --- Buchstab and Dickman ----------------------------------------------------


def test_buchstab_values():
    assert buchstab_w(1.5) == pytest.approx(2 / 3, abs=1e-15)
    assert buchstab_w(2.0) == pytest.approx(0.5, abs=1e-15)
    # (1 + log(alpha - 1))/alpha on [2, 3]
    for a in (2.25, 2.5, 3.0):
        assert buchstab_w(a) == pytest.approx((1 + math.log(a - 1)) / a, abs=1e-14)
    assert buchstab_w(40.0) == pytest.approx(math.exp(-EULER_GAMMA), abs=1e-8)
    with pytest.raises(DomainError):
        buchstab_w(0.5)


def test_rho_values():
    assert rho_r(1.0, 1.0) == pytest.approx(1, abs=1e-15)
    assert rho_r(0.25, 1.0) == pytest.approx(1, abs=1e-15)
    assert rho_r(2.0, 1.0) == pytest.approx(1 - math.log(2), abs=1e-14)
    # classical Dickman values
    assert rho_r(3.0, 1.0) == pytest.approx(0.0486083882911316, abs=1e-15)
    assert rho_r(5.0, 1.0) == pytest.approx(3.54724700898e-4, rel=1e-10)
    assert rho_r(0.5, 0.5) == pytest.approx(0.5**-0.5 / math.sqrt(math.pi), rel=1e-14)
    with pytest.raises(DomainError):
        rho_r(0, 1)
    with pytest.raises(DomainError):
        rho_r(1, 0)


def test_rho_on_first_cell_matches_quadrature():
    # u^(1-r) rho(u) = 1/Gamma(r) - r * int_1^u t^(-r) (t-1)^(r-1) / Gamma(r) dt on [1, 2]
    r = 0.6
    for u in (1.3, 1.8, 2.0):
        g = lambda s: (1 + s) ** -r / sp.gamma(r)  # noqa: E731
        integral = integrate.quad(g, 0, u - 1, weight="alg", wvar=(r - 1, 0))[0]
        expect = u ** (r - 1) * (1 / sp.gamma(r) - r * integral)
        assert rho_r(u, r) == pytest.approx(expect, abs=1e-12)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_rho_integral_identity(r):
    assert rho_r_integral(r, 40) == pytest.approx(math.exp(r * EULER_GAMMA), abs=1e-10)


def test_rho_integral_small_cutoff():
    assert rho_r_integral(1.0, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert rho_r_integral(2.0, 0.5) == pytest.approx(0.5**2 / 2, abs=1e-15)


# --- m_z -----------------------------------------------------------------------


@pytest.mark.parametrize("z", [0.3, 0.5, 2.0, 0.5 + 0.5j, 1.7 - 0.3j, 4.0])
def test_m_routes_agree_on_first_cell(z):
    for a in (1.0, 1.1, 1.5, 1.9, 2.0):
        closed = m_z_closed(a, z)
        assert abs(m_z(a, z) - closed) < 1e-12
        assert abs(m_z_seed_series(a, z) - closed) < 1e-12
        assert abs(m_z_grid(z, 10)(a) - closed) < 1e-8


def test_m_closed_examples():
    z = 0.4 + 0.2j
    assert m_z_closed(1.0, z) == pytest.approx(selberg_g(z) / complex_gamma(z), abs=1e-15)
    assert m_z_closed(1.7, 1) == pytest.approx(1, abs=1e-15)
    assert abs(m_z_closed(2.0, 0.5) - m_z_grid(0.5)(2.0)) < 1e-8
    with pytest.raises(DomainError):
        m_z_closed(1.5, -0.5)
    with pytest.raises(DomainError):
        m_z_closed(2.5, 0.5)


def test_m_second_cell_by_nested_quadrature():
    # m on [2, 3] from the integral recurrence, using only the closed form on [1, 2]
    z, a = 0.8, 3.0
    m2 = m_z_closed(2.0, z).real
    inner = integrate.quad(lambda u: m_z_closed(u - 1, z).real * u**-z, 2, a, epsabs=1e-14)[0]
    expect = (2 ** (1 - z) * m2 + (1 - z) * inner) / a ** (1 - z)
    assert m_z_grid(z)(a).real == pytest.approx(expect, abs=1e-10)


def test_m_one_is_identically_one():
    g = m_z_grid(1.0, 20)
    assert np.max(np.abs(g.values - 1)) < 1e-15


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0, 2.0, 5.0])
def test_m_positive_for_real_r(r):
    assert np.all(m_z_grid(r, 40).values.real > 0)


def test_m_grid_rejects_bad_z():
    with pytest.raises(DomainError):
        m_z_grid(-0.5)
    with pytest.raises(DomainError):
        m_z_grid(0.5, 150)


@pytest.mark.parametrize("z", [0.05, 0.3, 0.5 + 0.5j, 2.0, 3 + 1j])
def test_delay_equation_residual_m(z):
    assert de_residual(z, 20) <= 1e-7


def test_delay_equation_residual_w_and_rho():
    assert buchstab_residual(20) <= 1e-7
    assert rho_residual(0.1, 20) <= 1e-7
    assert rho_residual(2.0, 20) <= 1e-7


@pytest.mark.parametrize("r", [0.3, 0.5, 1.0, 2.0])
def test_m_tends_to_ell(r):
    gaps = [abs(m_z(a, r) - ell(r)) for a in (5, 10, 20, 40)]
    assert gaps[-1] < 1e-8
    # past alpha = 10 the gap is at the rounding floor
    assert all(b <= a + 1e-13 for a, b in zip(gaps, gaps[1:]))


def test_m_tends_to_w_as_r_vanishes():
    a = np.linspace(1.05, 10, 400)
    w = buchstab_w(a)
    assert np.max(np.abs(m_z(a, 0.01).real - w)) < 0.05
    assert np.max(np.abs(m_z(a, 0.001).real - w)) < 0.005


@pytest.mark.parametrize("z", [0.3, 2.0, 0.5 + 0.5j, 3.0])
def test_m_derivative_factorial_decay(z):
    # B fitted on [2, 5] must keep bounding the derivative out to alpha = 10
    g = m_z_grid(z, 11)
    a = g.nodes[1:-1]
    d = np.abs((g.values[2:] - g.values[:-2]) / (2 * g.step))
    bound = np.array([abs(1 - z) ** math.floor(t) / math.factorial(math.floor(t)) for t in a])
    fit = (a >= 2) & (a <= 5)
    B = np.max(d[fit] / bound[fit])
    tail = (a > 5) & (a <= 10)
    assert np.all(d[tail] <= B * bound[tail])


def test_derivative_agrees_with_difference_quotient():
    z = 0.7
    for a in (2.5, 3.7, 6.2):
        h = 1e-5
        fd = (m_z(a + h, z) - m_z(a - h, z)) / (2 * h)
        assert abs(m_z_derivative(a, z) - fd) < 1e-8


@pytest.mark.parametrize("r", [0.3, 0.5, 1.0, 3.0])
def test_convolution_route(r):
    for a in (1.0, 2.5, 4.0, 7.3):
        assert abs(m_r_convolution(a, r) - m_z_grid(r, 10)(a).real) < 1e-6


def test_convolution_at_alpha_one_and_r_one():
    r = 0.7
    assert m_r_convolution(1.0, r) == pytest.approx((selberg_g(r) / complex_gamma(r)).real, rel=1e-13)
    for a in (1.5, 3.2, 6.0):
        assert m_r_convolution(a, 1.0) == pytest.approx(1.0, abs=1e-9)


# --- GridFunction ------------------------------------------------------------


def test_grid_interpolation_reproduces_nodes_and_cubics():
    nodes = 1 + 0.25 * np.arange(9)
    g = GridFunction(1.0, 0.25, nodes**3 - 2 * nodes)
    assert np.allclose(g(nodes), nodes**3 - 2 * nodes, atol=1e-12)
    t = np.linspace(1, 3, 37)
    assert np.allclose(g(t), t**3 - 2 * t, atol=1e-12)
    with pytest.raises(DomainError):
        g(3.01)
    with pytest.raises(DomainError):
        g(0.99)


def test_grid_csv_round_trip(tmp_path):
    g = m_z_grid(0.5 + 0.25j, 3)
    path = tmp_path / "m.csv"
    g.write_csv(path)
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "alpha,re,im"
    back = np.array([complex(float(r.split(",")[1]), float(r.split(",")[2])) for r in lines[1:]])
    assert np.array_equal(back, g.values)
