import math

import numpy as np
import pytest
from scipy.integrate import quad

from riesz_lab.riesz import make_test_functions
from riesz_lab.semigroups import (
    PoissonParams,
    SubordinationRule,
    form_semigroup,
    heat_apply,
    make_subordination_rule,
    poisson_spectral,
    poisson_subordinated,
    rho_a,
    rho_integral,
)
from riesz_lab.spectral import (
    derivative_field,
    differential_coeffs,
    form_synthesize,
    gradient_lp_norm,
    lp_norm,
    synthesize,
    unit,
)

RULE = make_subordination_rule()


def test_rule_has_unit_mass():
    assert RULE.s_weights.sum() == pytest.approx(1.0, abs=1e-10)


def test_rule_matches_adaptive_quadrature():
    # int e^{-s - c/s} / sqrt(pi s) ds for several c, against scipy quad
    for c in (1e-4, 0.3, 5.0, 80.0):
        ref = quad(lambda s: math.exp(-s - c / s) / math.sqrt(math.pi * s), 0, np.inf, epsabs=0, epsrel=1e-13,
                   limit=400)[0]
        assert RULE.s_weights @ np.exp(-c / RULE.s_nodes) == pytest.approx(ref, rel=1e-10, abs=1e-15)


def test_rule_rejects_nonpositive_nodes():
    with pytest.raises(ValueError):
        SubordinationRule(np.array([0.0, 1.0]), np.array([0.5, 0.5]))


def test_poisson_params_validation():
    with pytest.raises(ValueError):
        PoissonParams(a=-1.0)
    with pytest.raises(ValueError):
        PoissonParams(t=-0.1)


def test_heat_identity_at_zero(laguerre0):
    c = np.random.default_rng(0).standard_normal(32)
    np.testing.assert_array_equal(heat_apply(laguerre0, 0.0, c), c)


def test_heat_halves_unit_eigenvalue(hermite):
    out = heat_apply(hermite, math.log(2), unit(hermite, 1))
    assert out[1] == pytest.approx(0.5, rel=1e-15)


def test_heat_rejects_negative_time(hermite):
    with pytest.raises(ValueError):
        heat_apply(hermite, -1.0, unit(hermite, 1))


@pytest.mark.parametrize("p", [1.5, 2, 4])
def test_heat_contraction(system_1d, p):
    tests = make_test_functions(system_1d, 7, 10, a=1.0).functions
    for c in tests:
        fp = lp_norm(system_1d, synthesize(system_1d, c), p)
        for t in (0.1, 1.0):
            assert lp_norm(system_1d, synthesize(system_1d, heat_apply(system_1d, t, c)), p) <= fp + 1e-8


def test_poisson_identity_at_zero(laguerre0):
    c = np.random.default_rng(1).standard_normal(32)
    np.testing.assert_array_equal(poisson_spectral(laguerre0, PoissonParams(1.0, 0.0), c), c)
    np.testing.assert_array_equal(poisson_subordinated(laguerre0, RULE, PoissonParams(1.0, 0.0), c), c)


def test_poisson_factor_at_eigenvalue_four(laguerre0):
    out = poisson_spectral(laguerre0, PoissonParams(0.0, 1.0), unit(laguerre0, 4))
    assert out[4] == pytest.approx(math.exp(-2.0), rel=1e-15)


@pytest.mark.parametrize("a", [0.0, 1.0])
def test_poisson_second_time_derivative(bessel1, a):
    c = np.random.default_rng(2).standard_normal(bessel1.n_modes)
    t, h = 0.7, 1e-3

    def at(s):
        return poisson_spectral(bessel1, PoissonParams(a, s), c)

    second = (at(t + h) - 2 * at(t) + at(t - h)) / h**2
    np.testing.assert_allclose(second, (bessel1.eigenvalues + a) * at(t), rtol=1e-4, atol=1e-12)


def test_poisson_semigroup_law(hermite):
    c = np.random.default_rng(3).standard_normal(32)
    s, t, a = 0.3, 1.1, 1.0
    both = poisson_spectral(hermite, PoissonParams(a, s), poisson_spectral(hermite, PoissonParams(a, t), c))
    np.testing.assert_allclose(both, poisson_spectral(hermite, PoissonParams(a, s + t), c), rtol=1e-14, atol=0)


def test_poisson_strong_continuity(laguerre1):
    c = make_test_functions(laguerre1, 4, 1, a=1.0).functions[0]
    f = synthesize(laguerre1, c)
    dist = [lp_norm(laguerre1, synthesize(laguerre1, poisson_spectral(laguerre1, PoissonParams(1.0, t), c)) - f, 2)
            for t in (1.0, 0.1, 0.01)]
    assert dist[0] > dist[1] > dist[2]
    assert dist[2] < 0.1


@pytest.mark.parametrize("t", [0.1, 1.0, 5.0])
@pytest.mark.parametrize("a", [0.0, 1.0])
def test_subordination_matches_spectral(system_1d, t, a):
    pp = PoissonParams(a, t)
    for k in range(system_1d.n_modes):
        e = unit(system_1d, k)
        gap = np.max(np.abs(poisson_spectral(system_1d, pp, e) - poisson_subordinated(system_1d, RULE, pp, e)))
        assert gap <= 1e-6


def test_subordinated_constant_mode(hermite):
    for t in (0.1, 1.0, 5.0):
        zero = poisson_subordinated(hermite, RULE, PoissonParams(0.0, t), unit(hermite, 0))
        assert zero[0] == pytest.approx(1.0, abs=1e-10)
        one = poisson_subordinated(hermite, RULE, PoissonParams(1.0, t), unit(hermite, 0))
        assert one[0] == pytest.approx(rho_a(1.0, t), rel=1e-14)
        assert one[0] < 1


@pytest.mark.parametrize("t", [0.0, 0.5, 3.0])
def test_rho_at_zero_shift_is_one(t):
    assert rho_a(0.0, t) == pytest.approx(1.0, abs=1e-10)


def test_rho_at_zero_time_is_one():
    assert rho_a(2.0, 0.0) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("a, t", [(0.25, 0.1), (1.0, 1.0), (4.0, 5.0), (1.0, 20.0)])
def test_rho_matches_closed_form(a, t):
    assert rho_a(a, t) == pytest.approx(math.exp(-t * math.sqrt(a)), rel=1e-9, abs=1e-14)
    assert rho_a(a, t) <= 1.0


@pytest.mark.parametrize("a", [0.25, 1.0, 4.0])
def test_rho_integral(a):
    assert abs(rho_integral(a) - a**-0.5) <= 1e-8


def test_rho_integral_rejects_zero_shift():
    with pytest.raises(ValueError):
        rho_integral(0.0)


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0, np.inf])
@pytest.mark.parametrize("a", [0.0, 1.0])
def test_poisson_contraction_with_factor(any_system, p, a):
    tests = make_test_functions(any_system, 11, 5, a=a).functions
    for c in tests:
        fp = lp_norm(any_system, synthesize(any_system, c), p)
        for t in (0.1, 1.0, 5.0):
            pt = poisson_subordinated(any_system, RULE, PoissonParams(a, t), c)
            assert lp_norm(any_system, synthesize(any_system, pt), p) <= rho_a(a, t) * fp + 1e-8


@pytest.mark.parametrize("a", [0.0, 1.0])
def test_commutation_with_derivative(system_1d, a):
    c = make_test_functions(system_1d, 12, 1, a=a).functions[0]
    for t in (0.1, 1.0, 5.0):
        pp = PoissonParams(a, t)
        left = derivative_field(system_1d, poisson_spectral(system_1d, pp, c))
        right = form_synthesize(system_1d, form_semigroup(system_1d, pp, differential_coeffs(system_1d, c)))
        gap = gradient_lp_norm(system_1d, left - right, 2) / gradient_lp_norm(system_1d, left, 2)
        assert gap <= 1e-6
