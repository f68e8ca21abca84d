from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from advfv import (
    ConstantClearance,
    InvalidArgumentError,
    MichaelisMentenClearance,
    UnsupportedVariantError,
    baseline_params,
    default_equilibrium_seeds,
    disease_free_state,
    find_equilibria,
    invariant_bounds,
    reaction_F,
)
from advfv.model import (
    chi_eval,
    continuous_jacobian,
    gamma_eval,
    gamma_lipschitz,
    gamma_range,
    lambda_sup,
    stress_S,
)


def test_baseline_parameter_values(params):
    p = params
    assert p.r1 == 0.1 and p.r2 == 0.1
    assert p.d == 0.15
    assert isinstance(p.gamma_variant, ConstantClearance)
    assert p.gamma_variant.gamma0 == 0.05
    assert p.tau1 == 1.0 and p.tau2 == 1.0 and p.tau3 == 1.0 and p.tauS == 1.0
    assert p.tauP == 0.03
    assert p.C == 1.0 and p.nu == 2.0
    assert p.alpha1 == 1.0 and p.alpha2 == 1.0
    assert p.sigma == 0.001 and p.lambdaM == 0.001 and p.m_hat == 1.0
    assert p.tau0 == 0.0
    assert p.d1 == p.d3 == p.d4 == p.d5 == 1.0
    assert p.chi_variant == "logistic" and p.chi_alpha == 24.0


def test_baseline_params_accepts_overrides():
    p = baseline_params(0.3, chi_variant="linear", chi_alpha=40.0)
    assert p.d == 0.3
    assert p.chi_variant == "linear"
    assert p.chi_alpha == 40.0


def test_invariant_bounds_frozen_values(params):
    # frozen from tests/oracles/rectangle_bounds.py
    beta = invariant_bounds(params).beta
    np.testing.assert_allclose(
        beta,
        [800.0 / 9.0, 4000.0 / 27.0, 20.0 / 3.0, 1.0, 1.0],
        rtol=1e-14,
    )


def test_invariant_bounds_rejects_low_carrying_capacity(params):
    # the rectangle construction needs lambda/sigma <= m_hat
    bad = replace(params, m_hat=0.5)
    with pytest.raises(InvalidArgumentError):
        invariant_bounds(bad)


def test_invariant_bounds_rejects_zero_clearance(params):
    bad = replace(params, gamma_variant=ConstantClearance(0.0))
    with pytest.raises(InvalidArgumentError):
        invariant_bounds(bad)


def test_rectangle_contains(params):
    b = invariant_bounds(params)
    assert b.contains(np.zeros((5, 3)))
    assert b.contains(b.beta.reshape(5, 1))
    assert not b.contains(np.full((5, 1), -0.01))
    over = np.zeros((5, 1))
    over[3] = 1.5
    assert not over[3] < 0 and not b.contains(over)
    assert b.contains(over, tol=0.6)


def test_disease_free_state(params):
    e0 = disease_free_state(params)
    np.testing.assert_allclose(e0, [0.0, 0.0, 0.0, 1.0, 0.0])
    np.testing.assert_allclose(reaction_F(params, e0), 0.0, atol=1e-16)


def test_reaction_rates_at_a_hand_checked_point(params):
    u = np.array([1.0, 2.0, 3.0, 1.0, 0.5])
    F = reaction_F(params, u)
    # r1*u3^2 - (gamma + tau0)*u1
    assert F[0] == pytest.approx(0.1 * 9.0 - 0.05 * 1.0)
    # gamma*u1 - tauP*u2
    assert F[1] == pytest.approx(0.05 * 1.0 - 0.03 * 2.0)
    # S - d*u3 - r2*u1*u3 - r1*u3^2, S = tauS*u5/(1 + C*u1^2)
    s = 0.5 / 2.0
    assert F[2] == pytest.approx(s - 0.15 * 3.0 - 0.1 * 3.0 - 0.1 * 9.0)
    # u4 at the carrying capacity: growth term vanishes
    assert F[3] == pytest.approx(-0.001 * 1.0 + 0.001)
    # tau1*u1/(1 + tau2*u1)*u4 - tau3*u5
    assert F[4] == pytest.approx(0.5 * 1.0 - 0.5)


def test_reaction_rejects_negative_state(params):
    u = np.array([0.1, 0.1, -0.2, 1.0, 0.1])
    with pytest.raises(InvalidArgumentError):
        reaction_F(params, u)
    # check=False skips the guard for callers that clip afterwards
    out = reaction_F(params, u, check=False)
    assert np.all(np.isfinite(out))


def test_reaction_rejects_wrong_shape(params):
    with pytest.raises(InvalidArgumentError):
        reaction_F(params, np.zeros(4))


def test_constant_clearance():
    gv = ConstantClearance(0.05)
    assert gamma_eval(gv, 0.0) == 0.05
    assert gamma_eval(gv, 7.3) == 0.05
    assert gamma_range(gv) == (0.05, 0.05)
    assert gamma_lipschitz(gv) == 0.0


def test_michaelis_menten_clearance():
    gv = MichaelisMentenClearance(0.05, 0.2, 2.0)
    assert gamma_eval(gv, 0.0) == pytest.approx(0.05)
    assert gamma_eval(gv, 1.0) == pytest.approx(0.05 + 0.2 / 3.0)
    lo, hi = gamma_range(gv)
    assert lo == pytest.approx(0.05)
    assert hi == pytest.approx(0.05 + 0.2 / 2.0)
    assert gamma_lipschitz(gv) == pytest.approx(0.2)
    # saturation: large u4 approaches the upper bound from below
    assert gamma_eval(gv, 1e9) < hi


def test_lambda_sup_scalar_and_field(params):
    assert lambda_sup(params) == 0.001
    p = replace(params, lambdaM=np.array([0.001, 0.0005, 0.0002]))
    assert lambda_sup(p) == 0.001


def test_stress_production_saturates(params):
    assert stress_S(params, 0.0, 1.0) == pytest.approx(1.0)
    assert stress_S(params, 1.0, 1.0) == pytest.approx(0.5)
    assert stress_S(params, 3.0, 2.0) == pytest.approx(2.0 / 10.0)


def test_chi_eval_truncates_outside_habitat(params):
    z = np.array([-0.5, 0.0, 0.25, 0.5, 1.0, 1.5])
    chi = chi_eval(params, z)
    expected = np.where((z >= 0) & (z <= 1), 24.0 * z * (1.0 - z), 0.0)
    np.testing.assert_allclose(chi, expected)


def test_continuous_jacobian_matches_finite_differences(params):
    u = np.array([0.7, 1.2, 0.4, 0.8, 0.3])
    J = continuous_jacobian(params, u)
    h = 1e-7
    Jfd = np.zeros((5, 5))
    for j in range(5):
        up = u.copy(); up[j] += h
        dn = u.copy(); dn[j] -= h
        Jfd[:, j] = (reaction_F(params, up) - reaction_F(params, dn)) / (2 * h)
    np.testing.assert_allclose(J, Jfd, atol=5e-7)


def test_continuous_jacobian_rejects_negative_input(params):
    with pytest.raises(InvalidArgumentError):
        continuous_jacobian(params, np.array([-0.1, 0.0, 0.0, 1.0, 0.0]))


def test_find_equilibria_locates_three_roots(params):
    roots = find_equilibria(params, default_equilibrium_seeds(params))
    assert len(roots) == 3
    np.testing.assert_allclose(roots[0], [0.0, 0.0, 0.0, 1.0, 0.0], atol=1e-12)
    # frozen from tests/oracles/equilibrium_star.py
    np.testing.assert_allclose(
        roots[2],
        [1.0685835582, 1.7809725970, 0.7309526518, 1.0, 0.5165774203],
        atol=1e-9,
    )
    for r in roots:
        np.testing.assert_allclose(reaction_F(params, r), 0.0, atol=1e-10)


def test_find_equilibria_requires_constant_clearance(params):
    p = replace(params, gamma_variant=MichaelisMentenClearance(0.05, 0.2, 2.0))
    with pytest.raises(UnsupportedVariantError):
        find_equilibria(p, default_equilibrium_seeds(params))


def test_find_equilibria_rejects_extra_decay(params):
    p = replace(params, tau0=0.1)
    with pytest.raises(InvalidArgumentError):
        find_equilibria(p, default_equilibrium_seeds(params))
