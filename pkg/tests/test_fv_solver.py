from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from advfv import (
    InvalidArgumentError,
    NewtonError,
    StateField,
    advance,
    build_structured_rect,
    compute_dt,
    disease_free_state,
    default_equilibrium_seeds,
    find_equilibria,
    gradient_energy,
    invariant_bounds,
    newton_u4,
    nsfd_step,
    parse_config,
    run,
    spatial_variance_u1,
    step_u2,
)
from advfv.fv_solver import StepWorkspace, u4_system


def uniform_state(u, n, t=0.0):
    return StateField(np.repeat(np.asarray(u, dtype=float)[:, None], n, axis=1), t=t)


@pytest.mark.parametrize("cfl,expected", [(1.0, 0.5), (0.9, 0.45), (0.5, 0.25)])
def test_compute_dt_frozen_values(params, cfl, expected):
    # frozen from tests/oracles/rational_updates.py: the binding cap is
    # the recruitment saturation alpha2/(alpha2 + m_hat*alpha1) = 0.5
    assert compute_dt(params, cfl=cfl) == pytest.approx(expected, rel=1e-15)


def test_compute_dt_default_cfl(params):
    assert compute_dt(params) == pytest.approx(0.45)


@pytest.mark.parametrize("cfl", [0.0, -0.5, 1.5])
def test_compute_dt_rejects_bad_cfl(params, cfl):
    with pytest.raises(InvalidArgumentError):
        compute_dt(params, cfl=cfl)


def test_step_u2_frozen_value(params):
    # frozen from tests/oracles/rational_updates.py
    state = uniform_state([1.0, 0.0, 0.0, 1.0, 0.0], 3)
    out = step_u2(state, params, 0.5)
    np.testing.assert_allclose(out, 5.0 / 203.0, rtol=1e-15)


def test_uniform_data_reduce_to_the_pointwise_scheme(params):
    # no gradients, so diffusion and chemotaxis drop out cell by cell
    mesh = build_structured_rect(4, 4)
    dt = 0.5
    u = np.array([0.0004, 0.0, 0.003, 1.0, 0.4])
    state = uniform_state(u, mesh.n_cells)
    work = StepWorkspace(mesh, params, dt)
    point = u.copy()
    for _ in range(5):
        state, _ = advance(state, mesh, params, dt, work=work)
        point = nsfd_step(params, point, dt)
        worst = np.max(np.abs(state.u - point[:, None]))
        assert worst < 1e-13


def test_advance_does_not_mutate_the_input(params):
    mesh = build_structured_rect(4, 4)
    state = uniform_state([0.1, 0.1, 0.1, 0.9, 0.1], mesh.n_cells)
    before = state.u.copy()
    new_state, _ = advance(state, mesh, params, 0.25)
    np.testing.assert_array_equal(state.u, before)
    assert new_state is not state
    assert new_state.t == pytest.approx(0.25)


def test_advance_diagnostics_fields(params):
    mesh = build_structured_rect(4, 4)
    state = uniform_state([0.1, 0.1, 0.1, 0.9, 0.1], mesh.n_cells)
    _, diag = advance(state, mesh, params, 0.25)
    assert diag.rectangle_ok
    assert diag.newton_iters >= 1
    assert diag.newton_residual <= 1e-10
    assert diag.t == pytest.approx(0.25)
    for i in range(5):
        assert diag.species_min[i] <= diag.species_mean[i] <= diag.species_max[i]


def test_uniform_equilibrium_is_stationary(params):
    roots = find_equilibria(params, default_equilibrium_seeds(params))
    estar = roots[2]
    mesh = build_structured_rect(4, 4)
    state = uniform_state(estar, mesh.n_cells)
    new_state, _ = advance(state, mesh, params, 0.45)
    assert np.max(np.abs(new_state.u - estar[:, None])) < 1e-12


def test_newton_failure_carries_residual_and_iterations(params):
    mesh = build_structured_rect(4, 4)
    state = uniform_state([0.5, 0.1, 0.1, 0.5, 0.1], mesh.n_cells)
    u1_new = state.u[0] + 0.1
    with pytest.raises(NewtonError) as err:
        newton_u4(state, u1_new, mesh, params, 0.45, maxit=0)
    assert err.value.iterations == 0
    assert err.value.residual > 0.0


def test_u4_system_residual_vanishes_at_the_newton_solution(params):
    mesh = build_structured_rect(5, 3)
    rng = np.random.default_rng(8)
    u = rng.uniform(0.05, 0.9, (5, mesh.n_cells))
    state = StateField(u)
    u1_new = rng.uniform(0.05, 0.9, mesh.n_cells)
    m, report = newton_u4(state, u1_new, mesh, params, 0.4)
    residual, jacobian = u4_system(state, u1_new, mesh, params, 0.4)
    assert np.linalg.norm(residual(m), np.inf) <= 1e-10
    assert report.iters >= 1
    J = jacobian(m)
    assert J.n == mesh.n_cells


def test_workspace_is_checked_against_call_arguments(params):
    mesh = build_structured_rect(4, 4)
    other = build_structured_rect(3, 3)
    state = uniform_state([0.1, 0.1, 0.1, 0.9, 0.1], mesh.n_cells)
    work = StepWorkspace(other, params, 0.25)
    with pytest.raises(InvalidArgumentError):
        advance(state, mesh, params, 0.25, work=work)
    work = StepWorkspace(mesh, params, 0.5)
    with pytest.raises(InvalidArgumentError):
        advance(state, mesh, params, 0.25, work=work)


def test_gradient_energy_and_variance_vanish_on_uniform_fields(square16):
    u = np.full((5, square16.n_cells), 0.3)
    assert gradient_energy(u, square16) == 0.0
    assert spatial_variance_u1(u[0], square16) == 0.0
    u[0, 0] = 0.7
    assert gradient_energy(u, square16) > 0.0
    assert spatial_variance_u1(u[0], square16) > 0.0


RUN_CONFIG = """
{
  "mode": "pde",
  "mesh": {"kind": "structured", "nx": 8, "ny": 8},
  "params": {"d": 0.15},
  "time": {"T": 1.0, "dt": 0.25},
  "outputs": {"snapshot_times": [0.0, 0.5, 1.0], "diagnostics_stride": 2},
  "seed": 7
}
"""


def test_run_schedules_snapshots_and_diagnostics():
    config = parse_config(RUN_CONFIG)
    from advfv import resolve_mesh

    mesh = resolve_mesh(config.mesh)
    result = run(config, mesh, config.params)
    assert result.dt == 0.25
    assert result.n_steps == 4
    # snapshots at the first step reaching 0, 0.5 and 1.0
    times = [t for t, _ in result.snapshots]
    np.testing.assert_allclose(times, [0.0, 0.5, 1.0])
    # diagnostics at steps 0, 2, 4
    assert [d.step for d in result.diagnostics] == [0, 2, 4]
    assert all(d.rectangle_ok for d in result.diagnostics)


def test_run_is_deterministic():
    config = parse_config(RUN_CONFIG)
    from advfv import resolve_mesh

    mesh = resolve_mesh(config.mesh)
    a = run(config, mesh, config.params)
    b = run(config, mesh, config.params)
    np.testing.assert_array_equal(a.final_state.u, b.final_state.u)


def test_run_warns_when_initial_data_leave_the_rectangle(params):
    config = parse_config(RUN_CONFIG)
    from advfv import resolve_mesh

    mesh = resolve_mesh(config.mesh)
    beta = invariant_bounds(params).beta
    bad = uniform_state([0.1, 0.1, 0.1, beta[3] + 0.5, 0.1], mesh.n_cells)
    with pytest.warns(RuntimeWarning, match="outside the invariant region"):
        run(config, mesh, config.params, initial=bad)


def test_default_initial_is_the_disease_free_state():
    config = parse_config(RUN_CONFIG)
    from advfv import build_initial, resolve_mesh

    mesh = resolve_mesh(config.mesh)
    state = build_initial(config.initial, mesh, config.seed)
    e0 = disease_free_state(config.params)
    np.testing.assert_array_equal(state.u, np.repeat(e0[:, None], mesh.n_cells, axis=1))
