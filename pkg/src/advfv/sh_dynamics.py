"""Space-homogeneous dynamics: pointwise time stepping and linearization.

With transport switched off the model reduces to a five-component ODE
system.  The positivity-preserving scheme advances it with one rational
(denominator-shifted) update per species, so every update is of the form

    u_new = (u + dt * production) / (1 + dt * loss_rate)

with nonnegative production and loss terms evaluated at the current state.
Nonnegative input therefore gives nonnegative output for any dt > 0.  The
explicit Euler step is kept alongside as the comparison scheme; it holds
no such guarantee and is expected to leave the admissible region for
large steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AdvfvError, InvalidArgumentError
from .model import (
    ModelParams,
    continuous_jacobian,
    disease_free_state,
    gamma_eval,
    invariant_bounds,
    reaction_F,
    stress_S,
)

__all__ = [
    "Trajectory",
    "nsfd_step",
    "euler_step",
    "integrate",
    "discrete_jacobian",
    "dfe_eigenvalues",
]


@dataclass
class Trajectory:
    """Time series of a pointwise integration.

    states has shape (n_steps + 1, 5) with states[0] the initial data.
    in_rectangle[k] records whether states[k] lies inside the invariant
    region (with a small slack for roundoff) and first_violation is the
    first index where it does not, or None when every state stayed inside.
    """

    times: np.ndarray
    states: np.ndarray
    in_rectangle: np.ndarray
    first_violation: int | None

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _check_step_args(u, dt):
    u = np.asarray(u, dtype=float)
    if u.shape != (5,):
        raise InvalidArgumentError(f"state must have shape (5,), got {u.shape}")
    if np.any(u < 0.0):
        raise InvalidArgumentError(f"state has negative components: {u}")
    if not dt > 0.0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    return u


def _scalar_lambda(p: ModelParams) -> float:
    lam = np.asarray(p.lambdaM, dtype=float)
    if lam.ndim != 0:
        raise InvalidArgumentError("pointwise dynamics need a scalar baseline source, got a field")
    return float(lam)


def nsfd_step(p: ModelParams, u, dt: float) -> np.ndarray:
    """One positivity-preserving rational update of the five species.

    Each species is advanced by moving its loss terms into the denominator,
    so the update is exact division rather than subtraction and the result
    stays nonnegative.  The microglia update additionally keeps the
    carrying-capacity excess in the denominator, which pins the component
    below its capacity whenever it starts there.
    """
    u = _check_step_args(u, dt)
    lam = _scalar_lambda(p)
    u1, u2, u3, u4, u5 = u
    g = gamma_eval(p.gamma_variant, u4)

    u1n = (u1 + dt * p.r1 * u3 * u3) / (1.0 + dt * (g + p.tau0))
    u2n = (u2 + dt * g * u1) / (1.0 + dt * p.tauP)
    u3n = (u3 + dt * stress_S(p, u1, u5)) / (1.0 + dt * (p.d + p.r2 * u1 + p.r1 * u3))
    c = p.alpha1 * u1 / (1.0 + p.alpha2 * u1)
    u4n = (u4 + dt * (c * p.m_hat * u4 + lam)) / (1.0 + dt * (c * u4 + p.sigma))
    b = p.tau1 * u1 / (1.0 + p.tau2 * u1)
    u5n = (u5 + dt * b * u4) / (1.0 + dt * p.tau3)

    return np.array([u1n, u2n, u3n, u4n, u5n])


def euler_step(p: ModelParams, u, dt: float) -> np.ndarray:
    """One forward Euler step.  No positivity or boundedness guarantee."""
    u = np.asarray(u, dtype=float)
    if u.shape != (5,):
        raise InvalidArgumentError(f"state must have shape (5,), got {u.shape}")
    if not dt > 0.0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    _scalar_lambda(p)
    # blown-up trajectories are expected output here (that is the point of
    # the comparison); keep the arithmetic quiet and let NaN/Inf propagate
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return u + dt * reaction_F(p, u, check=False)


def integrate(
    p: ModelParams,
    scheme: str,
    u0,
    dt: float,
    T: float,
    rect_tol: float = 1e-12,
) -> Trajectory:
    """Integrate the pointwise system from t=0 to t>=T with fixed dt.

    Parameters
    ----------
    scheme : str
        "nsfd" for the rational scheme, "euler" for explicit Euler.
    rect_tol : float
        Slack used when flagging states against the invariant region.

    The number of steps is ceil(T/dt) with a tiny relative tolerance so
    that T an exact multiple of dt does not pick up a spurious extra step.
    """
    key = scheme.strip().lower()
    if key == "nsfd":
        step = nsfd_step
    elif key == "euler":
        step = euler_step
    else:
        raise InvalidArgumentError(f"unknown scheme {scheme!r}, expected 'nsfd' or 'euler'")
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (5,):
        raise InvalidArgumentError(f"initial state must have shape (5,), got {u0.shape}")
    if T < 0.0:
        raise InvalidArgumentError(f"final time must be nonnegative, got {T}")
    if not dt > 0.0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")

    bounds = invariant_bounds(p)
    n_steps = max(0, math.ceil(T / dt - 1e-12))
    states = np.empty((n_steps + 1, 5))
    states[0] = u0
    for k in range(n_steps):
        states[k + 1] = step(p, states[k], dt)

    in_rect = np.array([bounds.contains(s, tol=rect_tol) for s in states])
    bad = np.flatnonzero(~in_rect)
    first_violation = int(bad[0]) if bad.size else None
    times = dt * np.arange(n_steps + 1)
    return Trajectory(times=times, states=states, in_rectangle=in_rect, first_violation=first_violation)


def discrete_jacobian(p: ModelParams, E, dt: float) -> np.ndarray:
    """Jacobian of the rational update map at an equilibrium E.

    At a fixed point the update map's derivative collapses to

        I + diag(dt / (1 + dt * Phi_i(E))) @ J(E)

    where Phi_i is the loss rate that the scheme keeps in species i's
    denominator and J is the reaction Jacobian.  Requires the constant
    clearance variant, zero extra oligomer decay, and that E actually is
    an equilibrium (residual below 1e-8).
    """
    E = np.asarray(E, dtype=float)
    if E.shape != (5,):
        raise InvalidArgumentError(f"equilibrium must have shape (5,), got {E.shape}")
    if not dt > 0.0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    if p.tau0 != 0.0:
        raise InvalidArgumentError("discrete_jacobian assumes zero extra oligomer decay (tau0 == 0)")
    res = float(np.max(np.abs(reaction_F(p, E))))
    if not res < 1e-8:
        raise InvalidArgumentError(
            f"discrete_jacobian needs an equilibrium; reaction residual is {res:.3e}"
        )
    g = gamma_eval(p.gamma_variant, E[3])
    c = p.alpha1 * E[0] / (1.0 + p.alpha2 * E[0])
    phi = np.array([
        g + p.tau0,
        p.tauP,
        p.d + p.r2 * E[0] + p.r1 * E[2],
        c * E[3] + p.sigma,
        p.tau3,
    ])
    scale = dt / (1.0 + dt * phi)
    return np.eye(5) + scale[:, None] * continuous_jacobian(p, E)


def dfe_eigenvalues(p: ModelParams, dt: float) -> np.ndarray:
    """Eigenvalues of the rational update map at the disease-free state.

    At that state the linearization is triangular up to ordering, so the
    eigenvalues are the closed forms 1 / (1 + rate * dt) with the five
    uncoupled loss rates.  The closed forms are cross-checked against the
    numerically computed spectrum of discrete_jacobian and returned in
    species order.  All of them lie in (0, 1) for every dt > 0, which is
    the unconditional-stability statement for this state.
    """
    if not dt > 0.0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    E0 = disease_free_state(p)
    g = gamma_eval(p.gamma_variant, E0[3])
    rates = np.array([g + p.tau0, p.tauP, p.d, p.sigma, p.tau3])
    closed = 1.0 / (1.0 + dt * rates)

    numeric = np.linalg.eigvals(discrete_jacobian(p, E0, dt))
    if float(np.max(np.abs(np.imag(numeric)))) > 1e-10:
        raise AdvfvError("disease-free spectrum unexpectedly has imaginary parts")
    mismatch = float(np.max(np.abs(np.sort(np.real(numeric)) - np.sort(closed))))
    if mismatch > 1e-10:
        raise AdvfvError(
            f"closed-form eigenvalues disagree with the numeric spectrum by {mismatch:.3e}"
        )
    return closed
