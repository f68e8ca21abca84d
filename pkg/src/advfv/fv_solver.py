"""Semi-implicit finite-volume time stepper for the five-species model.

One time step advances the species in a fixed order.  The oligomer field
is solved first from a linear implicit system (its diffusion and loss are
implicit, the production quadratic in the precursor is explicit).  The
plaque, precursor and cytokine fields follow, each from its own pointwise
or linear implicit update with time-n couplings.  The microglia field
goes last because its chemotactic drift is driven by the freshly computed
oligomer field; its update is the one genuinely nonlinear system and is
solved by Newton iteration.

All implicit systems are mass-weighted:

    (diag(m) + dt * d_i * S + dt * diag(m * rho)) u_new = m * rhs

with S the stiffness matrix from sparse_linalg, m the cell areas, and rho
the per-cell loss rate.  Every loss rate is kept in the matrix and every
production term on the right-hand side, which is what makes nonnegative
input give nonnegative output under the step-size restriction of
compute_dt.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgumentError, NewtonError
from .flux import flux_G, flux_G_partials
from .model import (
    ConstantClearance,
    ModelParams,
    RectangleBounds,
    flux_kind,
    gamma_eval,
    gamma_range,
    invariant_bounds,
)
from .sparse_linalg import SparseFactor, SparseMatrix, assemble_stiffness, solve_spd

__all__ = [
    "StateField",
    "StepDiagnostics",
    "NewtonReport",
    "StepWorkspace",
    "RunResult",
    "compute_dt",
    "step_u1",
    "step_u2",
    "step_u3",
    "step_u5",
    "u4_system",
    "newton_u4",
    "advance",
    "run",
    "gradient_energy",
    "spatial_variance_u1",
]


@dataclass(eq=False)
class StateField:
    """Piecewise-constant fields for the five species at one time level.

    u has shape (5, n_cells), row i holding species i+1, t is in months.
    """

    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        if self.u.ndim != 2 or self.u.shape[0] != 5:
            raise InvalidArgumentError(f"state array must have shape (5, n_cells), got {self.u.shape}")

    @property
    def n_cells(self) -> int:
        return self.u.shape[1]

    def copy(self) -> "StateField":
        return StateField(u=self.u.copy(), t=self.t)


@dataclass
class StepDiagnostics:
    """Per-step health record written to the diagnostics CSV."""

    step: int
    t: float
    species_min: np.ndarray
    species_mean: np.ndarray
    species_max: np.ndarray
    newton_iters: int
    newton_residual: float
    gradient_energy: float
    spatial_variance_u1: float
    rectangle_ok: bool


@dataclass
class NewtonReport:
    """Outcome of one Newton solve: linear-solve count and final sup-norm residual."""

    iters: int
    residual: float


class StepWorkspace:
    """Assembled stiffness and reusable factorizations for a fixed (mesh, p, dt).

    The oligomer system has a constant matrix whenever clearance is the
    constant variant, and the cytokine system always does, so both are
    factored once and reused across steps.  Passing a workspace to the
    step operations is purely an optimization; they build a private one
    when none is given.
    """

    def __init__(self, mesh, p: ModelParams, dt: float):
        if not dt > 0.0:
            raise InvalidArgumentError(f"dt must be positive, got {dt}")
        self.mesh = mesh
        self.p = p
        self.dt = float(dt)
        self.S = assemble_stiffness(mesh)
        self.mass = np.asarray(mesh.cell_area, dtype=float)
        self.kind = flux_kind(p)
        self._u1_factor: SparseFactor | None = None
        self._u5_factor: SparseFactor | None = None

    def _system_matrix(self, diffusivity: float, rho) -> SparseMatrix:
        n = self.mesh.n_cells
        rho = np.broadcast_to(np.asarray(rho, dtype=float), (n,))
        A = (
            sp.diags(self.mass * (1.0 + self.dt * rho))
            + (self.dt * diffusivity) * self.S.csr
        )
        return SparseMatrix(A, symmetric=True)

    def u1_factor(self) -> SparseFactor:
        if self._u1_factor is None:
            p = self.p
            if not isinstance(p.gamma_variant, ConstantClearance):
                raise InvalidArgumentError("prefactored oligomer system needs constant clearance")
            self._u1_factor = SparseFactor(self._system_matrix(p.d1, p.gamma_variant.gamma0 + p.tau0))
        return self._u1_factor

    def u5_factor(self) -> SparseFactor:
        if self._u5_factor is None:
            self._u5_factor = SparseFactor(self._system_matrix(self.p.d5, self.p.tau3))
        return self._u5_factor


def compute_dt(p: ModelParams, bounds: RectangleBounds | None = None, cfl: float = 0.9) -> float:
    """Largest admissible fixed step size times the safety fraction cfl.

    The bound is the minimum of four rate caps: clearance, precursor
    consumption at its ceiling, microglia recruitment saturation, and
    cytokine production saturation.  The boundedness guarantee needs a
    strict inequality, so use cfl < 1 for production runs.
    """
    if not (0.0 < cfl <= 1.0):
        raise InvalidArgumentError(f"cfl must be in (0, 1], got {cfl}")
    if bounds is None:
        bounds = invariant_bounds(p)
    _, g_max = gamma_range(p.gamma_variant)
    beta3 = float(bounds.beta[2])
    candidates = [
        1.0 / g_max if g_max > 0.0 else math.inf,
        1.0 / (p.r1 * beta3 + p.tauS) if p.r1 * beta3 + p.tauS > 0.0 else math.inf,
        p.alpha2 / (p.alpha2 + p.m_hat * p.alpha1),
        p.tau2 / p.tau1 if p.tau1 > 0.0 else math.inf,
    ]
    dt = cfl * min(candidates)
    if not math.isfinite(dt) or dt <= 0.0:
        raise InvalidArgumentError(f"step-size bound is degenerate for these parameters: {candidates}")
    return dt


def _as_workspace(work, mesh, p, dt) -> StepWorkspace:
    if work is None:
        return StepWorkspace(mesh, p, dt)
    if work.mesh is not mesh or work.dt != dt:
        raise InvalidArgumentError("workspace was built for a different mesh or dt")
    return work


def step_u1(state: StateField, mesh, p: ModelParams, dt: float, work: StepWorkspace | None = None) -> np.ndarray:
    """Implicit oligomer update: diffusion and clearance in the matrix,
    quadratic production from the time-n precursor on the right-hand side."""
    work = _as_workspace(work, mesh, p, dt)
    u = state.u
    rhs = u[0] + dt * p.r1 * u[2] ** 2
    if isinstance(p.gamma_variant, ConstantClearance):
        return work.u1_factor().solve(work.mass * rhs)
    g = gamma_eval(p.gamma_variant, u[3])
    A = work._system_matrix(p.d1, g + p.tau0)
    return solve_spd(A, work.mass * rhs)


def step_u2(state: StateField, p: ModelParams, dt: float) -> np.ndarray:
    """Pointwise plaque update: explicit gain from cleared oligomers, implicit decay."""
    u = state.u
    g = gamma_eval(p.gamma_variant, u[3])
    return (u[1] + dt * g * u[0]) / (1.0 + dt * p.tauP)


def step_u3(state: StateField, mesh, p: ModelParams, dt: float, work: StepWorkspace | None = None) -> np.ndarray:
    """Implicit precursor update with time-n consumption rates in the matrix."""
    work = _as_workspace(work, mesh, p, dt)
    u = state.u
    rho = p.d + p.r2 * u[0] + p.r1 * u[2]
    a_n = p.tauS / (1.0 + p.C * u[0] ** p.nu)
    A = work._system_matrix(p.d3, rho)
    return solve_spd(A, work.mass * (u[2] + dt * a_n * u[4]))


def step_u5(state: StateField, mesh, p: ModelParams, dt: float, work: StepWorkspace | None = None) -> np.ndarray:
    """Implicit cytokine update: constant decay in the (prefactored) matrix,
    saturating production from time-n oligomers and microglia on the rhs."""
    work = _as_workspace(work, mesh, p, dt)
    u = state.u
    b_n = p.tau1 * u[0] / (1.0 + p.tau2 * u[0])
    return work.u5_factor().solve(work.mass * (u[4] + dt * b_n * u[3]))


def u4_system(
    state: StateField,
    u1_new: np.ndarray,
    mesh,
    p: ModelParams,
    dt: float,
    work: StepWorkspace | None = None,
):
    """Residual and Jacobian of the implicit microglia update.

    The unknown M solves, per cell K,

        m_K (M_K - u4_K) + dt d4 (S M)_K + dt sum_edges tau G(M_K, M_L; du1)
            - dt m_K (s_K (m_hat - M_K) - sigma M_K + lambda_K) = 0

    where du1 is the difference of the NEW oligomer field across the edge
    (drift uses the already-updated field) and s_K freezes the saturating
    recruitment coefficient at time-n values, which leaves the reaction
    affine in M.  Returns the pair (residual, jacobian): residual maps a
    candidate field to the per-cell defect above, jacobian assembles its
    sparse derivative there (one-sided at the sensitivity kinks).  Kept
    separate from newton_u4 so the assembly can be checked against finite
    differences of the residual.
    """
    work = _as_workspace(work, mesh, p, dt)
    u1n = state.u[0]
    u4n = state.u[3]
    n = u4n.shape[0]
    u1_new = np.asarray(u1_new, dtype=float)
    if u1_new.shape != (n,):
        raise InvalidArgumentError(f"u1_new has shape {u1_new.shape}, expected ({n},)")

    kind = work.kind
    mass = work.mass
    S = work.S
    e = mesh.edges
    ea, eb, tau = e.cell_a, e.cell_b, e.transmissibility
    c_edge = u1_new[eb] - u1_new[ea]

    s_n = (p.alpha1 * u1n / (1.0 + p.alpha2 * u1n)) * u4n
    lam = np.broadcast_to(np.asarray(p.lambdaM, dtype=float), (n,))

    def residual(M):
        G = flux_G(kind, M[ea], M[eb], c_edge)
        conv = np.zeros(n)
        np.add.at(conv, ea, tau * G)
        np.subtract.at(conv, eb, tau * G)
        reaction = s_n * (p.m_hat - M) - p.sigma * M + lam
        return mass * (M - u4n) + dt * p.d4 * (S @ M) + dt * conv - dt * mass * reaction

    def jacobian(M):
        dGa, dGb = flux_G_partials(kind, M[ea], M[eb], c_edge)
        rows = np.concatenate([ea, ea, eb, eb])
        cols = np.concatenate([ea, eb, ea, eb])
        vals = np.concatenate([tau * dGa, tau * dGb, -tau * dGa, -tau * dGb])
        conv_part = sp.coo_matrix((vals, (rows, cols)), shape=(n, n))
        J = (
            sp.diags(mass * (1.0 + dt * (s_n + p.sigma)))
            + dt * p.d4 * S.csr
            + dt * conv_part
        )
        return SparseMatrix(J, symmetric=False)

    return residual, jacobian


def newton_u4(
    state: StateField,
    u1_new: np.ndarray,
    mesh,
    p: ModelParams,
    dt: float,
    tol: float = 1e-10,
    maxit: int = 50,
    work: StepWorkspace | None = None,
) -> tuple[np.ndarray, NewtonReport]:
    """Newton solve for the microglia update with chemotactic drift.

    Solves the cell equations assembled by u4_system.  The initial guess
    is u4 at time n; iterations count linear solves; convergence is
    sup-norm residual below tol.

    Globalization: each iteration takes the Newton direction and accepts
    the first trial that strictly reduces the squared-residual merit,
    trying the step projected onto [0, max(beta4, max u4)] before the raw
    step and halving the step length as needed.  The projection is only a
    trial generator, never a constraint: it keeps iterates away from the
    flat region of the truncated sensitivity (where the Jacobian loses the
    drift coupling and plain Newton cycles), while roots that genuinely
    leave the box, possible for the linear sensitivity, remain reachable
    through the raw trials.  Affine-invariant acceptance metrics were
    tried here and converge faster when they work, but both the natural
    monotonicity test and its nonmonotone variants can creep around the
    sensitivity kinks without converging on rough drift fields; plain
    residual descent is the only rule that survived every stress case.
    """
    work = _as_workspace(work, mesh, p, dt)
    residual, jacobian = u4_system(state, u1_new, mesh, p, dt, work)
    u4n = state.u[3]
    box_hi = max(work.kind.beta4, float(np.max(u4n, initial=0.0)))

    M = u4n.copy()
    R = residual(M)
    res = float(np.max(np.abs(R)))
    merit = float(R @ R)
    iters = 0
    while not res < tol:
        if iters >= maxit:
            raise NewtonError(
                f"microglia Newton did not converge in {maxit} iterations",
                residual=res,
                iterations=iters,
            )
        delta = SparseFactor(jacobian(M)).solve(R)
        iters += 1
        accepted = False
        scale = 1.0
        for _ in range(32):
            raw = M - scale * delta
            clipped = np.clip(raw, 0.0, box_hi)
            trials = (clipped,) if np.array_equal(clipped, raw) else (clipped, raw)
            for M_try in trials:
                R_try = residual(M_try)
                merit_try = float(R_try @ R_try)
                if np.isfinite(merit_try) and merit_try < merit:
                    M, R, merit = M_try, R_try, merit_try
                    res = float(np.max(np.abs(R)))
                    accepted = True
                    break
            if accepted:
                break
            scale *= 0.5
        if not accepted:
            raise NewtonError(
                "microglia Newton stalled (no descent along the Newton direction)",
                residual=res,
                iterations=iters,
            )
    return M, NewtonReport(iters=iters, residual=res)


def gradient_energy(u: np.ndarray, mesh) -> float:
    """Discrete H1-seminorm energy summed over the four mobile species.

    Equal to one half of the symmetric double sum over cell pairs, i.e.
    each interior edge counted once with weight tau * (jump)^2.
    """
    e = mesh.edges
    du = u[:, e.cell_b] - u[:, e.cell_a]
    mobile = du[[0, 2, 3, 4]]
    return float(np.sum(e.transmissibility * mobile**2))


def spatial_variance_u1(u1: np.ndarray, mesh) -> float:
    """Area-weighted variance of the oligomer field (pattern-onset metric)."""
    w = mesh.cell_area / float(np.sum(mesh.cell_area))
    mean = float(w @ u1)
    return float(w @ (u1 - mean) ** 2)


def _species_stats(u: np.ndarray, mass: np.ndarray):
    w = mass / float(np.sum(mass))
    return u.min(axis=1), u @ w, u.max(axis=1)


def advance(
    state: StateField,
    mesh,
    p: ModelParams,
    dt: float,
    work: StepWorkspace | None = None,
    bounds: RectangleBounds | None = None,
) -> tuple[StateField, StepDiagnostics]:
    """One full time step in the fixed species order, with diagnostics.

    The input state is never mutated; any sub-step failure propagates
    before a new state exists, so a failed step leaves the caller's state
    untouched.  rectangle_ok compares the new state against the invariant
    region with 1e-10 slack; parameters must admit a well-defined region
    (use the step operations directly for degenerate parameter studies).
    """
    if not np.all(np.isfinite(state.u)):
        raise InvalidArgumentError("state contains non-finite entries")
    work = _as_workspace(work, mesh, p, dt)
    if bounds is None:
        bounds = invariant_bounds(p)

    u1_new = step_u1(state, mesh, p, dt, work=work)
    u2_new = step_u2(state, p, dt)
    u3_new = step_u3(state, mesh, p, dt, work=work)
    u5_new = step_u5(state, mesh, p, dt, work=work)
    u4_new, report = newton_u4(state, u1_new, mesh, p, dt, work=work)

    new = StateField(u=np.stack([u1_new, u2_new, u3_new, u4_new, u5_new]), t=state.t + dt)
    smin, smean, smax = _species_stats(new.u, work.mass)
    diag = StepDiagnostics(
        step=-1,
        t=new.t,
        species_min=smin,
        species_mean=smean,
        species_max=smax,
        newton_iters=report.iters,
        newton_residual=report.residual,
        gradient_energy=gradient_energy(new.u, mesh),
        spatial_variance_u1=spatial_variance_u1(new.u[0], mesh),
        rectangle_ok=bool(bounds.contains(new.u, tol=1e-10)),
    )
    return new, diag


@dataclass
class RunResult:
    """Artifacts of a full time loop."""

    dt: float
    n_steps: int
    diagnostics: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    final_state: StateField | None = None


def _initial_diagnostics(state: StateField, mesh, mass, bounds) -> StepDiagnostics:
    smin, smean, smax = _species_stats(state.u, mass)
    return StepDiagnostics(
        step=0,
        t=state.t,
        species_min=smin,
        species_mean=smean,
        species_max=smax,
        newton_iters=0,
        newton_residual=0.0,
        gradient_energy=gradient_energy(state.u, mesh),
        spatial_variance_u1=spatial_variance_u1(state.u[0], mesh),
        rectangle_ok=bool(bounds.contains(state.u, tol=1e-10)),
    )


def run(
    config,
    mesh,
    p: ModelParams,
    initial: StateField | None = None,
    on_diagnostics=None,
    on_snapshot=None,
) -> RunResult:
    """Full time loop for a validated configuration.

    dt comes from the config's explicit value or from compute_dt with the
    config's safety fraction.  Snapshots are emitted at the first step
    whose time reaches each requested snapshot time (t=0 included when
    requested).  Diagnostics are recorded every stride-th step plus step
    0 and the final step; callbacks receive rows and snapshots as they
    are produced so that partial output survives an aborted run.

    Initial data outside the invariant region only warn: boundedness is
    then not guaranteed and rectangle_ok simply reports what happened.
    """
    time_spec = config.time
    if time_spec.dt is not None:
        dt = float(time_spec.dt)
        if not dt > 0.0:
            raise InvalidArgumentError(f"dt must be positive, got {dt}")
    else:
        cfl = 0.9 if time_spec.cfl is None else float(time_spec.cfl)
        dt = compute_dt(p, cfl=cfl)
    T = float(time_spec.T)
    n_steps = max(0, math.ceil(T / dt - 1e-12))

    if initial is None:
        from .config import build_initial

        initial = build_initial(config.initial, mesh, config.seed)
    state = initial

    bounds = invariant_bounds(p)
    if not bounds.contains(state.u, tol=1e-10):
        warnings.warn(
            "initial data lie outside the invariant region; bounds preservation is not guaranteed",
            RuntimeWarning,
            stacklevel=2,
        )

    work = StepWorkspace(mesh, p, dt)
    stride = max(1, int(config.outputs.diagnostics_stride))
    schedule = sorted(float(ts) for ts in config.outputs.snapshot_times)
    result = RunResult(dt=dt, n_steps=n_steps)

    def emit_diag(diag):
        result.diagnostics.append(diag)
        if on_diagnostics is not None:
            on_diagnostics(diag)

    def emit_snapshots(t, current):
        while schedule and t >= schedule[0] - 1e-9 * max(1.0, dt):
            schedule.pop(0)
            index = len(result.snapshots)
            snap = current.copy()
            result.snapshots.append((snap.t, snap))
            if on_snapshot is not None:
                on_snapshot(index, snap.t, snap)

    emit_diag(_initial_diagnostics(state, mesh, work.mass, bounds))
    emit_snapshots(state.t, state)
    for k in range(1, n_steps + 1):
        state, diag = advance(state, mesh, p, dt, work=work, bounds=bounds)
        diag.step = k
        if k % stride == 0 or k == n_steps:
            emit_diag(diag)
        emit_snapshots(state.t, state)

    result.final_state = state
    return result
