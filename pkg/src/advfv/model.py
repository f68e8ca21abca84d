"""Five-species reaction model, invariant-rectangle bounds, and equilibria.

Species ordering used everywhere in the package:

    0: toxic oligomer concentration (diffusing, produced autocatalytically)
    1: plaque density (no transport, fed by oligomer clearance)
    2: precursor monomer concentration (diffusing, consumed by aggregation)
    3: microglia density (diffusing and chemotactic toward oligomers)
    4: cytokine concentration (diffusing, secreted by activated microglia)

The clearance rate gamma may be a constant or a saturating (Michaelis-
Menten style) function of the cytokine level.  All analytic results that
need a Jacobian are restricted to the constant variant.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgumentError, UnsupportedVariantError
from .flux import FluxKind, LinearUpwind, LogisticSplit

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConstantClearance:
    gamma0: float


@dataclass(frozen=True)
class MichaelisMentenClearance:
    gamma0: float
    gamma1: float
    gamma2: float


@dataclass(frozen=True)
class ModelParams:
    """Model rates.  lambdaM may be a scalar or a per-cell array."""

    r1: float
    r2: float
    d: float
    gamma_variant: object
    tau1: float
    tau2: float
    tau3: float
    tauP: float
    tauS: float
    C: float
    nu: float
    alpha1: float
    alpha2: float
    sigma: float
    m_hat: float
    lambdaM: object
    tau0: float = 0.0
    d1: float = 1.0
    d3: float = 1.0
    d4: float = 1.0
    d5: float = 1.0
    chi_variant: str = "logistic"
    chi_alpha: float = 24.0


def baseline_params(d: float, **overrides) -> ModelParams:
    """Published baseline rates; d has no default and must be given.

    This is the single in-code source of the baseline values; presets and
    tests derive from here.
    """
    p = ModelParams(
        r1=0.1,
        r2=0.1,
        d=d,
        gamma_variant=ConstantClearance(0.05),
        tau1=1.0,
        tau2=1.0,
        tau3=1.0,
        tauP=0.03,
        tauS=1.0,
        C=1.0,
        nu=2.0,
        alpha1=1.0,
        alpha2=1.0,
        sigma=0.001,
        m_hat=1.0,
        lambdaM=0.001,
    )
    return replace(p, **overrides) if overrides else p


@dataclass(frozen=True)
class RectangleBounds:
    beta: np.ndarray  # upper bound per species; lower bounds are all 0

    def contains(self, u, tol: float = 0.0) -> bool:
        u = np.asarray(u)
        lo = u >= -tol
        hi = u <= np.asarray(self.beta).reshape((5,) + (1,) * (u.ndim - 1)) + tol
        return bool(np.all(lo) and np.all(hi))


def gamma_eval(gv, u4):
    u4 = np.asarray(u4, dtype=float)
    if isinstance(gv, ConstantClearance):
        return np.full_like(u4, gv.gamma0)
    if isinstance(gv, MichaelisMentenClearance):
        return gv.gamma0 + gv.gamma1 * u4 / (1.0 + gv.gamma2 * u4)
    raise UnsupportedVariantError(f"unknown clearance variant {gv!r}")


def gamma_range(gv):
    """(inf, sup) of gamma over u4 >= 0."""
    if isinstance(gv, ConstantClearance):
        return gv.gamma0, gv.gamma0
    if isinstance(gv, MichaelisMentenClearance):
        return gv.gamma0, gv.gamma0 + gv.gamma1 / gv.gamma2
    raise UnsupportedVariantError(f"unknown clearance variant {gv!r}")


def gamma_lipschitz(gv) -> float:
    if isinstance(gv, ConstantClearance):
        return 0.0
    if isinstance(gv, MichaelisMentenClearance):
        return gv.gamma1
    raise UnsupportedVariantError(f"unknown clearance variant {gv!r}")


def flux_kind(p: ModelParams) -> FluxKind:
    if p.chi_variant == "logistic":
        return FluxKind(LogisticSplit(p.chi_alpha, p.m_hat), beta4=p.m_hat)
    if p.chi_variant == "linear":
        return FluxKind(LinearUpwind(p.chi_alpha), beta4=p.m_hat)
    raise UnsupportedVariantError(f"unknown chi variant {p.chi_variant!r}")


def chi_eval(p: ModelParams, z):
    """Chemotactic sensitivity, truncated to 0 outside [0, m_hat]."""
    z = np.asarray(z, dtype=float)
    if p.chi_variant == "logistic":
        raw = p.chi_alpha * z * (p.m_hat - z)
    elif p.chi_variant == "linear":
        raw = p.chi_alpha * z
    else:
        raise UnsupportedVariantError(f"unknown chi variant {p.chi_variant!r}")
    return np.where((z >= 0.0) & (z <= p.m_hat), raw, 0.0)


def stress_S(p: ModelParams, u1, u5):
    """Cytokine-driven oligomer production, saturating in u1."""
    u1 = np.asarray(u1, dtype=float)
    return p.tauS * np.asarray(u5, dtype=float) / (1.0 + p.C * u1**p.nu)


_DENOM_FLOOR = 1e-12


def reaction_F(p: ModelParams, u, check: bool = True) -> np.ndarray:
    """Reaction right-hand side, shape (5,) or (5, n).

    With check=True a negative input raises; with check=False (the explicit
    Euler comparison path) only vanishing rational denominators abort,
    carrying the offending state in the message.
    """
    u = np.asarray(u, dtype=float)
    if u.shape[0] != 5:
        raise InvalidArgumentError(f"state must have 5 species, got shape {u.shape}")
    if check and np.any(u < 0.0):
        raise InvalidArgumentError("negative concentration in reaction_F input")
    u1, u2, u3, u4, u5 = u

    dens = [1.0 + p.alpha2 * u1, 1.0 + p.tau2 * u1, 1.0 + p.C * u1**p.nu]
    if isinstance(p.gamma_variant, MichaelisMentenClearance):
        dens.append(1.0 + p.gamma_variant.gamma2 * u4)
    for den in dens:
        if np.any(np.abs(den) < _DENOM_FLOOR):
            raise InvalidArgumentError(
                f"rational denominator below {_DENOM_FLOOR} while evaluating "
                f"reactions at u1={np.min(u1)}, u4={np.min(u4)}")

    g = gamma_eval(p.gamma_variant, u4)
    s = stress_S(p, u1, u5)
    c = p.alpha1 * u1 / (1.0 + p.alpha2 * u1)
    b = p.tau1 * u1 / (1.0 + p.tau2 * u1)
    return np.stack([
        p.r1 * u3**2 - g * u1 - p.tau0 * u1,
        g * u1 - p.tauP * u2,
        s - p.d * u3 - p.r2 * u1 * u3 - p.r1 * u3**2,
        c * (p.m_hat - u4) * u4 - p.sigma * u4 + np.broadcast_to(np.asarray(p.lambdaM, dtype=float), np.shape(u4)),
        b * u4 - p.tau3 * u5,
    ])


def lambda_sup(p: ModelParams) -> float:
    return float(np.max(np.asarray(p.lambdaM)))


def invariant_bounds(p: ModelParams) -> RectangleBounds:
    """Upper bounds of the invariant rectangle; lower bounds are zero.

    Requires the recruitment balance m_hat >= lambdaM/sigma (with the sup
    over cells when lambdaM is a field); otherwise the microglia ceiling
    m_hat is not invariant and no rectangle exists.
    """
    if p.m_hat < lambda_sup(p) / p.sigma:
        raise InvalidArgumentError(
            "invariant rectangle needs m_hat >= lambdaM/sigma "
            f"(m_hat={p.m_hat}, sup lambdaM/sigma={lambda_sup(p) / p.sigma})")
    gmin, gmax = gamma_range(p.gamma_variant)
    if p.tau0 + gmin <= 0.0:
        raise InvalidArgumentError("tau0 + min(gamma) must be positive for the bounds")
    beta4 = p.m_hat
    beta5 = p.tau1 / (p.tau2 * p.tau3) * beta4
    beta3 = p.tauS / p.d * beta5
    beta1 = p.r1 * beta3**2 / (p.tau0 + gmin)
    beta2 = gmax / p.tauP * beta1
    return RectangleBounds(np.array([beta1, beta2, beta3, beta4, beta5]))


def disease_free_state(p: ModelParams) -> np.ndarray:
    lam = np.asarray(p.lambdaM)
    if lam.ndim != 0:
        raise InvalidArgumentError("disease-free state needs a scalar lambdaM")
    return np.array([0.0, 0.0, 0.0, float(lam) / p.sigma, 0.0])


def _require_constant_gamma(p: ModelParams, what: str):
    if not isinstance(p.gamma_variant, ConstantClearance):
        raise UnsupportedVariantError(
            f"{what} is only available for the constant clearance variant")


def continuous_jacobian(p: ModelParams, u) -> np.ndarray:
    """Analytic Jacobian of reaction_F at u (constant clearance only)."""
    _require_constant_gamma(p, "continuous_jacobian")
    u = np.asarray(u, dtype=float)
    if np.any(u < 0.0):
        raise InvalidArgumentError("negative concentration in continuous_jacobian")
    u1, u2, u3, u4, u5 = u
    g0 = p.gamma_variant.gamma0

    J = np.zeros((5, 5))
    J[0, 0] = -g0 - p.tau0
    J[0, 2] = 2.0 * p.r1 * u3

    J[1, 0] = g0
    J[1, 1] = -p.tauP

    den3 = 1.0 + p.C * u1**p.nu
    J[2, 0] = -p.tauS * u5 * p.C * p.nu * u1**(p.nu - 1.0) / den3**2 - p.r2 * u3
    J[2, 2] = -p.d - p.r2 * u1 - 2.0 * p.r1 * u3
    J[2, 4] = p.tauS / den3

    den4 = 1.0 + p.alpha2 * u1
    c = p.alpha1 * u1 / den4
    J[3, 0] = p.alpha1 / den4**2 * (p.m_hat - u4) * u4
    J[3, 3] = c * (p.m_hat - 2.0 * u4) - p.sigma

    den5 = 1.0 + p.tau2 * u1
    J[4, 0] = p.tau1 / den5**2 * u4
    J[4, 3] = p.tau1 * u1 / den5
    J[4, 4] = -p.tau3
    return J


def find_equilibria(p: ModelParams, seeds, tol: float = 1e-10) -> list:
    """Damped Newton on reaction_F from each seed; deduplicated roots.

    Seeds that fail to converge are dropped (logged at info level).
    Restricted to constant clearance with tau0 = 0, matching the regime
    where the equilibrium structure is understood.
    """
    _require_constant_gamma(p, "find_equilibria")
    if p.tau0 != 0.0:
        raise InvalidArgumentError("find_equilibria assumes tau0 = 0")

    roots = []
    for seed in seeds:
        u = np.maximum(np.array(seed, dtype=float), 0.0)
        converged = False
        for _ in range(100):
            f = reaction_F(p, u)
            res = np.max(np.abs(f))
            if res < tol:
                converged = True
                break
            try:
                step = np.linalg.solve(continuous_jacobian(p, u), f)
            except np.linalg.LinAlgError:
                break
            lam = 1.0
            accepted = False
            for _ in range(30):
                trial = np.maximum(u - lam * step, 0.0)
                if np.max(np.abs(reaction_F(p, trial))) < res:
                    u = trial
                    accepted = True
                    break
                lam *= 0.5
            if not accepted:
                break
        if not converged:
            log.info("equilibrium seed %s dropped (no convergence)", np.asarray(seed))
            continue
        if not any(np.max(np.abs(u - r)) < 1e-6 for r in roots):
            roots.append(u)
    roots.sort(key=lambda r: tuple(r))
    return roots


def default_equilibrium_seeds(p: ModelParams) -> list:
    """Seed grid covering the disease-free state and interior roots."""
    e0 = disease_free_state(p)
    seeds = [e0, e0 + 0.01]
    for a in (0.01, 0.05, 0.2, 0.5, 1.0, 1.5, 2.5):
        seeds.append(np.array([a, a, a, p.m_hat, a]))
    return seeds
