"""Monotone two-point chemotaxis flux with sensitivity splitting.

The sensitivity chi is split into a nondecreasing part chi_up and a
nonincreasing part chi_down with chi_up + chi_down = chi, and the edge flux

    G(a, b; c) = c+ * (chi_up(a) + chi_down(b)) - c- * (chi_up(b) + chi_down(a))

upwinds each part separately.  G is nondecreasing in a, nonincreasing in b,
antisymmetric under (a,b,c) -> (b,a,-c) by construction (the implementation
computes the same two products and subtracts, so antisymmetry is bit-exact),
and consistent: G(z,z;c) = c*chi(z).

Both variants evaluate chi at the argument clamped to [0, beta4], so edge
fluxes stay bounded no matter what states the nonlinear solver visits.

* LogisticSplit: chi(z) = alpha*z*(m_hat - z), split at the maximum
  m_hat/2.  chi vanishes at both ends of the clamp interval, so cells at
  capacity stop attracting mass entirely; this volume-filling property is
  what keeps the microglia density below m_hat in the implicit step.
* LinearUpwind: chi(z) = alpha*z with the argument clamped, i.e. chi
  saturates at alpha*beta4; already monotone, so chi_down = 0.  Note that
  chi does NOT vanish at beta4: the saturation bounds the drift speed but
  an over-full cell keeps attracting mass, so this variant has no
  maximum principle and the convected density can exceed beta4 where the
  drift aggregates it (that is the regime the pattern-formation runs
  operate in).

Derivatives use the one-sided value from the left at the kink points.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LogisticSplit:
    alpha: float
    m_hat: float


@dataclass(frozen=True)
class LinearUpwind:
    alpha: float


@dataclass(frozen=True)
class FluxKind:
    """Sensitivity variant plus the admissible ceiling of the convected species."""

    variant: object
    beta4: float

    def __post_init__(self):
        if isinstance(self.variant, LogisticSplit):
            if self.variant.alpha <= 0 or self.variant.m_hat <= 0:
                raise ValueError("LogisticSplit needs alpha > 0 and m_hat > 0")
        elif isinstance(self.variant, LinearUpwind):
            if self.variant.alpha <= 0:
                raise ValueError("LinearUpwind needs alpha > 0")
        else:
            raise TypeError(f"unknown flux variant {self.variant!r}")


def _logistic(alpha, m_hat, z):
    return alpha * z * (m_hat - z)


def chi_value(kind: FluxKind, z):
    """The (truncated) sensitivity itself; equals chi_up + chi_down."""
    v = kind.variant
    z = np.asarray(z, dtype=float)
    if isinstance(v, LogisticSplit):
        zc = np.clip(z, 0.0, v.m_hat)
        return _logistic(v.alpha, v.m_hat, zc)
    return v.alpha * np.clip(z, 0.0, kind.beta4)


def chi_split(kind: FluxKind, z):
    """(chi_up, chi_down) at z."""
    v = kind.variant
    z = np.asarray(z, dtype=float)
    if isinstance(v, LogisticSplit):
        half = 0.5 * v.m_hat
        zc = np.clip(z, 0.0, v.m_hat)
        up = _logistic(v.alpha, v.m_hat, np.minimum(zc, half))
        down = _logistic(v.alpha, v.m_hat, np.maximum(zc, half)) \
            - _logistic(v.alpha, v.m_hat, half)
        return up, down
    up = v.alpha * np.clip(z, 0.0, kind.beta4)
    return up, np.zeros_like(up)


def chi_split_prime(kind: FluxKind, z):
    """Left-sided derivatives (d chi_up/dz, d chi_down/dz)."""
    v = kind.variant
    z = np.asarray(z, dtype=float)
    if isinstance(v, LogisticSplit):
        half = 0.5 * v.m_hat
        slope = v.alpha * (v.m_hat - 2.0 * z)
        up = np.where((z > 0.0) & (z <= half), slope, 0.0)
        down = np.where((z > half) & (z <= v.m_hat), slope, 0.0)
        return up, down
    up = np.where((z > 0.0) & (z <= kind.beta4), v.alpha, 0.0)
    return up, np.zeros_like(up)


def flux_G(kind: FluxKind, a, b, c):
    """Edge flux G(a, b; c) for face value c of the driving gradient."""
    up_a, down_a = chi_split(kind, a)
    up_b, down_b = chi_split(kind, b)
    c = np.asarray(c, dtype=float)
    cp = np.maximum(c, 0.0)
    cm = np.maximum(-c, 0.0)
    return cp * (up_a + down_b) - cm * (up_b + down_a)


def flux_G_partials(kind: FluxKind, a, b, c):
    """(dG/da, dG/db); dG/da >= 0 and dG/db <= 0 by the splitting."""
    dup_a, ddown_a = chi_split_prime(kind, a)
    dup_b, ddown_b = chi_split_prime(kind, b)
    c = np.asarray(c, dtype=float)
    cp = np.maximum(c, 0.0)
    cm = np.maximum(-c, 0.0)
    return cp * dup_a - cm * ddown_a, cp * ddown_b - cm * dup_b


def chi_lipschitz(kind: FluxKind) -> float:
    """sup |chi'| over the admissible range; Lipschitz constant of G/|c|."""
    v = kind.variant
    if isinstance(v, LogisticSplit):
        return v.alpha * v.m_hat
    return v.alpha


def abs_chi_prime_integral(kind: FluxKind) -> float:
    """Integral of |chi'| over [0, beta4]; bounds |G|/|c|."""
    v = kind.variant
    if isinstance(v, LogisticSplit):
        return 0.5 * v.alpha * v.m_hat**2
    return v.alpha * kind.beta4
