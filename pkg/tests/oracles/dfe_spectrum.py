"""Eigenvalues of the rational-update map at the disease-free state.

Two independent routes:
  1. closed forms 1/(1 + rate*dt) with the five linear decay rates at
     (0, 0, 0, lambdaM/sigma, 0);
  2. numpy eigenvalues of a central finite-difference Jacobian of the
     update map written out inline here (not imported from the package).

The update map couplings at the disease-free state form an acyclic graph,
so the spectrum equals the diagonal; the script confirms that numerically.

Run:  python tests/oracles/dfe_spectrum.py
"""
import numpy as np

# baseline parameters, d = 0.15, constant clearance
r1, r2, d = 0.1, 0.1, 0.15
gamma0, tau0 = 0.05, 0.0
tau1, tau2, tau3 = 1.0, 1.0, 1.0
tauP, tauS = 0.03, 1.0
C, nu = 1.0, 2.0
alpha1, alpha2 = 1.0, 1.0
sigma, m_hat, lambdaM = 0.001, 1.0, 0.001


def rational_step(u, dt):
    u1, u2, u3, u4, u5 = u
    g = gamma0
    c = alpha1 * u1 / (1.0 + alpha2 * u1)
    s = tauS * u5 / (1.0 + C * u1**nu)
    v1 = (u1 + dt * r1 * u3**2) / (1.0 + dt * (g + tau0))
    v2 = (u2 + dt * g * u1) / (1.0 + dt * tauP)
    v3 = (u3 + dt * s) / (1.0 + dt * (d + r2 * u1 + r1 * u3))
    v4 = (u4 + dt * c * m_hat * u4 + dt * lambdaM) / (1.0 + dt * (c * u4 + sigma))
    v5 = (u5 + dt * (tau1 * u1 / (1.0 + tau2 * u1)) * u4) / (1.0 + dt * tau3)
    return np.array([v1, v2, v3, v4, v5])


def fd_jacobian(u, dt, h=1e-7):
    J = np.empty((5, 5))
    for j in range(5):
        up, um = u.copy(), u.copy()
        up[j] += h
        um[j] -= h
        J[:, j] = (rational_step(up, dt) - rational_step(um, dt)) / (2 * h)
    return J


if __name__ == "__main__":
    u_free = np.array([0.0, 0.0, 0.0, lambdaM / sigma, 0.0])
    rates = np.array([gamma0 + tau0, tauP, d, sigma, tau3])
    for dt in (0.1, 0.5, 2.0, 100.0):
        closed = np.sort(1.0 / (1.0 + rates * dt))
        numeric = np.sort(np.linalg.eigvals(fd_jacobian(u_free, dt)).real)
        print(f"dt={dt}")
        print("  closed  :", " ".join(f"{v:.16g}" for v in closed))
        print("  numeric :", " ".join(f"{v:.16g}" for v in numeric))
        print("  max |diff| =", np.max(np.abs(closed - numeric)),
              " all moduli < 1:", bool(np.all(np.abs(closed) < 1.0)))
