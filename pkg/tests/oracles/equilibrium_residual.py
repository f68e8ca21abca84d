"""Positive equilibrium of the reaction system at d=0.15 (constant clearance).

Route 1: damped Newton on the full 5-species reaction vector field from a
grid of starting points, dedup to the interior root.
Route 2: reduce to a scalar equation in u1 alone (each component solved in
terms of u1 along the equilibrium conditions) and bisect.

Also prints the sup-norm reaction residual at the 4-decimal rounding of the
root, which the equilibrium-recovery test bounds by 2e-3.

Run:  python tests/oracles/equilibrium_residual.py
"""
import numpy as np

r1, r2, d = 0.1, 0.1, 0.15
gamma0, tau0 = 0.05, 0.0
tau1, tau2, tau3 = 1.0, 1.0, 1.0
tauP, tauS = 0.03, 1.0
C, nu = 1.0, 2.0
alpha1, alpha2 = 1.0, 1.0
sigma, m_hat, lambdaM = 0.001, 1.0, 0.001


def reaction(u):
    u1, u2, u3, u4, u5 = u
    g = gamma0
    s = tauS * u5 / (1.0 + C * u1**nu)
    c = alpha1 * u1 / (1.0 + alpha2 * u1)
    return np.array([
        r1 * u3**2 - g * u1 - tau0 * u1,
        g * u1 - tauP * u2,
        s - d * u3 - r2 * u1 * u3 - r1 * u3**2,
        c * (m_hat - u4) * u4 - sigma * u4 + lambdaM,
        (tau1 * u1 / (1.0 + tau2 * u1)) * u4 - tau3 * u5,
    ])


def jac(u, h=1e-7):
    J = np.empty((5, 5))
    for j in range(5):
        up, um = u.copy(), u.copy()
        up[j] += h
        um[j] -= h
        J[:, j] = (reaction(up) - reaction(um)) / (2 * h)
    return J


def newton(u0, tol=1e-12, maxit=200):
    u = u0.astype(float).copy()
    for _ in range(maxit):
        f = reaction(u)
        if np.max(np.abs(f)) < tol:
            return u
        try:
            step = np.linalg.solve(jac(u), f)
        except np.linalg.LinAlgError:
            return None
        lam, base = 1.0, np.max(np.abs(f))
        for _ in range(30):
            trial = u - lam * step
            if np.max(np.abs(reaction(trial))) < base:
                u = trial
                break
            lam *= 0.5
        else:
            return None
    return None


def scalar_route(u1):
    # equilibrium conditions solved component-by-component given u1
    u3 = np.sqrt(gamma0 * u1 / r1)                     # from component 1
    u2 = gamma0 * u1 / tauP
    # component 4: c*(m_hat-u4)*u4 - sigma*u4 + lambdaM = 0, take positive root
    c = alpha1 * u1 / (1.0 + alpha2 * u1)
    A, B, Cq = -c, c * m_hat - sigma, lambdaM
    u4 = (-B - np.sqrt(B**2 - 4 * A * Cq)) / (2 * A)
    u5 = (tau1 * u1 / (1.0 + tau2 * u1)) * u4 / tau3
    resid3 = tauS * u5 / (1.0 + C * u1**nu) - d * u3 - r2 * u1 * u3 - r1 * u3**2
    return np.array([u1, u2, u3, u4, u5]), resid3


if __name__ == "__main__":
    roots = []
    for a in np.linspace(0.1, 3.0, 8):
        r = newton(np.array([a, a, a, 1.0, a]))
        if r is not None and np.all(r > 1e-6):
            if not any(np.max(np.abs(r - q)) < 1e-6 for q in roots):
                roots.append(r)
    for r in roots:
        print("newton root:", " ".join(f"{v:.10f}" for v in r),
              " |F| =", np.max(np.abs(reaction(r))))

    lo, hi = 0.5, 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if scalar_route(mid)[1] > 0:
            lo = mid
        else:
            hi = mid
    root, _ = scalar_route(0.5 * (lo + hi))
    print("scalar-route root:", " ".join(f"{v:.10f}" for v in root))

    printed = np.round(roots[0], 4)
    print("4-decimal rounding:", printed)
    print("sup-norm residual at 4-decimal point:", np.max(np.abs(reaction(printed))))
