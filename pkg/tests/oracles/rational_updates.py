"""Hand-checkable single-step values frozen into the unit tests.

Exact rational arithmetic for: one rational update of u1 from
(0, 0, beta3, 0, 0) at dt=2, one u2 update, one explicit Euler u4 step
from an out-of-bounds state, and the stability-style dt ceiling

    dt_max = min( 1/gamma_max, 1/(r1*beta3 + tauS),
                  alpha2/(alpha2 + m_hat*alpha1), tau2/tau1 ).

Run:  python tests/oracles/rational_updates.py
"""
from fractions import Fraction as F

r1, d = F(1, 10), F(3, 20)
gamma0, tau0 = F(1, 20), F(0)
tauP, tauS = F(3, 100), F(1)
tau1, tau2, tau3 = F(1), F(1), F(1)
alpha1, alpha2 = F(1), F(1)
sigma, m_hat, lambdaM = F(1, 1000), F(1), F(1, 1000)

beta3 = tauS / d * (tau1 / (tau2 * tau3)) * m_hat   # = 20/3

if __name__ == "__main__":
    dt = F(2)
    u1_new = (0 + dt * r1 * beta3**2) / (1 + dt * (gamma0 + tau0))
    print(f"u1 update from (0,0,beta3,0,0), dt=2: {u1_new} = {float(u1_new)!r}")

    dt = F(1, 2)
    u2_new = (0 + dt * gamma0 * 1) / (1 + dt * tauP)
    print(f"u2 update (u2=0, u1=1, dt=0.5):      {u2_new} = {float(u2_new)!r}")

    # Euler from u4=2 (above the ceiling m_hat=1): proliferation is zero at
    # u1=0, so F4 = -sigma*2 + lambdaM = -0.001 and the step lands at 1.999.
    dt = F(1)
    u4 = F(2)
    f4 = -sigma * u4 + lambdaM
    print(f"euler u4 from 2, dt=1:               {u4 + dt * f4} = {float(u4 + dt * f4)!r}")

    cands = [1 / (gamma0 + tau0), 1 / (r1 * beta3 + tauS),
             alpha2 / (alpha2 + m_hat * alpha1), tau2 / tau1]
    dt_max = min(cands)
    print("dt ceiling candidates:", [float(c) for c in cands])
    print(f"dt_max = {dt_max} = {float(dt_max)!r}; cfl=0.5 -> {float(dt_max) * 0.5!r}")

    # diagonal entry 1/(1 + dt*(gamma0+tau0)) of the update-map Jacobian at
    # the disease-free state, dt=2 (first of the acyclic-diagonal spectrum)
    dt = F(2)
    print(f"J[0,0] at disease-free state, dt=2:  {1 / (1 + dt * (gamma0 + tau0))} "
          f"= {float(1 / (1 + dt * (gamma0 + tau0)))!r}")
