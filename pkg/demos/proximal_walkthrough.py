"""Proximal point methods: the fixed recurrence against the planned one.

Run with ``python3 demos/proximal_walkthrough.py``.
"""
import numpy as np

from subgameopt.adversary import build_spppa_hard, verify_tightness
from subgameopt.maxaffine import random_instance
from subgameopt.methods import run_oppa, run_spppa

rng = np.random.default_rng(2)
inst = random_instance(rng, 5, 9, 1.0, 10.0)
N = 4
r0 = 0.5 * np.sum((inst.x0 - inst.x_star) ** 2)

oppa = run_oppa(inst.F.prox_oracle(), inst.x0, 1.0, N)
spppa = run_spppa(inst.F.prox_oracle(), inst.x0, 1.0, N)

# psi_n bounds the normalized gap (f(y_N) - f*) / r0 given the answers seen so far.
# psi_0 is the fixed recurrence's own bound 1 / tau_N; planning only lowers it.
print(f"oppa bound 1/tau_N = {1 / oppa.tau[-1]:.6f}")
print("n   psi_n")
for n, psi in enumerate(spppa.psi):
    print(f"{n}   {psi:.6f}")
print("status:", spppa.status)
print(f"\nnormalized final gap: oppa {(oppa.f[-1] - inst.f_star) / r0:.6f}, "
      f"planned {(spppa.f_output - inst.f_star) / r0:.6f}")

# Each plan carries a dual pair (xi, w) whose value equals tau'.
plan = spppa.plans[1]
dz = plan.z_prime - inst.x0
print(f"\nplan at n = 2: tau' = {plan.tau_prime:.6f}, xi/2 |z' - x0|^2 = "
      f"{0.5 * plan.xi * dz @ dz:.6f}")

hard = build_spppa_hard(spppa, 2, plan, 1.0, N, x0=inst.x0)
rep = verify_tightness(hard)
print(f"hard instance: guarantee {hard.guarantee:.6f}, tightness passed {rep.passed}")
