"""Cutting-plane method with a live guarantee, and the instance that attains it.

Run with ``python3 demos/klm_walkthrough.py``.
"""
import numpy as np

from subgameopt.adversary import build_klm_hard, verify_tightness, verify_zero_chain
from subgameopt.maxaffine import random_instance
from subgameopt.methods import run_klm, run_subgradient

rng = np.random.default_rng(7)
inst = random_instance(rng, 6, 8)
N = 5

# Before any query the guarantee is M R / sqrt(N + 1); each answer can only shrink it.
tr = run_klm(inst.F.oracle(), inst.x0, 1.0, 1.0, N)
print("n   theta_n     f(x_n) - f*")
for n in range(N + 1):
    print(f"{n}   {tr.theta[n]:.6f}    {inst.F(tr.x[n]) - inst.f_star:.6f}")

# Compare with a fixed-step subgradient method on the same function.
sg = run_subgradient(inst.F.oracle(), inst.x0, 1.0 / np.sqrt(N + 1), N)
best_sg = min(inst.F(x) for x in sg.x) - inst.f_star
print(f"\nsubgradient best gap {best_sg:.6f}, static bound {tr.theta[0]:.6f}")

# Freeze the first two answers. The hard instance agrees with them, and on it
# nothing that stays in the span of seen subgradients beats theta_2.
n = 2
hard = build_klm_hard(tr.history(n), tr.plans[n], inst.x0, 1.0, 1.0, N)
print(f"\nhard instance after {n} answers: {hard.F.n_pieces} pieces in R^{hard.dim}")
print(f"certified gap {hard.certified_gap:.6f} (theta_{n} = {tr.theta[n]:.6f})")
print("tightness passed:", verify_tightness(hard).passed)
print("zero-chain passed:", verify_zero_chain(hard).passed)

cont = run_klm(hard.F.oracle("anchor"), hard.x0, 1.0, 1.0, N, forced=list(hard.past["x"]))
print(f"method replayed on it ends at gap {hard.F(cont.x[-1]) - hard.f_star:.6f}")
