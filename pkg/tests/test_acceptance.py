"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Lines are also collected in ``ACCEPTANCE_LINES`` and repeated in the
terminal summary by ``conftest.py``, so they appear without ``-s``.
"""
import time
import warnings

import numpy as np

from oracles import enum_prox, enum_simplex_qp
from subgameopt.adversary import (
    build_klm_hard,
    build_spppa_hard,
    hard_records,
    selfplay,
    verify_tightness,
    verify_zero_chain,
)
from subgameopt.maxaffine import interpolation_check, random_instance
from subgameopt.methods import oppa_tau_sequence, run_klm, run_oppa, run_spppa
from subgameopt.plansolve import dual_residuals, simplex_qp

ACCEPTANCE_LINES: list[str] = []


def report(number, passed, detail, elapsed):
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'} ({elapsed:.2f}s) {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def klm_instances(count=50):
    """Seeded random problems with dimension, horizon and piece count drawn per seed."""
    for seed in range(count):
        r = np.random.default_rng(seed)
        d, N, k = int(r.integers(2, 17)), int(r.integers(1, 9)), int(r.integers(2, 13))
        yield seed, N, random_instance(r, d, k)


def prox_instances(count=50, R=5.0):
    for seed in range(count):
        r = np.random.default_rng(1000 + seed)
        d, N, k = int(r.integers(2, 9)), int(r.integers(1, 7)), int(r.integers(2, 11))
        yield seed, N, random_instance(r, d, k, 1.0, R)


def klm_hard_instances():
    for seed in range(10):
        r = np.random.default_rng(500 + seed)
        N = 4
        inst = random_instance(r, 8, 8)
        tr = run_klm(inst.F.oracle(), inst.x0, 1.0, 1.0, N)
        for n in range(N + 1):
            yield build_klm_hard(tr.history(n), tr.plans[n], inst.x0, 1.0, 1.0, N)


def spppa_hard_instances():
    for seed in range(10):
        r = np.random.default_rng(700 + seed)
        N = 3
        inst = random_instance(r, 8, 8, 1.0, 10.0)
        tr = run_spppa(inst.F.prox_oracle(), inst.x0, 1.0, N)
        for n in range(N + 1):
            if n and (len(tr.plans) < n or tr.plans[n - 1].status != "optimal"):
                continue
            plan = tr.plans[n - 1] if n else None
            yield build_spppa_hard(tr, n, plan, 1.0, N, x0=inst.x0)


_hard_cache: dict = {}


def hard_instances():
    if not _hard_cache:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            _hard_cache["klm"] = list(klm_hard_instances())
            _hard_cache["spppa"] = list(spppa_hard_instances())
    return _hard_cache["klm"] + _hard_cache["spppa"]


def test_criterion_01_static_guarantee():
    t0 = time.perf_counter()
    from subgameopt.maxaffine import MaxAffine

    F = MaxAffine([0.0, 0.0], [[1.0], [-1.0]], [[0.0], [0.0]])
    tr = run_klm(F.oracle(), [0.5], 1.0, 1.0, 3)
    elapsed = time.perf_counter() - t0
    ok = tr.theta[0] == 0.5 and elapsed < 1.0
    assert report(1, ok, f"theta_0 = {float(tr.theta[0])!r}", elapsed)


def test_criterion_02_klm_chain():
    t0 = time.perf_counter()
    chain_bad, gap_bad, worst_excess = [], [], -np.inf
    for seed, N, inst in klm_instances():
        tr = run_klm(inst.F.oracle(), inst.x0, 1.0, 1.0, N)
        if np.any(np.diff(tr.theta) > 1e-7):
            chain_bad.append(seed)
        excess = inst.F(tr.x[-1]) - inst.f_star - tr.theta[-1]
        worst_excess = max(worst_excess, excess)
        if excess > 1e-7:
            gap_bad.append(seed)
    elapsed = time.perf_counter() - t0
    ok = not chain_bad and not gap_bad and elapsed < 30.0
    detail = (f"chain violations {chain_bad}, final-gap violations {gap_bad}, "
              f"worst gap - theta_N = {worst_excess:.3e}")
    assert report(2, ok, detail, elapsed)


def test_criterion_03_klm_subgame_perfection():
    t0 = time.perf_counter()
    bad = []
    for seed in range(3):
        for n in (0, 1, 2, 4):
            rep = selfplay("klm", n, 4, seed=seed)
            cont_ok = abs(rep.continued_gap - rep.guarantee) <= 1e-6
            opp_ok = rep.opponent_gap >= rep.guarantee - 1e-6
            if not (rep.passed and cont_ok and opp_ok):
                bad.append((seed, n))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 60.0
    assert report(3, ok, f"failing (seed, n): {bad}", elapsed)


def test_criterion_04_hard_instance_validity():
    t0 = time.perf_counter()
    bad, count = [], 0
    for inst in hard_instances():
        klm = inst.flavor == "klm"
        rep = interpolation_check(hard_records(inst), require_lipschitz=klm)
        scale = max(1.0, float(np.abs(inst.F.values).max()))
        ok = rep.min_Q >= -1e-7 * scale
        if rep.min_S is not None:
            ok &= rep.min_S >= -1e-7 * scale
        if klm:
            ok &= np.linalg.norm(inst.x0 - inst.minimizer) <= inst.R * (1 + 1e-8)
        if not ok:
            bad.append((inst.flavor, inst.n))
        count += 1
    elapsed = time.perf_counter() - t0
    assert report(4, not bad, f"{count} instances, failing {bad}", elapsed)


def test_criterion_05_zero_chain():
    t0 = time.perf_counter()
    worst, bad = 0.0, []
    for inst in hard_instances():
        rep = verify_zero_chain(inst, n_samples=50, tol=1e-8)
        worst = max(worst, rep.max_residual)
        if not rep.passed:
            bad.append((inst.flavor, inst.n))
    elapsed = time.perf_counter() - t0
    assert report(5, not bad, f"max projection residual {worst:.2e}, failing {bad}", elapsed)


def test_criterion_06_oppa_rate():
    t0 = time.perf_counter()
    tau = oppa_tau_sequence(1.0, 2.0, 0, 1)
    tau_ok = abs(tau[1] - (3 + np.sqrt(5))) <= 1e-12
    bad = []
    for seed, N, inst in prox_instances():
        tr = run_oppa(inst.F.prox_oracle(), inst.x0, 1.0, N)
        r0 = 0.5 * float(np.sum((inst.x0 - inst.x_star) ** 2))
        scale = max(1.0, r0)
        if tr.tau[-1] * (tr.f[-1] - inst.f_star) > r0 + 1e-7 * scale:
            bad.append(seed)
    elapsed = time.perf_counter() - t0
    ok = tau_ok and not bad
    assert report(6, ok, f"tau_1 = {float(tau[1])!r}, rate violations {bad}", elapsed)


_spppa_runs: list = []


def spppa_runs():
    if not _spppa_runs:
        for seed, N, inst in prox_instances():
            tr = run_spppa(inst.F.prox_oracle(), inst.x0, 1.0, N)
            _spppa_runs.append((seed, N, inst, tr))
    return _spppa_runs


def test_criterion_07_spppa_dominance():
    t0 = time.perf_counter()
    bad = []
    for seed, N, inst, tr in spppa_runs():
        mono = np.all(np.diff(tr.psi) <= 1e-9 * tr.psi[0])
        psi0 = 1.0 / oppa_tau_sequence(1.0, 2.0, 0, N)[-1]
        start = abs(tr.psi[0] - psi0) <= 1e-12 * psi0
        r0 = 0.5 * float(np.sum((inst.x0 - inst.x_star) ** 2))
        final = (tr.f_output - inst.f_star) / r0 <= tr.psi[-1] + 1e-7
        if not (mono and start and final):
            bad.append(seed)
    elapsed = time.perf_counter() - t0
    assert report(7, not bad, f"{len(spppa_runs())} runs, failing {bad}", elapsed)


def test_criterion_08_planner_duality():
    t0 = time.perf_counter()
    worst = {"gap": 0.0, "w": 0.0, "tau": 0.0, "residual": 0.0}
    solves = 0
    for _, _, _, tr in spppa_runs():
        for k, plan in enumerate(tr.plans, start=1):
            if plan.status != "optimal":
                continue
            inputs = tr.inputs(k)
            dz = plan.z_prime - inputs.x0
            dz2 = float(dz @ dz)
            # dual value from the KKT multiplier of the inner solve, not from xi itself
            dual = 0.5 * plan.xi_kkt * dz2
            worst["gap"] = max(worst["gap"], abs(plan.tau_prime - dual) / plan.tau_prime)
            scale = max(1.0, float(np.linalg.norm(plan.w)))
            worst["w"] = max(worst["w"], float(np.linalg.norm(plan.w - plan.xi * dz)) / scale)
            worst["tau"] = max(worst["tau"],
                               abs(plan.tau_prime - 0.5 * plan.xi * dz2) / plan.tau_prime)
            worst["residual"] = max(worst["residual"],
                                    *dual_residuals(plan, inputs, relative=True))
            solves += 1
    elapsed = time.perf_counter() - t0
    ok = (solves > 0 and worst["gap"] <= 1e-6 and worst["w"] <= 1e-8 and worst["tau"] <= 1e-7
          and worst["residual"] <= 1e-6)
    detail = f"{solves} solves, " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    assert report(8, ok, detail, elapsed)


def test_criterion_09_spppa_tightness():
    t0 = time.perf_counter()
    hard_instances()
    bad, worst = [], 0.0
    for inst in _hard_cache["spppa"]:
        rep = verify_tightness(inst, rtol=1e-7)
        worst = max(worst, max(rep.residuals.values()) / rep.scale)
        if not rep.passed:
            bad.append(inst.n)
    elapsed = time.perf_counter() - t0
    ok = bool(_hard_cache["spppa"]) and not bad
    detail = f"{len(_hard_cache['spppa'])} instances, worst relative residual {worst:.1e}"
    assert report(9, ok, detail, elapsed)


def test_criterion_10_spppa_subgame_perfection():
    t0 = time.perf_counter()
    bad = []
    for seed in range(3):
        for n in (0, 1, 2):
            rep = selfplay("spppa", n, 3, seed=seed, R=10.0, L=1.0)
            cont_ok = abs(rep.continued_gap - rep.guarantee) <= 1e-6 * rep.guarantee
            opp_ok = rep.opponent_gap >= rep.guarantee - 1e-6
            if not (rep.passed and cont_ok and opp_ok):
                bad.append((seed, n))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 60.0
    assert report(10, ok, f"failing (seed, n): {bad}", elapsed)


def test_criterion_11_oracles():
    t0 = time.perf_counter()
    r = np.random.default_rng(2024)
    prox_err = 0.0
    for _ in range(200):
        d, k = int(r.integers(1, 7)), int(r.integers(2, 11))
        inst = random_instance(r, d, k, 1.0, 2.0)
        x = inst.x0 + r.standard_normal(d)
        L = float(r.uniform(0.2, 5.0))
        ref, _ = enum_prox(inst.F, x, L)
        prox_err = max(prox_err, float(np.abs(inst.F.prox(x, L).y - ref).max()))
    qp_err = 0.0
    for _ in range(200):
        A = r.standard_normal((5, 5))
        c = 3.0 * r.standard_normal(5)
        ref, _ = enum_simplex_qp(A.T @ A, c)
        qp_err = max(qp_err, float(np.abs(simplex_qp(A.T @ A, c) - ref).max()))
    elapsed = time.perf_counter() - t0
    ok = prox_err <= 1e-8 and qp_err <= 1e-9
    assert report(11, ok, f"prox error {prox_err:.1e}, simplex_qp error {qp_err:.1e}", elapsed)


def test_criterion_12_oppa_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(20):
        r = np.random.default_rng(3000 + seed)
        inst = random_instance(r, int(r.integers(2, 9)), int(r.integers(2, 11)), 1.0, 5.0)
        N = int(r.integers(1, 7))
        a = run_spppa(inst.F.prox_oracle(), inst.x0, 1.0, N, planner="canonical")
        b = run_oppa(inst.F.prox_oracle(), inst.x0, 1.0, N)
        for key in ("x", "y", "z", "tau", "f"):
            u, v = np.asarray(getattr(a, key)), np.asarray(getattr(b, key))
            scale = max(1.0, float(np.abs(v).max()))
            worst = max(worst, float(np.abs(u - v).max()) / scale)
    elapsed = time.perf_counter() - t0
    assert report(12, worst <= 1e-10, f"worst scaled difference {worst:.1e}", elapsed)
