import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import soft_threshold
from subgameopt.maxaffine import MaxAffine, random_instance
from subgameopt.methods import (
    as_schedule,
    guarantee_psi,
    h_values,
    oppa_tau_sequence,
    run_klm,
    run_oppa,
    run_spppa,
    run_subgradient,
)

TAU_1 = 5.23606797749979  # 3 + sqrt(5)
TAU_2 = 9.623122148161897  # TAU_1 + 1 + sqrt(1 + 2 TAU_1)


def zero_oracle(x):
    return 0.0, np.zeros_like(x)


class TestSubgradient:
    def test_one_step(self, abs_function):
        tr = run_subgradient(abs_function.oracle(), [1.0], 0.5, 1)
        np.testing.assert_allclose(tr.x[:, 0], [1.0, 0.5])

    def test_zero_function(self):
        tr = run_subgradient(zero_oracle, [0.3, -1.0], 0.7, 4)
        np.testing.assert_array_equal(tr.x, np.tile([0.3, -1.0], (5, 1)))

    def test_hand_recursion(self, abs_function):
        h = 1 / np.sqrt(np.arange(1, 4))
        tr = run_subgradient(abs_function.oracle(), [1.0], h, 3)
        x, ref = 1.0, [1.0]
        for k in range(3):
            x = x - h[k] * (1.0 if x >= 0 else -1.0)
            ref.append(x)
        np.testing.assert_allclose(tr.x[:, 0], ref, atol=1e-15)

    def test_forced_prefix(self, abs_function):
        tr = run_subgradient(abs_function.oracle(), [1.0], 0.5, 2, forced=[[3.0], [-2.0]])
        np.testing.assert_allclose(tr.x[:, 0], [3.0, -2.0, -1.5])

    def test_step_validation(self, abs_function):
        with pytest.raises(ValueError):
            run_subgradient(abs_function.oracle(), [1.0], [0.5, 0.5], 3)


class TestKLM:
    def test_static_guarantee(self, abs_function):
        tr = run_klm(abs_function.oracle(), [0.5], 1.0, 1.0, 3)
        assert tr.theta[0] == 0.5

    def test_zero_subgradient_at_start(self):
        tr = run_klm(zero_oracle, [0.2, 0.1], 1.0, 1.0, 3)
        np.testing.assert_allclose(tr.theta[1:], 0.0, atol=1e-9)
        np.testing.assert_allclose(tr.x, np.tile([0.2, 0.1], (4, 1)), atol=1e-8)

    def test_unit_first_response(self):
        F = MaxAffine([0.0], [[1.0, 0.0]], [[0.0, 0.0]])
        tr = run_klm(F.oracle(), np.zeros(2), 1.0, 1.0, 1)
        assert tr.theta[1] == pytest.approx(1 / np.sqrt(2), abs=1e-9)
        assert tr.theta[1] == pytest.approx(tr.theta[0], abs=1e-9)

    @given(st.integers(0, 10_000), st.integers(1, 6))
    def test_guarantee_chain(self, seed, N):
        r = np.random.default_rng(seed)
        inst = random_instance(r, int(r.integers(2, 8)), int(r.integers(2, 10)))
        tr = run_klm(inst.F.oracle(), inst.x0, 1.0, 1.0, N)
        assert np.all(np.diff(tr.theta) <= 1e-7)
        assert tr.theta[-1] >= -1e-9

    def test_last_iterate_can_exceed_guarantee(self):
        # f = max(x/2, -x), x0 = 0 = x_star, M = R = N = 1: the plan sends x_1 to -2/sqrt(5)
        F = MaxAffine([0.0, 0.0], [[0.5], [-1.0]], [[0.0], [0.0]])
        tr = run_klm(F.oracle(), [0.0], 1.0, 1.0, 1)
        assert tr.theta[1] == pytest.approx(1 / np.sqrt(5), abs=1e-9)
        np.testing.assert_allclose(tr.x[1], [-2 / np.sqrt(5)], atol=1e-8)
        assert F(tr.x[1]) == pytest.approx(2 / np.sqrt(5), abs=1e-8)
        assert F(tr.x[1]) > tr.theta[0] > tr.theta[1]

    def test_history(self, abs_function):
        tr = run_klm(abs_function.oracle(), [0.5], 1.0, 1.0, 2)
        h = tr.history(2)
        assert len(h) == 2
        np.testing.assert_array_equal(h.points, tr.x[:2])


class TestTau:
    def test_first_steps(self):
        seq = oppa_tau_sequence(1.0, 2.0, 0, 2)
        assert seq[1] == pytest.approx(TAU_1, abs=1e-12)
        assert seq[2] == pytest.approx(TAU_2, abs=1e-12)

    def test_start_index(self):
        # the schedule entry used for step i is L_i
        L = [1.0, 4.0, 0.5]
        seq = oppa_tau_sequence(L, 3.0, 1, 2)
        assert seq[1] == pytest.approx(3.0 + (1 + np.sqrt(1 + 2 * 0.5 * 3.0)) / 0.5)

    def test_psi_examples(self):
        assert guarantee_psi(2.0, 1.0, 0, 1) == pytest.approx(1 / TAU_1, abs=1e-15)
        assert guarantee_psi(7.5, 1.0, 3, 3) == 1 / 7.5

    @given(st.floats(0.01, 100), st.floats(0.01, 100), st.integers(0, 4), st.integers(0, 4))
    def test_psi_decreasing_in_tau(self, t1, t2, n, extra):
        lo, hi = sorted((t1, t2))
        N = n + extra
        assert guarantee_psi(hi, 1.3, n, N) <= guarantee_psi(lo, 1.3, n, N)

    def test_schedule(self):
        np.testing.assert_array_equal(as_schedule(2.0, 2), [2.0, 2.0, 2.0])
        np.testing.assert_array_equal(as_schedule(None, 1), [1.0, 1.0])
        with pytest.raises(ValueError):
            as_schedule([1.0, 2.0], 3)
        with pytest.raises(ValueError):
            as_schedule([1.0, -2.0], 1)


class TestOPPA:
    def test_affine_first_step(self):
        g = np.array([1.0, -0.5])
        F = MaxAffine([0.0], [g], [[0.0, 0.0]])
        x0 = np.array([0.3, 0.2])
        tr = run_oppa(F.prox_oracle(), x0, 2.0, 2)
        np.testing.assert_allclose(tr.y[0], x0 - g / 2.0, atol=1e-15)
        np.testing.assert_allclose(tr.z[0], x0 - (2 / 2.0) * g, atol=1e-15)

    def test_fixed_point_at_minimizer(self, abs_function):
        tr = run_oppa(abs_function.prox_oracle(), [0.0], 1.0, 3)
        np.testing.assert_allclose(tr.x, 0.0, atol=1e-15)
        np.testing.assert_allclose(tr.y, 0.0, atol=1e-15)

    def test_scalar_replay(self, abs_function):
        tr = run_oppa(abs_function.prox_oracle(), [5.0], 1.0, 3)
        tau = [2.0]
        y = [soft_threshold(5.0, 1.0)]
        g = [5.0 - y[0]]
        z = 5.0 - tau[0] * g[0]
        xs = [5.0]
        for _ in range(3):
            t = tau[-1] + 1 + np.sqrt(1 + 2 * tau[-1])
            x = (tau[-1] / t) * y[-1] + ((t - tau[-1]) / t) * z
            yy = soft_threshold(x, 1.0)
            gg = x - yy
            z = z - (t - tau[-1]) * gg
            tau.append(t)
            xs.append(x)
            y.append(yy)
        np.testing.assert_allclose(tr.x[:, 0], xs, atol=1e-12)
        np.testing.assert_allclose(tr.y[:, 0], y, atol=1e-12)
        np.testing.assert_allclose(tr.tau, tau, atol=1e-12)

    @given(st.integers(0, 10_000), st.integers(1, 6))
    def test_rate(self, seed, N):
        r = np.random.default_rng(seed)
        inst = random_instance(r, int(r.integers(2, 8)), int(r.integers(2, 10)), 1.0, 5.0)
        tr = run_oppa(inst.F.prox_oracle(), inst.x0, 1.0, N)
        r0 = 0.5 * np.sum((inst.x0 - inst.x_star) ** 2)
        assert tr.tau[-1] * (tr.f[-1] - inst.f_star) <= r0 + 1e-7 * max(1.0, r0)
        H = h_values(tr, inst.x_star, inst.f_star)
        scale = tr.tau * (np.abs(tr.f) + abs(inst.f_star)) + r0 + 1
        assert np.all(H >= -1e-9 * scale)


class TestSPPPA:
    def test_single_step_improves(self):
        r = np.random.default_rng(2)
        inst = random_instance(r, 4, 6, 1.0, 10.0)
        tr = run_spppa(inst.F.prox_oracle(), inst.x0, 1.0, 1)
        assert tr.tau_prime[1] >= 2.0
        assert tr.psi[1] <= tr.psi[0]

    def test_exact_minimizer(self, abs_function):
        tr = run_spppa(abs_function.prox_oracle(), [0.0], 1.0, 3)
        assert tr.status == "exact-minimizer"
        assert tr.n_iter == 1
        np.testing.assert_allclose(tr.output, [0.0], atol=1e-15)

    @given(st.integers(0, 10_000))
    def test_dominance(self, seed):
        r = np.random.default_rng(seed)
        inst = random_instance(r, 5, 8, 1.0, 10.0)
        tr = run_spppa(inst.F.prox_oracle(), inst.x0, 1.0, 4)
        assert np.all(np.diff(tr.psi) <= 1e-9 * tr.psi[0])
        r0 = 0.5 * np.sum((inst.x0 - inst.x_star) ** 2)
        bound = 0.0 if tr.status == "exact-minimizer" else tr.psi[-1]
        assert (tr.f_output - inst.f_star) / r0 <= bound + 1e-7

    def test_canonical_planner_is_oppa(self):
        r = np.random.default_rng(8)
        inst = random_instance(r, 5, 8, 1.0, 10.0)
        a = run_spppa(inst.F.prox_oracle(), inst.x0, [1.0, 2.0, 0.5, 1.0], 3, planner="canonical")
        b = run_oppa(inst.F.prox_oracle(), inst.x0, [1.0, 2.0, 0.5, 1.0], 3)
        for key in ("x", "y", "z", "tau", "f"):
            np.testing.assert_allclose(getattr(a, key), getattr(b, key), atol=1e-12)

    def test_memory_one_runs(self):
        r = np.random.default_rng(9)
        inst = random_instance(r, 5, 8, 1.0, 10.0)
        tr = run_spppa(inst.F.prox_oracle(), inst.x0, 1.0, 4, memory=1)
        assert np.all(np.diff(tr.psi) <= 1e-9 * tr.psi[0])

    def test_bad_planner(self, abs_function):
        with pytest.raises(ValueError):
            run_spppa(abs_function.prox_oracle(), [1.0], 1.0, 2, planner="greedy")
