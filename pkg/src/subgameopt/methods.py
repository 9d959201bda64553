"""First-order methods: a plain subgradient method, the Kelley-like planning
method (KLM), the optimized proximal point recurrence (OPPA) and its
subgame-perfect planning counterpart (SPPPA).

Oracles
-------
A *subgradient oracle* is a callable ``x -> (f(x), g)`` with ``g`` a
subgradient at ``x``. A *proximal oracle* is a callable ``(x, L) -> (y, f(y))``
with ``y = argmin_z f(z) + (L/2)||z - x||^2``; the methods form the implied
subgradient ``g = L (x - y)`` themselves. :meth:`MaxAffine.oracle` and
:meth:`MaxAffine.prox_oracle` produce both kinds.

Guarantees are recorded at the start of iteration ``n``, after the plan is
solved and before the oracle is queried.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import DimensionError, as_vector
from .maxaffine import FirstOrderData
from .plansolve import (
    KLMPlan,
    PlanInputs,
    ProxPlan,
    canonical_plan,
    plan_inputs,
    solve_klm_plan,
    solve_spppa_plan,
    static_klm_plan,
)

__all__ = [
    "SubgradTrace",
    "ProxTrace",
    "as_schedule",
    "run_subgradient",
    "run_klm",
    "oppa_tau_sequence",
    "guarantee_psi",
    "run_oppa",
    "run_spppa",
    "h_values",
]


@dataclass
class SubgradTrace:
    """Iterates ``x_0..x_N`` (rows), values, subgradients and guarantees.

    ``g`` has one row per queried point, so ``g[N]`` is the response at the
    final iterate. ``theta`` and ``f_half`` are ``nan`` for methods that do
    not plan.
    """

    x: np.ndarray
    f: np.ndarray
    g: np.ndarray
    theta: np.ndarray
    f_half: np.ndarray
    method: str
    M: float | None = None
    R: float | None = None
    plans: list = field(default_factory=list, repr=False)

    @property
    def N(self) -> int:
        return self.x.shape[0] - 1

    @property
    def x0(self) -> np.ndarray:
        return self.x[0]

    def history(self, n: int) -> FirstOrderData:
        """First ``n`` records as :class:`FirstOrderData`."""
        return FirstOrderData(self.x[:n], self.f[:n], self.g[:n], M=self.M)


@dataclass
class ProxTrace:
    """Proximal-method log; row ``n`` of each array belongs to iteration ``n``.

    ``z[n]`` holds ``z_{n+1}``. ``m[n]`` is the history index of the
    incumbent used to form ``x_n`` (``-1`` at ``n = 0``). ``status`` is
    ``"completed"`` or ``"exact-minimizer"``; in the latter case the run
    stopped because the plan was unbounded and ``output`` is the incumbent
    ``y_m``, a minimizer.
    """

    x: np.ndarray
    y: np.ndarray
    f: np.ndarray
    g: np.ndarray
    tau: np.ndarray
    z: np.ndarray
    m: np.ndarray
    psi: np.ndarray
    L: np.ndarray
    N: int
    method: str
    status: str = "completed"
    plans: list = field(default_factory=list, repr=False)
    tau_prime: np.ndarray | None = None
    m_final: int = -1

    @property
    def x0(self) -> np.ndarray:
        return self.x[0]

    @property
    def n_iter(self) -> int:
        return self.x.shape[0]

    @property
    def output_index(self) -> int:
        if self.status == "exact-minimizer":
            return int(self.m_final)
        return self.n_iter - 1

    @property
    def output(self) -> np.ndarray:
        return self.y[self.output_index]

    @property
    def f_output(self) -> float:
        return float(self.f[self.output_index])

    def inputs(self, n: int, memory: int | None = None) -> PlanInputs:
        """Planning data after the first ``n`` iterations."""
        return plan_inputs(self.x0, list(self.y[:n]), self.f[:n], list(self.g[:n]),
                           self.tau[:n], list(self.z[:n]), memory)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def as_schedule(L, N: int) -> np.ndarray:
    """Prox parameters ``L_0..L_N`` from a scalar or a sequence (``None`` means 1)."""
    if L is None:
        L = 1.0
    arr = np.asarray(L, dtype=float).reshape(-1)
    if arr.size == 1:
        arr = np.full(N + 1, float(arr[0]))
    if arr.size < N + 1:
        raise ValueError(f"schedule has {arr.size} entries, need {N + 1}")
    arr = arr[: N + 1]
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError("prox parameters must be positive and finite")
    return arr


def _call_subgrad(oracle, x, d):
    f, g = oracle(x)
    return float(f), as_vector(g, d)


def _call_prox(oracle, x, L, d):
    y, f = oracle(x, L)
    y = as_vector(y, d)
    return y, float(f), L * (x - y)


# ---------------------------------------------------------------------------
# subgradient-oracle methods
# ---------------------------------------------------------------------------

def run_subgradient(oracle: Callable, x0, steps, N: int,
                    forced: Sequence | None = None) -> SubgradTrace:
    """Subgradient method ``x_{n+1} = x_n - h_n g_n``.

    ``steps`` is a scalar or a sequence of ``N`` positive step sizes.
    ``forced`` optionally pins the first queries (a prefix ``x_0, x_1, ...``),
    used to make the method continue from a given history.
    """
    x0 = as_vector(x0)
    d = x0.size
    h = np.asarray(steps, dtype=float).reshape(-1)
    if h.size == 1:
        h = np.full(max(N, 1), float(h[0]))
    if h.size < N or np.any(h[:N] <= 0):
        raise ValueError("need N positive step sizes")
    X = np.zeros((N + 1, d))
    F = np.zeros(N + 1)
    G = np.zeros((N + 1, d))
    forced = [] if forced is None else [as_vector(p, d) for p in forced]
    xn = x0
    for n in range(N + 1):
        if n < len(forced):
            xn = forced[n]
        X[n] = xn
        F[n], G[n] = _call_subgrad(oracle, xn, d)
        if n < N:
            xn = xn - h[n] * G[n]
    nan = np.full(N + 1, np.nan)
    return SubgradTrace(X, F, G, nan, nan.copy(), "subgradient")


def run_klm(oracle: Callable, x0, M: float, R: float, N: int,
            forced: Sequence | None = None, check: bool = True) -> SubgradTrace:
    """Kelley-like method: each query is the optimizer of the planning SOCP.

    ``theta[n]`` is the guarantee available after ``n`` oracle calls,
    starting from ``M R / sqrt(N + 1)``. The method output is ``x_N``.

    Raises
    ------
    InfeasibleHistoryError
        If the responses violate convexity or the Lipschitz bound ``M``.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    x0 = as_vector(x0)
    d = x0.size
    X = np.zeros((N + 1, d))
    F = np.zeros(N + 1)
    G = np.zeros((N + 1, d))
    theta = np.zeros(N + 1)
    f_half = np.full(N + 1, np.nan)
    forced = [] if forced is None else [as_vector(p, d) for p in forced]
    plans: list[KLMPlan] = [static_klm_plan(x0, M, R, N)]
    theta[0] = plans[0].theta
    X[0] = forced[0] if forced else x0
    F[0], G[0] = _call_subgrad(oracle, X[0], d)
    for n in range(1, N + 1):
        hist = FirstOrderData(X[:n], F[:n], G[:n])
        plan = solve_klm_plan(hist, x0, M, R, N, check=check)
        plans.append(plan)
        theta[n] = plan.theta
        f_half[n] = plan.f_half
        X[n] = forced[n] if n < len(forced) else plan.y
        F[n], G[n] = _call_subgrad(oracle, X[n], d)
    return SubgradTrace(X, F, G, theta, f_half, "klm", M, R, plans)


# ---------------------------------------------------------------------------
# proximal methods
# ---------------------------------------------------------------------------

def _tau_step(tau: float, L: float) -> float:
    return tau + (1.0 + np.sqrt(1.0 + 2.0 * L * tau)) / L


def oppa_tau_sequence(L, tau_start: float, start: int, stop: int) -> np.ndarray:
    """``tau_start`` placed at index ``start`` followed by the recurrence up to ``stop``.

    ``tau_i = tau_{i-1} + (1 + sqrt(1 + 2 L_i tau_{i-1})) / L_i``. Returns
    ``stop - start + 1`` values.
    """
    if tau_start < 0:
        raise ValueError("tau_start must be nonnegative")
    if stop < start:
        raise ValueError("stop must be >= start")
    Ls = as_schedule(L, stop)
    out = np.empty(stop - start + 1)
    out[0] = tau_start
    for k, i in enumerate(range(start + 1, stop + 1), start=1):
        out[k] = _tau_step(out[k - 1], Ls[i])
    return out


def guarantee_psi(tau_prime: float, L, n: int, N: int) -> float:
    """``1 / tau_{n,N}`` where ``tau_prime`` sits at index ``n``."""
    if not tau_prime > 0:
        raise ValueError("tau_prime must be positive")
    return float(1.0 / oppa_tau_sequence(L, tau_prime, n, N)[-1])


def run_oppa(oracle: Callable, x0, L, N: int) -> ProxTrace:
    """Optimized proximal point recurrence with prox parameters ``L_0..L_N``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    x0 = as_vector(x0)
    d = x0.size
    Ls = as_schedule(L, N)
    X, Y, G, Z = (np.zeros((N + 1, d)) for _ in range(4))
    F = np.zeros(N + 1)
    tau = np.zeros(N + 1)
    psi = np.zeros(N + 1)
    tau[0] = 2.0 / Ls[0]
    X[0] = x0
    Y[0], F[0], G[0] = _call_prox(oracle, x0, Ls[0], d)
    Z[0] = x0 - tau[0] * G[0]
    for n in range(1, N + 1):
        tau[n] = _tau_step(tau[n - 1], Ls[n])
        X[n] = (tau[n - 1] / tau[n]) * Y[n - 1] + ((tau[n] - tau[n - 1]) / tau[n]) * Z[n - 1]
        Y[n], F[n], G[n] = _call_prox(oracle, X[n], Ls[n], d)
        Z[n] = Z[n - 1] - (tau[n] - tau[n - 1]) * G[n]
    # the fixed recurrence carries the same guarantee at every iteration
    psi[:] = 1.0 / tau[N]
    m = np.arange(-1, N)
    return ProxTrace(X, Y, F, G, tau, Z, m, psi, Ls, N, "oppa", m_final=N)


PlannerFn = Callable[[int, PlanInputs], ProxPlan]


def _resolve_planner(planner) -> PlannerFn:
    if callable(planner):
        return planner
    if planner == "optimal":
        return lambda n, inputs: solve_spppa_plan(inputs)
    if planner == "canonical":
        return lambda n, inputs: canonical_plan(inputs)
    raise ValueError(f"unknown planner {planner!r}")


def run_spppa(oracle: Callable, x0, L, N: int, memory: int | None = None,
              planner="optimal") -> ProxTrace:
    """Subgame-perfect proximal point method.

    Each iteration solves the proximal planning program over the last
    ``memory`` records (all records when ``None``) and steps from the
    incumbent with the optimal ``tau'``. ``planner`` may be ``"optimal"``,
    ``"canonical"`` (reproduces :func:`run_oppa`) or a callable
    ``(n, inputs) -> ProxPlan``.

    When a plan is unbounded the incumbent is a minimizer: the run stops with
    ``status="exact-minimizer"`` and ``output`` is that incumbent.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if memory is not None and memory < 1:
        raise ValueError("memory must be at least 1")
    x0 = as_vector(x0)
    d = x0.size
    Ls = as_schedule(L, N)
    plan_fn = _resolve_planner(planner)
    X, Y, G, Z = (np.zeros((N + 1, d)) for _ in range(4))
    F = np.zeros(N + 1)
    tau = np.zeros(N + 1)
    tau_p = np.full(N + 1, np.nan)
    psi = np.zeros(N + 1)
    m = np.full(N + 1, -1)
    plans: list[ProxPlan] = []

    tau[0] = 2.0 / Ls[0]
    psi[0] = guarantee_psi(tau[0], Ls, 0, N)
    X[0] = x0
    Y[0], F[0], G[0] = _call_prox(oracle, x0, Ls[0], d)
    Z[0] = x0 - tau[0] * G[0]
    status = "completed"
    last = N
    m_final = N
    for n in range(1, N + 1):
        inputs = plan_inputs(x0, list(Y[:n]), F[:n], list(G[:n]), tau[:n], list(Z[:n]), memory)
        plan = plan_fn(n, inputs)
        plans.append(plan)
        if plan.status == "unbounded":
            status = "exact-minimizer"
            last = n - 1
            m_final = inputs.offset + plan.m
            break
        tp = plan.tau_prime
        mh = inputs.offset + plan.m
        m[n] = mh
        tau_p[n] = tp
        psi[n] = guarantee_psi(tp, Ls, n - 1, N)
        tau[n] = _tau_step(tp, Ls[n])
        X[n] = (tp / tau[n]) * Y[mh] + ((tau[n] - tp) / tau[n]) * plan.z_prime
        Y[n], F[n], G[n] = _call_prox(oracle, X[n], Ls[n], d)
        Z[n] = plan.z_prime - (tau[n] - tp) * G[n]
    k = last + 1
    return ProxTrace(X[:k], Y[:k], F[:k], G[:k], tau[:k], Z[:k], m[:k], psi[:k], Ls, N,
                     "spppa", status, plans, tau_p[:k], m_final=m_final)


def h_values(trace: ProxTrace, x_star, f_star: float) -> np.ndarray:
    """Potential ``H_n = tau_n (f_star - f_n) - |z_{n+1} - x_star|^2/2 + |x0 - x_star|^2/2``.

    Nonnegative along both proximal methods whenever ``(x_star, f_star)`` is
    a minimizer of the oracle's function.
    """
    x_star = as_vector(x_star)
    if x_star.size != trace.x.shape[1]:
        raise DimensionError("minimizer dimension does not match the trace")
    r0 = 0.5 * float(np.sum((trace.x0 - x_star) ** 2))
    rz = 0.5 * np.sum((trace.z - x_star) ** 2, axis=1)
    return trace.tau * (f_star - trace.f) - rz + r0
